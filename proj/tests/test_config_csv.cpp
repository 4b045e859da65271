#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>

#include "dcl/simulation.hpp"
#include "test_helpers.hpp"

using namespace dcl;

TEST_CASE("parse_config: empty text yields the reference defaults") {
    const SimulationSpec spec = parse_config("");
    CHECK(spec.params.m == Catch::Approx(0.14));
    CHECK(spec.params.M == Catch::Approx(0.44));
    CHECK(spec.params.l == Catch::Approx(0.215));
    CHECK(spec.params.psi == Catch::Approx(M_PI / 9.0));
    CHECK(spec.h == Catch::Approx(0.05));
    CHECK(spec.steps == 1000);
    CHECK(spec.mode == SimulationMode::closed_loop_discrete);
}

TEST_CASE("parse_config: values, comments, and pi fractions") {
    const SimulationSpec spec = parse_config(
        "# experiment\n"
        "sigma = -0.1\n"
        "\n"
        "psi = pi/9  # incline\n"
        "mode = unforced\n"
        "steps = 500\n"
        "realtime_mode = true\n");
    CHECK(spec.gains.sigma == Catch::Approx(-0.1));
    CHECK(spec.params.psi == Catch::Approx(M_PI / 9.0));
    CHECK(spec.mode == SimulationMode::unforced);
    CHECK(spec.steps == 500);
    CHECK(spec.realtime_mode);
}

TEST_CASE("parse_config: errors name the offending line") {
    CHECK_THROWS_WITH(parse_config("sigma = abc\n"),
                      Catch::Matchers::ContainsSubstring("TypeError") &&
                          Catch::Matchers::ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("h = 0.05\nwobble = 3\n"),
                      Catch::Matchers::ContainsSubstring("UnknownKey") &&
                          Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_WITH(parse_config("h = 0.05\n\nnot a pair\n"),
                      Catch::Matchers::ContainsSubstring("MissingRequired") &&
                          Catch::Matchers::ContainsSubstring("line 3"));
    CHECK_THROWS_AS(parse_config("steps = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("h = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = bogus\n"), ConfigError);
}

TEST_CASE("parse_config / render round-trip") {
    SimulationSpec spec = parse_config(
        "sigma = -0.987654321\n"
        "rho = -0.0123456789\n"
        "c = -0.111\n"
        "D = 0.005\n"
        "phi0 = 0.1\n"
        "mode = mpc\n"
        "T_f = 12.5\n");
    const std::string text = render(spec);
    const SimulationSpec back = parse_config(text);
    CHECK(render(back) == text);
    CHECK(back.gains.sigma == spec.gains.sigma);
    CHECK(back.gains.rho == spec.gains.rho);
    CHECK(back.T_f == spec.T_f);
    CHECK(back.mode == SimulationMode::mpc);
}

TEST_CASE("trajectory CSV: header, full precision, determinism") {
    SimulationSpec spec = parse_config("mode = unforced\nsteps = 50\n");
    const SimulationOutput a = run_simulation(spec);
    const SimulationOutput b = run_simulation(spec);
    const std::string csv_a = trajectory_csv(a.trajectory);
    const std::string csv_b = trajectory_csv(b.trajectory);
    CHECK(csv_a == csv_b);  // byte-identical reruns
    CHECK(csv_a.rfind("k,t,phi,s,u,E,newton_iters\n", 0) == 0);

    // Full %.17g precision: a value that needs 17 digits survives a re-parse.
    const double v = 0.12345678901234567;
    std::vector<TrajectoryRecord> rows{{0, 0.0, v, 0.0, 0.0, 0.0, 0}};
    const std::string one = trajectory_csv(rows);
    const auto line = one.substr(one.find('\n') + 1);
    // phi is the third field.
    std::size_t p1 = line.find(',');
    std::size_t p2 = line.find(',', p1 + 1);
    std::size_t p3 = line.find(',', p2 + 1);
    const double parsed = std::stod(line.substr(p2 + 1, p3 - p2 - 1));
    CHECK(parsed == v);
}

TEST_CASE("schedule and residual CSV headers") {
    CHECK(schedule_csv({}) == "t_start,t_end,u_const\n");
    CHECK(residuals_csv({}) == "k,u_formula,u_oracle,w_formula,w_oracle,u_gap,w_gap\n");
}

TEST_CASE("unforced mode holds a genuine equilibrium") {
    // Flat track (psi = 0), hanging pendulum, at rest: constant trajectory.
    SimulationSpec spec = parse_config(
        "psi = 0\n"
        "mode = unforced\n"
        "steps = 200\n"
        "phi0 = 3.14159265358979312\n"
        "s0 = 0\n"
        "phidot0 = 0\n"
        "sdot0 = 0\n");
    const SimulationOutput out = run_simulation(spec);
    for (const auto& r : out.trajectory) {
        CHECK(r.phi == Catch::Approx(M_PI).margin(1e-9));
        CHECK(std::abs(r.s) <= 1e-9);
    }
}

TEST_CASE("run_simulation: closed-loop and controlled-side modes agree") {
    SimulationSpec spec = parse_config(
        "mode = closed_loop_discrete\n"
        "steps = 300\n"
        "phi0 = 0.1\n");
    const SimulationOutput fwd = run_simulation(spec);
    spec.mode = SimulationMode::controlled_lagrangian_side;
    const SimulationOutput ctl = run_simulation(spec);
    REQUIRE(fwd.trajectory.size() == ctl.trajectory.size());
    for (std::size_t k = 0; k < fwd.trajectory.size(); ++k) {
        CHECK(std::abs(fwd.trajectory[k].phi - ctl.trajectory[k].phi) <= 1e-7);
        CHECK(std::abs(fwd.trajectory[k].s - ctl.trajectory[k].s) <= 1e-7);
    }
}

TEST_CASE("run_simulation: mpc mode emits trajectory plus schedule") {
    SimulationSpec spec = parse_config(
        "mode = mpc\n"
        "T_f = 2\n"
        "phi0 = 0.05\n"
        "D = 0.005\n");
    const SimulationOutput out = run_simulation(spec);
    CHECK(out.schedule.size() == 40);
    CHECK(out.trajectory.size() == 41);
    CHECK(out.schedule[0].u_const == 0.0);
    CHECK(out.schedule[1].u_const == 0.0);
    for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
        CHECK(out.trajectory[k].t == Catch::Approx(k * spec.h).margin(1e-12));
    }
}

TEST_CASE("stability_report text matches the spectral analysis") {
    SimulationSpec spec = parse_config("sigma = -0.1\nrho = -0.05\nc = -0.1\nD = 0\n");
    CHECK(stability_report(spec).find("SpectrallyStable") != std::string::npos);
    CHECK(stability_classification(spec) == StabilityClass::SpectrallyStable);

    spec = parse_config("sigma = -0.1\nrho = -0.05\nc = -0.1\nD = 0.1\n");
    CHECK(stability_report(spec).find("AsymptoticallyStable") != std::string::npos);

    spec = parse_config("sigma = 0.1\nrho = -0.05\nc = -0.1\n");
    const std::string rep = stability_report(spec);
    CHECK(rep.find("Unstable") != std::string::npos);
    CHECK(rep.find("VIOLATED") != std::string::npos);
    CHECK(stability_classification(spec) == StabilityClass::Unstable);
}

TEST_CASE("run_match_check rows carry small gaps") {
    SimulationSpec spec = parse_config("steps = 100\nphi0 = 0.1\nD = 0\n");
    const auto rows = run_match_check(spec);
    REQUIRE(rows.size() == 99);
    for (const auto& r : rows) {
        CHECK(r.u_gap <= 1e-9);
        CHECK(r.w_gap <= 1e-9);
    }
}
