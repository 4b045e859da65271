#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dcl/config.hpp"
#include "dcl/matching.hpp"
#include "dcl/mpc.hpp"
#include "dcl/stability.hpp"

namespace dcl {

/// One CSV row of a trajectory.
struct TrajectoryRecord {
    long k = 0;
    double t = 0.0;
    double phi = 0.0;
    double s = 0.0;
    double u = 0.0;  ///< impulse (discrete modes) or force (mpc mode)
    double E = 0.0;  ///< quadratic-energy proxy
    int newton_iters = 0;
};

struct SimulationOutput {
    std::vector<TrajectoryRecord> trajectory;
    ControllerSchedule schedule;  // mpc mode only
};

namespace detail {
inline void append_csv_value(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}
}  // namespace detail

inline std::string trajectory_csv(const std::vector<TrajectoryRecord>& rows) {
    std::string out = "k,t,phi,s,u,E,newton_iters\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k);
        out += ',';
        detail::append_csv_value(out, r.t);
        out += ',';
        detail::append_csv_value(out, r.phi);
        out += ',';
        detail::append_csv_value(out, r.s);
        out += ',';
        detail::append_csv_value(out, r.u);
        out += ',';
        detail::append_csv_value(out, r.E);
        out += ',';
        out += std::to_string(r.newton_iters);
        out += '\n';
    }
    return out;
}

inline std::string schedule_csv(const ControllerSchedule& sched) {
    std::string out = "t_start,t_end,u_const\n";
    for (const auto& e : sched) {
        detail::append_csv_value(out, e.t_start);
        out += ',';
        detail::append_csv_value(out, e.t_end);
        out += ',';
        detail::append_csv_value(out, e.u_const);
        out += '\n';
    }
    return out;
}

/// Run the experiment described by the spec and return its trajectory (plus
/// the control schedule in mpc mode).
inline SimulationOutput run_simulation(const SimulationSpec& spec) {
    SimulationOutput out;
    const CartPendulumParams& p = spec.params;
    const Gains& g = spec.gains;
    const double h = spec.h;
    const QuadraticEnergyForm form = quadratic_energy_form(p, g, h);

    if (spec.mode == SimulationMode::mpc) {
        MpcConfig cfg;
        cfg.h = h;
        cfg.T_f = spec.T_f;
        cfg.plant_substeps = spec.plant_substeps;
        cfg.realtime_mode = spec.realtime_mode;
        PlantState st{spec.initial.q.phi, spec.initial.q.s, spec.initial.phidot, spec.initial.sdot, 0.0};
        const MpcResult res = run_digital_controller(p, g, cfg, st);
        for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
            const PlantState& x = res.trajectory[k];
            const double u = (k < res.schedule.size()) ? res.schedule[k].u_const : 0.0;
            out.trajectory.push_back({static_cast<long>(k), k * cfg.h, x.phi, x.s, u, 0.0, 0});
        }
        out.schedule = res.schedule;
        return out;
    }

    if (spec.mode == SimulationMode::linearized) {
        const Mat4 C = linearized_update(p, g, h, g.D);
        ConfigPoint z0 = spec.initial.q;
        ConfigPoint z1{z0.phi + h * spec.initial.phidot, z0.s + h * spec.initial.sdot};
        const auto traj = linearized_trajectory(C, z0, z1, static_cast<int>(spec.steps) - 1);
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double E = (k + 1 < traj.size()) ? quadratic_energy(form, traj[k], traj[k + 1]) : 0.0;
            out.trajectory.push_back({static_cast<long>(k), k * h, traj[k].phi, traj[k].s, 0.0, E, 0});
        }
        return out;
    }

    // Discrete variational modes: unforced / closed_loop_discrete /
    // controlled_lagrangian_side. q_1 always comes from the velocity boundary
    // condition of the original model so that the two sides of the matching
    // equivalence start from identical (q_0, q_1) and agree pointwise.
    const CartPendulumLagrangian base{p};
    NewtonSettings settings;
    ConfigPoint q0 = spec.initial.q;
    ConfigPoint q1 = initialize_from_velocity(base, spec.initial, h, zero_impulse, settings);

    std::vector<ConfigPoint> qs{q0, q1};
    std::vector<double> us{0.0, 0.0};
    std::vector<int> iters{0, 0};
    for (long k = 1; k < spec.steps; ++k) {
        StepResult r;
        double u_applied = 0.0;
        if (spec.mode == SimulationMode::unforced) {
            r = step(base, qs[k - 1], qs[k], h, zero_impulse, settings);
        } else if (spec.mode == SimulationMode::closed_loop_discrete) {
            r = forced_step(p, g, qs[k - 1], qs[k], h, settings);
            u_applied = control_impulse_u(p, g, qs[k - 1], qs[k], r.q_next, h);
        } else {
            r = controlled_step(p, g, qs[k - 1], qs[k], h, settings);
        }
        qs.push_back(r.q_next);
        us.push_back(u_applied);
        iters.push_back(r.newton_iterations);
    }
    for (std::size_t k = 0; k < qs.size(); ++k) {
        const double E = (k + 1 < qs.size()) ? quadratic_energy(form, qs[k], qs[k + 1]) : 0.0;
        out.trajectory.push_back(
            {static_cast<long>(k), k * h, qs[k].phi, qs[k].s, us[k], E, iters[k]});
    }
    return out;
}

/// Text report of the Theorem 2/3 analysis for the spec's gains.
inline std::string stability_report(const SimulationSpec& spec) {
    const CartPendulumParams& p = spec.params;
    const Gains& g = spec.gains;
    const GainConditionReport cond = check_gain_conditions(p, g);
    const QuadraticEnergyForm form = quadratic_energy_form(p, g, spec.h);
    const Mat4 C = linearized_update(p, g, spec.h, g.D);
    SpectralReport rep = spectrum(C, g.D);
    rep.condition_margins = cond;

    std::ostringstream os;
    os << "gain conditions:\n";
    os << "  sigma in (" << cond.sigma_lower_bound << ", 0): "
       << (cond.sigma_in_range ? "ok" : "VIOLATED") << " (margin " << cond.sigma_margin << ")\n";
    os << "  rho < 0: " << (cond.rho_negative ? "ok" : "VIOLATED") << " (margin " << cond.rho_margin
       << ")\n";
    os << "  Veps''(0) < 0: " << (cond.veps_concave ? "ok" : "VIOLATED") << " (margin "
       << cond.veps_margin << ")\n";
    os << "energy form: a_pp=" << form.a_pp << " a_ps=" << form.a_ps << " a_ss=" << form.a_ss
       << " b_phi=" << form.b_phi << " b_x=" << form.b_x << " x_slope=" << form.x_slope << "\n";
    os << "definiteness: ";
    switch (energy_definiteness(form)) {
        case Definiteness::NegativeDefinite: os << "NegativeDefinite"; break;
        case Definiteness::PositiveDefinite: os << "PositiveDefinite"; break;
        case Definiteness::Indefinite: os << "Indefinite"; break;
        default: os << "Degenerate"; break;
    }
    os << "\neigenvalues:";
    for (const auto& lam : rep.eigenvalues) {
        os << " (" << lam.real() << (lam.imag() >= 0 ? "+" : "") << lam.imag() << "i |" << std::abs(lam)
           << "|)";
    }
    os << "\nspectral radius: " << rep.spectral_radius << "\n";
    os << "classification: " << to_string(cond.all() ? rep.classification : StabilityClass::Unstable)
       << "\n";
    return os.str();
}

/// Classification used by the CLI exit-code logic.
inline StabilityClass stability_classification(const SimulationSpec& spec) {
    const GainConditionReport cond = check_gain_conditions(spec.params, spec.gains);
    const Mat4 C = linearized_update(spec.params, spec.gains, spec.h, spec.gains.D);
    const SpectralReport rep = spectrum(C, spec.gains.D);
    return cond.all() ? rep.classification : StabilityClass::Unstable;
}

/// Matching verification: controlled trajectory vs. u-formula and forced
/// trajectory vs. w-formula, row per step.
struct MatchCheckRow {
    long k = 0;
    double u_formula = 0.0;
    double u_oracle = 0.0;
    double w_formula = 0.0;
    double w_oracle = 0.0;
    double u_gap = 0.0;
    double w_gap = 0.0;
};

inline std::vector<MatchCheckRow> run_match_check(const SimulationSpec& spec) {
    const CartPendulumParams& p = spec.params;
    const Gains& g = spec.gains;
    const double h = spec.h;
    NewtonSettings settings;

    const ControlledLagrangian ctrl{p, g};
    ConfigPoint q0 = spec.initial.q;
    ConfigPoint q1 = initialize_from_velocity(ctrl, spec.initial, h, zero_impulse, settings);

    std::vector<ConfigPoint> ctraj{q0, q1};
    std::vector<ConfigPoint> ftraj{q0, q1};
    for (long k = 1; k < spec.steps; ++k) {
        ctraj.push_back(controlled_step(p, g, ctraj[k - 1], ctraj[k], h, settings).q_next);
        ftraj.push_back(forced_step(p, g, ftraj[k - 1], ftraj[k], h, settings).q_next);
    }
    const std::vector<double> u_oracle = matching_oracle_u(ctraj, p, h);
    const std::vector<double> w_oracle = matching_oracle_w(ftraj, p, g, h);

    std::vector<MatchCheckRow> rows;
    for (std::size_t i = 0; i < u_oracle.size(); ++i) {
        const std::size_t k = i + 1;
        MatchCheckRow row;
        row.k = static_cast<long>(k);
        row.u_formula = control_impulse_u(p, g, ctraj[k - 1], ctraj[k], ctraj[k + 1], h);
        row.u_oracle = u_oracle[i];
        row.w_formula = shape_correction_w(p, g, ftraj[k - 1], ftraj[k], ftraj[k + 1], h);
        row.w_oracle = w_oracle[i];
        row.u_gap = std::abs(row.u_formula - row.u_oracle);
        row.w_gap = std::abs(row.w_formula - row.w_oracle);
        rows.push_back(row);
    }
    return rows;
}

inline std::string residuals_csv(const std::vector<MatchCheckRow>& rows) {
    std::string out = "k,u_formula,u_oracle,w_formula,w_oracle,u_gap,w_gap\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k);
        out += ',';
        detail::append_csv_value(out, r.u_formula);
        out += ',';
        detail::append_csv_value(out, r.u_oracle);
        out += ',';
        detail::append_csv_value(out, r.w_formula);
        out += ',';
        detail::append_csv_value(out, r.w_oracle);
        out += ',';
        detail::append_csv_value(out, r.u_gap);
        out += ',';
        detail::append_csv_value(out, r.w_gap);
        out += '\n';
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
}

}  // namespace dcl
