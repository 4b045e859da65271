#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "dcl/cart_pendulum.hpp"
#include "dcl/controlled.hpp"
#include "dcl/discrete_mechanics.hpp"
#include "dcl/matching.hpp"
#include "dcl/types.hpp"

namespace dcl {

/// Piecewise-constant control schedule: one interval of length h per period.
struct ScheduleEntry {
    double t_start = 0.0;
    double t_end = 0.0;
    double u_const = 0.0;  ///< control force (N); the discrete impulse divided by h
};

using ControllerSchedule = std::vector<ScheduleEntry>;

struct MpcConfig {
    double h = 0.05;        ///< controller period (s)
    double T_f = 30.0;      ///< final time (s)
    int plant_substeps = 50;
    bool realtime_mode = false;
    NewtonSettings newton{1e-12, 50, 1e-7, 1e-9};
};

struct MpcPeriodLog {
    int k = 0;
    double compute_seconds = 0.0;
    int newton_iterations = 0;
    bool budget_exceeded = false;
};

struct MpcResult {
    std::vector<PlantState> trajectory;  ///< plant samples at every multiple of h
    ControllerSchedule schedule;
    std::vector<MpcPeriodLog> log;
};

/// Classical RK4 over `substeps` equal substeps with constant force u_const.
inline PlantState plant_advance(const CartPendulumParams& p, PlantState state, double u_const,
                                double duration, int substeps) {
    if (duration <= 0.0) throw PreconditionError("plant_advance: duration must be > 0");
    if (substeps < 1) throw PreconditionError("plant_advance: substeps must be >= 1");
    const double dt = duration / substeps;
    auto rhs = [&](const PlantState& st) {
        const auto acc = continuous_accelerations(p, st, u_const);
        return std::array<double, 4>{st.phidot, st.sdot, acc[0], acc[1]};
    };
    auto add = [](const PlantState& st, const std::array<double, 4>& d, double c) {
        PlantState r = st;
        r.phi += c * d[0];
        r.s += c * d[1];
        r.phidot += c * d[2];
        r.sdot += c * d[3];
        return r;
    };
    for (int i = 0; i < substeps; ++i) {
        const auto k1 = rhs(state);
        const auto k2 = rhs(add(state, k1, dt / 2.0));
        const auto k3 = rhs(add(state, k2, dt / 2.0));
        const auto k4 = rhs(add(state, k3, dt));
        state.phi += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        state.s += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        state.phidot += dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]);
        state.sdot += dt / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]);
    }
    state.t += duration;
    return state;
}

/// Predict q_bar_k from the two most recent sensed configurations using the
/// forced DEL model; the discrete force one-forms for the already-actuated
/// intervals are F_1 = F_2 = (h/2) f with plant force f = -u_const.
template <LagrangianModel M>
StepResult predict_step(const M& model, ConfigPoint q_a, ConfigPoint q_b, double h, double u_prev,
                        double u_cur, const NewtonSettings& settings) {
    auto impulse = [&](ConfigPoint, ConfigPoint, ConfigPoint) {
        return Covector{0.0, -0.5 * h * (u_prev + u_cur)};
    };
    return step(model, q_a, q_b, h, impulse, settings);
}

/// Control force from the predicted triple: the Theorem-1 discrete impulse
/// (with dissipation) divided by h.
inline double control_force_from_prediction(const CartPendulumParams& p, const Gains& g,
                                            ConfigPoint q_km1, ConfigPoint q_bar_k,
                                            ConfigPoint q_bar_k1, double h) {
    return control_impulse_u(p, g, q_km1, q_bar_k, q_bar_k1, h) / h;
}

/// Algorithm "Digital Controller": sense positions at period h, predict two
/// configurations with the forced DEL model, compute a piecewise-constant
/// force from the prediction, actuate for one period. The control force for
/// the interval [kh, (k+1)h] depends only on configurations sensed at times
/// <= (k-1)h. The system is unforced on [0, 2h).
///
/// The second prediction solve carries the control impulse being computed; it
/// is resolved implicitly inside the Newton iteration (the control law depends
/// on q_{k+1}), which matches the closed-loop controlled model.
inline MpcResult run_digital_controller(const CartPendulumParams& p, const Gains& g,
                                        const MpcConfig& cfg, PlantState initial) {
    if (cfg.h <= 0.0) throw PreconditionError("run_digital_controller: h must be > 0");
    const int N = static_cast<int>(std::llround(cfg.T_f / cfg.h));
    if (std::abs(N * cfg.h - cfg.T_f) > 1e-9 * std::max(1.0, cfg.T_f)) {
        throw PreconditionError("run_digital_controller: T_f must be a multiple of h");
    }
    const CartPendulumLagrangian model{p};
    MpcResult out;
    out.trajectory.reserve(N + 1);
    out.trajectory.push_back(initial);
    out.schedule.resize(N);
    for (int k = 0; k < N; ++k) {
        out.schedule[k] = {k * cfg.h, (k + 1) * cfg.h, 0.0};
    }
    std::vector<ConfigPoint> sensed;
    sensed.push_back({initial.phi, initial.s});

    PlantState st = initial;
    for (int k = 0; k < N; ++k) {
        // Actuate the scheduled constant force over [kh, (k+1)h]; the plant
        // force is the negative of the stored control value (the impulse -u_k
        // enters the group equation, so the physical force is -u_k/h).
        st = plant_advance(p, st, -out.schedule[k].u_const, cfg.h, cfg.plant_substeps);
        out.trajectory.push_back(st);
        sensed.push_back({st.phi, st.s});

        const int kk = k + 1;  // next interval to schedule
        if (kk < 2 || kk >= N) continue;
        const auto t0 = std::chrono::steady_clock::now();

        const double u_a = out.schedule[kk - 2].u_const;
        const double u_b = out.schedule[kk - 1].u_const;
        // First forward solve: q_bar_k from the sensed pair (unforced at kk=2).
        const StepResult pred1 =
            predict_step(model, sensed[kk - 2], sensed[kk - 1], cfg.h, u_a, u_b, cfg.newton);
        // Second forward solve: q_bar_{k+1} with the control impulse resolved
        // implicitly.
        auto impulse2 = [&](ConfigPoint qp, ConfigPoint qc, ConfigPoint qn) {
            return Covector{0.0, -control_impulse_u(p, g, qp, qc, qn, cfg.h)};
        };
        const StepResult pred2 =
            step(model, sensed[kk - 1], pred1.q_next, cfg.h, impulse2, cfg.newton);

        out.schedule[kk].u_const = control_force_from_prediction(p, g, sensed[kk - 1], pred1.q_next,
                                                                 pred2.q_next, cfg.h);
        const auto t1 = std::chrono::steady_clock::now();
        MpcPeriodLog log;
        log.k = kk;
        log.compute_seconds = std::chrono::duration<double>(t1 - t0).count();
        log.newton_iterations = pred1.newton_iterations + pred2.newton_iterations;
        log.budget_exceeded = cfg.realtime_mode && log.compute_seconds > cfg.h;
        out.log.push_back(log);
    }
    return out;
}

}  // namespace dcl
