#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>

#include "dcl/types.hpp"

namespace dcl {

/// Midpoint discrete Lagrangian L^d(q_a, q_b) = h * L((q_a+q_b)/2, (q_b-q_a)/h).
template <LagrangianModel M>
double discrete_lagrangian(const M& model, ConfigPoint q_a, ConfigPoint q_b, double h) {
    if (h <= 0.0) throw PreconditionError("discrete_lagrangian: h must be > 0");
    const ConfigPoint mid = 0.5 * (q_a + q_b);
    const ConfigPoint vel = (q_b - q_a) / h;
    const double v = h * model.value(mid.phi, mid.s, vel.phi, vel.s);
    if (!std::isfinite(v)) throw ModelEvaluationError("discrete_lagrangian: nonfinite value");
    return v;
}

/// Slot derivative D_1 L^d: component i = (h/2) dL/dq_i - dL/dqdot_i at the midpoint.
template <LagrangianModel M>
Covector d1_Ld(const M& model, ConfigPoint q_a, ConfigPoint q_b, double h) {
    if (h <= 0.0) throw PreconditionError("d1_Ld: h must be > 0");
    const ConfigPoint mid = 0.5 * (q_a + q_b);
    const ConfigPoint vel = (q_b - q_a) / h;
    const LagrangianPartials p = model.partials(mid.phi, mid.s, vel.phi, vel.s);
    Covector r{0.5 * h * p.dphi - p.dphidot, 0.5 * h * p.ds - p.dsdot};
    if (!r.finite()) throw ModelEvaluationError("d1_Ld: nonfinite partials");
    return r;
}

/// Slot derivative D_2 L^d: component i = (h/2) dL/dq_i + dL/dqdot_i at the midpoint.
template <LagrangianModel M>
Covector d2_Ld(const M& model, ConfigPoint q_a, ConfigPoint q_b, double h) {
    if (h <= 0.0) throw PreconditionError("d2_Ld: h must be > 0");
    const ConfigPoint mid = 0.5 * (q_a + q_b);
    const ConfigPoint vel = (q_b - q_a) / h;
    const LagrangianPartials p = model.partials(mid.phi, mid.s, vel.phi, vel.s);
    Covector r{0.5 * h * p.dphi + p.dphidot, 0.5 * h * p.ds + p.dsdot};
    if (!r.finite()) throw ModelEvaluationError("d2_Ld: nonfinite partials");
    return r;
}

/// Residual of the forced discrete Euler-Lagrange equations:
///   D_1 L^d(q_cur, q_next) + D_2 L^d(q_prev, q_cur) + impulse.
template <LagrangianModel M>
Covector del_residual(const M& model, ConfigPoint q_prev, ConfigPoint q_cur, ConfigPoint q_next,
                      double h, Covector impulse = {}) {
    const Covector a = d1_Ld(model, q_cur, q_next, h);
    const Covector b = d2_Ld(model, q_prev, q_cur, h);
    return {a.phi + b.phi + impulse.phi, a.s + b.s + impulse.s};
}

namespace detail {

inline double max_abs(Covector r) { return std::max(std::abs(r.phi), std::abs(r.s)); }

/// Newton iteration on a 2-vector residual with a forward finite-difference
/// Jacobian (per-coordinate scaled step). Returns the solution and the number
/// of iterations used.
template <class ResFn>
std::pair<ConfigPoint, int> newton2(const ResFn& residual, ConfigPoint x0,
                                    const NewtonSettings& settings) {
    ConfigPoint x = x0;
    Covector r = residual(x);
    double rn = max_abs(r);
    for (int it = 0; it < settings.max_iterations; ++it) {
        if (rn < settings.residual_tolerance) return {x, it};
        std::array<double, 4> J{};  // row-major [dphi/dx0 dphi/dx1; ds/dx0 ds/dx1]
        {
            const double e0 = settings.jacobian_fd_step * std::max(1.0, std::abs(x.phi));
            const Covector rp = residual({x.phi + e0, x.s});
            J[0] = (rp.phi - r.phi) / e0;
            J[2] = (rp.s - r.s) / e0;
            const double e1 = settings.jacobian_fd_step * std::max(1.0, std::abs(x.s));
            const Covector rs = residual({x.phi, x.s + e1});
            J[1] = (rs.phi - r.phi) / e1;
            J[3] = (rs.s - r.s) / e1;
        }
        const double det = J[0] * J[3] - J[1] * J[2];
        const double scale = std::max({std::abs(J[0]), std::abs(J[1]), std::abs(J[2]), std::abs(J[3])});
        if (!(std::abs(det) > 1e-14 * scale * scale)) {
            throw SingularJacobian("newton2: singular finite-difference Jacobian, |det| = " +
                                   std::to_string(det));
        }
        const Covector step{(J[3] * r.phi - J[1] * r.s) / det, (J[0] * r.s - J[2] * r.phi) / det};
        // Backtracking line search: halve the step while the residual grows.
        double t = 1.0;
        ConfigPoint xn{x.phi - step.phi, x.s - step.s};
        Covector rnew = residual(xn);
        double rnn = max_abs(rnew);
        for (int bt = 0; bt < 8 && rnn >= rn; ++bt) {
            t *= 0.5;
            xn = {x.phi - t * step.phi, x.s - t * step.s};
            rnew = residual(xn);
            rnn = max_abs(rnew);
        }
        const double step_scale = t * std::max(std::abs(step.phi), std::abs(step.s));
        const double x_scale = std::max({1.0, std::abs(x.phi), std::abs(x.s)});
        // Stagnation: step below machine resolution or no residual progress.
        if ((step_scale < 1e-15 * x_scale || rnn >= rn) && rn < settings.stagnation_tolerance) {
            return {x, it};
        }
        if (rnn >= rn) {
            break;  // no progress possible from here
        }
        x = xn;
        r = rnew;
        rn = rnn;
    }
    if (rn < settings.residual_tolerance || rn < settings.stagnation_tolerance) {
        return {x, settings.max_iterations};
    }
    throw NonConvergence(rn, settings.max_iterations);
}

}  // namespace detail

/// Control impulse as a function of the step triple; the q_next argument is the
/// current Newton iterate, so implicit control laws (u_k depends on q_{k+1})
/// are resolved inside the solve.
using ImpulseProvider = std::function<Covector(ConfigPoint q_prev, ConfigPoint q_cur, ConfigPoint q_next)>;

inline Covector zero_impulse(ConfigPoint, ConfigPoint, ConfigPoint) { return {}; }

/// Result of one implicit step.
struct StepResult {
    ConfigPoint q_next;
    int newton_iterations = 0;
};

/// Implicit update map (q_prev, q_cur) -> q_next solving the forced DEL
/// equations; initial guess 2 q_cur - q_prev.
template <LagrangianModel M>
StepResult step(const M& model, ConfigPoint q_prev, ConfigPoint q_cur, double h,
                const ImpulseProvider& impulse_provider, const NewtonSettings& settings = {}) {
    if (h <= 0.0) throw PreconditionError("step: h must be > 0");
    if (!q_prev.finite() || !q_cur.finite()) throw PreconditionError("step: nonfinite input");
    auto residual = [&](ConfigPoint q_next) {
        const Covector imp = impulse_provider(q_prev, q_cur, q_next);
        return del_residual(model, q_prev, q_cur, q_next, h, imp);
    };
    auto [q, iters] = detail::newton2(residual, 2.0 * q_cur - q_prev, settings);
    return {q, iters};
}

/// Solve the velocity boundary condition
///   dL/dqdot(q_0, qdot_0) + D_1 L^d(q_0, q_1) + F_1(q_0, q_1) = 0
/// for q_1; initial guess q_0 + h qdot_0.
template <LagrangianModel M>
ConfigPoint initialize_from_velocity(const M& model, const VelocityState& v0, double h,
                                     const ImpulseProvider& impulse_provider = zero_impulse,
                                     const NewtonSettings& settings = {}) {
    if (h <= 0.0) throw PreconditionError("initialize_from_velocity: h must be > 0");
    const LagrangianPartials p0 = model.partials(v0.q.phi, v0.q.s, v0.phidot, v0.sdot);
    const Covector momentum{p0.dphidot, p0.dsdot};
    auto residual = [&](ConfigPoint q1) {
        const Covector d1 = d1_Ld(model, v0.q, q1, h);
        const Covector imp = impulse_provider(v0.q, v0.q, q1);
        return Covector{momentum.phi + d1.phi + imp.phi, momentum.s + d1.s + imp.s};
    };
    const ConfigPoint guess{v0.q.phi + h * v0.phidot, v0.q.s + h * v0.sdot};
    return detail::newton2(residual, guess, settings).first;
}

/// Discrete Noether quantity for the translational symmetry: s-component of D_2 L^d.
template <LagrangianModel M>
double discrete_momentum(const M& model, ConfigPoint q_a, ConfigPoint q_b, double h) {
    return d2_Ld(model, q_a, q_b, h).s;
}

}  // namespace dcl
