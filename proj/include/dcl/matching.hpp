#pragma once

#include <cmath>
#include <vector>

#include "dcl/cart_pendulum.hpp"
#include "dcl/controlled.hpp"
#include "dcl/discrete_mechanics.hpp"
#include "dcl/types.hpp"

namespace dcl {

/// Which argument V_eps' receives inside the u_k control law.
enum class MatchingVariant { y_midpoint, s_midpoint };

/// Default variant, selected empirically by the matching oracle (the
/// y_midpoint reading reproduces the oracle to ~1e-11; the s_midpoint reading
/// does not). A unit test re-runs the oracle comparison to pin this choice.
inline constexpr MatchingVariant kDefaultMatchingVariant = MatchingVariant::y_midpoint;

/// Dissipation-emulating impulse entering the group equation of the
/// controlled system: -D (Delta y_{k-1} + Delta y_k)/h = -D (y_{k+1} - y_{k-1})/h.
inline double dissipation_rhs(const CartPendulumParams& p, const Gains& g, ConfigPoint q_prev,
                              ConfigPoint q_next, double h) {
    return -g.D * (y_of(p, g, q_next.phi, q_next.s) - y_of(p, g, q_prev.phi, q_prev.s)) / h;
}

/// Matching control impulse u_k of the forced original system:
///   u_k = -(h/2)[V2'(s_{k+1/2}) + V2'(s_{k-1/2})]
///         + (h/2rho)[V_eps'(a_{k+1/2}) + V_eps'(a_{k-1/2})]
///         + (gamma/h)[Delta phi_k k(phi_{k+1/2}) - Delta phi_{k-1} k(phi_{k-1/2})]
/// with a = y or s at the interval midpoints per MatchingVariant, plus the
/// dissipation term divided by rho (the dissipation right-hand side lives in
/// the controlled group equation, whose residual is 1/rho times the original
/// group-equation residual minus u_k).
inline double control_impulse_u(const CartPendulumParams& p, const Gains& g, ConfigPoint q_prev,
                                ConfigPoint q_cur, ConfigPoint q_next, double h,
                                MatchingVariant variant = kDefaultMatchingVariant) {
    if (h <= 0.0) throw PreconditionError("control_impulse_u: h must be > 0");
    const ConfigPoint mp = 0.5 * (q_cur + q_next);
    const ConfigPoint mm = 0.5 * (q_prev + q_cur);
    const double dphi_k = q_next.phi - q_cur.phi;
    const double dphi_km = q_cur.phi - q_prev.phi;
    double ap, am;
    if (variant == MatchingVariant::y_midpoint) {
        ap = y_of(p, g, mp.phi, mp.s);
        am = y_of(p, g, mm.phi, mm.s);
    } else {
        ap = mp.s;
        am = mm.s;
    }
    double u = -0.5 * h * (p.dV2(mp.s) + p.dV2(mm.s)) +
               0.5 * h / g.rho * (g.veps.derivative(ap) + g.veps.derivative(am)) +
               p.gamma() * (dphi_k * k_of_phi(p, g, mp.phi) - dphi_km * k_of_phi(p, g, mm.phi)) / h;
    if (g.D != 0.0) {
        u += dissipation_rhs(p, g, q_prev, q_next, h) / g.rho;
    }
    return u;
}

/// Shape-equation correction w_k of the controlled system:
///   w_k = mu [ k_- J_{k-1} - k_+ J_k
///              + 1/2 (k'_+ J_k Delta phi_k + k'_- J_{k-1} Delta phi_{k-1})
///              - (h/2)(k_+ V_eps'(y_{k+1/2}) + k_- V_eps'(y_{k-1/2})) ]
/// with mu = 1 - sigma + sigma/rho and +/- denoting interval midpoints.
inline double shape_correction_w(const CartPendulumParams& p, const Gains& g, ConfigPoint q_prev,
                                 ConfigPoint q_cur, ConfigPoint q_next, double h) {
    if (h <= 0.0) throw PreconditionError("shape_correction_w: h must be > 0");
    const double mu = 1.0 - g.sigma + g.sigma / g.rho;
    const ConfigPoint mp = 0.5 * (q_cur + q_next);
    const ConfigPoint mm = 0.5 * (q_prev + q_cur);
    const double kp = k_of_phi(p, g, mp.phi);
    const double km = k_of_phi(p, g, mm.phi);
    const double dkp = kprime_of_phi(p, g, mp.phi);
    const double dkm = kprime_of_phi(p, g, mm.phi);
    const double Jk = J_k(p, g, q_cur, q_next, h);
    const double Jkm = J_k(p, g, q_prev, q_cur, h);
    const double yp = y_of(p, g, mp.phi, mp.s);
    const double ym = y_of(p, g, mm.phi, mm.s);
    const double dphi_k = q_next.phi - q_cur.phi;
    const double dphi_km = q_cur.phi - q_prev.phi;
    return mu * (km * Jkm - kp * Jk + 0.5 * (dkp * Jk * dphi_k + dkm * Jkm * dphi_km) -
                 0.5 * h * (kp * g.veps.derivative(yp) + km * g.veps.derivative(ym)));
}

/// One step of the forced original system: original DEL with the impulse
/// (0, -u_k) where u_k (including dissipation) is resolved implicitly.
inline StepResult forced_step(const CartPendulumParams& p, const Gains& g, ConfigPoint q_prev,
                              ConfigPoint q_cur, double h, const NewtonSettings& settings = {},
                              MatchingVariant variant = kDefaultMatchingVariant) {
    const CartPendulumLagrangian model{p};
    auto impulse = [&](ConfigPoint qp, ConfigPoint qc, ConfigPoint qn) {
        return Covector{0.0, -control_impulse_u(p, g, qp, qc, qn, h, variant)};
    };
    return step(model, q_prev, q_cur, h, impulse, settings);
}

/// One step of the controlled system: controlled DEL with w_k in the shape
/// equation and the dissipation right-hand side in the group equation.
inline StepResult controlled_step(const CartPendulumParams& p, const Gains& g, ConfigPoint q_prev,
                                  ConfigPoint q_cur, double h, const NewtonSettings& settings = {}) {
    const ControlledLagrangian model{p, g};
    auto impulse = [&](ConfigPoint qp, ConfigPoint qc, ConfigPoint qn) {
        const double w = shape_correction_w(p, g, qp, qc, qn, h);
        const double rhs = (g.D != 0.0) ? dissipation_rhs(p, g, qp, qn, h) : 0.0;
        return Covector{-w, -rhs};
    };
    return step(model, q_prev, q_cur, h, impulse, settings);
}

/// Oracle for u_k: the residual of the original (uncontrolled) group equation
/// evaluated along a trajectory of the controlled system.
inline std::vector<double> matching_oracle_u(const std::vector<ConfigPoint>& controlled_traj,
                                             const CartPendulumParams& p, double h) {
    const CartPendulumLagrangian model{p};
    std::vector<double> u;
    for (std::size_t k = 1; k + 1 < controlled_traj.size(); ++k) {
        const Covector r = del_residual(model, controlled_traj[k - 1], controlled_traj[k],
                                        controlled_traj[k + 1], h);
        u.push_back(r.s);
    }
    return u;
}

/// Oracle for w_k: the residual of the controlled shape equation evaluated
/// along a trajectory of the forced original system.
inline std::vector<double> matching_oracle_w(const std::vector<ConfigPoint>& forced_traj,
                                             const CartPendulumParams& p, const Gains& g, double h) {
    const ControlledLagrangian model{p, g};
    std::vector<double> w;
    for (std::size_t k = 1; k + 1 < forced_traj.size(); ++k) {
        const Covector r =
            del_residual(model, forced_traj[k - 1], forced_traj[k], forced_traj[k + 1], h);
        w.push_back(r.phi);
    }
    return w;
}

}  // namespace dcl
