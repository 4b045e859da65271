#pragma once

#include <array>
#include <cmath>

#include "dcl/types.hpp"

namespace dcl {

/// Physical parameters of the cart-pendulum on an incline. Defaults are the
/// reference experiment values.
struct CartPendulumParams {
    double m = 0.14;              ///< pendulum mass (kg)
    double M = 0.44;              ///< cart mass (kg)
    double l = 0.215;             ///< pendulum length (m)
    double psi = M_PI / 9.0;      ///< incline angle (rad)
    double g = 9.81;              ///< gravity (m/s^2)

    double alpha() const { return m * l * l; }
    double gamma() const { return M + m; }

    double beta(double phi) const { return m * l * std::cos(phi - psi); }
    double dbeta(double phi) const { return -m * l * std::sin(phi - psi); }

    /// Pendulum potential, maximal at the upright equilibrium phi = 0
    /// (V1''(0) = -mgl < 0), so phi = 0 is the unstable inverted position.
    double V1(double phi) const { return m * g * l * std::cos(phi); }
    double dV1(double phi) const { return -m * g * l * std::sin(phi); }
    double ddV1(double phi) const { return -m * g * l * std::cos(phi); }

    /// Cart potential along the incline (symmetry-breaking, linear in s).
    double V2(double s) const { return -gamma() * g * s * std::sin(psi); }
    double dV2(double) const { return -gamma() * g * std::sin(psi); }

    bool valid() const {
        if (!(m > 0.0 && M > 0.0 && l > 0.0 && g > 0.0)) return false;
        // alpha*gamma - beta^2 > 0 at the beta maximum (phi = psi).
        return alpha() * gamma() - m * l * m * l > 0.0;
    }
};

/// Continuous Lagrangian
///   L = 1/2 (alpha phidot^2 + 2 beta(phi) phidot sdot + gamma sdot^2) - V1(phi) - V2(s).
struct CartPendulumLagrangian {
    CartPendulumParams p;

    double value(double phi, double s, double phidot, double sdot) const {
        const double b = p.beta(phi);
        return 0.5 * (p.alpha() * phidot * phidot + 2.0 * b * phidot * sdot +
                      p.gamma() * sdot * sdot) -
               p.V1(phi) - p.V2(s);
    }

    LagrangianPartials partials(double phi, double /*s*/, double phidot, double sdot) const {
        const double b = p.beta(phi);
        const double db = p.dbeta(phi);
        return {db * phidot * sdot - p.dV1(phi),
                -p.dV2(0.0),
                p.alpha() * phidot + b * sdot,
                b * phidot + p.gamma() * sdot};
    }
};

struct SingularMassMatrix : std::runtime_error {
    explicit SingularMassMatrix(const std::string& what) : std::runtime_error(what) {}
};

/// Continuous plant state for the MPC ground truth.
struct PlantState {
    double phi = 0.0;
    double s = 0.0;
    double phidot = 0.0;
    double sdot = 0.0;
    double t = 0.0;
};

/// Euler-Lagrange accelerations with a force u_force on the s coordinate:
///   [[alpha, beta],[beta, gamma]] (phidd, sdd)^T
///     = (-V1'(phi) + beta'(phi) ... , u - V2'(s) - beta'(phi) phidot^2)^T.
inline std::array<double, 2> continuous_accelerations(const CartPendulumParams& p,
                                                      const PlantState& st, double u_force) {
    const double b = p.beta(st.phi);
    const double db = p.dbeta(st.phi);
    const double det = p.alpha() * p.gamma() - b * b;
    if (det <= 0.0) throw SingularMassMatrix("continuous_accelerations: singular mass matrix");
    const double r0 = -p.dV1(st.phi);
    const double r1 = u_force - p.dV2(st.s) - db * st.phidot * st.phidot;
    return {(p.gamma() * r0 - b * r1) / det, (p.alpha() * r1 - b * r0) / det};
}

/// Total mechanical energy of the continuous plant.
inline double continuous_energy(const CartPendulumParams& p, const PlantState& st) {
    const double b = p.beta(st.phi);
    const double kin = 0.5 * (p.alpha() * st.phidot * st.phidot +
                              2.0 * b * st.phidot * st.sdot + p.gamma() * st.sdot * st.sdot);
    return kin + p.V1(st.phi) + p.V2(st.s);
}

}  // namespace dcl
