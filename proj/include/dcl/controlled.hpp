#pragma once

#include <cmath>

#include "dcl/cart_pendulum.hpp"
#include "dcl/types.hpp"

namespace dcl {

/// Shaping potential V_eps acting on the symmetry-breaking variable y.
/// Default family: quadratic V_eps(y) = 1/2 c y^2 (c < 0 for stabilization).
struct ShapingPotential {
    double c = 0.0;
    double value(double y) const { return 0.5 * c * y * y; }
    double derivative(double y) const { return c * y; }
    double second_derivative_at_0() const { return c; }
};

/// Controller gains: metric-shaping sigma and rho, shaping potential,
/// dissipation gain D, and target equilibrium (phi_e, s_e).
struct Gains {
    double sigma = -0.12;
    double rho = -0.095;
    ShapingPotential veps{-0.18};
    double D = 0.0;
    double phi_e = 0.0;
    double s_e = 0.0;
};

/// k(phi) = -beta(phi) / (sigma gamma).
inline double k_of_phi(const CartPendulumParams& p, const Gains& g, double phi) {
    return -p.beta(phi) / (g.sigma * p.gamma());
}

/// k'(phi) = -beta'(phi) / (sigma gamma).
inline double kprime_of_phi(const CartPendulumParams& p, const Gains& g, double phi) {
    return -p.dbeta(phi) / (g.sigma * p.gamma());
}

/// Symmetry-breaking variable
///   y = s - (1/gamma)(1/sigma - (rho-1)/rho) * integral_{phi_e}^{phi} beta(z) dz,
/// closed form for beta = ml cos(phi - psi).
inline double y_of(const CartPendulumParams& p, const Gains& g, double phi, double s) {
    const double coef = (1.0 / g.sigma - (g.rho - 1.0) / g.rho) / p.gamma();
    const double integral =
        p.m * p.l * (std::sin(phi - p.psi) - std::sin(g.phi_e - p.psi));
    return s - coef * integral;
}

/// d y / d phi (used in the closed-form partials of the controlled Lagrangian).
inline double y_phi(const CartPendulumParams& p, const Gains& g, double phi) {
    return -(1.0 / g.sigma - (g.rho - 1.0) / g.rho) * p.beta(phi) / p.gamma();
}

/// Controlled Lagrangian
///   L_c = L(phi, s, phidot, sdot + k phidot)
///         + 1/2 sigma gamma (k phidot)^2
///         + 1/2 (rho - 1) gamma (sdot - (sigma - 1) k phidot)^2
///         + V2(s) - V_eps(y).
/// The group potential V2 cancels against the -V2 inside L, so the only
/// s-dependence is through V_eps(y).
struct ControlledLagrangian {
    CartPendulumParams p;
    Gains g;

    double value(double phi, double s, double phidot, double sdot) const {
        const double k = k_of_phi(p, g, phi);
        const double v = sdot + k * phidot;
        const double vv = sdot - (g.sigma - 1.0) * k * phidot;
        const double y = y_of(p, g, phi, s);
        const CartPendulumLagrangian base{p};
        return base.value(phi, s, phidot, v) + 0.5 * g.sigma * p.gamma() * (k * phidot) * (k * phidot) +
               0.5 * (g.rho - 1.0) * p.gamma() * vv * vv + p.V2(s) - g.veps.value(y);
    }

    LagrangianPartials partials(double phi, double s, double phidot, double sdot) const {
        const double k = k_of_phi(p, g, phi);
        const double dk = kprime_of_phi(p, g, phi);
        const double b = p.beta(phi);
        const double db = p.dbeta(phi);
        const double v = sdot + k * phidot;
        const double es = -(g.sigma - 1.0);
        const double vv = sdot + es * k * phidot;
        const double y = y_of(p, g, phi, s);
        const double dveps = g.veps.derivative(y);
        const double gam = p.gamma();

        const double Lphi = db * phidot * v - p.dV1(phi) + dk * phidot * (b * phidot + gam * v) +
                            g.sigma * gam * k * dk * phidot * phidot +
                            (g.rho - 1.0) * gam * vv * es * dk * phidot - dveps * y_phi(p, g, phi);
        const double Ls = -dveps;
        const double Lphidot = p.alpha() * phidot + b * v + k * (b * phidot + gam * v) +
                               g.sigma * gam * k * k * phidot + (g.rho - 1.0) * gam * vv * es * k;
        const double Lsdot = b * phidot + gam * v + (g.rho - 1.0) * gam * vv;
        return {Lphi, Ls, Lphidot, Lsdot};
    }
};

/// Discrete group momentum of the controlled system:
///   J_k = rho gamma (Delta s_k / h - (sigma - 1) k(phi_{k+1/2}) Delta phi_k / h).
inline double J_k(const CartPendulumParams& p, const Gains& g, ConfigPoint q_a, ConfigPoint q_b,
                  double h) {
    if (h <= 0.0) throw PreconditionError("J_k: h must be > 0");
    const double phimid = 0.5 * (q_a.phi + q_b.phi);
    return g.rho * p.gamma() *
           ((q_b.s - q_a.s) / h - (g.sigma - 1.0) * k_of_phi(p, g, phimid) * (q_b.phi - q_a.phi) / h);
}

}  // namespace dcl
