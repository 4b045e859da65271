#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace dcl {

/// A point (phi, s) of the configuration space Q = S^1 x R.
/// phi is kept as a raw real coordinate (no modular wrapping) so that
/// discrete derivatives stay smooth across revolutions.
struct ConfigPoint {
    double phi = 0.0;
    double s = 0.0;

    friend ConfigPoint operator+(ConfigPoint a, ConfigPoint b) { return {a.phi + b.phi, a.s + b.s}; }
    friend ConfigPoint operator-(ConfigPoint a, ConfigPoint b) { return {a.phi - b.phi, a.s - b.s}; }
    friend ConfigPoint operator*(double c, ConfigPoint a) { return {c * a.phi, c * a.s}; }
    friend ConfigPoint operator/(ConfigPoint a, double c) { return {a.phi / c, a.s / c}; }

    bool finite() const { return std::isfinite(phi) && std::isfinite(s); }
};

/// Covector on configuration space (same layout as ConfigPoint).
using Covector = ConfigPoint;

/// Velocity-space initial condition (q_0, qdot_0).
struct VelocityState {
    ConfigPoint q;
    double phidot = 0.0;
    double sdot = 0.0;
};

/// Partial derivatives of a continuous Lagrangian L(phi, s, phidot, sdot).
struct LagrangianPartials {
    double dphi = 0.0;
    double ds = 0.0;
    double dphidot = 0.0;
    double dsdot = 0.0;
};

/// Compile-time interface for continuous Lagrangians.
template <class M>
concept LagrangianModel = requires(const M& m, double x) {
    { m.value(x, x, x, x) } -> std::convertible_to<double>;
    { m.partials(x, x, x, x) } -> std::convertible_to<LagrangianPartials>;
};

/// Settings for the implicit Newton solves of the variational integrator.
struct NewtonSettings {
    double residual_tolerance = 1e-12;
    int max_iterations = 50;
    double jacobian_fd_step = 1e-7;
    /// Residual level accepted when the iteration stagnates below the
    /// finite-difference-Jacobian noise floor without reaching
    /// residual_tolerance.
    double stagnation_tolerance = 1e-9;
};

struct NonConvergence : std::runtime_error {
    double final_residual;
    int iterations;
    explicit NonConvergence(double res, int iters)
        : std::runtime_error("Newton iteration failed to converge; final residual " +
                             std::to_string(res)),
          final_residual(res),
          iterations(iters) {}
};

struct SingularJacobian : std::runtime_error {
    explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};

struct ModelEvaluationError : std::runtime_error {
    explicit ModelEvaluationError(const std::string& what) : std::runtime_error(what) {}
};

struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace dcl
