#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dcl/cart_pendulum.hpp"
#include "dcl/controlled.hpp"
#include "dcl/types.hpp"

namespace dcl {

struct SingularLeadingBlock : std::runtime_error {
    explicit SingularLeadingBlock(const std::string& what) : std::runtime_error(what) {}
};

struct EigenSolverFailure : std::runtime_error {
    explicit EigenSolverFailure(const std::string& what) : std::runtime_error(what) {}
};

using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

/// Quadratic approximation of the discrete energy near the equilibrium:
///   E(q_k, q_{k+1}) = a_pp Dphi^2 + a_ps Dphi Ds + a_ss Ds^2
///                     + b_phi phi_{k+1/2}^2 + b_x x_{k+1/2}^2,
/// with x = s + x_slope * phi.
struct QuadraticEnergyForm {
    double a_pp = 0.0;
    double a_ps = 0.0;
    double a_ss = 0.0;
    double b_phi = 0.0;
    double b_x = 0.0;
    double x_slope = 0.0;
};

/// Entries of the controlled mass matrix at the equilibrium (phi = 0).
inline Mat2 controlled_mass_matrix(const CartPendulumParams& p, const Gains& g) {
    const double b0 = p.beta(0.0);
    const double k0 = -b0 / (g.sigma * p.gamma());
    const double gam = p.gamma();
    const double mpp = p.alpha() + 2.0 * b0 * k0 + (1.0 + g.sigma) * gam * k0 * k0 +
                       (g.rho - 1.0) * (g.sigma - 1.0) * (g.sigma - 1.0) * gam * k0 * k0;
    const double mps = b0 * g.rho * (g.sigma - 1.0) / g.sigma;
    const double mss = gam * g.rho;
    return {{{mpp, mps}, {mps, mss}}};
}

/// Linearization slope of y at the equilibrium: x = s + x_slope * phi.
inline double x_slope_of(const CartPendulumParams& p, const Gains& g) {
    return ((g.rho - 1.0) / g.rho - 1.0 / g.sigma) * p.beta(0.0) / p.gamma();
}

/// Build the quadratic energy form. The velocity-block coefficients equal the
/// controlled mass matrix divided by 2h (a_pp = M_pp/(2h) expands to
/// [alpha gamma sigma^2 + beta(0)^2 (sigma-1)(rho(sigma-1) - sigma)] / (2 gamma sigma^2 h)).
inline QuadraticEnergyForm quadratic_energy_form(const CartPendulumParams& p, const Gains& g,
                                                 double h) {
    if (h <= 0.0) throw PreconditionError("quadratic_energy_form: h must be > 0");
    const Mat2 M = controlled_mass_matrix(p, g);
    QuadraticEnergyForm f;
    f.a_pp = M[0][0] / (2.0 * h);
    f.a_ps = M[0][1] / h;
    f.a_ss = M[1][1] / (2.0 * h);
    f.b_phi = 0.5 * h * p.ddV1(0.0);
    f.b_x = 0.5 * h * g.veps.second_derivative_at_0();
    f.x_slope = x_slope_of(p, g);
    return f;
}

/// Evaluate the quadratic energy on a configuration pair.
inline double quadratic_energy(const QuadraticEnergyForm& f, ConfigPoint q_k, ConfigPoint q_k1) {
    const double dphi = q_k1.phi - q_k.phi;
    const double ds = q_k1.s - q_k.s;
    const double phimid = 0.5 * (q_k.phi + q_k1.phi);
    const double smid = 0.5 * (q_k.s + q_k1.s);
    const double x = smid + f.x_slope * phimid;
    return f.a_pp * dphi * dphi + f.a_ps * dphi * ds + f.a_ss * ds * ds + f.b_phi * phimid * phimid +
           f.b_x * x * x;
}

/// Per-inequality report of the spectral-stability gain conditions:
///   -beta(0)^2/(alpha gamma - beta(0)^2) < sigma < 0, rho < 0, V_eps''(0) < 0.
struct GainConditionReport {
    double sigma_lower_bound = 0.0;
    bool sigma_in_range = false;
    bool rho_negative = false;
    bool veps_concave = false;
    double sigma_margin = 0.0;  ///< min(sigma - lower, -sigma)
    double rho_margin = 0.0;    ///< -rho
    double veps_margin = 0.0;   ///< -V_eps''(0)
    bool all() const { return sigma_in_range && rho_negative && veps_concave; }
};

inline GainConditionReport check_gain_conditions(const CartPendulumParams& p, const Gains& g) {
    GainConditionReport r;
    const double b0 = p.beta(0.0);
    r.sigma_lower_bound = -b0 * b0 / (p.alpha() * p.gamma() - b0 * b0);
    r.sigma_in_range = (g.sigma > r.sigma_lower_bound) && (g.sigma < 0.0);
    r.rho_negative = g.rho < 0.0;
    r.veps_concave = g.veps.second_derivative_at_0() < 0.0;
    r.sigma_margin = std::min(g.sigma - r.sigma_lower_bound, -g.sigma);
    r.rho_margin = -g.rho;
    r.veps_margin = -g.veps.second_derivative_at_0();
    return r;
}

enum class Definiteness { NegativeDefinite, PositiveDefinite, Indefinite, Degenerate };

/// Sign analysis of the block-diagonal quadratic energy: the symmetric
/// velocity block [[2a_pp, a_ps],[a_ps, 2a_ss]]/2 plus the two position
/// coefficients b_phi, b_x.
inline Definiteness energy_definiteness(const QuadraticEnergyForm& f) {
    const double det_vel = 4.0 * f.a_pp * f.a_ss - f.a_ps * f.a_ps;
    if (det_vel == 0.0 || f.b_phi == 0.0 || f.b_x == 0.0) return Definiteness::Degenerate;
    const bool neg = f.a_pp < 0.0 && det_vel > 0.0 && f.b_phi < 0.0 && f.b_x < 0.0;
    if (neg) return Definiteness::NegativeDefinite;
    const bool pos = f.a_pp > 0.0 && det_vel > 0.0 && f.b_phi > 0.0 && f.b_x > 0.0;
    if (pos) return Definiteness::PositiveDefinite;
    return Definiteness::Indefinite;
}

/// Companion matrix of the damped linearized two-step recurrence
///   A2 z_{k+1} + A1 z_k + A0 z_{k-1} = 0, z = (phi, s),
/// where the undamped blocks come from the quadratic-approximation Lagrangian
/// (mass matrix M, stiffness K = diag-like with V1''(0) and V_eps''(0) c c^T)
/// and the dissipation right-hand sides -D (Delta x_{k-1} + Delta x_k)/h
/// (group equation, with the x_slope multiple in the shape equation) are
/// folded into A2/A0 via the +/- (D/h) c c^T terms.
inline Mat4 linearized_update(const CartPendulumParams& p, const Gains& g, double h, double D) {
    if (h <= 0.0) throw PreconditionError("linearized_update: h must be > 0");
    const Mat2 M = controlled_mass_matrix(p, g);
    const double cx = x_slope_of(p, g);
    const double c2 = g.veps.second_derivative_at_0();
    Mat2 K{};
    K[0][0] = p.ddV1(0.0) + c2 * cx * cx;
    K[0][1] = c2 * cx;
    K[1][0] = c2 * cx;
    K[1][1] = c2;
    Mat2 Dm{};  // (D/h) c c^T with c = (x_slope, 1)
    Dm[0][0] = D / h * cx * cx;
    Dm[0][1] = D / h * cx;
    Dm[1][0] = D / h * cx;
    Dm[1][1] = D / h;

    Mat2 A2{}, A1{}, A0{};
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            A2[i][j] = -M[i][j] / h - h / 4.0 * K[i][j] + Dm[i][j];
            A1[i][j] = 2.0 * M[i][j] / h - h / 2.0 * K[i][j];
            A0[i][j] = -M[i][j] / h - h / 4.0 * K[i][j] - Dm[i][j];
        }
    }
    const double det = A2[0][0] * A2[1][1] - A2[0][1] * A2[1][0];
    const double scale =
        std::max({std::abs(A2[0][0]), std::abs(A2[0][1]), std::abs(A2[1][0]), std::abs(A2[1][1])});
    if (!(std::abs(det) > 1e-14 * scale * scale)) {
        throw SingularLeadingBlock("linearized_update: A2 block is singular");
    }
    auto solveA2 = [&](double r0, double r1) {
        return std::array<double, 2>{(A2[1][1] * r0 - A2[0][1] * r1) / det,
                                     (A2[0][0] * r1 - A2[1][0] * r0) / det};
    };
    // Companion: (z_{k-1}, z_k) -> (z_k, z_{k+1}), z_{k+1} = -A2^{-1}(A0 z_{k-1} + A1 z_k).
    Mat4 C{};
    C[0][2] = 1.0;
    C[1][3] = 1.0;
    for (int j = 0; j < 2; ++j) {
        auto col = solveA2(-A0[0][j], -A0[1][j]);
        C[2][j] = col[0];
        C[3][j] = col[1];
        col = solveA2(-A1[0][j], -A1[1][j]);
        C[2][j + 2] = col[0];
        C[3][j + 2] = col[1];
    }
    return C;
}

inline Vec4 mat4_apply(const Mat4& A, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i] += A[i][j] * v[j];
    return r;
}

namespace detail {

inline Mat4 mat4_mul(const Mat4& A, const Mat4& B) {
    Mat4 R{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int j = 0; j < 4; ++j) R[i][j] += A[i][k] * B[k][j];
    return R;
}

inline double mat4_trace(const Mat4& A) { return A[0][0] + A[1][1] + A[2][2] + A[3][3]; }

/// Characteristic polynomial coefficients of a 4x4 matrix via Newton's
/// identities on power sums: p(x) = x^4 + c3 x^3 + c2 x^2 + c1 x + c0.
inline std::array<double, 4> char_poly(const Mat4& A) {
    const Mat4 A2m = mat4_mul(A, A);
    const Mat4 A3m = mat4_mul(A2m, A);
    const Mat4 A4m = mat4_mul(A3m, A);
    const double p1 = mat4_trace(A);
    const double p2 = mat4_trace(A2m);
    const double p3 = mat4_trace(A3m);
    const double p4 = mat4_trace(A4m);
    const double e1 = p1;
    const double e2 = (e1 * p1 - p2) / 2.0;
    const double e3 = (e2 * p1 - e1 * p2 + p3) / 3.0;
    const double e4 = (e3 * p1 - e2 * p2 + e1 * p3 - p4) / 4.0;
    return {e4, -e3, e2, -e1};  // c0, c1, c2, c3
}

inline std::complex<double> poly_eval(const std::array<double, 4>& c, std::complex<double> x) {
    return (((x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

inline std::complex<double> poly_deriv(const std::array<double, 4>& c, std::complex<double> x) {
    return ((4.0 * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1];
}

/// Durand-Kerner simultaneous iteration for the quartic roots, followed by a
/// Newton polish of each root.
inline std::array<std::complex<double>, 4> quartic_roots(const std::array<double, 4>& c) {
    using C = std::complex<double>;
    std::array<C, 4> z;
    const C seed(0.4, 0.9);
    z[0] = seed;
    for (int i = 1; i < 4; ++i) z[i] = z[i - 1] * seed;
    for (int iter = 0; iter < 500; ++iter) {
        double move = 0.0;
        for (int i = 0; i < 4; ++i) {
            C denom(1.0, 0.0);
            for (int j = 0; j < 4; ++j)
                if (j != i) denom *= (z[i] - z[j]);
            const C delta = poly_eval(c, z[i]) / denom;
            z[i] -= delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < 1e-14) break;
    }
    for (int i = 0; i < 4; ++i) {
        for (int it = 0; it < 8; ++it) {
            const C f = poly_eval(c, z[i]);
            const C fp = poly_deriv(c, z[i]);
            if (std::abs(fp) < 1e-300) break;
            const C delta = f / fp;
            z[i] -= delta;
            if (std::abs(delta) < 1e-16 * std::max(1.0, std::abs(z[i]))) break;
        }
    }
    return z;
}

/// |det(A - lambda I)| for a 4x4 matrix via complex Gaussian elimination.
inline double det_residual(const Mat4& A, std::complex<double> lambda) {
    using C = std::complex<double>;
    std::array<std::array<C, 4>, 4> B;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) B[i][j] = C(A[i][j]) - (i == j ? lambda : C(0.0));
    C det(1.0, 0.0);
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(B[r][col]) > std::abs(B[piv][col])) piv = r;
        if (piv != col) {
            std::swap(B[piv], B[col]);
            det = -det;
        }
        if (std::abs(B[col][col]) == 0.0) return 0.0;
        det *= B[col][col];
        for (int r = col + 1; r < 4; ++r) {
            const C f = B[r][col] / B[col][col];
            for (int j = col; j < 4; ++j) B[r][j] -= f * B[col][j];
        }
    }
    return std::abs(det);
}

}  // namespace detail

enum class StabilityClass { SpectrallyStable, AsymptoticallyStable, Unstable, Marginal };

inline const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::SpectrallyStable: return "SpectrallyStable";
        case StabilityClass::AsymptoticallyStable: return "AsymptoticallyStable";
        case StabilityClass::Unstable: return "Unstable";
        default: return "Marginal";
    }
}

struct SpectralReport {
    std::array<std::complex<double>, 4> eigenvalues{};
    double spectral_radius = 0.0;
    StabilityClass classification = StabilityClass::Marginal;
    GainConditionReport condition_margins{};
};

/// Classification tolerances: on-circle band 1e-8, strict-inside margin 1e-10.
inline constexpr double kOnCircleBand = 1e-8;
inline constexpr double kStrictInsideMargin = 1e-10;

/// Eigenvalues of the 4x4 companion matrix via its characteristic quartic,
/// certified by the determinant residual |det(A - lambda I)|.
inline SpectralReport spectrum(const Mat4& A, double D = 0.0) {
    SpectralReport rep;
    const auto coeffs = detail::char_poly(A);
    rep.eigenvalues = detail::quartic_roots(coeffs);
    double norm = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) norm = std::max(norm, std::abs(A[i][j]));
    const double scale = std::max(1.0, norm);
    const double tol = 1e-8 * scale * scale * scale * scale;
    for (const auto& lam : rep.eigenvalues) {
        if (detail::det_residual(A, lam) > tol) {
            throw EigenSolverFailure("spectrum: eigenvalue residual certification failed");
        }
        rep.spectral_radius = std::max(rep.spectral_radius, std::abs(lam));
    }
    if (rep.spectral_radius > 1.0 + kOnCircleBand) {
        rep.classification = StabilityClass::Unstable;
    } else if (rep.spectral_radius < 1.0 - kStrictInsideMargin) {
        rep.classification = StabilityClass::AsymptoticallyStable;
    } else if (D == 0.0) {
        rep.classification = StabilityClass::SpectrallyStable;
    } else {
        rep.classification = StabilityClass::Marginal;
    }
    return rep;
}

/// Iterate the linearized companion map from (z0, z1); returns configurations.
inline std::vector<ConfigPoint> linearized_trajectory(const Mat4& C, ConfigPoint z0, ConfigPoint z1,
                                                      int steps) {
    std::vector<ConfigPoint> traj{z0, z1};
    Vec4 v{z0.phi, z0.s, z1.phi, z1.s};
    for (int k = 0; k < steps; ++k) {
        v = mat4_apply(C, v);
        traj.push_back({v[2], v[3]});
    }
    return traj;
}

/// Per-step residual of the discrete energy-balance identity along a damped
/// linearized trajectory:
///   E_{k,k+1} - E_{k-1,k} = (D h/2) ((Delta x_{k-1} + Delta x_k)/h)^2.
/// The coefficient D h/2 is the exact discrete identity for the midpoint
/// discretization (verified against high-precision integration).
inline std::vector<double> energy_balance_residual(const QuadraticEnergyForm& f, double h, double D,
                                                   const std::vector<ConfigPoint>& traj) {
    std::vector<double> res;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const double Eprev = quadratic_energy(f, traj[k - 1], traj[k]);
        const double Enext = quadratic_energy(f, traj[k], traj[k + 1]);
        auto x_of = [&](ConfigPoint q) { return q.s + f.x_slope * q.phi; };
        const double dx_km = x_of(traj[k]) - x_of(traj[k - 1]);
        const double dx_k = x_of(traj[k + 1]) - x_of(traj[k]);
        const double rate = (dx_km + dx_k) / h;
        res.push_back(Enext - Eprev - 0.5 * D * h * rate * rate);
    }
    return res;
}

}  // namespace dcl
