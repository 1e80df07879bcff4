#pragma once

// Explicit weight system for the weighted (Carleman-type) energy
// estimates of the adjoint problem, plus measured-ratio verifiers for the
// Hardy-type, Caccioppoli-type, observability and full weighted
// inequalities.
//
//   theta(t) = (t(T-t))^{-4}            blows up at both time endpoints
//   Phi(x)   = xi(x) phi(x) + (1 - xi(x)) psi(x) > 0 on [0,B]
//   sigma    = theta(t) Phi(x),  weight = e^{-2 s sigma}
//
// with a polynomial blend xi between the degenerate-side branch phi and
// the exponential branch psi across the inner window (c,d). Exponentials
// are flushed to exactly zero once 2 s sigma exceeds the guard, so the
// time-endpoint blow-up needs no ad hoc cutoff.

#include <cmath>
#include <utility>
#include <vector>

#include "fbc/adjoint_solver.hpp"
#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"
#include "fbc/free_boundary.hpp"

namespace fbc {

/// theta(t) = 1/(t(T-t))^4 for t strictly inside (0,T).
inline double theta_weight(double t, double T) {
    if (!(t > 0.0) || !(t < T))
        throw domain_violation("theta_weight: t must lie strictly inside (0,T)");
    const double u = t * (T - t);
    return 1.0 / (u * u * u * u);
}

/// Blend polynomial rho(x) = 67/3 x^4 - 103/2 x^5 + 42 x^6 - 71/6 x^7,
/// evaluated as an integer-coefficient Horner form over the common
/// denominator 6 so that rho(0) = 0 and rho(1) = (134-309+252-71)/6 = 1
/// hold exactly in floating point. Note that rho'(1) = 1 rather than 0,
/// so the blend is C^0 but not C^1 at the window edge (see rho_deriv).
inline double rho_blend(double x) {
    return x * x * x * x * (134.0 + x * (-309.0 + x * (252.0 - 71.0 * x))) / 6.0;
}

/// k-th derivative of the blend polynomial, k = 0..3, for inspecting the
/// smoothness of the glue numerically.
inline double rho_deriv(int k, double x) {
    static const double base[8] = {0.0, 0.0, 0.0, 0.0, 134.0, -309.0, 252.0, -71.0};
    if (k < 0 || k > 3) throw domain_violation("rho_deriv: k must be 0..3");
    double s = 0.0;
    for (int p = 7; p >= k; --p) {
        double coef = base[p];
        for (int m = 0; m < k; ++m) coef *= (p - m);
        s = s * x + coef;
    }
    return s / 6.0;
}

/// Cutoff: 1 left of c, 0 right of d, polynomial blend in between.
inline double xi_cutoff(double x, double c, double d) {
    if (!(c < d)) throw domain_violation("xi_cutoff: requires c < d");
    if (x < c) return 1.0;
    if (x > d) return 0.0;
    return rho_blend((d - x) / (d - c));
}

namespace detail {

inline double phi_branch(double x, double alpha, double d) {
    if (alpha == 1.0) return std::exp(d) - std::exp(x);
    const double e = 2.0 - alpha;
    return (std::pow(d, e) - std::pow(x, e)) / (e * e);
}

inline double eta_line(double x, double B, double d) { return -(x - B) / d + 1.0; }

/// eta is affine, so its sup norm on [0,B] is attained at an endpoint.
inline double eta_norm(double B, double d) {
    return std::max(std::abs(eta_line(0.0, B, d)), std::abs(eta_line(B, B, d)));
}

inline double psi_branch(double x, double B, double d) {
    return std::exp(2.0 * eta_norm(B, d)) - std::exp(eta_line(x, B, d));
}

}  // namespace detail

/// Spatial weight Phi(x) on [0, B].
inline double Phi_weight(double x, const ProblemConfig& cfg) {
    const double xi = xi_cutoff(x, cfg.c, cfg.d);
    return xi * detail::phi_branch(x, cfg.alpha, cfg.d) +
           (1.0 - xi) * detail::psi_branch(x, cfg.B, cfg.d);
}

/// Bundles s with the weight evaluations; e^{-2 s sigma} is flushed to
/// exactly 0 once the exponent passes the guard (double exponent range).
struct CarlemanWeightSet {
    double s = 50.0;
    double exp_guard = 700.0;
    ProblemConfig cfg;

    CarlemanWeightSet(double s_, const ProblemConfig& cfg_) : s(s_), cfg(cfg_) {
        if (!(s > 0.0)) throw domain_violation("CarlemanWeightSet: s must be positive");
    }

    double theta(double t) const { return theta_weight(t, cfg.T); }
    double Phi(double x) const { return Phi_weight(x, cfg); }
    double sigma(double x, double t) const { return theta(t) * Phi(x); }

    /// e^{-2 s sigma(x,t)}, guarded.
    double weight(double x, double t) const {
        const double e = 2.0 * s * sigma(x, t);
        if (e > exp_guard) return 0.0;
        return std::exp(-e);
    }
};

// ---------------------------------------------------------------------------
// Hardy-type inequality
//
//   int_0^l x^(as-2) z^2 dx  <=  4/(as-1)^2 int_0^l x^as z_x^2 dx
//
// for piecewise-linear z on a uniform grid over (0, l), with z(0) = 0 when
// as < 1 and z(l) = 0 when 1 < as < 2. Both sides integrate exactly per
// cell: on each cell z is affine, so the integrands reduce to power
// functions of x (plus a logarithm for the as = 0 cross term). The
// trapezoid rule is useless here - its error near the singular endpoint
// decays only like sqrt(h).

inline std::pair<double, double> hardy_check(const std::vector<double>& z, double alpha_star,
                                             double l_t) {
    const int N = static_cast<int>(z.size()) - 1;
    if (N < 2) throw domain_violation("hardy_check: need at least 2 cells");
    if (!(l_t > 0.0)) throw domain_violation("hardy_check: domain length must be positive");
    if (alpha_star == 1.0)
        throw domain_violation("hardy_check: alpha_star = 1 is excluded from the inequality");
    if (!(alpha_star >= 0.0 && alpha_star < 2.0))
        throw domain_violation("hardy_check: alpha_star must lie in [0,2) \\ {1}");

    const double h = l_t / N;
    const double zmax = max_abs(z);
    const double tol = 1e-12 * std::max(1.0, zmax);
    if (alpha_star < 1.0) {
        if (std::abs(z.front()) > tol)
            throw domain_violation("hardy_check: regime alpha_star < 1 requires z -> 0 at x = 0");
    } else {
        if (std::abs(z.back()) > tol)
            throw domain_violation("hardy_check: regime alpha_star > 1 requires z -> 0 at x = l");
    }

    // int_xl^xr x^p dx with the p = -1 branch.
    auto power_int = [](double p, double xl, double xr) {
        if (p == -1.0) return std::log(xr / xl);
        return (std::pow(xr, p + 1.0) - std::pow(xl, p + 1.0)) / (p + 1.0);
    };

    double lhs = 0.0;
    for (int j = 0; j < N; ++j) {
        const double xl = j * h, xr = (j + 1) * h;
        const double slope = (z[j + 1] - z[j]) / h;
        const double c0 = z[j] - slope * xl;  // z(x) = c0 + slope * x on the cell
        if (j == 0) {
            // At the degenerate end the constant part is zero in regime (i);
            // in regime (ii) every exponent below is > -1 and integrable.
            const double z0 = (alpha_star < 1.0) ? 0.0 : c0;
            if (z0 != 0.0) lhs += z0 * z0 * std::pow(h, alpha_star - 1.0) / (alpha_star - 1.0);
            if (z0 != 0.0) lhs += 2.0 * z0 * slope * std::pow(h, alpha_star) / alpha_star;
            lhs += slope * slope * std::pow(h, alpha_star + 1.0) / (alpha_star + 1.0);
        } else {
            lhs += c0 * c0 * power_int(alpha_star - 2.0, xl, xr);
            lhs += 2.0 * c0 * slope * power_int(alpha_star - 1.0, xl, xr);
            lhs += slope * slope * power_int(alpha_star, xl, xr);
        }
    }

    // z_x is piecewise constant, so the right side is a plain power integral.
    double grad = 0.0;
    for (int j = 0; j < N; ++j) {
        const double slope = (z[j + 1] - z[j]) / h;
        grad += slope * slope * power_int(alpha_star, j * h, (j + 1) * h);
    }
    const double rhs = 4.0 / ((alpha_star - 1.0) * (alpha_star - 1.0)) * grad;
    return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// Measured-ratio verifiers on adjoint solutions

namespace detail {

/// Physical-space integral over interior time nodes of a per-node
/// integrand f(n, j, x) restricted by an optional window; dt-weighted sum
/// over n = 1..Nt-1 (the weight kills the endpoints anyway).
template <typename F>
double interior_time_integral(const ProblemConfig& cfg, const BoundaryTrajectory& l, F&& f) {
    const SpaceGrid grid = cfg.space();
    const TransformCoeffs tc = transform_coeffs(l, cfg);
    const double dt = cfg.dt();
    double total = 0.0;
    for (int n = 1; n < cfg.Nt; ++n) {
        double slice = 0.0;
        for (int j = 0; j <= grid.Ns; ++j) {
            const double x = grid.node(j) * tc.J[n];
            slice += grid.weight(j) * tc.J[n] * f(n, j, x);
        }
        total += dt * slice;
    }
    return total;
}

}  // namespace detail

/// LHS/RHS of the interior gradient estimate
///   iint_{omega0} e^{-2 s sigma} phi_x^2  <=  C(s,T) iint_omega phi^2.
/// The ratio is non-increasing in s for a fixed phi. Throws when the
/// solution vanishes on the control window.
inline double caccioppoli_ratio(const AdjointField& phi, double s, const BoundaryTrajectory& l,
                                const ProblemConfig& cfg) {
    const CarlemanWeightSet ws(s, cfg);
    const SpaceGrid grid = cfg.space();
    const TimeGrid tg = cfg.time();
    const TransformCoeffs tc = transform_coeffs(l, cfg);

    std::vector<std::vector<double>> grads(cfg.Nt + 1);
    for (int n = 0; n <= cfg.Nt; ++n) grads[n] = pushforward_gradient(phi.slice(n), n, l, cfg);

    const double lhs = detail::interior_time_integral(cfg, l, [&](int n, int j, double x) {
        if (!(x > cfg.c && x < cfg.d)) return 0.0;
        const double g = grads[n][j];
        return ws.weight(x, tg.node(n)) * g * g;
    });

    std::vector<double> per_slice(cfg.Nt + 1, 0.0);
    for (int n = 0; n <= cfg.Nt; ++n) {
        const auto mask = omega_indicator(n, l, cfg);
        double sly = 0.0;
        for (int j = 0; j <= grid.Ns; ++j)
            sly += mask[j] * grid.weight(j) * tc.J[n] * phi.at(n, j) * phi.at(n, j);
        per_slice[n] = sly;
    }
    const double rhs = trapezoid(per_slice, cfg.dt());
    if (rhs == 0.0) throw domain_violation("caccioppoli_ratio: solution vanishes on omega");
    return lhs / rhs;
}

/// Measured LHS/RHS of the full weighted estimate for an adjoint solution
/// phi with source g:
///
///   iint (s theta x^alpha phi_x^2 + s^3 theta^3 x^(2-alpha) phi^2) e^{-2 s sigma}
///     + s int_0^T l^alpha e^{-2 s sigma(l(t),t)} phi_x(l(t),t)^2 dt
///   <= C ( same integrand over omega0 + iint g^2 e^{-2 s sigma} ).
inline double carleman_ratio(const AdjointField& phi, const TransformedField& g, double s,
                             const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    const CarlemanWeightSet ws(s, cfg);
    const TimeGrid tg = cfg.time();
    const bool has_source = !g.data.empty();

    std::vector<std::vector<double>> grads(cfg.Nt + 1);
    for (int n = 0; n <= cfg.Nt; ++n) grads[n] = pushforward_gradient(phi.slice(n), n, l, cfg);

    auto integrand = [&](int n, int j, double x) {
        const double th = ws.theta(tg.node(n));
        const double w = ws.weight(x, tg.node(n));
        if (w == 0.0) return 0.0;
        const double gx = grads[n][j];
        const double ph = phi.at(n, j);
        return (s * th * std::pow(x, cfg.alpha) * gx * gx +
                s * s * s * th * th * th * std::pow(x, 2.0 - cfg.alpha) * ph * ph) *
               w;
    };

    const double lhs_domain = detail::interior_time_integral(cfg, l, integrand);

    const std::vector<double> V = boundary_gradient(phi, l, cfg);
    double lhs_boundary = 0.0;
    for (int n = 1; n < cfg.Nt; ++n) {
        const double ln = l.values[n];
        lhs_boundary += cfg.dt() * std::pow(ln, cfg.alpha) * ws.weight(ln, tg.node(n)) * V[n] * V[n];
    }
    lhs_boundary *= s;

    const double rhs_window = detail::interior_time_integral(cfg, l, [&](int n, int j, double x) {
        if (!(x > cfg.c && x < cfg.d)) return 0.0;
        return integrand(n, j, x);
    });
    double rhs_source = 0.0;
    if (has_source)
        rhs_source = detail::interior_time_integral(cfg, l, [&](int n, int j, double x) {
            const double gv = g.at(n, j);
            return ws.weight(x, tg.node(n)) * gv * gv;
        });

    const double rhs = rhs_window + rhs_source;
    if (rhs == 0.0) throw domain_violation("carleman_ratio: weighted right-hand side vanishes");
    return (lhs_domain + lhs_boundary) / rhs;
}

/// Measured constant of the observability inequality
///   ||phi(.,0)||^2_{L2(0,L0)} <= C iint_{omega x (0,T)} phi^2
/// for the homogeneous backward solution with terminal datum phi_T.
inline double observability_ratio(const std::vector<double>& phi_T, const BoundaryTrajectory& l,
                                  const ProblemConfig& cfg) {
    const SpaceGrid grid = cfg.space();
    const TransformCoeffs tc = transform_coeffs(l, cfg);
    const AdjointField phi = solve_adjoint(phi_T, l, cfg);

    const auto phi0 = phi.slice(0);
    const double num = slice_dot(phi0, phi0, grid, tc.J[0]);

    std::vector<double> per_slice(cfg.Nt + 1, 0.0);
    for (int n = 0; n <= cfg.Nt; ++n) {
        const auto mask = omega_indicator(n, l, cfg);
        double sly = 0.0;
        for (int j = 0; j <= grid.Ns; ++j)
            sly += mask[j] * grid.weight(j) * tc.J[n] * phi.at(n, j) * phi.at(n, j);
        per_slice[n] = sly;
    }
    const double den = trapezoid(per_slice, cfg.dt());
    if (den == 0.0) throw domain_violation("observability_ratio: solution vanishes on omega");
    return num / den;
}

}  // namespace fbc
