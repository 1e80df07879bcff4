#pragma once

// Change of variables between the moving domain {0 < x < l(t)} and the
// fixed cylinder (0,L0) x (0,T): s = L0*x/l(t). Provides the per-node
// transform coefficients p = (l/L0)^(alpha-2), q = l'/l, the Jacobian
// J = l/L0, coordinate and gradient pushforwards, and the transformed
// image of the fixed control window.

#include <cmath>
#include <vector>

#include "fbc/config.hpp"
#include "fbc/core.hpp"

namespace fbc {

/// Time-sampled boundary position l(t_n) with its derivative stored
/// explicitly. The derivative is data, not a difference quotient, so the
/// fixed-point map can populate it analytically.
struct BoundaryTrajectory {
    std::vector<double> values;  // l_n
    std::vector<double> derivs;  // l'_n

    int num_nodes() const { return static_cast<int>(values.size()); }

    static BoundaryTrajectory constant(const ProblemConfig& cfg, double level) {
        BoundaryTrajectory l;
        l.values.assign(cfg.Nt + 1, level);
        l.derivs.assign(cfg.Nt + 1, 0.0);
        return l;
    }

    /// l(t) = L0 + amp*sin(2*pi*t/T) with the matching analytic derivative.
    static BoundaryTrajectory sine(const ProblemConfig& cfg, double amp) {
        BoundaryTrajectory l;
        l.values.resize(cfg.Nt + 1);
        l.derivs.resize(cfg.Nt + 1);
        const double om = 2.0 * M_PI / cfg.T;
        for (int n = 0; n <= cfg.Nt; ++n) {
            double t = cfg.time().node(n);
            l.values[n] = cfg.L0 + amp * std::sin(om * t);
            l.derivs[n] = amp * om * std::cos(om * t);
        }
        return l;
    }

    /// Full invariant check (exact start value, band, derivative bound,
    /// trapezoidal consistency between values and derivatives).
    void validate(const ProblemConfig& cfg) const {
        if (num_nodes() != cfg.Nt + 1 || derivs.size() != values.size())
            throw domain_violation("trajectory: expected " + std::to_string(cfg.Nt + 1) + " nodes");
        if (values[0] != cfg.L0)
            throw domain_violation("trajectory: l(0) must equal L0 exactly");
        const double dt = cfg.dt();
        const double tol = cfg.traj_tol();
        for (int n = 0; n <= cfg.Nt; ++n) {
            if (!(values[n] >= cfg.Lstar) || !(values[n] <= cfg.B))
                throw domain_violation("trajectory: node " + std::to_string(n) + " outside [Lstar, B]");
            if (!(std::abs(derivs[n]) <= cfg.R))
                throw domain_violation("trajectory: derivative bound violated at node " + std::to_string(n));
        }
        for (int n = 0; n < cfg.Nt; ++n) {
            double slope = (values[n + 1] - values[n]) / dt;
            double avg = 0.5 * (derivs[n] + derivs[n + 1]);
            if (!(std::abs(slope - avg) <= tol))
                throw domain_violation("trajectory: value/derivative consistency violated at node " +
                                       std::to_string(n));
        }
    }
};

/// Per-time-node coefficients of the transformed equation.
struct TransformCoeffs {
    std::vector<double> p;  // diffusion factor (l/L0)^(alpha-2)
    std::vector<double> q;  // advection factor l'/l
    std::vector<double> J;  // Jacobian l/L0

    double q_max() const { return max_abs(q); }
};

inline TransformCoeffs transform_coeffs(const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    TransformCoeffs tc;
    const int n = l.num_nodes();
    tc.p.resize(n);
    tc.q.resize(n);
    tc.J.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!(l.values[i] > 0.0))
            throw domain_violation("transform_coeffs: boundary position must stay positive (node " +
                                   std::to_string(i) + ")");
        double ratio = l.values[i] / cfg.L0;
        tc.p[i] = std::pow(ratio, cfg.alpha - 2.0);
        tc.q[i] = l.derivs[i] / l.values[i];
        tc.J[i] = ratio;
    }
    return tc;
}

/// Physical position x in [0, l_n] -> cylinder coordinate s in [0, L0].
inline double map_coordinates(double x, int n, const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    const double ln = l.values[n];
    const double slack = cfg.dz() * ln / cfg.L0;
    if (x < -slack || x > ln + slack)
        throw domain_violation("map_coordinates: x outside [0, l(t)]");
    return cfg.L0 * x / ln;
}

/// Inverse map: cylinder coordinate back to the physical position.
inline double inverse_map_coordinates(double zeta, int n, const BoundaryTrajectory& l,
                                      const ProblemConfig& cfg) {
    const double slack = cfg.dz();
    if (zeta < -slack || zeta > cfg.L0 + slack)
        throw domain_violation("inverse_map_coordinates: zeta outside [0, L0]");
    return zeta * l.values[n] / cfg.L0;
}

/// Nodal derivative d/ds of a slice: centered differences inside,
/// one-sided second-order stencils at the two ends.
inline std::vector<double> slice_gradient(const std::vector<double>& w, const SpaceGrid& grid) {
    const int Ns = grid.Ns;
    if (static_cast<int>(w.size()) != Ns + 1)
        throw domain_violation("slice_gradient: slice has wrong number of nodes");
    std::vector<double> g(Ns + 1);
    const double h = grid.dz;
    g[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    for (int j = 1; j < Ns; ++j) g[j] = (w[j + 1] - w[j - 1]) / (2.0 * h);
    g[Ns] = (3.0 * w[Ns] - 4.0 * w[Ns - 1] + w[Ns - 2]) / (2.0 * h);
    return g;
}

/// Physical gradient y_x at the mapped nodes: y_x = (L0/l_n) * w_s.
inline std::vector<double> pushforward_gradient(const std::vector<double>& w_slice, int n,
                                                const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    auto g = slice_gradient(w_slice, cfg.space());
    const double scale = cfg.L0 / l.values[n];
    for (auto& v : g) v *= scale;
    return g;
}

/// Sharp nodal indicator of a fixed physical window (lo,hi) at time node n:
/// node j counts when its physical image s_j*l_n/L0 lies inside.
inline std::vector<double> window_indicator(int n, const BoundaryTrajectory& l,
                                            const ProblemConfig& cfg, double lo, double hi) {
    const SpaceGrid grid = cfg.space();
    std::vector<double> w(grid.num_nodes(), 0.0);
    const double scale = l.values[n] / cfg.L0;
    for (int j = 0; j <= grid.Ns; ++j) {
        double x = grid.node(j) * scale;
        if (x > lo && x < hi) w[j] = 1.0;
    }
    return w;
}

/// Indicator of the control window (a,b).
inline std::vector<double> omega_indicator(int n, const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    return window_indicator(n, l, cfg, cfg.a, cfg.b);
}

/// Indicator of the inner window (c,d).
inline std::vector<double> omega0_indicator(int n, const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    return window_indicator(n, l, cfg, cfg.c, cfg.d);
}

}  // namespace fbc
