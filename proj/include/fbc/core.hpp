#pragma once

// Shared low-level pieces: error types, space/time grids, trapezoid
// quadrature, tridiagonal solves and deterministic float formatting.

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbc {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input file or parameter-validation failure; the message names the
/// violated constraint.
struct config_error : error {
    using error::error;
};

/// A value left the admissible domain (negative boundary position,
/// coordinate outside the physical interval, ...).
struct domain_violation : error {
    using error::error;
};

/// Linear-algebra level failure: singular tridiagonal system or
/// non-finite values produced during time stepping.
struct solver_failure : error {
    using error::error;
};

/// Iterative procedure exhausted its budget.
struct convergence_failure : error {
    std::vector<double> history;
    convergence_failure(const std::string& msg, std::vector<double> hist = {})
        : error(msg), history(std::move(hist)) {}
};

/// A boundary-trajectory iterate left the admissible set.
struct membership_violation : error {
    int iterate = -1;
    int node = -1;
    std::string constraint;
    membership_violation(const std::string& msg, int it, int nd, std::string c)
        : error(msg), iterate(it), node(nd), constraint(std::move(c)) {}
};

// ---------------------------------------------------------------------------
// Grids

/// Uniform vertex-centered grid on [0, length] with Ns cells.
/// Nodes sit at j*dz and double as control-volume centers; faces sit
/// halfway between nodes.
struct SpaceGrid {
    int Ns = 0;
    double length = 0.0;
    double dz = 0.0;

    SpaceGrid() = default;
    SpaceGrid(int ns, double len) : Ns(ns), length(len), dz(len / ns) {
        if (ns < 1 || !(len > 0.0)) throw config_error("SpaceGrid: Ns >= 1 and length > 0 required");
    }

    double node(int j) const { return j * dz; }
    // face(j) is the interface between nodes j and j+1, j = 0..Ns-1
    double face(int j) const { return (j + 0.5) * dz; }
    int num_nodes() const { return Ns + 1; }

    /// Trapezoid weight of node j (half cells at the ends).
    double weight(int j) const { return (j == 0 || j == Ns) ? 0.5 * dz : dz; }
};

struct TimeGrid {
    int Nt = 0;
    double T = 0.0;
    double dt = 0.0;

    TimeGrid() = default;
    TimeGrid(int nt, double horizon) : Nt(nt), T(horizon), dt(horizon / nt) {
        if (nt < 1 || !(horizon > 0.0)) throw config_error("TimeGrid: Nt >= 1 and T > 0 required");
    }

    double node(int n) const { return n * dt; }
    int num_nodes() const { return Nt + 1; }
};

// ---------------------------------------------------------------------------
// Quadrature helpers

/// Trapezoid rule over samples f_0..f_N on a uniform grid with spacing h.
inline double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

/// L2 norm of a nodal slice with trapezoid weights and an optional
/// Jacobian factor (constant per slice).
inline double slice_l2(const std::vector<double>& w, const SpaceGrid& grid, double jacobian = 1.0) {
    double s = 0.0;
    for (int j = 0; j <= grid.Ns; ++j) s += grid.weight(j) * w[j] * w[j];
    return std::sqrt(s * jacobian);
}

inline double slice_dot(const std::vector<double>& u, const std::vector<double>& v,
                        const SpaceGrid& grid, double jacobian = 1.0) {
    double s = 0.0;
    for (int j = 0; j <= grid.Ns; ++j) s += grid.weight(j) * u[j] * v[j];
    return s * jacobian;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------------------
// Tridiagonal solves
//
// Bands are stored as lower[i] = M(i, i-1), diag[i] = M(i, i),
// upper[i] = M(i, i+1); lower[0] and upper[n-1] are ignored.

struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(int n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    int size() const { return static_cast<int>(diag.size()); }
};

/// Thomas elimination; throws solver_failure on a vanishing pivot.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& m, const std::vector<double>& rhs) {
    const int n = m.size();
    std::vector<double> c(n), d(n), x(n);
    double piv = m.diag[0];
    if (std::abs(piv) < 1e-300) throw solver_failure("tridiagonal solve: zero pivot at row 0");
    c[0] = m.upper[0] / piv;
    d[0] = rhs[0] / piv;
    for (int i = 1; i < n; ++i) {
        piv = m.diag[i] - m.lower[i] * c[i - 1];
        if (std::abs(piv) < 1e-300)
            throw solver_failure("tridiagonal solve: zero pivot at row " + std::to_string(i));
        c[i] = m.upper[i] / piv;
        d[i] = (rhs[i] - m.lower[i] * d[i - 1]) / piv;
    }
    x[n - 1] = d[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

/// Solve with the transpose of m (bands swapped).
inline std::vector<double> solve_tridiagonal_transposed(const Tridiagonal& m, const std::vector<double>& rhs) {
    const int n = m.size();
    Tridiagonal t(n);
    t.diag = m.diag;
    for (int i = 0; i + 1 < n; ++i) {
        // M^T(i, i+1) = M(i+1, i), M^T(i+1, i) = M(i, i+1)
        t.upper[i] = m.lower[i + 1];
        t.lower[i + 1] = m.upper[i];
    }
    return solve_tridiagonal(t, rhs);
}

/// y = M x for a tridiagonal M.
inline std::vector<double> apply_tridiagonal(const Tridiagonal& m, const std::vector<double>& x) {
    const int n = m.size();
    std::vector<double> y(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = m.diag[i] * x[i];
        if (i > 0) s += m.lower[i] * x[i - 1];
        if (i + 1 < n) s += m.upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

// ---------------------------------------------------------------------------
// Deterministic formatting and randomness

/// Round-trip exact double formatting (17 significant digits), used by
/// every CSV writer so repeated runs are byte identical.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// mt19937 wrapper so all property sweeps draw from one seeded source.
class Rng {
  public:
    explicit Rng(unsigned seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(gen_);
    }

    /// Nodal slice with entries in [-1,1]; endpoints forced to the given values.
    std::vector<double> slice(int num_nodes, double left, double right) {
        std::vector<double> v(num_nodes);
        for (auto& x : v) x = uniform(-1.0, 1.0);
        v.front() = left;
        v.back() = right;
        return v;
    }

    std::mt19937& raw() { return gen_; }

  private:
    std::mt19937 gen_;
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace fbc
