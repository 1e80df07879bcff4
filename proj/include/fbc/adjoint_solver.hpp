#pragma once

// Backward adjoint solve as the exact algebraic transpose of the forward
// stepping. Transposition is taken with respect to the Jacobian-weighted
// slice inner products
//
//   <u, v>_n = sum_j u_j v_j w_j J_n,   w_j = trapezoid weight,
//
// so that the discrete duality identity
//
//   iint_omega v phi  =  (phi_T, y^v(T))_{L2(0,l(T))} - (phi(.,0), y0)_{L2(0,L0)}
//
// holds to round-off for every source field v, not merely up to
// discretization error. Constrained (Dirichlet) entries are kept at zero
// on both sides of the transposition.

#include <cmath>
#include <vector>

#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"

namespace fbc {

using AdjointField = TransformedField;

/// Marches phi backward from the terminal slice. With g = 0 this is the
/// exact discrete adjoint of solve_forward; a nonzero g enters with the
/// sign convention phi_t + (x^alpha phi_x)_x = g.
inline AdjointField solve_adjoint(const std::vector<double>& phi_T, const TransformedField& g,
                                  const BoundaryTrajectory& l, const ProblemConfig& cfg,
                                  AdvectionScheme adv = AdvectionScheme::centered) {
    const SpaceGrid grid = cfg.space();
    const int Ns = grid.Ns, Nt = cfg.Nt;
    if (static_cast<int>(phi_T.size()) != Ns + 1)
        throw domain_violation("solve_adjoint: terminal slice has wrong size");
    const bool has_source = !g.data.empty();
    if (has_source && (g.nt != Nt || g.ns != Ns))
        throw domain_violation("solve_adjoint: source field has wrong shape");

    const LeftBoundary regime = cfg.left_boundary();
    const TransformCoeffs tc = transform_coeffs(l, cfg);
    const auto faces = detail::face_diffusivities(grid, cfg.alpha, regime);
    const double dt = cfg.dt();

    AdjointField phi(Nt, Ns, regime);
    std::vector<double> cur = phi_T;
    detail::enforce_left_bc(cur, regime);
    phi.set_slice(Nt, cur);

    std::vector<double> rhs(Ns + 1);
    for (int n = Nt - 1; n >= 0; --n) {
        const Tridiagonal M = detail::build_step_matrix(tc.p[n], tc.q[n], dt, grid, faces, regime, adv);
        // rhs = W_{n+1} cur - dt W_n g^n, then solve M^T z = rhs and
        // scale back: phi^n = W_n^{-1} z.
        for (int j = 0; j <= Ns; ++j) {
            rhs[j] = grid.weight(j) * tc.J[n + 1] * cur[j];
            if (has_source) rhs[j] -= dt * grid.weight(j) * tc.J[n] * g.at(n, j);
        }
        cur = solve_tridiagonal_transposed(M, rhs);
        for (int j = 0; j <= Ns; ++j) cur[j] /= grid.weight(j) * tc.J[n];
        detail::enforce_left_bc(cur, regime);
        if (!all_finite(cur))
            throw solver_failure("solve_adjoint: non-finite values at step " + std::to_string(n));
        phi.set_slice(n, cur);
    }
    return phi;
}

inline AdjointField solve_adjoint(const std::vector<double>& phi_T, const BoundaryTrajectory& l,
                                  const ProblemConfig& cfg,
                                  AdvectionScheme adv = AdvectionScheme::centered) {
    return solve_adjoint(phi_T, TransformedField{}, l, cfg, adv);
}

/// Discrete space-time pairing of a source field against an adjoint field:
/// the step that produces slice m pairs the source slice m with the
/// adjoint slice m-1 and Jacobian J_{m-1}, matching the transpose of the
/// forward injection exactly.
inline double source_adjoint_pairing(const TransformedField& v, const AdjointField& phi,
                                     const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    const SpaceGrid grid = cfg.space();
    const TransformCoeffs tc = transform_coeffs(l, cfg);
    const double dt = cfg.dt();
    double s = 0.0;
    for (int m = 1; m <= cfg.Nt; ++m)
        for (int j = 0; j <= grid.Ns; ++j)
            s += dt * grid.weight(j) * tc.J[m - 1] * v.at(m, j) * phi.at(m - 1, j);
    return s;
}

/// Residual of the duality identity, normalized by its largest term.
/// y^v is the forward solution with source v and initial state y0.
inline double duality_gap(const TransformedField& v, const std::vector<double>& psi_T,
                          const std::vector<double>& y0, const BoundaryTrajectory& l,
                          const ProblemConfig& cfg) {
    const SpaceGrid grid = cfg.space();
    const TransformCoeffs tc = transform_coeffs(l, cfg);

    const AdjointField psi = solve_adjoint(psi_T, l, cfg);
    const TransformedField y = solve_forward(y0, v, l, cfg);

    const double window_term = source_adjoint_pairing(v, psi, l, cfg);
    const double terminal_term = slice_dot(psi.slice(cfg.Nt), y.slice(cfg.Nt), grid, tc.J[cfg.Nt]);
    const double initial_term = slice_dot(psi.slice(0), y.slice(0), grid, tc.J[0]);

    const double gap = std::abs(window_term - terminal_term + initial_term);
    const double scale = std::max({std::abs(window_term), std::abs(terminal_term), std::abs(initial_term)});
    if (scale == 0.0) return 0.0;
    return gap / scale;
}

}  // namespace fbc
