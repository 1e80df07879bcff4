#pragma once

// Fixed-point machinery for the free boundary: extraction of the boundary
// gradient V(t) = y_x(l(t),t), the map
//
//   Lambda(l)(t) = L0 - int_0^t l^alpha(tau) y_x(l(tau),tau) dtau,
//
// membership in the admissible set
//
//   M = { l in C1 : Lstar <= l <= B, l(0) = L0, ||l'||_inf <= R },
//
// discrete Hoelder norms, the damped Picard iteration, and the
// continuation in the terminal tolerance beta.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"
#include "fbc/hum_control.hpp"

namespace fbc {

/// Physical boundary gradient y_x(l(t_n), t_n) per time node, using the
/// second-order one-sided stencil with the right Dirichlet zero:
/// w_s(L0) ~ (-4 w_{Ns-1} + w_{Ns-2}) / (2 dz).
inline std::vector<double> boundary_gradient(const TransformedField& y, const BoundaryTrajectory& l,
                                             const ProblemConfig& cfg) {
    const SpaceGrid grid = cfg.space();
    const int Ns = grid.Ns;
    std::vector<double> V(y.nt + 1);
    for (int n = 0; n <= y.nt; ++n) {
        double ws = (-4.0 * y.at(n, Ns - 1) + y.at(n, Ns - 2)) / (2.0 * grid.dz);
        V[n] = (cfg.L0 / l.values[n]) * ws;
    }
    return V;
}

struct MembershipVerdict {
    bool member = true;
    int node = -1;
    std::string constraint;
};

/// Verifies l(0) = L0 exactly, the band Lstar <= l <= B and the derivative
/// bound |l'| <= R at every node; reports the first violation.
inline MembershipVerdict membership_check(const BoundaryTrajectory& l, const ProblemConfig& cfg) {
    MembershipVerdict v;
    if (l.values.empty() || l.values[0] != cfg.L0) {
        v.member = false;
        v.node = 0;
        v.constraint = "initial value l(0) = L0";
        return v;
    }
    for (int n = 0; n < l.num_nodes(); ++n) {
        if (!(l.values[n] >= cfg.Lstar)) {
            v = {false, n, "lower bound l >= Lstar"};
            return v;
        }
        if (!(l.values[n] <= cfg.B)) {
            v = {false, n, "upper bound l <= B"};
            return v;
        }
        if (!(std::abs(l.derivs[n]) <= cfg.R)) {
            v = {false, n, "derivative bound |l'| <= R"};
            return v;
        }
    }
    return v;
}

/// Integrates the flux law into a new trajectory: values are the
/// cumulative trapezoid of L0 - int l^alpha V, derivatives are set
/// analytically to -l^alpha V, so the stored pair satisfies the flux law
/// identically at the nodes (and is trapezoid-consistent by construction).
inline BoundaryTrajectory integrate_flux_law(const BoundaryTrajectory& l,
                                             const std::vector<double>& V,
                                             const ProblemConfig& cfg) {
    const int Nt = cfg.Nt;
    const double dt = cfg.dt();
    std::vector<double> flux(Nt + 1);
    for (int n = 0; n <= Nt; ++n) flux[n] = std::pow(l.values[n], cfg.alpha) * V[n];

    BoundaryTrajectory out;
    out.values.resize(Nt + 1);
    out.derivs.resize(Nt + 1);
    out.values[0] = cfg.L0;
    for (int n = 0; n < Nt; ++n)
        out.values[n + 1] = out.values[n] - 0.5 * dt * (flux[n] + flux[n + 1]);
    for (int n = 0; n <= Nt; ++n) out.derivs[n] = -flux[n];
    return out;
}

struct LambdaResult {
    BoundaryTrajectory trajectory;
    std::vector<double> V;  // boundary gradient of the controlled state on the input l
    HUMReport hum;
    double control_norm = 0.0;
};

/// One application of the boundary-update map: synthesize the
/// beta-control on the input trajectory, extract the boundary gradient of
/// the controlled state and integrate the flux law.
inline LambdaResult lambda_map(const BoundaryTrajectory& l, const std::vector<double>& y0,
                               const ProblemConfig& cfg) {
    LambdaResult out;
    HUMSolution sol = hum_solve(y0, l, cfg);
    out.V = boundary_gradient(sol.state, l, cfg);
    out.hum = sol.report;
    out.control_norm = sol.report.control_norm;
    out.trajectory = integrate_flux_law(l, out.V, cfg);
    return out;
}

/// Discrete C1 distance: max nodal value gap plus max nodal derivative gap.
inline double c1_distance(const BoundaryTrajectory& u, const BoundaryTrajectory& v) {
    double dv = 0.0, dd = 0.0;
    for (int n = 0; n < u.num_nodes(); ++n) {
        dv = std::max(dv, std::abs(u.values[n] - v.values[n]));
        dd = std::max(dd, std::abs(u.derivs[n] - v.derivs[n]));
    }
    return dv + dd;
}

/// ||f||_C + sup_{i != j} |f_i - f_j| / |t_i - t_j|^kappa over all node
/// pairs (exhaustive scan).
inline double holder_norm(const std::vector<double>& f, const std::vector<double>& t, double kappa) {
    if (f.size() < 2) throw domain_violation("holder_norm: at least two samples required");
    if (f.size() != t.size()) throw domain_violation("holder_norm: sample/time size mismatch");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw domain_violation("holder_norm: kappa must lie in (0,1]");
    double sup = max_abs(f);
    double semi = 0.0;
    const std::size_t n = f.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dtau = std::abs(t[i] - t[j]);
            if (dtau == 0.0) continue;
            semi = std::max(semi, std::abs(f[i] - f[j]) / std::pow(dtau, kappa));
        }
    return sup + semi;
}

struct FixedPointReport {
    int outer_iterations = 0;
    std::vector<double> c1_distance_history;
    double ode_residual = 0.0;   // max_n |l'_n + l_n^alpha V_n| at the fixed point
    double terminal_norm = 0.0;  // ||y(T)||_{L2(0,l(T))} of the associated state
    double holder_norm = 0.0;    // Hoelder norm of the final map derivative
    double control_norm = 0.0;
    BoundaryTrajectory trajectory;
};

/// Damped Picard iteration l <- (1-gamma) l + gamma Lambda(l) from the
/// given start (constant L0 by default). Iterates that leave the
/// admissible set raise membership_violation; the damping falls back to
/// 1/2 once the C1 distance grows twice in a row.
inline FixedPointReport fixed_point_solve(const std::vector<double>& y0, const ProblemConfig& cfg,
                                          const BoundaryTrajectory* warm_start = nullptr) {
    BoundaryTrajectory l =
        warm_start ? *warm_start : BoundaryTrajectory::constant(cfg, cfg.L0);
    double gamma = cfg.fp_damping;
    FixedPointReport rep;
    double prev_dist = -1.0;
    int growth_streak = 0;
    bool converged = false;

    for (int k = 1; k <= cfg.max_outer; ++k) {
        LambdaResult lam = lambda_map(l, y0, cfg);
        const MembershipVerdict verdict = membership_check(lam.trajectory, cfg);
        if (!verdict.member)
            throw membership_violation(
                "fixed_point_solve: iterate " + std::to_string(k) + " violates '" +
                    verdict.constraint + "' at node " + std::to_string(verdict.node) +
                    "; reduce ||y0||",
                k, verdict.node, verdict.constraint);

        BoundaryTrajectory next;
        next.values.resize(l.num_nodes());
        next.derivs.resize(l.num_nodes());
        for (int n = 0; n < l.num_nodes(); ++n) {
            next.values[n] = (1.0 - gamma) * l.values[n] + gamma * lam.trajectory.values[n];
            next.derivs[n] = (1.0 - gamma) * l.derivs[n] + gamma * lam.trajectory.derivs[n];
        }

        const double dist = c1_distance(next, l);
        rep.c1_distance_history.push_back(dist);
        rep.outer_iterations = k;
        l = next;
        if (dist <= cfg.tol_fp) {
            converged = true;
            break;
        }
        if (prev_dist >= 0.0 && dist > prev_dist) {
            if (++growth_streak >= 2) gamma = 0.5;
        } else {
            growth_streak = 0;
        }
        prev_dist = dist;
    }
    if (!converged)
        throw convergence_failure("fixed_point_solve: no C1-convergence within " +
                                      std::to_string(cfg.max_outer) + " outer iterations",
                                  rep.c1_distance_history);

    // Evaluate the map once more on the converged trajectory to report the
    // flux-law residual and the associated state.
    LambdaResult fin = lambda_map(l, y0, cfg);
    double res = 0.0;
    for (int n = 0; n <= cfg.Nt; ++n)
        res = std::max(res, std::abs(l.derivs[n] + std::pow(l.values[n], cfg.alpha) * fin.V[n]));
    rep.ode_residual = res;
    rep.terminal_norm = fin.hum.final_terminal_norm;
    rep.control_norm = fin.control_norm;
    std::vector<double> times(cfg.Nt + 1);
    for (int n = 0; n <= cfg.Nt; ++n) times[n] = cfg.time().node(n);
    rep.holder_norm = holder_norm(fin.trajectory.derivs, times, cfg.kappa);
    rep.trajectory = l;
    return rep;
}

struct BetaContinuationResult {
    std::vector<double> betas;                  // the tolerances actually completed
    std::vector<FixedPointReport> reports;      // one per completed beta
    std::vector<double> c1_distances;           // ||L_{m+1} - L_m||_{C1} between fixed points
    std::vector<double> control_norms;
    bool completed = true;
    std::string failure;
};

/// Runs the fixed-point solve for each beta in decreasing order, warm
/// starting each run from the previous fixed point. Failures abort the
/// sweep but partial results are returned.
inline BetaContinuationResult beta_continuation(const std::vector<double>& y0,
                                                const ProblemConfig& base,
                                                const std::vector<double>& betas) {
    if (betas.empty()) throw config_error("beta_continuation: betas must not be empty");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0)) throw config_error("beta_continuation: betas must be positive");
        if (i > 0 && !(betas[i] < betas[i - 1]))
            throw config_error("beta_continuation: betas must be strictly decreasing");
    }
    BetaContinuationResult out;
    BoundaryTrajectory warm;
    bool have_warm = false;
    for (double beta : betas) {
        ProblemConfig cfg = base;
        cfg.beta = beta;
        try {
            FixedPointReport rep = fixed_point_solve(y0, cfg, have_warm ? &warm : nullptr);
            if (have_warm) out.c1_distances.push_back(c1_distance(rep.trajectory, warm));
            warm = rep.trajectory;
            have_warm = true;
            out.betas.push_back(beta);
            out.control_norms.push_back(rep.control_norm);
            out.reports.push_back(std::move(rep));
        } catch (const error& e) {
            out.completed = false;
            out.failure = e.what();
            break;
        }
    }
    return out;
}

}  // namespace fbc
