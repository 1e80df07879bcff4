#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_helpers.hpp"

using namespace fbc;

TEST_CASE("boundary gradient of trivial and affine fields") {
    ProblemConfig cfg = fbct::base_config();
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    const SpaceGrid grid = cfg.space();

    auto z = TransformedField::zeros(cfg);
    for (double v : boundary_gradient(z, l, cfg)) CHECK(v == 0.0);

    // w = L0 - s: the one-sided stencil is exact on affine slices
    TransformedField w = TransformedField::zeros(cfg);
    for (int n = 0; n <= cfg.Nt; ++n)
        for (int j = 0; j <= grid.Ns; ++j) w.at(n, j) = cfg.L0 - grid.node(j);
    for (double v : boundary_gradient(w, l, cfg)) CHECK(v == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("boundary gradient of a quadratic with vanishing edge slope") {
    ProblemConfig cfg = fbct::base_config();
    cfg.B = 2.5;
    auto l = BoundaryTrajectory::constant(cfg, 2.0 * cfg.L0);
    l.values[0] = cfg.L0;  // keep the exact start value
    const SpaceGrid grid = cfg.space();
    TransformedField w = TransformedField::zeros(cfg);
    for (int n = 0; n <= cfg.Nt; ++n)
        for (int j = 0; j <= grid.Ns; ++j) {
            double d = cfg.L0 - grid.node(j);
            w.at(n, j) = d * d;
        }
    auto V = boundary_gradient(w, l, cfg);
    for (int n = 1; n <= cfg.Nt; ++n) CHECK(std::abs(V[n]) <= 1e-12);
}

TEST_CASE("flux-law integration is exact on constant and linear gradients") {
    ProblemConfig cfg = fbct::base_config();
    cfg.alpha = 0.0;
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    const TimeGrid tg = cfg.time();

    const double vbar = 0.37;
    std::vector<double> V(cfg.Nt + 1, vbar);
    auto traj = integrate_flux_law(l, V, cfg);
    for (int n = 0; n <= cfg.Nt; ++n) {
        CHECK(traj.values[n] == doctest::Approx(cfg.L0 - vbar * tg.node(n)).epsilon(1e-14));
        CHECK(traj.derivs[n] == -vbar);
    }

    for (int n = 0; n <= cfg.Nt; ++n) V[n] = tg.node(n);
    auto traj2 = integrate_flux_law(l, V, cfg);
    for (int n = 0; n <= cfg.Nt; ++n)
        CHECK(traj2.values[n] ==
              doctest::Approx(cfg.L0 - 0.5 * tg.node(n) * tg.node(n)).epsilon(1e-14));
}

TEST_CASE("update map with zero data returns the resting boundary") {
    ProblemConfig cfg = fbct::base_config();
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    std::vector<double> zero(cfg.Ns + 1, 0.0);
    auto lam = lambda_map(l, zero, cfg);
    for (int n = 0; n <= cfg.Nt; ++n) {
        CHECK(lam.trajectory.values[n] == cfg.L0);
        CHECK(lam.trajectory.derivs[n] == 0.0);
    }
    CHECK(lam.trajectory.values[0] == cfg.L0);
}

TEST_CASE("update map output satisfies the flux law identically at nodes") {
    ProblemConfig cfg = fbct::base_config();
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    auto y0 = fbct::sine_state(cfg, 0.05);
    auto lam = lambda_map(l, y0, cfg);
    for (int n = 0; n <= cfg.Nt; ++n) {
        double expect = -std::pow(l.values[n], cfg.alpha) * lam.V[n];
        CHECK(lam.trajectory.derivs[n] == expect);
    }
    CHECK(lam.trajectory.values[0] == cfg.L0);
}

TEST_CASE("membership verdicts name the first violated constraint") {
    ProblemConfig cfg = fbct::base_config();
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    CHECK(membership_check(l, cfg).member);

    auto lu = l;
    lu.values[5] = cfg.B + 0.01;
    auto v1 = membership_check(lu, cfg);
    CHECK_FALSE(v1.member);
    CHECK(v1.node == 5);
    CHECK(v1.constraint == "upper bound l <= B");

    auto ld = BoundaryTrajectory::constant(cfg, cfg.L0);
    const TimeGrid tg = cfg.time();
    for (int n = 0; n <= cfg.Nt; ++n) {
        ld.values[n] = cfg.L0 + 1.01 * cfg.R * tg.node(n);
        ld.derivs[n] = 1.01 * cfg.R;
    }
    ld.values[0] = cfg.L0;
    auto v2 = membership_check(ld, cfg);
    CHECK_FALSE(v2.member);
    CHECK(v2.constraint == "derivative bound |l'| <= R");
}

TEST_CASE("Hoelder norm closed forms") {
    const int N = 200;
    std::vector<double> t(N + 1), lin(N + 1), root(N + 1);
    for (int n = 0; n <= N; ++n) {
        t[n] = double(n) / N;
        lin[n] = t[n];
        root[n] = std::sqrt(t[n]);
    }
    CHECK(holder_norm(std::vector<double>(N + 1, -3.0), t, 0.5) == 3.0);
    CHECK(holder_norm(lin, t, 0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(holder_norm(root, t, 0.5) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK_THROWS_AS(holder_norm({1.0}, {0.0}, 0.5), domain_violation);
    CHECK_THROWS_AS(holder_norm(lin, t, 0.0), domain_violation);
}

TEST_CASE("Hoelder norm is monotone in the exponent for unit-interval samples") {
    const int N = 64;
    std::vector<double> t(N + 1), f(N + 1);
    Rng rng(3);
    for (int n = 0; n <= N; ++n) {
        t[n] = double(n) / N;
        f[n] = rng.uniform(-1.0, 1.0);
    }
    double prev = holder_norm(f, t, 0.1);
    for (double kappa : {0.25, 0.5, 0.75, 1.0}) {
        double cur = holder_norm(f, t, kappa);
        CHECK(cur >= prev * (1.0 - 1e-14));
        prev = cur;
    }
}

TEST_CASE("fixed point with zero data converges immediately to rest") {
    ProblemConfig cfg = fbct::base_config();
    std::vector<double> zero(cfg.Ns + 1, 0.0);
    auto rep = fixed_point_solve(zero, cfg);
    CHECK(rep.outer_iterations == 1);
    CHECK(rep.ode_residual == 0.0);
    CHECK(rep.terminal_norm == 0.0);
    for (double v : rep.trajectory.values) CHECK(v == cfg.L0);
}

TEST_CASE("reference small-data run reaches a member fixed point") {
    ProblemConfig cfg = fbct::base_config();  // alpha 0.5, T 1, beta 1e-3
    auto y0 = fbct::sine_state(cfg, 0.05);
    auto rep = fixed_point_solve(y0, cfg);

    CHECK(rep.outer_iterations <= cfg.max_outer);
    CHECK(rep.c1_distance_history.back() <= cfg.tol_fp);
    CHECK(membership_check(rep.trajectory, cfg).member);
    CHECK(rep.terminal_norm <= cfg.beta);
    CHECK(rep.ode_residual <= 10.0 * (cfg.dt() + cfg.dz()));
    CHECK(rep.holder_norm > 0.0);
    rep.trajectory.validate(cfg);
}

TEST_CASE("fixed point converges across the weak and strong degeneracy ranges") {
    for (double alpha : {0.0, 1.0, 1.9}) {
        ProblemConfig cfg = fbct::base_config();
        cfg.alpha = alpha;
        auto y0 = fbct::sine_state(cfg, 0.05);
        auto rep = fixed_point_solve(y0, cfg);
        CHECK(rep.c1_distance_history.back() <= cfg.tol_fp);
        CHECK(rep.terminal_norm <= cfg.beta);
        CHECK(membership_check(rep.trajectory, cfg).member);
    }
}

TEST_CASE("large data raises a membership violation with advice") {
    ProblemConfig cfg = fbct::base_config();
    auto y0 = fbct::sine_state(cfg, 10.0);
    bool threw = false;
    try {
        fixed_point_solve(y0, cfg);
    } catch (const membership_violation& e) {
        threw = true;
        CHECK(e.iterate >= 1);
        CHECK(!e.constraint.empty());
        CHECK(std::string(e.what()).find("reduce ||y0||") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("continuation with a single tolerance reduces to one fixed-point solve") {
    ProblemConfig cfg = fbct::hum_config();
    auto y0 = fbct::sine_state(cfg, cfg.y0_amp);
    auto res = beta_continuation(y0, cfg, {1e-3});
    CHECK(res.completed);
    CHECK(res.reports.size() == 1);
    CHECK(res.c1_distances.empty());

    ProblemConfig single = cfg;
    single.beta = 1e-3;
    auto rep = fixed_point_solve(y0, single);
    for (int n = 0; n <= cfg.Nt; ++n)
        CHECK(rep.trajectory.values[n] == res.reports[0].trajectory.values[n]);
}

TEST_CASE("continuation distances decrease and control norms stay banded") {
    ProblemConfig cfg = fbct::hum_config();
    auto y0 = fbct::sine_state(cfg, cfg.y0_amp);
    auto res = beta_continuation(y0, cfg, {1e-2, 1e-3, 1e-4});
    CHECK(res.completed);
    REQUIRE(res.c1_distances.size() == 2);
    CHECK(res.c1_distances[1] < res.c1_distances[0]);
    double lo = *std::min_element(res.control_norms.begin(), res.control_norms.end());
    double hi = *std::max_element(res.control_norms.begin(), res.control_norms.end());
    CHECK(hi / lo <= 2.0);
}

TEST_CASE("continuation with zero data yields identical fixed points") {
    ProblemConfig cfg = fbct::base_config();
    std::vector<double> zero(cfg.Ns + 1, 0.0);
    auto res = beta_continuation(zero, cfg, {1e-2, 1e-3, 1e-4});
    CHECK(res.completed);
    for (double d : res.c1_distances) CHECK(d == 0.0);
}

TEST_CASE("continuation rejects non-decreasing tolerance lists") {
    ProblemConfig cfg = fbct::base_config();
    std::vector<double> zero(cfg.Ns + 1, 0.0);
    CHECK_THROWS_AS(beta_continuation(zero, cfg, {1e-3, 1e-2}), config_error);
    CHECK_THROWS_AS(beta_continuation(zero, cfg, {}), config_error);
}
