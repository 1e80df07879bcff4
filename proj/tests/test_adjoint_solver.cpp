#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_helpers.hpp"

using namespace fbc;

TEST_CASE("zero terminal data and source give the zero adjoint field") {
    ProblemConfig cfg = fbct::base_config();
    auto l = BoundaryTrajectory::sine(cfg, 0.05);
    std::vector<double> phi_T(cfg.Ns + 1, 0.0);
    auto phi = solve_adjoint(phi_T, l, cfg);
    CHECK(phi.max_abs_value() == 0.0);
}

TEST_CASE("backward heat oracle on the fixed cylinder") {
    ProblemConfig cfg = fbct::base_config();
    cfg.alpha = 0.0;
    cfg.T = 0.1;
    cfg.Ns = 256;
    cfg.Nt = 1024;
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    const SpaceGrid grid = cfg.space();
    std::vector<double> phi_T(grid.num_nodes());
    for (int j = 0; j <= grid.Ns; ++j) phi_T[j] = std::sin(M_PI * grid.node(j));

    auto phi = solve_adjoint(phi_T, l, cfg);
    double max_err = 0.0;
    for (int n = 0; n <= cfg.Nt; ++n)
        for (int j = 0; j <= grid.Ns; ++j) {
            double exact =
                std::exp(-M_PI * M_PI * (cfg.T - cfg.time().node(n))) * std::sin(M_PI * grid.node(j));
            max_err = std::max(max_err, std::abs(phi.at(n, j) - exact));
        }
    CHECK(max_err <= 1e-3);
}

TEST_CASE("adjoint boundary values follow the regime at every slice") {
    for (double alpha : {0.5, 1.5}) {
        ProblemConfig cfg = fbct::base_config();
        cfg.alpha = alpha;
        auto l = BoundaryTrajectory::sine(cfg, 0.05);
        Rng rng(5);
        auto phi_T = fbct::random_state(rng, cfg);
        auto phi = solve_adjoint(phi_T, l, cfg);
        for (int n = 0; n <= cfg.Nt; ++n) {
            CHECK(phi.at(n, cfg.Ns) == 0.0);
            if (cfg.left_boundary() == LeftBoundary::dirichlet) CHECK(phi.at(n, 0) == 0.0);
        }
    }
}

TEST_CASE("adjoint stepping is the exact transpose of the forward map") {
    for (double alpha : {0.0, 0.5, 1.0, 1.5}) {
        ProblemConfig cfg = fbct::duality_config();
        cfg.alpha = alpha;
        auto l = BoundaryTrajectory::sine(cfg, 0.05);
        auto tc = transform_coeffs(l, cfg);
        const SpaceGrid grid = cfg.space();
        Rng rng(cfg.seed);
        for (int seed = 0; seed < 20; ++seed) {
            auto u = fbct::random_state(rng, cfg);
            auto v = fbct::random_state(rng, cfg);
            auto Fu = solve_forward(u, l, cfg);
            auto Av = solve_adjoint(v, l, cfg);
            double lhs = slice_dot(Fu.slice(cfg.Nt), Av.slice(cfg.Nt), grid, tc.J[cfg.Nt]);
            double rhs = slice_dot(Fu.slice(0), Av.slice(0), grid, tc.J[0]);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1e-6));
        }
    }
}

TEST_CASE("duality identity: trivial case") {
    ProblemConfig cfg = fbct::duality_config();
    auto l = BoundaryTrajectory::sine(cfg, 0.05);
    std::vector<double> zero(cfg.Ns + 1, 0.0);
    Rng rng(17);
    auto psi_T = fbct::random_state(rng, cfg);
    auto v = ControlField::zeros(cfg, l);
    CHECK(duality_gap(v.field, psi_T, zero, l, cfg) == 0.0);
}

TEST_CASE("duality identity holds to round-off with a moving boundary") {
    for (double alpha : {0.0, 0.5, 1.0, 1.5}) {
        ProblemConfig cfg = fbct::duality_config();
        cfg.alpha = alpha;
        auto l = BoundaryTrajectory::sine(cfg, 0.05);
        Rng rng(cfg.seed);
        for (int seed = 0; seed < 20; ++seed) {
            auto v = fbct::random_control(rng, l, cfg);
            auto psi_T = fbct::random_state(rng, cfg);
            auto y0 = fbct::random_state(rng, cfg);
            CHECK(duality_gap(v.field, psi_T, y0, l, cfg) <= 1e-10);
        }
    }
}

TEST_CASE("duality identity on the fixed cylinder") {
    ProblemConfig cfg = fbct::duality_config();
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    Rng rng(99);
    for (int seed = 0; seed < 5; ++seed) {
        auto v = fbct::random_control(rng, l, cfg);
        auto psi_T = fbct::random_state(rng, cfg);
        auto y0 = fbct::random_state(rng, cfg);
        CHECK(duality_gap(v.field, psi_T, y0, l, cfg) <= 1e-12);
    }
}

TEST_CASE("adjoint source term enters with the backward sign convention") {
    // With phi_T = 0 and a constant negative source, phi grows backward
    // from T like the time-reversed accumulation (T - t) * |g|.
    ProblemConfig cfg = fbct::base_config();
    cfg.alpha = 0.0;
    cfg.Ns = 64;
    cfg.Nt = 256;
    auto l = BoundaryTrajectory::constant(cfg, cfg.L0);
    std::vector<double> phi_T(cfg.Ns + 1, 0.0);
    TransformedField g = TransformedField::zeros(cfg);
    for (auto& x : g.data) x = -1.0;
    auto phi = solve_adjoint(phi_T, g, l, cfg);
    // interior midpoint at t = 0: diffusion saturates the profile, so just
    // check positivity and the monotone backward growth
    int mid = cfg.Ns / 2;
    CHECK(phi.at(0, mid) > 0.0);
    CHECK(phi.at(0, mid) > phi.at(cfg.Nt / 2, mid));
    CHECK(phi.at(cfg.Nt, mid) == 0.0);
}
