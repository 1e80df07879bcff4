#pragma once

// Subcommand pipelines behind the command line: each run writes its CSV
// artifacts plus a manifest.json into an output directory derived from a
// hash of the configuration, and returns the manifest. A sweep runs
// independent configurations concurrently with disjoint directories.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbc/adjoint_solver.hpp"
#include "fbc/carleman_weights.hpp"
#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"
#include "fbc/free_boundary.hpp"
#include "fbc/hum_control.hpp"
#include "fbc/io.hpp"

namespace fbc {

inline const std::vector<std::string>& known_subcommands() {
    static const std::vector<std::string> names = {
        "solve-forward", "solve-adjoint", "control",      "free-boundary",
        "beta-sweep",    "carleman-scan", "hardy-check",  "convergence"};
    return names;
}

struct RunManifest {
    std::map<std::string, std::string> config_echo;
    std::string subcommand;
    std::map<std::string, double> metrics;
    std::vector<double> residual_history;     // only for control-style runs
    std::vector<std::string> artifact_paths;  // relative to the run directory
    double wall_time_seconds = 0.0;
    bool success = true;
    std::string error_message;
    std::string run_dir;
};

namespace detail {

/// FNV-1a over the canonical config serialization (plus an optional salt
/// used by sweeps to keep directories disjoint).
inline std::string config_hash(const ProblemConfig& cfg, const std::string& salt = "") {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : cfg.as_map()) {
        mix(k);
        mix("=");
        mix(v);
        mix(";");
    }
    mix(salt);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline BoundaryTrajectory cli_trajectory(const ProblemConfig& cfg) {
    if (cfg.l_mode == "sine") return BoundaryTrajectory::sine(cfg, cfg.l_amp);
    return BoundaryTrajectory::constant(cfg, cfg.L0);
}

inline std::vector<double> cli_initial_state(const ProblemConfig& cfg) {
    const SpaceGrid grid = cfg.space();
    std::vector<double> y0(grid.num_nodes());
    for (int j = 0; j <= grid.Ns; ++j)
        y0[j] = cfg.y0_amp * std::sin(M_PI * grid.node(j) / cfg.L0);
    return y0;
}

inline nlohmann::ordered_json hum_report_json(const HUMReport& rep) {
    nlohmann::ordered_json j;
    j["iterations"] = rep.iterations;
    j["final_terminal_norm"] = rep.final_terminal_norm;
    j["control_norm"] = rep.control_norm;
    j["residual_history"] = rep.residual_history;
    return j;
}

inline nlohmann::ordered_json fixed_point_report_json(const FixedPointReport& rep) {
    nlohmann::ordered_json j;
    j["outer_iterations"] = rep.outer_iterations;
    j["ode_residual"] = rep.ode_residual;
    j["terminal_norm"] = rep.terminal_norm;
    j["holder_norm"] = rep.holder_norm;
    j["c1_distance_history"] = rep.c1_distance_history;
    return j;
}

inline void write_json(const std::string& path, const nlohmann::ordered_json& j) {
    auto out = open_output(path);
    out << j.dump(2) << "\n";
}

struct RunContext {
    std::filesystem::path dir;
    RunManifest* manifest;

    std::string file(const std::string& name) const {
        manifest->artifact_paths.push_back(name);
        return (dir / name).string();
    }
    void metric(const std::string& key, double value) const { manifest->metrics[key] = value; }
};

inline void run_solve_forward(const ProblemConfig& cfg, const RunContext& ctx) {
    auto l = cli_trajectory(cfg);
    auto y0 = cli_initial_state(cfg);
    TransformedField w = solve_forward(y0, l, cfg);
    write_field_csv(ctx.file("state.csv"), w, cfg, "w");
    WeightedNorms norms = weighted_norms(w, l, cfg);
    ctx.metric("terminal_norm", norms.terminal_l2);
    ctx.metric("linf_l2", norms.linf_l2);
    ctx.metric("l2_h1a", norms.l2_h1a);
    ctx.metric("energy_ratio", energy_check(w, y0, TransformedField{}, l, cfg));
}

inline void run_solve_adjoint(const ProblemConfig& cfg, const RunContext& ctx) {
    auto l = cli_trajectory(cfg);
    auto phi_T = cli_initial_state(cfg);
    AdjointField phi = solve_adjoint(phi_T, l, cfg);
    write_field_csv(ctx.file("adjoint.csv"), phi, cfg, "phi");
    const SpaceGrid grid = cfg.space();
    ctx.metric("initial_norm", slice_l2(phi.slice(0), grid));
    ctx.metric("terminal_norm", slice_l2(phi.slice(cfg.Nt), grid));
}

inline void run_control(const ProblemConfig& cfg, const RunContext& ctx) {
    auto l = cli_trajectory(cfg);
    auto y0 = cli_initial_state(cfg);
    HUMSolution sol = hum_solve(y0, l, cfg);
    write_field_csv(ctx.file("control.csv"), sol.control.field, cfg, "v");
    write_json(ctx.file("hum_report.json"), hum_report_json(sol.report));
    ctx.metric("iterations", sol.report.iterations);
    ctx.metric("final_terminal_norm", sol.report.final_terminal_norm);
    ctx.metric("control_norm", sol.report.control_norm);
    ctx.metric("cost_ratio", cost_check(sol.report, y0, cfg));
    ctx.manifest->residual_history = sol.report.residual_history;
}

inline void run_free_boundary(const ProblemConfig& cfg, const RunContext& ctx) {
    auto y0 = cli_initial_state(cfg);
    FixedPointReport rep = fixed_point_solve(y0, cfg);
    write_trajectory_csv(ctx.file("trajectory.csv"), rep.trajectory, cfg);
    write_json(ctx.file("report.json"), fixed_point_report_json(rep));
    ctx.metric("outer_iterations", rep.outer_iterations);
    ctx.metric("terminal_norm", rep.terminal_norm);
    ctx.metric("ode_residual", rep.ode_residual);
    ctx.metric("holder_norm", rep.holder_norm);
    ctx.metric("beta", cfg.beta);
}

inline void run_beta_sweep(const ProblemConfig& cfg, const RunContext& ctx) {
    auto y0 = cli_initial_state(cfg);
    BetaContinuationResult res = beta_continuation(y0, cfg, cfg.betas);
    nlohmann::ordered_json j;
    j["completed"] = res.completed;
    if (!res.completed) j["failure"] = res.failure;
    j["betas"] = res.betas;
    j["c1_distances"] = res.c1_distances;
    j["control_norms"] = res.control_norms;
    write_json(ctx.file("continuation.json"), j);
    for (std::size_t i = 0; i < res.reports.size(); ++i)
        write_trajectory_csv(ctx.file("trajectory_" + std::to_string(i) + ".csv"),
                             res.reports[i].trajectory, cfg);
    if (!res.completed) throw error("beta-sweep: " + res.failure);
    ctx.metric("num_betas", static_cast<double>(res.betas.size()));
    for (std::size_t i = 0; i < res.c1_distances.size(); ++i)
        ctx.metric("c1_distance_" + std::to_string(i), res.c1_distances[i]);
    for (std::size_t i = 0; i < res.control_norms.size(); ++i)
        ctx.metric("control_norm_" + std::to_string(i), res.control_norms[i]);
    bool monotone = true;
    for (std::size_t i = 1; i < res.c1_distances.size(); ++i)
        if (res.c1_distances[i] > res.c1_distances[i - 1]) monotone = false;
    ctx.metric("c1_distances_monotone", monotone ? 1.0 : 0.0);
}

inline void run_carleman_scan(const ProblemConfig& cfg, const RunContext& ctx) {
    auto l = cli_trajectory(cfg);
    const SpaceGrid grid = cfg.space();
    Rng rng(cfg.seed);
    const std::vector<double> scales = {1.0, 2.0, 4.0};
    std::vector<std::pair<double, double>> rows;
    std::vector<double> ratios;
    double obs_max = 0.0;
    const int samples = 10;
    for (int k = 0; k < samples; ++k) {
        auto phi_T = rng.slice(grid.num_nodes(), 0.0, 0.0);
        AdjointField phi = solve_adjoint(phi_T, l, cfg);
        for (double sc : scales) {
            const double s = sc * cfg.s0;
            const double r = carleman_ratio(phi, TransformedField{}, s, l, cfg);
            rows.emplace_back(s, r);
            ratios.push_back(r);
        }
        obs_max = std::max(obs_max, observability_ratio(phi_T, l, cfg));
    }
    write_table_csv(ctx.file("scan.csv"), "s,ratio", rows);
    std::vector<double> sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    ctx.metric("max_ratio", sorted.back());
    ctx.metric("median_ratio", median);
    ctx.metric("max_over_median", sorted.back() / median);
    ctx.metric("observability_max", obs_max);

    // Weight tables for plotting.
    std::vector<std::pair<double, double>> phit, thetat;
    for (int j = 0; j <= 200; ++j) {
        double x = cfg.B * j / 200.0;
        phit.emplace_back(x, Phi_weight(x, cfg));
    }
    for (int n = 1; n < cfg.Nt; ++n) {
        double t = cfg.time().node(n);
        thetat.emplace_back(t, theta_weight(t, cfg.T));
    }
    write_table_csv(ctx.file("phi_weight.csv"), "x,Phi", phit);
    write_table_csv(ctx.file("theta_weight.csv"), "t,theta", thetat);
}

inline void run_hardy_check(const ProblemConfig& cfg, const RunContext& ctx) {
    Rng rng(cfg.seed);
    const std::vector<double> regimes = {0.0, 0.5, 1.5, 1.9};
    const int samples = 100;
    const int cells = 256;
    double max_ratio = 0.0;
    std::vector<std::pair<double, double>> rows;
    for (double as : regimes) {
        for (int k = 0; k < samples; ++k) {
            std::vector<double> z(cells + 1);
            for (auto& v : z) v = rng.uniform(-1.0, 1.0);
            if (as < 1.0) z.front() = 0.0;
            else z.back() = 0.0;
            auto [lhs, rhs] = hardy_check(z, as, cfg.L0);
            rows.emplace_back(as, rhs > 0.0 ? lhs / rhs : 0.0);
            if (rhs > 0.0) max_ratio = std::max(max_ratio, lhs / rhs);
        }
    }
    write_table_csv(ctx.file("hardy.csv"), "alpha_star,lhs_over_rhs", rows);
    ctx.metric("max_lhs_over_rhs", max_ratio);
}

inline void run_convergence(const ProblemConfig& cfg, const RunContext& ctx) {
    ProblemConfig base = cfg;
    base.Ns = 64;
    base.Nt = 512;
    ConvergenceReport rep = convergence_study(base, {64, 128, 256}, {64, 128, 256});
    std::vector<std::pair<double, double>> rows;
    for (std::size_t i = 0; i < rep.spatial_h.size(); ++i)
        rows.emplace_back(rep.spatial_h[i], rep.spatial_err[i]);
    write_table_csv(ctx.file("spatial_error.csv"), "h,err", rows);
    rows.clear();
    for (std::size_t i = 0; i < rep.temporal_dt.size(); ++i)
        rows.emplace_back(rep.temporal_dt[i], rep.temporal_err[i]);
    write_table_csv(ctx.file("temporal_error.csv"), "dt,err", rows);
    ctx.metric("spatial_order", rep.spatial_order);
    ctx.metric("temporal_order", rep.temporal_order);
}

}  // namespace detail

/// Runs one subcommand pipeline; writes all artifacts plus manifest.json
/// under <out_root>/<subcommand>-<confighash>/ and returns the manifest.
/// Module errors are captured in the manifest with success = false.
inline RunManifest run_subcommand(const std::string& name, const ProblemConfig& cfg,
                                  const std::string& out_root, const std::string& salt = "") {
    RunManifest man;
    man.subcommand = name;
    man.config_echo = cfg.as_map();

    const auto& known = known_subcommands();
    if (std::find(known.begin(), known.end(), name) == known.end())
        throw config_error("unknown subcommand: " + name);

    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::path dir =
        std::filesystem::path(out_root) / (name + "-" + detail::config_hash(cfg, salt));
    std::filesystem::create_directories(dir);
    man.run_dir = dir.string();
    detail::RunContext ctx{dir, &man};

    try {
        if (name == "solve-forward") detail::run_solve_forward(cfg, ctx);
        else if (name == "solve-adjoint") detail::run_solve_adjoint(cfg, ctx);
        else if (name == "control") detail::run_control(cfg, ctx);
        else if (name == "free-boundary") detail::run_free_boundary(cfg, ctx);
        else if (name == "beta-sweep") detail::run_beta_sweep(cfg, ctx);
        else if (name == "carleman-scan") detail::run_carleman_scan(cfg, ctx);
        else if (name == "hardy-check") detail::run_hardy_check(cfg, ctx);
        else if (name == "convergence") detail::run_convergence(cfg, ctx);
    } catch (const std::exception& e) {
        man.success = false;
        man.error_message = e.what();
    }

    man.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::ordered_json j;
    for (const auto& [k, v] : man.config_echo) j["config." + k] = v;
    j["subcommand"] = man.subcommand;
    j["success"] = man.success;
    if (!man.success) j["error"] = man.error_message;
    for (const auto& [k, v] : man.metrics) j[k] = v;
    if (!man.residual_history.empty()) j["residual_history"] = man.residual_history;
    j["artifact_paths"] = man.artifact_paths;
    j["wall_time_seconds"] = man.wall_time_seconds;
    detail::write_json((dir / "manifest.json").string(), j);
    return man;
}

struct SweepEntry {
    std::string subcommand;
    ProblemConfig config;
};

/// Runs independent entries concurrently; output directories are disjoint
/// (the entry index salts the hash) and results keep the input order.
/// Per-entry failures are recorded in their manifests; the sweep continues.
inline std::vector<RunManifest> sweep(const std::vector<SweepEntry>& entries,
                                      const std::string& out_root) {
    std::vector<std::future<RunManifest>> futures;
    futures.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const SweepEntry& e = entries[i];
        futures.push_back(std::async(std::launch::async, [&e, i, &out_root]() {
            return run_subcommand(e.subcommand, e.config, out_root, "entry" + std::to_string(i));
        }));
    }
    std::vector<RunManifest> out;
    out.reserve(entries.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

}  // namespace fbc
