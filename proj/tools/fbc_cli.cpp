// Command-line front end: parse a flat key = value configuration, apply
// --set overrides, dispatch the subcommand pipeline and persist CSVs plus
// a manifest.json per run.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbc/fbc.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Free-boundary degenerate parabolic control toolkit"};
    app.name("fbc");

    std::string subcommand;
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int seed = -1;

    app.add_option("subcommand", subcommand,
                   "one of: solve-forward solve-adjoint control free-boundary "
                   "beta-sweep carleman-scan hardy-check convergence")
        ->required();
    app.add_option("--config", config_path, "flat key = value configuration file");
    app.add_option("--out", out_dir, "output root directory");
    app.add_option("--set", overrides, "override as key=value (repeatable)")->take_all();
    app.add_option("--seed", seed, "random seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto& known = fbc::known_subcommands();
        if (std::find(known.begin(), known.end(), subcommand) == known.end()) {
            std::fprintf(stderr, "error: unknown subcommand '%s'\n", subcommand.c_str());
            return 2;
        }
        if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
        fbc::ProblemConfig cfg = fbc::parse_config(config_path, overrides);
        fbc::RunManifest man = fbc::run_subcommand(subcommand, cfg, out_dir);
        std::printf("%s: %s (%.3fs) -> %s\n", subcommand.c_str(),
                    man.success ? "ok" : "FAILED", man.wall_time_seconds, man.run_dir.c_str());
        for (const auto& [k, v] : man.metrics)
            std::printf("  %-24s %s\n", k.c_str(), fbc::format_double(v).c_str());
        if (!man.success) {
            std::fprintf(stderr, "error: %s\n", man.error_message.c_str());
            return 3;
        }
        return 0;
    } catch (const fbc::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
