#pragma once

// Problem configuration: the full parameter set for one run, its
// validation rules, and the flat key = value file format used by the CLI.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fbc/core.hpp"

namespace fbc {

/// Which condition is imposed at the degenerate end. Weak degeneracy
/// (alpha < 1) keeps a Dirichlet value there; strong degeneracy
/// (alpha >= 1) replaces it by a vanishing weighted flux.
enum class LeftBoundary { dirichlet, weighted_neumann };

struct ProblemConfig {
    // Degeneracy exponent of the diffusion coefficient x^alpha.
    double alpha = 0.5;
    // Final time.
    double T = 1.0;
    // Initial domain length and admissible boundary band [Lstar, B].
    double L0 = 1.0;
    double Lstar = 0.8;
    double B = 1.3;
    // Control window (a,b) and inner window (c,d), fixed in physical space.
    double a = 0.2;
    double b = 0.5;
    double c = 0.3;
    double d = 0.4;
    // Bound on |l'| for admissible boundary trajectories.
    double R = 0.5;
    // Target terminal tolerance ||y(T)|| <= beta.
    double beta = 1e-3;
    // Grid sizes.
    int Ns = 128;
    int Nt = 256;

    // Run-level knobs (defaults documented in the README).
    unsigned seed = 42;
    double s0 = 50.0;            // base Carleman parameter
    double kappa = 0.5;          // Hoelder exponent used in reports
    double fp_damping = 1.0;     // Picard damping factor
    double tol_fp = 1e-6;        // fixed-point C1 stopping tolerance
    int max_outer = 30;          // fixed-point iteration cap
    int cg_max_iters = 500;      // Gramian CG iteration cap
    double y0_amp = 0.05;        // CLI initial state amplitude: y0 = amp*sin(pi s/L0)
    double l_amp = 0.05;         // CLI boundary wobble amplitude for l_mode = sine
    std::string l_mode = "constant";
    std::vector<double> betas{1e-2, 1e-3, 1e-4};

    SpaceGrid space() const { return SpaceGrid(Ns, L0); }
    TimeGrid time() const { return TimeGrid(Nt, T); }
    double dz() const { return L0 / Ns; }
    double dt() const { return T / Nt; }

    LeftBoundary left_boundary() const {
        return alpha < 1.0 ? LeftBoundary::dirichlet : LeftBoundary::weighted_neumann;
    }

    /// Declared trajectory-consistency tolerance: trapezoidal consistency
    /// of a C1 function sampled at dt.
    double traj_tol() const { return 10.0 * dt() * R; }

    /// Throws config_error naming the first violated constraint.
    void validate() const {
        auto fail = [](const std::string& msg) { throw config_error("invalid config: " + msg); };
        if (!(alpha >= 0.0)) fail("alpha must lie in [0,2)");
        if (!(alpha < 2.0)) fail("alpha must lie in [0,2); alpha >= 2 is rejected");
        if (!(T > 0.0)) fail("T must be positive");
        if (!(R > 0.0)) fail("R must be positive");
        if (!(beta > 0.0)) fail("beta must be positive");
        if (Ns < 8) fail("Ns must be at least 8");
        if (Nt < 8) fail("Nt must be at least 8");
        if (!(0.0 < a)) fail("window ordering requires 0 < a");
        if (!(a < c)) fail("window ordering requires a < c");
        if (!(c < d)) fail("window ordering requires c < d");
        if (!(d < b)) fail("window ordering requires d < b");
        if (!(b < Lstar)) fail("window ordering requires b < Lstar");
        if (!(Lstar < L0)) fail("window ordering requires Lstar < L0");
        if (!(L0 <= B)) fail("window ordering requires L0 <= B");
        if (!(fp_damping > 0.0 && fp_damping <= 1.0)) fail("fp_damping must lie in (0,1]");
        if (!(kappa > 0.0 && kappa <= 1.0)) fail("kappa must lie in (0,1]");
        if (betas.empty()) fail("betas must not be empty");
        for (double bb : betas)
            if (!(bb > 0.0)) fail("betas entries must be positive");
        if (l_mode != "constant" && l_mode != "sine") fail("l_mode must be 'constant' or 'sine'");
    }

    /// Canonical serialization (sorted keys) used for output hashing and
    /// the manifest echo.
    std::map<std::string, std::string> as_map() const {
        std::map<std::string, std::string> m;
        m["alpha"] = format_double(alpha);
        m["T"] = format_double(T);
        m["L0"] = format_double(L0);
        m["Lstar"] = format_double(Lstar);
        m["B"] = format_double(B);
        m["a"] = format_double(a);
        m["b"] = format_double(b);
        m["c"] = format_double(c);
        m["d"] = format_double(d);
        m["R"] = format_double(R);
        m["beta"] = format_double(beta);
        m["Ns"] = std::to_string(Ns);
        m["Nt"] = std::to_string(Nt);
        m["seed"] = std::to_string(seed);
        m["s0"] = format_double(s0);
        m["kappa"] = format_double(kappa);
        m["fp_damping"] = format_double(fp_damping);
        m["tol_fp"] = format_double(tol_fp);
        m["max_outer"] = std::to_string(max_outer);
        m["cg_max_iters"] = std::to_string(cg_max_iters);
        m["y0_amp"] = format_double(y0_amp);
        m["l_amp"] = format_double(l_amp);
        m["l_mode"] = l_mode;
        std::string bs;
        for (std::size_t i = 0; i < betas.size(); ++i) {
            if (i) bs += ",";
            bs += format_double(betas[i]);
        }
        m["betas"] = bs;
        return m;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto is_space = [](unsigned char ch) { return std::isspace(ch) != 0; };
    std::size_t lo = 0, hi = s.size();
    while (lo < hi && is_space(s[lo])) ++lo;
    while (hi > lo && is_space(s[hi - 1])) --hi;
    return s.substr(lo, hi - lo);
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw config_error("cannot parse '" + item + "' in list value for key '" + key + "'");
        }
    }
    return out;
}

inline void assign_key(ProblemConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& where) {
    auto as_double = [&]() {
        try {
            std::size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw config_error(where + ": cannot parse '" + value + "' as number for key '" + key + "'");
        }
    };
    auto as_int = [&]() {
        try {
            std::size_t pos = 0;
            int v = std::stoi(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw config_error(where + ": cannot parse '" + value + "' as integer for key '" + key + "'");
        }
    };

    if (key == "alpha") cfg.alpha = as_double();
    else if (key == "T") cfg.T = as_double();
    else if (key == "L0") cfg.L0 = as_double();
    else if (key == "Lstar") cfg.Lstar = as_double();
    else if (key == "B") cfg.B = as_double();
    else if (key == "a") cfg.a = as_double();
    else if (key == "b") cfg.b = as_double();
    else if (key == "c") cfg.c = as_double();
    else if (key == "d") cfg.d = as_double();
    else if (key == "R") cfg.R = as_double();
    else if (key == "beta") cfg.beta = as_double();
    else if (key == "Ns") cfg.Ns = as_int();
    else if (key == "Nt") cfg.Nt = as_int();
    else if (key == "seed") cfg.seed = static_cast<unsigned>(as_int());
    else if (key == "s0") cfg.s0 = as_double();
    else if (key == "kappa") cfg.kappa = as_double();
    else if (key == "fp_damping") cfg.fp_damping = as_double();
    else if (key == "tol_fp") cfg.tol_fp = as_double();
    else if (key == "max_outer") cfg.max_outer = as_int();
    else if (key == "cg_max_iters") cfg.cg_max_iters = as_int();
    else if (key == "y0_amp") cfg.y0_amp = as_double();
    else if (key == "l_amp") cfg.l_amp = as_double();
    else if (key == "l_mode") cfg.l_mode = value;
    else if (key == "betas") cfg.betas = parse_double_list(value, key);
    else throw config_error(where + ": unknown key '" + key + "'");
}

}  // namespace detail

/// Parses a flat key = value document ('#' starts a comment), applies
/// command line overrides on top, validates, and returns the config.
inline ProblemConfig parse_config(const std::string& path,
                                  const std::vector<std::string>& overrides = {}) {
    ProblemConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
            detail::assign_key(cfg, key, value, path + ":" + std::to_string(lineno));
        }
    }
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw config_error("override '" + ov + "' is not of the form key=value");
        detail::assign_key(cfg, detail::trim(ov.substr(0, eq)), detail::trim(ov.substr(eq + 1)),
                           "override");
    }
    cfg.validate();
    return cfg;
}

}  // namespace fbc
