#pragma once

// CSV writers with fixed 17-significant-digit formatting so identical
// runs produce byte-identical files.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"

namespace fbc {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open output file: " + path);
    return out;
}

/// Space-time field snapshot: header "t,zeta,<name>", rows time-major.
inline void write_field_csv(const std::string& path, const TransformedField& f,
                            const ProblemConfig& cfg, const std::string& value_name) {
    auto out = open_output(path);
    out << "t,zeta," << value_name << "\n";
    const SpaceGrid grid = cfg.space();
    const TimeGrid tg = cfg.time();
    for (int n = 0; n <= f.nt; ++n)
        for (int j = 0; j <= f.ns; ++j)
            out << format_double(tg.node(n)) << ',' << format_double(grid.node(j)) << ','
                << format_double(f.at(n, j)) << "\n";
}

/// Boundary trajectory: header "t,l,dl".
inline void write_trajectory_csv(const std::string& path, const BoundaryTrajectory& l,
                                 const ProblemConfig& cfg) {
    auto out = open_output(path);
    out << "t,l,dl\n";
    const TimeGrid tg = cfg.time();
    for (int n = 0; n < l.num_nodes(); ++n)
        out << format_double(tg.node(n)) << ',' << format_double(l.values[n]) << ','
            << format_double(l.derivs[n]) << "\n";
}

/// Two-column table, e.g. "x,Phi", "t,theta" or "s,ratio".
inline void write_table_csv(const std::string& path, const std::string& header,
                            const std::vector<std::pair<double, double>>& rows) {
    auto out = open_output(path);
    out << header << "\n";
    for (const auto& [x, y] : rows) out << format_double(x) << ',' << format_double(y) << "\n";
}

}  // namespace fbc
