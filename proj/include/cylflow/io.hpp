#pragma once

// Plot-ready CSV and JSON output. Every file carries a metadata block (tool
// version plus the run configuration); floating point values are written in
// shortest round-trip form.

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "cylflow/construction.hpp"
#include "cylflow/dynamics.hpp"
#include "cylflow/geometry.hpp"
#include "cylflow/potential.hpp"
#include "cylflow/version.hpp"

namespace cylflow::io {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DomainError("io: malformed number '" + std::string(s) + "'");
    }
    return v;
}

inline json metadata(const json& config) { return {{"version", version_string}, {"config", config}}; }

inline void write_csv_header(std::ostream& os, const json& config, std::string_view columns) {
    os << "# " << version_string << '\n';
    os << "# config " << config.dump() << '\n';
    os << columns << '\n';
}

inline json state_json(const State& s) {
    return {{"t", s.t}, {"x_lift", s.q.x_lift}, {"y", s.q.y}, {"xdot", s.v.x}, {"ydot", s.v.y}};
}

// --- trajectory ---------------------------------------------------------------

inline constexpr std::string_view trajectory_columns = "t,x_lift,x_mod_2pi,y,xdot,ydot,E,V,winding";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const json& config) {
    write_csv_header(os, config, trajectory_columns);
    for (const Sample& s : traj.samples()) {
        const State& st = s.state;
        os << fmt(st.t) << ',' << fmt(st.q.x_lift) << ',' << fmt(st.q.angle()) << ',' << fmt(st.q.y) << ','
           << fmt(st.v.x) << ',' << fmt(st.v.y) << ',' << fmt(s.energy) << ',' << fmt(s.potential) << ','
           << fmt(s.winding) << '\n';
    }
}

inline json trajectory_json(const Trajectory& traj, const json& config) {
    json rows = json::array();
    for (const Sample& s : traj.samples()) {
        const State& st = s.state;
        rows.push_back({{"t", st.t},
                        {"x_lift", st.q.x_lift},
                        {"x_mod_2pi", st.q.angle()},
                        {"y", st.q.y},
                        {"xdot", st.v.x},
                        {"ydot", st.v.y},
                        {"E", s.energy},
                        {"V", s.potential},
                        {"winding", s.winding}});
    }
    return {{"meta", metadata(config)}, {"samples", rows}};
}

inline json events_json(const Trajectory& traj) {
    json out = json::array();
    for (const EventRecord& e : traj.events()) {
        out.push_back({{"kind", std::string(to_string(e.kind))}, {"t_event", e.t_event}, {"state", state_json(e.state)}});
    }
    return out;
}

/// Parsed trajectory CSV: the embedded config (if any) and the sample rows.
struct TrajectoryFile {
    std::optional<json> config;
    std::string version;
    std::vector<std::vector<double>> rows;  ///< one row per sample, columns as in trajectory_columns
};

inline TrajectoryFile read_trajectory_csv(std::istream& is) {
    TrajectoryFile out;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.starts_with("# config ")) {
            try {
                out.config = json::parse(line.substr(9));
            } catch (const json::exception& e) {
                throw DomainError(std::string("io: malformed config line: ") + e.what());
            }
            continue;
        }
        if (line.starts_with("# ")) {
            out.version = line.substr(2);
            continue;
        }
        if (!header_seen) {
            if (line != trajectory_columns) throw DomainError("io: unexpected trajectory CSV header");
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            row.push_back(parse_double(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (row.size() != 9) throw DomainError("io: trajectory row must have 9 columns");
        out.rows.push_back(std::move(row));
    }
    if (!header_seen) throw DomainError("io: missing trajectory CSV header");
    return out;
}

// --- zero set -----------------------------------------------------------------

inline constexpr std::string_view zero_set_columns = "branch_k,x_lift,x_mod_2pi,y";

inline void write_zero_set_csv(std::ostream& os, const std::vector<ZeroSetBranch>& branches, const json& config) {
    write_csv_header(os, config, zero_set_columns);
    for (const auto& b : branches) {
        const std::string key = b.axis ? std::string("axis") : std::to_string(b.k);
        for (const auto& p : b.points) {
            os << key << ',' << fmt(p.x_lift) << ',' << fmt(p.angle()) << ',' << fmt(p.y) << '\n';
        }
    }
}

// --- construction reports -----------------------------------------------------

inline json sweep_json(const std::vector<SweepEntry>& entries, const PotentialParams& params) {
    json out = json::array();
    for (const auto& e : entries) {
        json row = {{"n", e.n},
                    {"y0", e.y0},
                    {"lambda", params.lambda},
                    {"exit", {{"x_mod_2pi", e.exit_state.q.angle()}, {"y", e.exit_state.q.y}}},
                    {"winding_total", e.winding_total},
                    {"energy_initial", e.energy_initial},
                    {"energy_final", e.energy_final}};
        if (e.t_n) {
            row["t_n"] = *e.t_n;
        } else {
            row["t_n"] = "timeout";
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline json limit_set_json(const LimitSetReport& rep) {
    json first = json::array();
    for (const auto& f : rep.first_passage) {
        if (f) {
            first.push_back(*f);
        } else {
            first.push_back(nullptr);
        }
    }
    return {{"epsilon", rep.epsilon},
            {"bins", rep.bins},
            {"covered", rep.covered},
            {"first_passage", first},
            {"coverage", rep.coverage}};
}

// --- geometry -----------------------------------------------------------------

inline constexpr std::string_view map_grid_columns =
    "r,theta_index,phi_index,target_x,target_y,target_s1,target_s2,target_s3";

inline void write_map_grid_csv(std::ostream& os, const std::vector<MapGridRow>& rows, const json& config) {
    write_csv_header(os, config, map_grid_columns);
    for (const auto& r : rows) {
        os << fmt(r.r) << ',' << r.theta_index << ',' << r.phi_index << ',' << fmt(r.target.x) << ','
           << fmt(r.target.y) << ',' << fmt(r.target.s.at(0)) << ',' << fmt(r.target.s.at(1)) << ','
           << fmt(r.target.s.at(2)) << '\n';
    }
}

}  // namespace cylflow::io
