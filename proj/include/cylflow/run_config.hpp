#pragma once

// Everything a command needs to reproduce its output. The JSON form is echoed
// into every file the command writes and can be read back to re-run it.

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"

#include "cylflow/dynamics.hpp"
#include "cylflow/error.hpp"
#include "cylflow/potential.hpp"

namespace cylflow {

struct RunConfig {
    std::string command;
    double lambda = 1.0;
    double mu = 1.0;
    double damping = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double t_max = 1e4;
    std::vector<double> y0;
    std::optional<double> x0;
    std::optional<int> n_first;
    std::optional<int> n_last;
    std::optional<double> event_height;
    double epsilon = 0.12;
    int bins = 16;
    double window = 5.0;
    int k = 3;
    int k_min = 1;
    int k_max = 4;
    double y_min = 0.05;
    int samples = 400;
    int partitions = 4;
    std::string input;
    std::string out_dir = ".";
    std::string format = "csv";

    [[nodiscard]] PotentialParams potential() const { return {lambda, mu}; }

    [[nodiscard]] IntegratorConfig integrator(Storage storage = Storage::dense) const {
        IntegratorConfig c;
        c.damping = damping;
        c.rel_tol = rel_tol;
        c.abs_tol = abs_tol;
        c.t_max = t_max;
        c.storage = storage;
        return c;
    }

    void validate() const {
        potential().validate();
        integrator().validate();
        if (format != "csv" && format != "json") throw DomainError("format must be csv or json");
        if (bins < 1) throw DomainError("bins must be >= 1");
        if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("epsilon must lie in (0, 0.5]");
        if (!(window >= 0.0)) throw DomainError("window must be >= 0");
        if (partitions < 1) throw DomainError("partitions must be >= 1");
        for (double y : y0) {
            if (!std::isfinite(y)) throw DomainError("y0 must be finite");
        }
        if (x0 && !std::isfinite(*x0)) throw DomainError("x0 must be finite");
        if (event_height && !std::isfinite(*event_height)) throw DomainError("event height must be finite");
    }
};

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j = {{"command", c.command},   {"lambda", c.lambda},   {"mu", c.mu},
                        {"damping", c.damping},   {"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol},
                        {"t_max", c.t_max},       {"y0", c.y0},           {"epsilon", c.epsilon},
                        {"bins", c.bins},         {"window", c.window},   {"k", c.k},
                        {"k_min", c.k_min},       {"k_max", c.k_max},     {"y_min", c.y_min},
                        {"samples", c.samples},   {"partitions", c.partitions},
                        {"input", c.input},       {"out_dir", c.out_dir}, {"format", c.format}};
    j["x0"] = c.x0 ? nlohmann::json(*c.x0) : nlohmann::json(nullptr);
    j["n_first"] = c.n_first ? nlohmann::json(*c.n_first) : nlohmann::json(nullptr);
    j["n_last"] = c.n_last ? nlohmann::json(*c.n_last) : nlohmann::json(nullptr);
    j["event_height"] = c.event_height ? nlohmann::json(*c.event_height) : nlohmann::json(nullptr);
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        auto get = [&j](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        auto get_opt = [&j](const char* key, auto& field) {
            if (j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<typename std::decay_t<decltype(field)>::value_type>();
        };
        get("command", c.command);
        get("lambda", c.lambda);
        get("mu", c.mu);
        get("damping", c.damping);
        get("rel_tol", c.rel_tol);
        get("abs_tol", c.abs_tol);
        get("t_max", c.t_max);
        get("y0", c.y0);
        get("epsilon", c.epsilon);
        get("bins", c.bins);
        get("window", c.window);
        get("k", c.k);
        get("k_min", c.k_min);
        get("k_max", c.k_max);
        get("y_min", c.y_min);
        get("samples", c.samples);
        get("partitions", c.partitions);
        get("input", c.input);
        get("out_dir", c.out_dir);
        get("format", c.format);
        get_opt("x0", c.x0);
        get_opt("n_first", c.n_first);
        get_opt("n_last", c.n_last);
        get_opt("event_height", c.event_height);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("run config: ") + e.what());
    }
    return c;
}

}  // namespace cylflow
