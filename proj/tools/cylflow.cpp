// cylflow: reproducible runs of the damped flow on the cylinder.
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cylflow/cylflow.hpp"

namespace fs = std::filesystem;
using cylflow::io::json;

namespace {

constexpr int exit_usage = 2;
constexpr int exit_numeric = 3;

// Lower end of the reduced-energy window, in trajectory time before the end.
// The weights e^{(k-2) t} are below 5e-18 further back.
constexpr double energy_depth = 40.0;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_output(const cylflow::RunConfig& cfg, const std::string& name) {
    const fs::path path = fs::path(cfg.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    return os;
}

void write_json(const cylflow::RunConfig& cfg, const std::string& name, const json& j) {
    auto os = open_output(cfg, name);
    os << j.dump(2) << '\n';
}

json with_meta(const cylflow::RunConfig& cfg, json body) {
    body["meta"] = cylflow::io::metadata(to_json(cfg));
    return body;
}

cylflow::State start_state(const cylflow::RunConfig& cfg) {
    cylflow::State s = cylflow::rest_start(cfg.potential(), cfg.y0.at(0));
    if (cfg.x0) s.q.x_lift = *cfg.x0;
    return s;
}

cylflow::Trajectory simulate(const cylflow::RunConfig& cfg) {
    std::vector<cylflow::EventSpec> events;
    if (cfg.event_height) events.push_back(cylflow::EventSpec::height(*cfg.event_height));
    return cylflow::integrate(cfg.potential(), cfg.integrator(), start_state(cfg), events);
}

json partition_residuals(const cylflow::RunConfig& cfg, const cylflow::Trajectory& tr) {
    json out = json::array();
    const double a = tr.t_front();
    const double b = tr.t_back();
    for (int i = 0; i < cfg.partitions; ++i) {
        const double t1 = a + (b - a) * i / cfg.partitions;
        const double t2 = i + 1 == cfg.partitions ? b : a + (b - a) * (i + 1) / cfg.partitions;
        out.push_back({{"t1", t1}, {"t2", t2}, {"residual", cylflow::dissipation_residual(cfg.potential(), tr, t1, t2)}});
    }
    return out;
}

json run_summary(const cylflow::RunConfig& cfg, const cylflow::Trajectory& tr) {
    const auto p = cfg.potential();
    const auto& st = tr.stats();
    json exit_event = nullptr;
    if (auto e = tr.first_event(cylflow::EventKind::height_crossing)) {
        exit_event = {{"t_event", e->t_event}, {"state", cylflow::io::state_json(e->state)}};
    }
    const auto bound = cylflow::velocity_bound_check(p, tr);
    const auto guard = cylflow::zero_set_guard(p, tr);
    return {{"E0", tr.front().energy},
            {"E_end", tr.back().energy},
            {"t_end", tr.t_back()},
            {"dissipation_residual", cylflow::dissipation_residual(p, tr, tr.t_front(), tr.t_back())},
            {"max_kinetic", st.max_kinetic},
            {"max_energy_rise", st.max_energy_rise},
            {"energy_monotone", st.max_energy_rise <= 1e-9},
            {"winding_total", tr.back().winding},
            {"velocity_bound_ok", bound.precondition_met ? json(bound.ok()) : json(nullptr)},
            {"zero_set_avoided", guard.precondition_met ? json(guard.ok()) : json(nullptr)},
            {"exit_event", exit_event},
            {"accepted_steps", st.accepted_steps},
            {"rejected_steps", st.rejected_steps}};
}

void require_single_y0(const cylflow::RunConfig& cfg, const CLI::App& app) {
    if (cfg.y0.size() != 1) {
        std::cerr << app.help();
        throw CLI::RequiredError("--y0 (exactly one value)");
    }
}

int cmd_simulate(const cylflow::RunConfig& cfg) {
    const cylflow::Trajectory tr = simulate(cfg);
    if (cfg.format == "csv") {
        auto os = open_output(cfg, "trajectory.csv");
        cylflow::io::write_trajectory_csv(os, tr, to_json(cfg));
    } else {
        write_json(cfg, "trajectory.json", cylflow::io::trajectory_json(tr, to_json(cfg)));
    }
    write_json(cfg, "events.json", with_meta(cfg, {{"events", cylflow::io::events_json(tr)}}));
    write_json(cfg, "summary.json", with_meta(cfg, run_summary(cfg, tr)));
    return 0;
}

cylflow::FamilySpec sweep_family(const cylflow::RunConfig& cfg) {
    const auto icfg = cfg.integrator(cylflow::Storage::endpoints);
    if (cfg.n_first || cfg.n_last) {
        if (!cfg.y0.empty()) throw cylflow::DomainError("give either --y0 or --n-first/--n-last, not both");
        const int first = cfg.n_first.value_or(1);
        return cylflow::FamilySpec::indexed(cfg.potential(), icfg, first, cfg.n_last.value_or(first));
    }
    if (cfg.y0.empty()) throw cylflow::DomainError("sweep: empty family (give --y0 values or --n-first/--n-last)");
    return cylflow::FamilySpec::heights(cfg.potential(), icfg, cfg.y0);
}

int cmd_sweep(const cylflow::RunConfig& cfg) {
    const auto entries = cylflow::sweep_hitting_times(sweep_family(cfg));
    write_json(cfg, "sweep.json", with_meta(cfg, {{"entries", cylflow::io::sweep_json(entries, cfg.potential())}}));
    if (cfg.format == "csv") {
        auto os = open_output(cfg, "sweep.csv");
        cylflow::io::write_csv_header(os, to_json(cfg),
                                      "n,y0,lambda,t_n,exit_x_mod_2pi,exit_y,winding_total,energy_initial,energy_final");
        using cylflow::io::fmt;
        for (const auto& e : entries) {
            os << e.n << ',' << fmt(e.y0) << ',' << fmt(cfg.lambda) << ',' << (e.t_n ? fmt(*e.t_n) : "timeout") << ','
               << fmt(e.exit_state.q.angle()) << ',' << fmt(e.exit_state.q.y) << ',' << fmt(e.winding_total) << ','
               << fmt(e.energy_initial) << ',' << fmt(e.energy_final) << '\n';
        }
    }
    return 0;
}

int cmd_limitset(const cylflow::RunConfig& cfg) {
    const cylflow::EventSpec exits[] = {cylflow::EventSpec::height(1.0), cylflow::EventSpec::height(-1.0)};
    const auto tr = cylflow::integrate(cfg.potential(), cfg.integrator(), start_state(cfg), exits);
    const auto rep = cylflow::limit_set_coverage(tr, cfg.epsilon, static_cast<std::size_t>(cfg.bins));
    json candidates = json::array();
    for (double a : cylflow::tangent_limit_candidates(rep)) {
        const auto m = cylflow::tangent_map_from_angle(a);
        candidates.push_back({{"angle", m.angle}, {"sign", m.sign}});
    }
    json body = cylflow::io::limit_set_json(rep);
    body["tangent_map_candidates"] = candidates;
    body["t_end"] = tr.t_back();
    body["exit_top"] = tr.first_event(cylflow::EventKind::height_crossing).has_value() && tr.back().state.q.y > 0.0;
    write_json(cfg, "limitset.json", with_meta(cfg, body));
    return 0;
}

int cmd_zeroset(const cylflow::RunConfig& cfg) {
    const auto branches = cylflow::zero_set_curves(cfg.potential(), cfg.k_min, cfg.k_max, cfg.y_min, cfg.samples);
    if (cfg.format == "json") {
        json out = json::array();
        for (const auto& b : branches) {
            json pts = json::array();
            for (const auto& p : b.points) pts.push_back({p.x_lift, p.angle(), p.y});
            out.push_back({{"branch_k", b.axis ? json("axis") : json(b.k)}, {"points", pts}});
        }
        write_json(cfg, "zeroset.json", with_meta(cfg, {{"columns", {"x_lift", "x_mod_2pi", "y"}}, {"branches", out}}));
        return 0;
    }
    for (const auto& b : branches) {
        const std::string name = b.axis ? "zeroset_axis.csv" : "zeroset_k" + std::to_string(b.k) + ".csv";
        auto os = open_output(cfg, name);
        cylflow::io::write_zero_set_csv(os, {b}, to_json(cfg));
    }
    return 0;
}

// Trajectory for the energy report: re-run the config embedded in --input and
// check it reproduces the stored rows, or run the current flags directly.
struct ReportSource {
    cylflow::RunConfig run;
    cylflow::Trajectory traj;
    json reproduction = nullptr;
};

ReportSource report_source(const cylflow::RunConfig& cfg) {
    if (cfg.input.empty()) {
        if (cfg.y0.size() != 1) throw cylflow::DomainError("energy-report: give --input or exactly one --y0");
        cylflow::RunConfig run = cfg;
        run.command = "simulate";
        return {run, simulate(run), nullptr};
    }
    std::ifstream is(cfg.input);
    if (!is) throw IoError("cannot read " + cfg.input);
    const auto file = cylflow::io::read_trajectory_csv(is);
    if (!file.config) throw IoError(cfg.input + ": no embedded config");
    cylflow::RunConfig run = cylflow::run_config_from_json(*file.config);
    run.validate();
    if (run.y0.size() != 1) throw cylflow::DomainError(cfg.input + ": embedded config has no single y0");
    ReportSource src{run, simulate(run), nullptr};
    const auto samples = src.traj.samples();
    bool same = samples.size() == file.rows.size();
    for (std::size_t i = 0; same && i < samples.size(); ++i) {
        const auto& s = samples[i];
        const double expect[9] = {s.state.t, s.state.q.x_lift, s.state.q.angle(), s.state.q.y, s.state.v.x,
                                  s.state.v.y, s.energy, s.potential, s.winding};
        same = std::equal(std::begin(expect), std::end(expect), file.rows[i].begin());
    }
    src.reproduction = {{"input", cfg.input}, {"rows", file.rows.size()}, {"identical", same}};
    if (!same) std::cerr << "cylflow: warning: re-run of " << cfg.input << " does not reproduce its rows\n";
    return src;
}

int cmd_energy_report(const cylflow::RunConfig& cfg) {
    const ReportSource src = report_source(cfg);
    const auto p = src.run.potential();
    const auto& tr = src.traj;

    const auto bound = cylflow::velocity_bound_check(p, tr);
    json body = {{"run_config", to_json(src.run)},
                 {"reproduction", src.reproduction},
                 {"dissipation_residual", cylflow::dissipation_residual(p, tr, tr.t_front(), tr.t_back())},
                 {"partition", partition_residuals(src.run, tr)},
                 {"velocity_bound",
                  {{"precondition_met", bound.precondition_met},
                   {"max_kinetic", bound.max_kinetic},
                   {"min_potential", bound.min_potential},
                   {"violations", bound.violations.size()},
                   {"ok", bound.ok()}}}};

    // energies on the profile shifted so the run ends at t = 0, i.e. r = 1
    const auto shifted = std::make_shared<const cylflow::Trajectory>(tr.time_shifted(-tr.t_back()));
    const double t1 = std::max(shifted->t_front(), -energy_depth);
    const auto red = cylflow::reduced_energy_terms(*shifted, cfg.k, t1, 0.0, p);
    body["reduced_energy"] = {{"k", cfg.k},         {"t1", t1},
                              {"t2", 0.0},          {"kinetic", red.kinetic},
                              {"potential", red.potential}, {"total", red.total()}};
    if (cfg.k == 3) {
        const cylflow::EquivariantMap map(shifted);
        const double r1 = std::max(map.r_min(), std::exp(t1));
        const auto full = cylflow::full_energy_quadrature(map, p, r1, 1.0);
        const double four_pi = 4.0 * std::numbers::pi;
        auto ratio = [](double a, double b) { return b == 0.0 ? (a == 0.0 ? json(1.0) : json(nullptr)) : json(a / b); };
        body["full_energy"] = {{"m", 3},
                               {"r1", r1},
                               {"r2", 1.0},
                               {"kinetic", full.kinetic},
                               {"potential", full.potential},
                               {"total", full.total()},
                               {"kinetic_ratio", ratio(full.kinetic / four_pi, red.kinetic)},
                               {"potential_ratio", ratio(full.potential / four_pi, red.potential)}};
    }
    write_json(cfg, "energy_report.json", with_meta(cfg, body));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped flow on the cylinder S^1 x R: simulation, sweeps and diagnostics"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file supplying any flag; command-line flags win");
    app.set_version_flag("--version", cylflow::version_string);

    cylflow::RunConfig cfg;
    std::optional<double> rel_tol, abs_tol;
    app.add_option("--lambda", cfg.lambda, "potential flatness lambda")->capture_default_str();
    app.add_option("--mu", cfg.mu, "spiral rate mu")->capture_default_str();
    app.add_option("--damping", cfg.damping, "damping c")->capture_default_str();
    app.add_option("--y0", cfg.y0, "initial height(s); the start is at rest with sin(x + mu/y) = 1");
    app.add_option("--x0", cfg.x0, "override the initial angle (lift)");
    app.add_option("--rel-tol", rel_tol, "relative tolerance (default 1e-10, sweeps 1e-8)");
    app.add_option("--abs-tol", abs_tol, "absolute tolerance (default 1e-10, sweeps 1e-8)");
    app.add_option("--t-max", cfg.t_max, "integration horizon")->capture_default_str();
    app.add_option("--event-height", cfg.event_height, "stop at the first crossing of this height");
    app.add_option("--epsilon", cfg.epsilon, "limit-set band height")->capture_default_str();
    app.add_option("--bins", cfg.bins, "angular bins for limit-set coverage")->capture_default_str();
    app.add_option("--window", cfg.window, "recentering window T")->capture_default_str();
    app.add_option("--out-dir", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_option("--n-first", cfg.n_first, "sweep over the indexed family from n");
    app.add_option("--n-last", cfg.n_last, "... up to n");
    app.add_option("--k-min", cfg.k_min, "first zero-set branch")->capture_default_str();
    app.add_option("--k-max", cfg.k_max, "last zero-set branch")->capture_default_str();
    app.add_option("--y-min", cfg.y_min, "lowest sampled height of the zero-set branches")->capture_default_str();
    app.add_option("--samples", cfg.samples, "points per zero-set branch")->capture_default_str();
    app.add_option("--input", cfg.input, "trajectory CSV written by simulate");
    app.add_option("--k", cfg.k, "source dimension for the reduced energy")->capture_default_str();
    app.add_option("--partitions", cfg.partitions, "equal pieces for the residual audit")->capture_default_str();

    auto* simulate_cmd = app.add_subcommand("simulate", "integrate one trajectory");
    auto* sweep_cmd = app.add_subcommand("sweep", "exit times across a family of starts");
    auto* limitset_cmd = app.add_subcommand("limitset", "angular coverage near the axis");
    auto* zeroset_cmd = app.add_subcommand("zeroset", "export the zero set of the potential");
    auto* energy_cmd = app.add_subcommand("energy-report", "dissipation and energy audit of a run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        const bool sweeping = sweep_cmd->parsed();
        cfg.rel_tol = rel_tol.value_or(sweeping ? 1e-8 : 1e-10);
        cfg.abs_tol = abs_tol.value_or(sweeping ? 1e-8 : 1e-10);
        for (auto* sub : {simulate_cmd, sweep_cmd, limitset_cmd, zeroset_cmd, energy_cmd}) {
            if (sub->parsed()) cfg.command = sub->get_name();
        }
        if (simulate_cmd->parsed()) require_single_y0(cfg, app);
        if (limitset_cmd->parsed()) require_single_y0(cfg, app);
        cfg.validate();
        fs::create_directories(cfg.out_dir);

        if (simulate_cmd->parsed()) return cmd_simulate(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg);
        if (limitset_cmd->parsed()) return cmd_limitset(cfg);
        if (zeroset_cmd->parsed()) return cmd_zeroset(cfg);
        return cmd_energy_report(cfg);
    } catch (const CLI::Error& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_usage;
    } catch (const cylflow::IntegrationError& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_numeric;
    } catch (const cylflow::DomainError& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_usage;
    } catch (const cylflow::PreconditionError& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_usage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "cylflow: " << e.what() << '\n';
        return exit_numeric;
    }
}
