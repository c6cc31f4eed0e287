#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "cylflow/cylflow.hpp"

namespace cylflow {
namespace {

const PotentialParams ref_params{0.05, 1.0};

Trajectory reference_run() {
    const EventSpec ev[] = {EventSpec::height(1.0)};
    return integrate(ref_params, IntegratorConfig{}, rest_start(ref_params, 0.4), ev);
}

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(io::fmt(0.1), "0.1");
    EXPECT_EQ(io::fmt(1e-10), "1e-10");
    EXPECT_EQ(io::fmt(0.0), "0");
    for (double v : {std::numbers::pi, -7.157165835186041e-18, 13.492572178115598, std::nextafter(1.0, 2.0),
                     std::numeric_limits<double>::denorm_min()}) {
        EXPECT_EQ(io::parse_double(io::fmt(v)), v);
    }
    EXPECT_THROW((void)io::parse_double("1.5x"), DomainError);
    EXPECT_THROW((void)io::parse_double(""), DomainError);
}

TEST(TrajectoryCsv, HeaderAndRoundTrip) {
    const auto tr = reference_run();
    const nlohmann::json cfg = {{"lambda", 0.05}, {"y0", {0.4}}};
    std::stringstream ss;
    io::write_trajectory_csv(ss, tr, cfg);
    std::string first;
    std::getline(ss, first);
    EXPECT_EQ(first, "# cylflow 0.1.0");
    ss.seekg(0);
    const auto file = io::read_trajectory_csv(ss);
    ASSERT_TRUE(file.config);
    EXPECT_EQ(*file.config, cfg);
    EXPECT_EQ(file.version, "cylflow 0.1.0");
    ASSERT_EQ(file.rows.size(), tr.samples().size());
    for (std::size_t i = 0; i < file.rows.size(); ++i) {
        const auto& s = tr.samples()[i];
        EXPECT_EQ(file.rows[i][0], s.state.t);
        EXPECT_EQ(file.rows[i][1], s.state.q.x_lift);
        EXPECT_EQ(file.rows[i][2], s.state.q.angle());
        EXPECT_EQ(file.rows[i][3], s.state.q.y);
        EXPECT_EQ(file.rows[i][6], s.energy);
        EXPECT_EQ(file.rows[i][8], s.winding);
    }
}

TEST(TrajectoryCsv, RejectsMalformedInput) {
    std::stringstream bad_header("# cylflow 0.1.0\nt,x,y\n");
    EXPECT_THROW((void)io::read_trajectory_csv(bad_header), DomainError);
    std::stringstream short_row("t,x_lift,x_mod_2pi,y,xdot,ydot,E,V,winding\n1,2,3\n");
    EXPECT_THROW((void)io::read_trajectory_csv(short_row), DomainError);
    std::stringstream bad_config("# config {oops\nt,x_lift,x_mod_2pi,y,xdot,ydot,E,V,winding\n");
    EXPECT_THROW((void)io::read_trajectory_csv(bad_config), DomainError);
    std::stringstream empty("");
    EXPECT_THROW((void)io::read_trajectory_csv(empty), DomainError);
}

TEST(TrajectoryJson, SchemaAndMeta) {
    const auto tr = reference_run();
    const auto j = io::trajectory_json(tr, {{"k", 1}});
    EXPECT_EQ(j.at("meta").at("version"), version_string);
    EXPECT_EQ(j.at("meta").at("config").at("k"), 1);
    ASSERT_EQ(j.at("samples").size(), tr.samples().size());
    for (const char* key : {"t", "x_lift", "x_mod_2pi", "y", "xdot", "ydot", "E", "V", "winding"}) {
        EXPECT_TRUE(j.at("samples")[0].contains(key)) << key;
    }
}

TEST(EventsJson, Schema) {
    const auto ev = io::events_json(reference_run());
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].at("kind"), "height-crossing");
    EXPECT_NEAR(ev[0].at("t_event").get<double>(), 13.492572178115598, 1e-8);
    for (const char* key : {"t", "x_lift", "y", "xdot", "ydot"}) EXPECT_TRUE(ev[0].at("state").contains(key)) << key;
}

TEST(ZeroSetCsv, BranchColumn) {
    std::stringstream ss;
    io::write_zero_set_csv(ss, zero_set_curves(ref_params, 1, 1, 0.5, 2), {});
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(ss, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 3u + 2u + 2u);
    EXPECT_EQ(lines[2], io::zero_set_columns);
    EXPECT_TRUE(lines[3].starts_with("1,"));
    EXPECT_TRUE(lines.back().starts_with("axis,"));
    EXPECT_TRUE(lines.back().ends_with(",0"));
}

TEST(SweepJson, TimeoutAndSchema) {
    SweepEntry done;
    done.n = 1;
    done.y0 = 0.4;
    done.t_n = 13.5;
    done.exit_state = {13.5, {0.52, 1.0}, {0.0, 0.0}};
    SweepEntry stuck;
    stuck.n = 2;
    stuck.y0 = 0.1;
    const auto j = io::sweep_json({done, stuck}, ref_params);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0].at("t_n"), 13.5);
    EXPECT_EQ(j[1].at("t_n"), "timeout");
    EXPECT_EQ(j[0].at("lambda"), 0.05);
    EXPECT_EQ(j[0].at("exit").at("y"), 1.0);
    for (const char* key : {"n", "y0", "winding_total", "energy_initial", "energy_final"}) {
        EXPECT_TRUE(j[0].contains(key)) << key;
    }
}

TEST(LimitSetJson, NullsForUnvisitedBins) {
    LimitSetReport rep;
    rep.epsilon = 0.12;
    rep.bins = 2;
    rep.covered = {true, false};
    rep.first_passage = {1.5, std::nullopt};
    rep.coverage = 0.5;
    const auto j = io::limit_set_json(rep);
    EXPECT_EQ(j.at("covered")[0], true);
    EXPECT_EQ(j.at("first_passage")[0], 1.5);
    EXPECT_TRUE(j.at("first_passage")[1].is_null());
    EXPECT_EQ(j.at("coverage"), 0.5);
}

TEST(MapGridCsv, Columns) {
    const auto tr = reference_run();
    const EquivariantMap map(std::make_shared<const Trajectory>(tr.time_shifted(-tr.t_back())));
    std::stringstream ss;
    io::write_map_grid_csv(ss, sample_map_grid(map, 2, 2, 2), {});
    std::string line;
    int n = 0;
    while (std::getline(ss, line)) ++n;
    EXPECT_EQ(n, 3 + 8);
}

TEST(RunConfig, JsonRoundTrip) {
    RunConfig c;
    c.command = "simulate";
    c.lambda = 0.05;
    c.y0 = {0.4, 0.3};
    c.x0 = -1.25;
    c.event_height = 1.0;
    c.n_first = 2;
    c.format = "json";
    const auto back = run_config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_EQ(*back.x0, -1.25);
    EXPECT_FALSE(back.n_last);
    EXPECT_THROW((void)run_config_from_json({{"lambda", "big"}}), DomainError);
}

TEST(RunConfig, Validation) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    c.format = "xml";
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.bins = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.rel_tol = 0.5;
    EXPECT_THROW(c.validate(), DomainError);
    c = {};
    c.y0 = {NAN};
    EXPECT_THROW(c.validate(), DomainError);
}

}  // namespace
}  // namespace cylflow
