// Runs the cylflow binary end to end and inspects exit codes and files.

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cylflow/cylflow.hpp"

namespace cylflow {
namespace {

namespace fs = std::filesystem;
using io::json;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        root_ = fs::temp_directory_path() / (std::string("cylflow_cli_") + info->name());
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    // Runs the tool with `args`, returning its exit status; stderr lands in err_.
    int run(const std::string& args) {
        const fs::path err = root_ / "stderr.txt";
        const std::string cmd = "cd '" + root_.string() + "' && '" CYLFLOW_CLI_PATH "' " + args + " > /dev/null 2> '" +
                                err.string() + "'";
        const int status = std::system(cmd.c_str());
        std::ifstream is(err);
        std::stringstream ss;
        ss << is.rdbuf();
        err_ = ss.str();
        fs::remove(err);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    json read_json(const std::string& rel) const {
        std::ifstream is(root_ / rel);
        return json::parse(is);
    }

    io::TrajectoryFile read_csv(const std::string& rel) const {
        std::ifstream is(root_ / rel);
        return io::read_trajectory_csv(is);
    }

    static std::vector<std::string> lines(const fs::path& p) {
        std::ifstream is(p);
        std::vector<std::string> out;
        for (std::string l; std::getline(is, l);) out.push_back(l);
        return out;
    }

    fs::path root_;
    std::string err_;
};

TEST_F(Cli, SimulateOnAxisIsConstant) {
    ASSERT_EQ(run("simulate --y0 0 --t-max 50 --out-dir out"), 0) << err_;
    const auto s = read_json("out/summary.json");
    EXPECT_EQ(s.at("winding_total"), 0.0);
    EXPECT_EQ(s.at("E0"), 0.0);
    EXPECT_EQ(s.at("E_end"), 0.0);
    EXPECT_EQ(s.at("dissipation_residual"), 0.0);
    const auto f = read_csv("out/trajectory.csv");
    ASSERT_GT(f.rows.size(), 2u);
    for (const auto& r : f.rows) {
        EXPECT_EQ(r[3], 0.0);
        EXPECT_EQ(r[6], 0.0);
    }
    EXPECT_EQ(f.rows.back()[0], 50.0);
}

TEST_F(Cli, SimulateReferenceRun) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.4 --event-height 1 --out-dir ref"), 0) << err_;
    const auto s = read_json("ref/summary.json");
    EXPECT_TRUE(s.at("energy_monotone").get<bool>());
    EXPECT_TRUE(s.at("velocity_bound_ok").get<bool>());
    EXPECT_TRUE(s.at("zero_set_avoided").get<bool>());
    EXPECT_NEAR(s.at("exit_event").at("state").at("y").get<double>(), 1.0, 1e-10);
    EXPECT_NEAR(s.at("exit_event").at("t_event").get<double>(), 13.492572178115598, 1e-8);
    EXPECT_LE(std::abs(s.at("dissipation_residual").get<double>()), 1e-6);
    EXPECT_EQ(s.at("meta").at("version"), version_string);
    EXPECT_EQ(s.at("meta").at("config").at("lambda"), 0.05);
    const auto ev = read_json("ref/events.json");
    ASSERT_EQ(ev.at("events").size(), 1u);
    EXPECT_EQ(ev.at("events")[0].at("kind"), "height-crossing");
    const auto f = read_csv("ref/trajectory.csv");
    for (std::size_t i = 1; i < f.rows.size(); ++i) EXPECT_LE(f.rows[i][6], f.rows[i - 1][6] + 1e-9);
}

TEST_F(Cli, SimulateJsonFormat) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.4 --event-height 1 --format json --out-dir j"), 0) << err_;
    const auto t = read_json("j/trajectory.json");
    EXPECT_GT(t.at("samples").size(), 10u);
    EXPECT_EQ(t.at("meta").at("config").at("format"), "json");
    EXPECT_FALSE(fs::exists(root_ / "j/trajectory.csv"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run("simulate --out-dir out"), 2);
    EXPECT_NE(err_.find("Usage"), std::string::npos);
    EXPECT_NE(err_.find("--y0"), std::string::npos);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("bogus"), 2);
    EXPECT_EQ(run("simulate --y0 0.4 --no-such-flag 1"), 2);
    EXPECT_EQ(run("simulate --y0 0.4 --format xml"), 2);
    EXPECT_EQ(run("simulate --y0 0.4 --lambda -1"), 2);
    EXPECT_EQ(run("simulate --y0 0.4 --rel-tol 0.1"), 2);
    EXPECT_EQ(run("simulate --y0 abc"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, NumericalFailureExitsThree) {
    EXPECT_EQ(run("simulate --lambda 0.05 --y0 0.4 --rel-tol 1e-300 --abs-tol 1e-300 --out-dir out"), 3);
    EXPECT_NE(err_.find("underflow"), std::string::npos);
    EXPECT_EQ(run("simulate --y0 0 --x0 2e6 --out-dir out"), 3);
    EXPECT_NE(err_.find("exceeded"), std::string::npos);
}

TEST_F(Cli, SweepDefaultFamilyTimesOut) {
    ASSERT_EQ(run("sweep --n-first 1 --n-last 3 --t-max 100 --out-dir sw"), 0) << err_;
    const auto j = read_json("sw/sweep.json");
    ASSERT_EQ(j.at("entries").size(), 3u);
    for (const auto& e : j.at("entries")) {
        EXPECT_EQ(e.at("t_n"), "timeout");
        EXPECT_EQ(e.at("lambda"), 1.0);
    }
    EXPECT_EQ(j.at("meta").at("config").at("rel_tol"), 1e-8);
}

TEST_F(Cli, SweepHittingTimesIncrease) {
    ASSERT_EQ(run("sweep --lambda 0.05 --y0 0.5 0.4 0.3 0.25 --out-dir sw"), 0) << err_;
    const auto e = read_json("sw/sweep.json").at("entries");
    ASSERT_EQ(e.size(), 4u);
    for (std::size_t i = 1; i < e.size(); ++i) EXPECT_GT(e[i].at("t_n").get<double>(), e[i - 1].at("t_n").get<double>());
    const auto csv = lines(root_ / "sw/sweep.csv");
    ASSERT_EQ(csv.size(), 3u + 4u);
    EXPECT_TRUE(csv[2].starts_with("n,y0,lambda,t_n"));
}

TEST_F(Cli, SweepSingleAndEmpty) {
    ASSERT_EQ(run("sweep --lambda 0.05 --y0 0.5 --out-dir one"), 0) << err_;
    EXPECT_EQ(read_json("one/sweep.json").at("entries").size(), 1u);
    EXPECT_EQ(run("sweep --lambda 0.05 --out-dir none"), 2);
    EXPECT_EQ(run("sweep --lambda 0.05 --y0 0.5 --n-first 1 --out-dir both"), 2);
}

TEST_F(Cli, LimitSetDeepShallowAndSingleBin) {
    ASSERT_EQ(run("limitset --lambda 0.02 --y0 0.065 --epsilon 0.12 --bins 16 --out-dir deep"), 0) << err_;
    const auto deep = read_json("deep/limitset.json");
    EXPECT_EQ(deep.at("coverage"), 1.0);
    EXPECT_EQ(deep.at("tangent_map_candidates").size(), 16u);
    EXPECT_EQ(deep.at("covered").size(), 16u);

    ASSERT_EQ(run("limitset --lambda 0.05 --y0 0.9 --out-dir shallow"), 0) << err_;
    EXPECT_LE(read_json("shallow/limitset.json").at("coverage").get<double>(), 0.25);

    for (const char* y0 : {"0.9", "0.3"}) {
        ASSERT_EQ(run(std::string("limitset --lambda 0.05 --bins 1 --out-dir b1 --y0 ") + y0), 0) << err_;
        const double c = read_json("b1/limitset.json").at("coverage");
        EXPECT_TRUE(c == 0.0 || c == 1.0);
    }
}

TEST_F(Cli, ZeroSetFiles) {
    ASSERT_EQ(run("zeroset --lambda 0.05 --k-min 1 --k-max 4 --y-min 0.05 --out-dir z"), 0) << err_;
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(root_ / "z")) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    EXPECT_EQ(names, (std::vector<std::string>{"zeroset_axis.csv", "zeroset_k1.csv", "zeroset_k2.csv",
                                               "zeroset_k3.csv", "zeroset_k4.csv"}));
    const PotentialParams p{0.05, 1.0};
    for (const auto& name : names) {
        const auto ls = lines(root_ / "z" / name);
        EXPECT_EQ(ls[2], io::zero_set_columns);
        for (std::size_t i = 3; i < ls.size(); ++i) {
            std::stringstream row(ls[i]);
            std::string k, x, xm, y;
            std::getline(row, k, ',');
            std::getline(row, x, ',');
            std::getline(row, xm, ',');
            std::getline(row, y, ',');
            EXPECT_LE(std::abs(eval_V(p, {io::parse_double(x), io::parse_double(y)})), 1e-12);
        }
    }
    EXPECT_EQ(run("zeroset --k-min 3 --k-max 1 --out-dir bad"), 2);
    EXPECT_EQ(run("zeroset --y-min 0 --out-dir bad"), 2);
}

TEST_F(Cli, TrajectoryStaysClearOfZeroSet) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.3 --event-height 1 --out-dir sim"), 0) << err_;
    ASSERT_EQ(run("zeroset --lambda 0.05 --k-min -6 --k-max 6 --y-min 0.05 --samples 2000 --out-dir z"), 0) << err_;
    std::vector<CylinderPoint> zpts;
    for (const auto& e : fs::directory_iterator(root_ / "z")) {
        const auto ls = lines(e.path());
        for (std::size_t i = 3; i < ls.size(); ++i) {
            std::stringstream row(ls[i]);
            std::string k, x, xm, y;
            std::getline(row, k, ',');
            std::getline(row, x, ',');
            std::getline(row, xm, ',');
            std::getline(row, y, ',');
            zpts.push_back({io::parse_double(xm), io::parse_double(y)});
        }
    }
    const PotentialParams p{0.05, 1.0};
    const auto traj = read_csv("sim/trajectory.csv");
    for (const auto& r : traj.rows) {
        const CylinderPoint q{r[1], r[3]};
        if (sine_factor(p, q) >= 1e-3) continue;
        for (const auto& z : zpts) {
            const double d = std::hypot(angular_distance(q.x_lift, z.x_lift), q.y - z.y);
            EXPECT_GE(d, 1e-3) << "t=" << r[0];
        }
    }
}

TEST_F(Cli, EnergyReportOnReferenceRun) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.4 --event-height 1 --out-dir ref"), 0) << err_;
    ASSERT_EQ(run("energy-report --input ref/trajectory.csv --out-dir rep"), 0) << err_;
    const auto j = read_json("rep/energy_report.json");
    EXPECT_TRUE(j.at("reproduction").at("identical").get<bool>());
    ASSERT_EQ(j.at("partition").size(), 4u);
    for (const auto& piece : j.at("partition")) EXPECT_LE(std::abs(piece.at("residual").get<double>()), 1e-6);
    EXPECT_TRUE(j.at("velocity_bound").at("ok").get<bool>());
    EXPECT_NEAR(j.at("full_energy").at("kinetic_ratio").get<double>(), 1.0, 1e-6);
    EXPECT_NEAR(j.at("full_energy").at("potential_ratio").get<double>(), 2.0, 1e-5);
    EXPECT_EQ(j.at("run_config").at("lambda"), 0.05);
}

TEST_F(Cli, EnergyReportOnEquilibrium) {
    ASSERT_EQ(run("simulate --y0 0 --t-max 100 --out-dir eq"), 0) << err_;
    ASSERT_EQ(run("energy-report --input eq/trajectory.csv --out-dir rep"), 0) << err_;
    const auto j = read_json("rep/energy_report.json");
    EXPECT_EQ(j.at("dissipation_residual"), 0.0);
    for (const auto& piece : j.at("partition")) EXPECT_EQ(piece.at("residual"), 0.0);
    // constant axis profile over the last 40 time units: 2 (1 - e^-40) and 16 pi (1 - e^-40)
    EXPECT_EQ(j.at("reduced_energy").at("kinetic"), 0.0);
    EXPECT_NEAR(j.at("reduced_energy").at("potential").get<double>(), 1.9999999999999999915, 1e-8);
    EXPECT_NEAR(j.at("full_energy").at("potential").get<double>(), 16 * std::numbers::pi, 1e-7);
}

TEST_F(Cli, EnergyReportInputErrors) {
    EXPECT_EQ(run("energy-report --input missing.csv --out-dir rep"), 2);
    std::ofstream(root_ / "junk.csv") << "not a trajectory\n";
    EXPECT_EQ(run("energy-report --input junk.csv --out-dir rep"), 2);
    std::ofstream(root_ / "noconfig.csv") << io::trajectory_columns << "\n0,0,0,0,0,0,0,0,0\n";
    EXPECT_EQ(run("energy-report --input noconfig.csv --out-dir rep"), 2);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
    std::ofstream(root_ / "run.ini") << "lambda=0.05\ny0=0.4\nevent-height=1\nt-max=5\n";
    ASSERT_EQ(run("simulate --config run.ini --t-max 3 --out-dir c"), 0) << err_;
    const auto cfg = read_json("c/summary.json").at("meta").at("config");
    EXPECT_EQ(cfg.at("lambda"), 0.05);
    EXPECT_EQ(cfg.at("t_max"), 3.0);
    EXPECT_EQ(cfg.at("y0"), json::array({0.4}));
}

TEST_F(Cli, EmbeddedConfigReproducesPayload) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.3 --event-height 1 --out-dir a"), 0) << err_;
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.3 --event-height 1 --out-dir b"), 0) << err_;
    const auto a = lines(root_ / "a/trajectory.csv");
    const auto b = lines(root_ / "b/trajectory.csv");
    ASSERT_EQ(a.size(), b.size());
    // only the echoed out_dir differs
    for (std::size_t i = 2; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST_F(Cli, WritesOnlyInsideOutDir) {
    ASSERT_EQ(run("simulate --lambda 0.05 --y0 0.4 --event-height 1 --out-dir nested/out"), 0) << err_;
    std::vector<std::string> top;
    for (const auto& e : fs::directory_iterator(root_)) top.push_back(e.path().filename().string());
    EXPECT_EQ(top, std::vector<std::string>{"nested"});
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(root_ / "nested")) {
        if (e.is_regular_file()) {
            ++files;
            EXPECT_EQ(e.path().parent_path(), root_ / "nested/out");
        }
    }
    EXPECT_EQ(files, 3u);
}

}  // namespace
}  // namespace cylflow
