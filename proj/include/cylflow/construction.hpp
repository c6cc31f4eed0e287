#pragma once

// Shooting family started at rest ever closer to the axis, its exit times
// through y = 1, time-recentered windows near those exits, and diagnostics
// for how the near-axis motion winds and fills out the circle S^1 x {0}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numbers>
#include <optional>
#include <vector>

#include "cylflow/dynamics.hpp"
#include "cylflow/error.hpp"
#include "cylflow/potential.hpp"

namespace cylflow {

/// Rest state at (pi/2, 1/(2 pi n)), where sin(x + 1/y) = 1.
inline State family_initial(int n) {
    if (n < 1) throw DomainError("family_initial: n must be >= 1");
    return {0.0, {std::numbers::pi / 2.0, 1.0 / (two_pi * n)}, {0.0, 0.0}};
}

/// Rest state at height y0 with the angle chosen so that sin(x + mu/y0) = 1:
/// x0 = pi/2 - mu/y0 + 2 pi k. On the axis the angle is pi/2.
inline State rest_start(const PotentialParams& params, double y0, int k = 0) {
    if (!std::isfinite(y0)) throw DomainError("rest_start: y0 must be finite");
    const double x0 = y0 == 0.0 ? std::numbers::pi / 2.0 : std::numbers::pi / 2.0 - params.mu / y0 + two_pi * k;
    return {0.0, {x0, y0}, {0.0, 0.0}};
}

struct FamilyMember {
    int n = 0;  ///< position in the family (1-based)
    State initial;
};

struct FamilySpec {
    PotentialParams params;
    IntegratorConfig config;
    std::vector<FamilyMember> members;

    /// u_n started at family_initial(n) for n in [n_first, n_last].
    static FamilySpec indexed(const PotentialParams& params, const IntegratorConfig& config, int n_first, int n_last) {
        if (n_first < 1 || n_last < n_first) throw DomainError("FamilySpec: invalid index range");
        FamilySpec f{params, config, {}};
        for (int n = n_first; n <= n_last; ++n) f.members.push_back({n, family_initial(n)});
        f.validate();
        return f;
    }

    /// One member per initial height, each a rest start with unit sine factor.
    static FamilySpec heights(const PotentialParams& params, const IntegratorConfig& config,
                              const std::vector<double>& y0s) {
        FamilySpec f{params, config, {}};
        int n = 1;
        for (double y0 : y0s) f.members.push_back({n++, rest_start(params, y0)});
        f.validate();
        return f;
    }

    void validate() const {
        params.validate();
        config.validate();
        if (members.empty()) throw DomainError("FamilySpec: empty family");
        for (const auto& m : members) {
            if (!(physical_energy(params, m.initial) < 0.0)) {
                throw PreconditionError("FamilySpec: member " + std::to_string(m.n) +
                                        " does not start with negative physical energy");
            }
        }
    }
};

struct SweepEntry {
    int n = 0;
    double y0 = 0.0;
    std::optional<double> t_n;  ///< empty on timeout
    State exit_state;           ///< state at the crossing, or the last state on timeout
    bool exit_top = false;      ///< crossed y = +1
    bool confined = false;      ///< 0 < y < 1 strictly before the crossing
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double winding_total = 0.0;
    Trajectory trajectory;
};

/// Integrate every member up to its first crossing of y = -1 or y = +1.
/// Members run concurrently; results come back in member order.
inline std::vector<SweepEntry> sweep_hitting_times(const FamilySpec& family, bool parallel = true) {
    family.validate();
    const EventSpec exits[] = {EventSpec::height(1.0), EventSpec::height(-1.0)};

    auto run = [&family, &exits](const FamilyMember& m) {
        SweepEntry e;
        e.n = m.n;
        e.y0 = m.initial.q.y;
        e.trajectory = integrate(family.params, family.config, m.initial, exits);
        const Trajectory& tr = e.trajectory;
        e.energy_initial = tr.front().energy;
        e.energy_final = tr.back().energy;
        e.winding_total = tr.back().winding;
        e.exit_state = tr.back().state;
        if (auto hit = tr.first_event(EventKind::height_crossing)) {
            e.t_n = hit->t_event;
            e.exit_state = hit->state;
            e.exit_top = hit->level > 0.0;
            // the extremes include the crossing sample itself, so compare the
            // maximum against the exit level with the event tolerance
            const auto& st = tr.stats();
            e.confined = st.min_y > 0.0 && (st.max_y <= 1.0 + 1e-10);
            if (tr.has_dense()) {
                const auto samples = tr.samples();
                e.confined = e.confined && std::all_of(samples.begin(), samples.end() - 1, [](const Sample& s) {
                                 return s.state.q.y > 0.0 && s.state.q.y < 1.0;
                             });
            }
        }
        return e;
    };

    std::vector<SweepEntry> out;
    out.reserve(family.members.size());
    if (!parallel || family.members.size() == 1) {
        for (const auto& m : family.members) out.push_back(run(m));
        return out;
    }
    std::vector<std::future<SweepEntry>> jobs;
    jobs.reserve(family.members.size());
    for (const auto& m : family.members) jobs.push_back(std::async(std::launch::async, run, std::cref(m)));
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

/// Window t_n + s, s in [-T, 0], of a trajectory resampled on a uniform grid.
struct RecenteredRun {
    int n = 0;
    double t_n = 0.0;
    double window = 0.0;        ///< T
    std::vector<State> states;  ///< state.t is the window time s
};

inline RecenteredRun recenter(const Trajectory& traj, double t_n, double window, std::size_t grid, int n = 0) {
    if (!(window >= 0.0)) throw DomainError("recenter: window must be >= 0");
    if (window > 0.0 && grid < 2) throw DomainError("recenter: grid must have at least 2 points");
    if (!traj.contains(t_n) || !traj.contains(t_n - window)) {
        throw DomainError("recenter: window exits trajectory domain");
    }
    RecenteredRun run{n, t_n, window, {}};
    const std::size_t count = window == 0.0 ? 1 : grid;
    run.states.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // last grid point sits exactly at s = 0
        const double s = count == 1 ? 0.0 : -window + window * static_cast<double>(i) / static_cast<double>(count - 1);
        State st = traj.at(i + 1 == count ? t_n : t_n + s);
        st.t = s;
        run.states.push_back(st);
    }
    return run;
}

/// Shortest distance between two angles on S^1.
inline double angular_distance(double a, double b) {
    const double d = std::abs(wrap_angle(a) - wrap_angle(b));
    return std::min(d, two_pi - d);
}

/// Max over the grid of the cylinder distance between positions plus the
/// Euclidean distance between velocities.
inline double cauchy_gap(const RecenteredRun& a, const RecenteredRun& b) {
    if (a.window != b.window || a.states.size() != b.states.size()) {
        throw DomainError("cauchy_gap: mismatched windows");
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        const State& p = a.states[i];
        const State& q = b.states[i];
        const double dx = angular_distance(p.q.x_lift, q.q.x_lift);
        const double dy = p.q.y - q.q.y;
        const double pos = std::hypot(dx, dy);
        const double vel = std::hypot(p.v.x - q.v.x, p.v.y - q.v.y);
        gap = std::max(gap, pos + vel);
    }
    return gap;
}

struct WindingBand {
    double y_lo = 0.0;
    double y_hi = 0.0;
    double turns = 0.0;
};

struct WindingReport {
    double t1 = 0.0;
    double t2 = 0.0;
    double total_turns = 0.0;
    std::vector<WindingBand> profile;
};

/// Turns (x_lift(t2) - x_lift(t1)) / 2pi, with the increments also binned by
/// the height at which they happen: `bands` equal bands spanning
/// [y_lo, y_hi], heights outside clipped into the end bands.
inline WindingReport winding(const Trajectory& traj, double t1, double t2, std::size_t bands = 10, double y_lo = 0.0,
                             double y_hi = 1.0) {
    if (!(t1 <= t2) || !traj.contains(t1) || !traj.contains(t2)) {
        throw DomainError("winding: interval outside trajectory domain");
    }
    if (bands == 0 || !(y_hi > y_lo)) throw DomainError("winding: invalid band layout");
    WindingReport rep;
    rep.t1 = t1;
    rep.t2 = t2;
    rep.total_turns = (traj.at(t2).q.x_lift - traj.at(t1).q.x_lift) / two_pi;
    const double width = (y_hi - y_lo) / static_cast<double>(bands);
    for (std::size_t b = 0; b < bands; ++b) {
        rep.profile.push_back({y_lo + width * b, y_lo + width * (b + 1), 0.0});
    }
    if (t1 == t2 || traj.segments().empty()) return rep;

    auto band_of = [&](double y) {
        const double k = std::floor((y - y_lo) / width);
        return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(bands - 1)));
    };
    const auto samples = traj.samples();
    const auto segments = traj.segments();
    constexpr int sub = 4;
    for (std::size_t i = traj.segment_index(t1); i <= traj.segment_index(t2); ++i) {
        const double a = std::max(t1, samples[i].state.t);
        const double b = std::min(t2, samples[i + 1].state.t);
        if (!(b > a)) continue;
        const Segment& seg = segments[i];
        double ta = a;
        double xa = seg.component(0, a);
        for (int k = 1; k <= sub; ++k) {
            const double tb = k == sub ? b : a + (b - a) * k / sub;
            const double xb = seg.component(0, tb);
            rep.profile[band_of(seg.component(1, 0.5 * (ta + tb)))].turns += (xb - xa) / two_pi;
            ta = tb;
            xa = xb;
        }
    }
    return rep;
}

struct LimitSetReport {
    double epsilon = 0.0;
    std::size_t bins = 0;
    std::vector<bool> covered;
    std::vector<std::optional<double>> first_passage;
    double coverage = 0.0;
};

/// Angular bins of S^1 visited by the trajectory while 0 < y < epsilon,
/// checked at every sample and at `probes_per_step` points inside each step.
inline LimitSetReport limit_set_coverage(const Trajectory& traj, double epsilon, std::size_t bins,
                                         int probes_per_step = 16) {
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw DomainError("limit_set_coverage: epsilon must lie in (0, 0.5]");
    if (bins < 1) throw DomainError("limit_set_coverage: need at least one bin");
    LimitSetReport rep;
    rep.epsilon = epsilon;
    rep.bins = bins;
    rep.covered.assign(bins, false);
    rep.first_passage.assign(bins, std::nullopt);

    const double width = two_pi / static_cast<double>(bins);
    auto visit = [&](double t, double x_lift, double y) {
        if (!(y > 0.0 && y < epsilon)) return;
        auto b = static_cast<std::size_t>(wrap_angle(x_lift) / width);
        b = std::min(b, bins - 1);
        if (!rep.covered[b]) {
            rep.covered[b] = true;
            rep.first_passage[b] = t;
        }
    };
    const auto samples = traj.samples();
    const auto segments = traj.segments();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const State& s = samples[i].state;
        visit(s.t, s.q.x_lift, s.q.y);
        if (i < segments.size()) {
            const double a = s.t;
            const double b = samples[i + 1].state.t;
            for (int k = 1; k <= probes_per_step; ++k) {
                const double t = a + (b - a) * k / (probes_per_step + 1);
                visit(t, segments[i].component(0, t), segments[i].component(1, t));
            }
        }
    }
    const auto n = std::count(rep.covered.begin(), rep.covered.end(), true);
    rep.coverage = static_cast<double>(n) / static_cast<double>(bins);
    return rep;
}

/// Bin-center angles of the covered bins.
inline std::vector<double> tangent_limit_candidates(const LimitSetReport& report) {
    std::vector<double> out;
    if (report.bins == 0) return out;
    const double width = two_pi / static_cast<double>(report.bins);
    for (std::size_t b = 0; b < report.covered.size(); ++b) {
        if (report.covered[b]) out.push_back((static_cast<double>(b) + 0.5) * width);
    }
    return out;
}

}  // namespace cylflow
