#pragma once

// Damped motion of a unit mass on the cylinder:
//
//   u'' + c u' + grad V(u) = 0,
//
// with physical energy E = |u'|^2 / 2 + V(u) obeying dE/dt = -c |u'|^2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cylflow/dopri5.hpp"
#include "cylflow/error.hpp"
#include "cylflow/potential.hpp"
#include "cylflow/quadrature.hpp"

namespace cylflow {

struct Velocity {
    double x = 0.0;
    double y = 0.0;
};

struct State {
    double t = 0.0;
    CylinderPoint q;
    Velocity v;

    [[nodiscard]] bool finite() const {
        return std::isfinite(t) && std::isfinite(q.x_lift) && std::isfinite(q.y) && std::isfinite(v.x) &&
               std::isfinite(v.y);
    }
    [[nodiscard]] double kinetic() const { return 0.5 * (v.x * v.x + v.y * v.y); }
};

/// Phase vector (x_lift, y, xdot, ydot) as seen by the stepper.
using PhaseVec = dopri5::Vec<4>;
using Segment = dopri5::DenseSegment<4>;

inline PhaseVec to_phase(const State& s) { return {s.q.x_lift, s.q.y, s.v.x, s.v.y}; }
inline State to_state(double t, const PhaseVec& p) { return {t, {p[0], p[1]}, {p[2], p[3]}}; }

enum class Storage {
    dense,      ///< every accepted step with its interpolant
    endpoints,  ///< first and last sample only; statistics are still exact
};

struct IntegratorConfig {
    double damping = 1.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double max_step = 0.5;
    double t_max = 1e4;
    /// Near the axis the step is also capped at phase_cap * y^2 / mu so that
    /// the oscillation of sin(x + mu/y) is resolved.
    double phase_cap = 0.1;
    Storage storage = Storage::dense;

    void validate() const {
        if (!(damping > 0.0) || !std::isfinite(damping)) throw DomainError("IntegratorConfig: damping must be > 0");
        if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) throw DomainError("IntegratorConfig: rel_tol must lie in (0, 1e-3]");
        if (!(abs_tol > 0.0 && abs_tol <= 1e-3)) throw DomainError("IntegratorConfig: abs_tol must lie in (0, 1e-3]");
        if (!(max_step > 0.0)) throw DomainError("IntegratorConfig: max_step must be > 0");
        if (!(phase_cap > 0.0)) throw DomainError("IntegratorConfig: phase_cap must be > 0");
        if (!std::isfinite(t_max)) throw DomainError("IntegratorConfig: t_max must be finite");
    }
};

enum class EventKind { height_crossing, angle_crossing, timeout, blowup };

inline std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::height_crossing: return "height-crossing";
        case EventKind::angle_crossing: return "angle-crossing";
        case EventKind::timeout: return "timeout";
        case EventKind::blowup: return "blowup";
    }
    return "unknown";
}

struct EventSpec {
    EventKind kind = EventKind::height_crossing;
    double level = 0.0;  ///< height, or angle in [0, 2pi)
    bool terminal = true;

    static EventSpec height(double h, bool terminal = true) { return {EventKind::height_crossing, h, terminal}; }
    static EventSpec angle(double a, bool terminal = false) {
        return {EventKind::angle_crossing, wrap_angle(a), terminal};
    }
};

struct EventRecord {
    EventKind kind = EventKind::timeout;
    double t_event = 0.0;
    State state;
    bool refined = false;
    double level = 0.0;
};

/// Raised for blowup (state norm above 1e6) and step-size underflow.
class IntegrationError : public std::runtime_error {
public:
    enum class Reason { blowup, step_underflow };

    IntegrationError(Reason reason, EventRecord record, const std::string& what)
        : std::runtime_error(what), reason_(reason), record_(std::move(record)) {}

    [[nodiscard]] Reason reason() const { return reason_; }
    [[nodiscard]] const EventRecord& record() const { return record_; }

private:
    Reason reason_;
    EventRecord record_;
};

inline constexpr double blowup_norm = 1e6;
inline constexpr double event_time_tol = 1e-12;

/// Right-hand side: (velocity, acceleration) with acceleration = -c v - grad V.
struct Derivative {
    Velocity velocity;
    Velocity acceleration;
};

inline Derivative rhs(const PotentialParams& params, double damping, const State& s) {
    const Gradient g = grad_V(params, s.q);
    return {s.v, {-damping * s.v.x - g.dx, -damping * s.v.y - g.dy}};
}

inline double physical_energy(const PotentialParams& params, const State& s) {
    return s.kinetic() + eval_V(params, s.q);
}

struct Sample {
    State state;
    double energy = 0.0;
    double potential = 0.0;
    double winding = 0.0;  ///< (x_lift(t) - x_lift(t0)) / 2pi
};

/// Running extrema over every accepted step, kept in both storage modes.
struct TrajectoryStats {
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    double max_kinetic = 0.0;
    double min_potential = std::numeric_limits<double>::infinity();
    double max_energy_rise = -std::numeric_limits<double>::infinity();  ///< max of E_{i+1} - E_i
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

/// Time-ordered solution. Segment i interpolates between samples i and i+1.
/// Immutable once built.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(PotentialParams params, double damping) : params_(params), damping_(damping) {}

    [[nodiscard]] const PotentialParams& params() const { return params_; }
    [[nodiscard]] double damping() const { return damping_; }
    [[nodiscard]] std::span<const Sample> samples() const { return samples_; }
    [[nodiscard]] std::span<const Segment> segments() const { return segments_; }
    [[nodiscard]] std::span<const EventRecord> events() const { return events_; }
    [[nodiscard]] const TrajectoryStats& stats() const { return stats_; }
    [[nodiscard]] bool has_dense() const { return !samples_.empty() && segments_.size() + 1 == samples_.size(); }

    [[nodiscard]] const Sample& front() const { return samples_.front(); }
    [[nodiscard]] const Sample& back() const { return samples_.back(); }
    [[nodiscard]] double t_front() const { return samples_.front().state.t; }
    [[nodiscard]] double t_back() const { return samples_.back().state.t; }

    [[nodiscard]] bool contains(double t) const {
        return !samples_.empty() && t >= t_front() && t <= t_back();
    }

    /// First event of the given kind, if any.
    [[nodiscard]] std::optional<EventRecord> first_event(EventKind kind) const {
        for (const auto& e : events_)
            if (e.kind == kind) return e;
        return std::nullopt;
    }

    /// Index of the segment covering t. Requires dense storage.
    [[nodiscard]] std::size_t segment_index(double t) const {
        require_dense();
        if (!contains(t)) throw DomainError("Trajectory: time " + std::to_string(t) + " outside domain");
        if (segments_.empty()) return 0;
        auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const Sample& s) { return v < s.state.t; });
        std::size_t i = static_cast<std::size_t>(it - samples_.begin());
        i = i == 0 ? 0 : i - 1;
        return std::min(i, segments_.size() - 1);
    }

    /// Dense-output state at time t.
    [[nodiscard]] State at(double t) const {
        require_dense();
        if (segments_.empty()) {
            if (!contains(t)) throw DomainError("Trajectory: time outside domain");
            State s = samples_.front().state;
            s.t = t;
            return s;
        }
        const std::size_t i = segment_index(t);
        if (t == samples_[i].state.t) return samples_[i].state;
        if (t == samples_[i + 1].state.t) return samples_[i + 1].state;
        return to_state(t, segments_[i](t));
    }

    [[nodiscard]] double winding_at(double t) const { return (at(t).q.x_lift - front().state.q.x_lift) / two_pi; }

    /// Copy with every time shifted by dt.
    [[nodiscard]] Trajectory time_shifted(double dt) const {
        Trajectory out = *this;
        for (auto& s : out.samples_) s.state.t += dt;
        for (auto& g : out.segments_) g.t0 += dt;
        for (auto& e : out.events_) {
            e.t_event += dt;
            e.state.t += dt;
        }
        return out;
    }

    /// Trajectory through explicit states with linear interpolation between
    /// them, for synthetic inputs to the analysis routines.
    static Trajectory from_states(const PotentialParams& params, double damping, std::span<const State> states) {
        if (states.empty()) throw DomainError("Trajectory::from_states: no states");
        Trajectory tr(params, damping);
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (!states[i].finite()) throw DomainError("Trajectory::from_states: non-finite state");
            if (i > 0) {
                if (!(states[i].t > states[i - 1].t)) throw DomainError("Trajectory::from_states: times must increase");
                tr.segments_.push_back(Segment::linear(states[i - 1].t, states[i].t - states[i - 1].t,
                                                       to_phase(states[i - 1]), to_phase(states[i])));
            }
            tr.push_sample(states[i]);
        }
        return tr;
    }

private:
    template <class Ev>
    friend Trajectory integrate_impl(const PotentialParams&, double, const IntegratorConfig&, const State&,
                                     std::span<const EventSpec>, Ev&&);

    void require_dense() const {
        if (!has_dense()) throw DomainError("Trajectory: dense output not stored");
    }

    void push_sample(const State& s, bool count = true) {
        Sample smp;
        smp.state = s;
        smp.potential = eval_V(params_, s.q);
        smp.energy = s.kinetic() + smp.potential;
        if (!x0_) x0_ = s.q.x_lift;
        smp.winding = (s.q.x_lift - *x0_) / two_pi;
        if (count) update_stats(smp);
        samples_.push_back(smp);
    }

    void update_stats(const Sample& smp) {
        stats_.min_y = std::min(stats_.min_y, smp.state.q.y);
        stats_.max_y = std::max(stats_.max_y, smp.state.q.y);
        stats_.max_kinetic = std::max(stats_.max_kinetic, smp.state.kinetic());
        stats_.min_potential = std::min(stats_.min_potential, smp.potential);
        if (last_energy_) stats_.max_energy_rise = std::max(stats_.max_energy_rise, smp.energy - *last_energy_);
        last_energy_ = smp.energy;
    }

    PotentialParams params_;
    double damping_ = 1.0;
    std::vector<Sample> samples_;
    std::vector<Segment> segments_;
    std::vector<EventRecord> events_;
    TrajectoryStats stats_;
    std::optional<double> last_energy_;
    std::optional<double> x0_;
};

namespace detail {

inline double state_norm(const PhaseVec& p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

// Signed event function on the dense interpolant. Angle events use the lift
// shifted to the nearest crossing level found during bracketing.
inline double height_gap(const Segment& seg, double t, double level) { return seg.component(1, t) - level; }

inline double bisect(const Segment& seg, double a, double b, double ga, double level, std::size_t comp) {
    while (b - a > event_time_tol) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double gm = seg.component(comp, m) - level;
        if (gm == 0.0) return m;
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return b;
}

struct Crossing {
    double t;
    double level;  // value of the tracked component at the crossing
};

// Earliest crossing in (t_lo, t_hi] of the given event on one segment,
// bracketed on `probes` interior points of the interpolant.
inline std::optional<Crossing> find_crossing(const Segment& seg, double t_lo, double t_hi, const EventSpec& spec,
                                            int probes = 8) {
    const std::size_t comp = spec.kind == EventKind::height_crossing ? 1 : 0;
    double a = t_lo;
    double va = seg.component(comp, a);
    for (int i = 1; i <= probes; ++i) {
        const double b = i == probes ? t_hi : t_lo + (t_hi - t_lo) * i / probes;
        const double vb = seg.component(comp, b);
        if (spec.kind == EventKind::height_crossing) {
            const double ga = va - spec.level;
            const double gb = vb - spec.level;
            if (ga != 0.0 && (gb == 0.0 || (ga > 0.0) != (gb > 0.0))) {
                return Crossing{gb == 0.0 ? b : bisect(seg, a, b, ga, spec.level, comp), spec.level};
            }
        } else {
            const double ka = std::floor((va - spec.level) / two_pi);
            const double kb = std::floor((vb - spec.level) / two_pi);
            if (ka != kb) {
                const double lvl = spec.level + two_pi * std::max(ka, kb);
                const double ga = va - lvl;
                if (ga == 0.0) {
                    // crossing point sits exactly on the left probe
                } else {
                    return Crossing{vb == lvl ? b : bisect(seg, a, b, ga, lvl, comp), lvl};
                }
            }
        }
        a = b;
        va = vb;
    }
    return std::nullopt;
}

inline double initial_step(const PhaseVec& y, const PhaseVec& f, double cap, double rel_tol, double abs_tol) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sc = abs_tol + rel_tol * std::abs(y[i]);
        d0 += (y[i] / sc) * (y[i] / sc);
        d1 += (f[i] / sc) * (f[i] / sc);
    }
    d0 = std::sqrt(d0 / 4.0);
    d1 = std::sqrt(d1 / 4.0);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    if (!std::isfinite(h)) {
        // tolerances so small that the scaled norms overflow; the ratio is scale free
        double n0 = 0.0, n1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            n0 = std::max(n0, std::abs(y[i]));
            n1 = std::max(n1, std::abs(f[i]));
        }
        h = n0 > 0.0 && n1 > 0.0 ? 0.01 * n0 / n1 : 1e-6;
    }
    return std::min(h, cap);
}

}  // namespace detail

/// Step cap at the current height: the configured max_step, tightened to
/// phase_cap * y^2 / mu wherever the potential is not flushed to zero.
inline double step_cap(const PotentialParams& params, const IntegratorConfig& config, double y) {
    double cap = config.max_step;
    if (y != 0.0 && params.lambda / (y * y) <= underflow_guard) {
        cap = std::min(cap, config.phase_cap * y * y / params.mu);
    }
    return cap;
}

/// Core adaptive loop. `on_step(segment, t0, t1)` is called for every
/// accepted step (after truncation at a terminal event).
template <class OnStep>
Trajectory integrate_impl(const PotentialParams& params, double damping, const IntegratorConfig& config,
                          const State& initial, std::span<const EventSpec> events, OnStep&& on_step) {
    params.validate();
    config.validate();
    if (!initial.finite()) throw DomainError("integrate: initial state is not finite");

    auto f = [&params, damping](double, const PhaseVec& p) -> PhaseVec {
        const Gradient g = grad_V(params, {p[0], p[1]});
        return {p[2], p[3], -damping * p[2] - g.dx, -damping * p[3] - g.dy};
    };
    dopri5::Stepper<4, decltype(f)> stepper(f);
    dopri5::StepController controller;

    Trajectory tr(params, damping);
    const bool dense = config.storage == Storage::dense;
    tr.push_sample(initial);

    double t = initial.t;
    PhaseVec y = to_phase(initial);
    PhaseVec dy = stepper.derivative(t, y);
    double h = detail::initial_step(y, dy, step_cap(params, config, y[1]), config.rel_tol, config.abs_tol);
    bool last_rejected = false;
    bool stopped = false;
    State last_state = initial;

    while (t < config.t_max && !stopped) {
        const double cap = step_cap(params, config, y[1]);
        h = std::min(h, cap);
        bool final_step = false;
        if (t + h >= config.t_max) {
            h = config.t_max - t;
            final_step = true;
        }
        if (!(h > 1e-14 * std::max(1.0, std::abs(t)))) {
            EventRecord rec{EventKind::timeout, t, to_state(t, y), false, 0.0};
            throw IntegrationError(IntegrationError::Reason::step_underflow, rec,
                                   "integrate: step size underflow at t = " + std::to_string(t));
        }

        const auto res = stepper.step(t, y, dy, h, config.rel_tol, config.abs_tol);
        if (!(res.error <= 1.0)) {
            ++tr.stats_.rejected_steps;
            h = controller.propose(h, std::isfinite(res.error) ? res.error : 1e10, false);
            last_rejected = true;
            continue;
        }

        const Segment seg = stepper.dense_segment();
        double t_next = final_step ? config.t_max : t + h;
        PhaseVec y_next = res.y_new;

        if (detail::state_norm(y_next) > blowup_norm) {
            EventRecord rec{EventKind::blowup, t_next, to_state(t_next, y_next), false, 0.0};
            throw IntegrationError(IntegrationError::Reason::blowup, rec,
                                   "integrate: state norm exceeded 1e6 at t = " + std::to_string(t_next));
        }

        // events on the interpolant; keep the earliest terminal one
        std::vector<EventRecord> found;
        std::optional<double> t_stop;
        for (const auto& spec : events) {
            if (spec.kind != EventKind::height_crossing && spec.kind != EventKind::angle_crossing) continue;
            double lo = t;
            while (lo < t_next) {
                const auto c = detail::find_crossing(seg, lo, t_next, spec);
                if (!c) break;
                const State s = to_state(c->t, seg(c->t));
                found.push_back({spec.kind, c->t, s, true, c->level});
                if (spec.terminal) {
                    if (!t_stop || c->t < *t_stop) t_stop = c->t;
                    break;
                }
                lo = c->t;
            }
        }
        std::sort(found.begin(), found.end(),
                  [](const EventRecord& a, const EventRecord& b) { return a.t_event < b.t_event; });
        if (t_stop) {
            t_next = *t_stop;
            y_next = seg(t_next);
            stopped = true;
        }
        for (const auto& e : found)
            if (!t_stop || e.t_event <= *t_stop) tr.events_.push_back(e);

        ++tr.stats_.accepted_steps;
        on_step(seg, t, t_next);
        last_state = to_state(t_next, y_next);
        if (dense) {
            tr.segments_.push_back(seg);
            tr.push_sample(last_state);
        } else {
            Sample smp;
            smp.state = last_state;
            smp.potential = eval_V(params, last_state.q);
            smp.energy = last_state.kinetic() + smp.potential;
            tr.update_stats(smp);
        }

        double h_new = controller.propose(h, res.error, true);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        t = t_next;
        y = res.y_new;
        dy = res.dy_new;
        h = h_new;
    }

    if (!dense && tr.stats_.accepted_steps > 0) tr.push_sample(last_state, false);
    if (!stopped) {
        tr.events_.push_back({EventKind::timeout, t, last_state, false, 0.0});
    }
    return tr;
}

/// Integrate forward from `initial` until the first terminal event or t_max.
inline Trajectory integrate(const PotentialParams& params, const IntegratorConfig& config, const State& initial,
                            std::span<const EventSpec> events = {}) {
    return integrate_impl(params, config.damping, config, initial, events, [](const Segment&, double, double) {});
}

/// Exploratory run backward in time. The result is parametrized by the
/// reversed clock tau = -t, on which the motion is anti-damped; velocities
/// are reported with respect to tau. Growth is fenced by the blowup error.
inline Trajectory integrate_reversed(const PotentialParams& params, const IntegratorConfig& config,
                                     const State& initial, std::span<const EventSpec> events = {}) {
    State s = initial;
    s.t = -initial.t;
    s.v = {-initial.v.x, -initial.v.y};
    IntegratorConfig cfg = config;
    cfg.validate();
    return integrate_impl(params, -config.damping, cfg, s, events, [](const Segment&, double, double) {});
}

/// Classical fixed-step Dormand-Prince propagation, without error control,
/// used to measure the convergence order.
inline State integrate_fixed_step(const PotentialParams& params, double damping, const State& initial, double t_end,
                                  std::size_t steps) {
    if (steps == 0) throw DomainError("integrate_fixed_step: steps must be > 0");
    auto f = [&params, damping](double, const PhaseVec& p) -> PhaseVec {
        const Gradient g = grad_V(params, {p[0], p[1]});
        return {p[2], p[3], -damping * p[2] - g.dx, -damping * p[3] - g.dy};
    };
    dopri5::Stepper<4, decltype(f)> stepper(f);
    const double h = (t_end - initial.t) / static_cast<double>(steps);
    PhaseVec y = to_phase(initial);
    PhaseVec dy = stepper.derivative(initial.t, y);
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = initial.t + h * static_cast<double>(i);
        const auto r = stepper.step(t, y, dy, h, 1.0, 1.0);
        y = r.y_new;
        dy = r.dy_new;
    }
    return to_state(t_end, y);
}

/// E(t2) - E(t1) + c * integral_{t1}^{t2} |u'|^2 dt over the dense output.
inline double dissipation_residual(const PotentialParams& params, const Trajectory& traj, double t1, double t2,
                                   double quad_tol = 1e-15) {
    if (!(t1 < t2) || !traj.contains(t1) || !traj.contains(t2)) {
        throw DomainError("dissipation_residual: interval outside trajectory domain");
    }
    const double e1 = physical_energy(params, traj.at(t1));
    const double e2 = physical_energy(params, traj.at(t2));
    const auto samples = traj.samples();
    const auto segments = traj.segments();
    double integral = 0.0;
    if (!segments.empty()) {
        const std::size_t i0 = traj.segment_index(t1);
        const std::size_t i1 = traj.segment_index(t2);
        for (std::size_t i = i0; i <= i1; ++i) {
            const double a = std::max(t1, samples[i].state.t);
            const double b = std::min(t2, samples[i + 1].state.t);
            if (!(b > a)) continue;
            const Segment& seg = segments[i];
            auto speed2 = [&seg](double t) {
                const double vx = seg.component(2, t);
                const double vy = seg.component(3, t);
                return vx * vx + vy * vy;
            };
            integral += adaptive_simpson(speed2, a, b, quad_tol, 30);
        }
    }
    return e2 - e1 + traj.damping() * integral;
}

struct VelocityBoundReport {
    bool precondition_met = false;  ///< E(0) < 0
    double max_kinetic = 0.0;
    double min_potential = 0.0;
    std::vector<std::size_t> violations;  ///< sample indices breaking |v|^2/2 <= -V, or |v|^2/2 >= 1
    [[nodiscard]] bool ok() const { return violations.empty() && max_kinetic < 1.0; }
};

/// Checks |u'|^2 / 2 < -V(u) <= 1 at every sample, tolerance 1e-9.
inline VelocityBoundReport velocity_bound_check(const PotentialParams& params, const Trajectory& traj,
                                                double tol = 1e-9) {
    VelocityBoundReport rep;
    const auto samples = traj.samples();
    if (samples.empty()) return rep;
    rep.precondition_met = physical_energy(params, samples.front().state) < 0.0;
    rep.min_potential = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double ke = samples[i].state.kinetic();
        const double v = eval_V(params, samples[i].state.q);
        rep.max_kinetic = std::max(rep.max_kinetic, ke);
        rep.min_potential = std::min(rep.min_potential, v);
        if (ke >= 1.0 || ke > -v + tol) rep.violations.push_back(i);
    }
    return rep;
}

struct ZeroSetReport {
    bool precondition_met = false;  ///< E(0) < 0
    double min_sine_factor = std::numeric_limits<double>::infinity();
    std::optional<double> first_violation;  ///< first time the sine factor is <= 0
    std::size_t probes = 0;
    [[nodiscard]] bool ok() const { return precondition_met && !first_violation && min_sine_factor > 0.0; }
};

/// Verifies that a negative-energy run never meets {V = 0}: sin(x + mu/y) > 0
/// at every sample and at `probes_per_step` interior points of each step.
inline ZeroSetReport zero_set_guard(const PotentialParams& params, const Trajectory& traj, int probes_per_step = 16) {
    ZeroSetReport rep;
    const auto samples = traj.samples();
    if (samples.empty()) return rep;
    rep.precondition_met = physical_energy(params, samples.front().state) < 0.0;
    if (!rep.precondition_met) return rep;

    auto probe = [&](double t, const CylinderPoint& q) {
        ++rep.probes;
        const double s = sine_factor(params, q);
        rep.min_sine_factor = std::min(rep.min_sine_factor, s);
        if (!(s > 0.0) && !rep.first_violation) rep.first_violation = t;
    };
    const auto segments = traj.segments();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        probe(samples[i].state.t, samples[i].state.q);
        if (i < segments.size()) {
            const double a = samples[i].state.t;
            const double b = samples[i + 1].state.t;
            for (int k = 1; k <= probes_per_step; ++k) {
                const double t = a + (b - a) * k / (probes_per_step + 1);
                probe(t, {segments[i].component(0, t), segments[i].component(1, t)});
            }
        }
    }
    return rep;
}

}  // namespace cylflow
