#pragma once

// O(m)-equivariant maps B^m -> S^1 x R x S^{m-1} of the form
//
//   p -> (u^1(log|p|), u^2(log|p|), +-p/|p|)
//
// built from a trajectory u, their energies, and ray-constant tangent maps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "cylflow/dynamics.hpp"
#include "cylflow/error.hpp"
#include "cylflow/potential.hpp"
#include "cylflow/quadrature.hpp"

namespace cylflow {

struct TargetPoint {
    double x = 0.0;          ///< angle in [0, 2pi)
    double y = 0.0;
    std::vector<double> s;   ///< unit vector of the sphere factor
};

namespace detail {

inline double euclidean_norm(std::span<const double> p) {
    double s = 0.0;
    for (double v : p) s += v * v;
    return std::sqrt(s);
}

inline std::vector<double> radial_unit(std::span<const double> p, double norm, int sign) {
    std::vector<double> s(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) s[i] = sign * p[i] / norm;
    return s;
}

inline int checked_sign(int sign) {
    if (sign != 1 && sign != -1) throw DomainError("sphere-factor sign must be +1 or -1");
    return sign;
}

}  // namespace detail

/// Equivariant map generated by a trajectory. Trajectory time t_origin is
/// placed at r = 1 (by default the end of the trajectory), so the map lives
/// on the annulus exp(t_front - t_origin) <= r <= min(1, exp(t_back - t_origin)).
class EquivariantMap {
public:
    EquivariantMap(std::shared_ptr<const Trajectory> profile, int dimension = 3, int sign = 1,
                   std::optional<double> t_origin = std::nullopt)
        : profile_(std::move(profile)), dimension_(dimension), sign_(detail::checked_sign(sign)) {
        if (!profile_ || profile_->samples().empty()) throw DomainError("EquivariantMap: empty profile");
        if (!profile_->has_dense()) throw DomainError("EquivariantMap: profile needs dense output");
        if (dimension_ < 3) throw DomainError("EquivariantMap: source dimension must be >= 3");
        t_origin_ = t_origin.value_or(profile_->t_back());
        if (profile_->t_front() - t_origin_ > 0.0) throw DomainError("EquivariantMap: profile lies outside the unit ball");
    }

    [[nodiscard]] const Trajectory& profile() const { return *profile_; }
    [[nodiscard]] int dimension() const { return dimension_; }
    [[nodiscard]] int sign() const { return sign_; }
    [[nodiscard]] double t_origin() const { return t_origin_; }
    [[nodiscard]] double r_min() const { return std::exp(profile_->t_front() - t_origin_); }
    [[nodiscard]] double r_max() const { return std::min(1.0, std::exp(profile_->t_back() - t_origin_)); }

    /// Trajectory time for radius r.
    [[nodiscard]] double time_of(double r) const { return std::log(r) + t_origin_; }

    /// Profile state at radius r: position v(r) and v'(r) = u'(log r) / r.
    [[nodiscard]] State radial_state(double r) const {
        check_radius(r);
        return profile_->at(std::clamp(time_of(r), profile_->t_front(), profile_->t_back()));
    }

    [[nodiscard]] TargetPoint evaluate(std::span<const double> p) const {
        if (p.size() != static_cast<std::size_t>(dimension_)) throw DomainError("evaluate_map: wrong point dimension");
        const double r = detail::euclidean_norm(p);
        if (r == 0.0) throw DomainError("evaluate_map: the origin is not in the domain");
        const State s = radial_state(r);
        return {s.q.angle(), s.q.y, detail::radial_unit(p, r, sign_)};
    }

private:
    void check_radius(double r) const {
        // one ulp of slack at the ends of the annulus
        const double lo = r_min() * (1.0 - 4e-16);
        const double hi = r_max() * (1.0 + 4e-16);
        if (!(r >= lo && r <= hi)) throw DomainError("evaluate_map: radius outside annulus");
    }

    std::shared_ptr<const Trajectory> profile_;
    int dimension_;
    int sign_;
    double t_origin_ = 0.0;
};

inline TargetPoint evaluate_map(const EquivariantMap& map, std::span<const double> p) { return map.evaluate(p); }

struct EnergyTerms {
    double kinetic = 0.0;    ///< radial-derivative part
    double potential = 0.0;  ///< sphere-factor part weighted by 2 - V
    [[nodiscard]] double total() const { return kinetic + potential; }
};

namespace detail {

// Sum of per-segment quadratures over [t1, t2] with the tolerance split in
// proportion to segment length.
template <class F>
double integrate_over_segments(const Trajectory& traj, double t1, double t2, double tol, const F& integrand) {
    const auto samples = traj.samples();
    const auto segments = traj.segments();
    double sum = 0.0;
    if (segments.empty()) {
        const Segment seg = Segment::linear(t1, t2 - t1, to_phase(samples.front().state), to_phase(samples.front().state));
        return adaptive_simpson([&](double t) { return integrand(seg, t); }, t1, t2, tol);
    }
    for (std::size_t i = traj.segment_index(t1); i <= traj.segment_index(t2); ++i) {
        const double a = std::max(t1, samples[i].state.t);
        const double b = std::min(t2, samples[i + 1].state.t);
        if (!(b > a)) continue;
        const Segment& seg = segments[i];
        sum += adaptive_simpson([&](double t) { return integrand(seg, t); }, a, b, tol * (b - a) / (t2 - t1), 30);
    }
    return sum;
}

}  // namespace detail

/// Terms of  integral_{t1}^{t2} (|u'|^2 + (2 - V(u))) e^{(k-2) t} dt  over the
/// dense output of traj, evaluated in trajectory time.
inline EnergyTerms reduced_energy_terms(const Trajectory& traj, int k, double t1, double t2,
                                        const PotentialParams& params, double tol = 1e-8) {
    if (k < 3) throw DomainError("reduced_energy: dimension k must be >= 3");
    if (!(t1 <= t2) || !traj.contains(t1) || !traj.contains(t2)) {
        throw DomainError("reduced_energy: interval outside trajectory domain");
    }
    EnergyTerms out;
    if (t1 == t2) return out;
    const double w = static_cast<double>(k - 2);
    out.kinetic = detail::integrate_over_segments(traj, t1, t2, 0.5 * tol, [w](const Segment& seg, double t) {
        const double vx = seg.component(2, t);
        const double vy = seg.component(3, t);
        return (vx * vx + vy * vy) * std::exp(w * t);
    });
    out.potential = detail::integrate_over_segments(traj, t1, t2, 0.5 * tol, [w, &params](const Segment& seg, double t) {
        const CylinderPoint q{seg.component(0, t), seg.component(1, t)};
        return metric_coefficient(params, q) * std::exp(w * t);
    });
    return out;
}

inline double reduced_energy(const Trajectory& traj, int k, double t1, double t2, const PotentialParams& params,
                             double tol = 1e-8) {
    return reduced_energy_terms(traj, k, t1, t2, params, tol).total();
}

/// Dirichlet energy of a 3-dimensional equivariant map over r1 <= |p| <= r2,
///   integral (|v'(r)|^2 + (2 - V(v(r))) * 2 / r^2) * 4 pi r^2 dr,
/// by quadrature in the radius.
inline EnergyTerms full_energy_quadrature(const EquivariantMap& map, const PotentialParams& params, double r1,
                                          double r2, double tol = 1e-8) {
    if (map.dimension() != 3) throw DomainError("full_energy_quadrature: only source dimension 3 is supported");
    if (!(r1 > 0.0 && r1 <= r2 && r2 <= 1.0)) throw DomainError("full_energy_quadrature: need 0 < r1 <= r2 <= 1");
    if (r1 < map.r_min() * (1.0 - 4e-16) || r2 > map.r_max() * (1.0 + 4e-16)) {
        throw DomainError("full_energy_quadrature: radii outside annulus");
    }
    EnergyTerms out;
    if (r1 == r2) return out;
    const Trajectory& traj = map.profile();
    const double off = map.t_origin();
    const double t1 = std::clamp(std::log(r1) + off, traj.t_front(), traj.t_back());
    const double t2 = std::clamp(std::log(r2) + off, traj.t_front(), traj.t_back());
    const double four_pi = 4.0 * std::numbers::pi;

    const auto samples = traj.samples();
    const auto segments = traj.segments();
    auto each_piece = [&](auto&& integrand, double piece_tol) {
        double sum = 0.0;
        if (segments.empty()) {
            const Segment seg = Segment::linear(t1, 1.0, to_phase(samples.front().state), to_phase(samples.front().state));
            return adaptive_simpson([&](double r) { return integrand(seg, r); }, r1, r2, piece_tol);
        }
        for (std::size_t i = traj.segment_index(t1); i <= traj.segment_index(t2); ++i) {
            const double ra = std::max(r1, std::exp(samples[i].state.t - off));
            const double rb = std::min(r2, std::exp(samples[i + 1].state.t - off));
            if (!(rb > ra)) continue;
            const Segment& seg = segments[i];
            sum += adaptive_simpson([&](double r) { return integrand(seg, r); }, ra, rb,
                                    piece_tol * (rb - ra) / (r2 - r1), 30);
        }
        return sum;
    };

    out.kinetic = each_piece(
        [&](const Segment& seg, double r) {
            const double t = std::log(r) + off;
            const double dvx = seg.component(2, t) / r;
            const double dvy = seg.component(3, t) / r;
            return (dvx * dvx + dvy * dvy) * four_pi * r * r;
        },
        0.5 * tol);
    out.potential = each_piece(
        [&](const Segment& seg, double r) {
            const double t = std::log(r) + off;
            const CylinderPoint q{seg.component(0, t), seg.component(1, t)};
            // |grad(p/|p|)|^2 = 2 / r^2 for the identity factor on S^2
            return metric_coefficient(params, q) * (2.0 / (r * r)) * four_pi * r * r;
        },
        0.5 * tol);
    return out;
}

/// Ray-constant map p -> (angle, 0, +-p/|p|).
struct TangentMap {
    double angle = 0.0;
    int sign = 1;

    [[nodiscard]] TargetPoint evaluate(std::span<const double> p) const {
        const double r = detail::euclidean_norm(p);
        if (p.empty() || r == 0.0) throw DomainError("TangentMap: evaluation point must be nonzero");
        return {angle, 0.0, detail::radial_unit(p, r, sign)};
    }
};

inline TangentMap tangent_map_from_angle(double angle, int sign = 1) {
    return {wrap_angle(angle), detail::checked_sign(sign)};
}

/// One row of a map sampled on a spherical grid.
struct MapGridRow {
    double r = 0.0;
    std::size_t theta_index = 0;
    std::size_t phi_index = 0;
    TargetPoint target;
};

/// Samples a 3-dimensional map at `radii` log-spaced radii across its annulus
/// and an n_theta x n_phi grid of directions (polar angle at cell centers).
inline std::vector<MapGridRow> sample_map_grid(const EquivariantMap& map, std::size_t radii, std::size_t n_theta,
                                               std::size_t n_phi) {
    if (map.dimension() != 3) throw DomainError("sample_map_grid: only source dimension 3 is supported");
    if (radii < 1 || n_theta < 1 || n_phi < 1) throw DomainError("sample_map_grid: empty grid");
    std::vector<MapGridRow> rows;
    rows.reserve(radii * n_theta * n_phi);
    const double lr0 = std::log(map.r_min());
    const double lr1 = std::log(map.r_max());
    for (std::size_t i = 0; i < radii; ++i) {
        const double f = radii == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(radii - 1);
        const double rr = std::clamp(std::exp(lr0 + (lr1 - lr0) * f), map.r_min(), map.r_max());
        for (std::size_t a = 0; a < n_theta; ++a) {
            const double theta = std::numbers::pi * (static_cast<double>(a) + 0.5) / static_cast<double>(n_theta);
            for (std::size_t b = 0; b < n_phi; ++b) {
                const double phi = two_pi * static_cast<double>(b) / static_cast<double>(n_phi);
                const double p[3] = {rr * std::sin(theta) * std::cos(phi), rr * std::sin(theta) * std::sin(phi),
                                     rr * std::cos(theta)};
                rows.push_back({rr, a, b, map.evaluate(p)});
            }
        }
    }
    return rows;
}

}  // namespace cylflow
