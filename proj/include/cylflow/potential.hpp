#pragma once

// Flat spiral potential on the cylinder S^1 x R:
//
//   V(x, y) = -exp(-lambda / y^2) * sin(x + mu / y)
//
// lambda = mu = 1 is the classical choice. V vanishes to infinite order on
// the axis y = 0, its critical points are exactly the axis, and its zero set
// away from the axis is a family of spirals winding infinitely often as
// y -> 0.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "cylflow/error.hpp"

namespace cylflow {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Exponent above which exp(-lambda/y^2) is treated as exactly zero.
inline constexpr double underflow_guard = 700.0;

struct PotentialParams {
    double lambda = 1.0;  ///< flatness scale
    double mu = 1.0;      ///< winding rate

    void validate() const {
        if (!(lambda > 0.0) || !(mu > 0.0) || !std::isfinite(lambda) || !std::isfinite(mu)) {
            throw DomainError("PotentialParams: lambda and mu must be finite and > 0");
        }
    }
};

/// Reduce an angle to [0, 2pi).
inline double wrap_angle(double a) {
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    // fmod of a tiny negative number can round up to exactly 2pi
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Point on the universal cover. The angle is kept unreduced so that the
/// winding of a path can be read off directly.
struct CylinderPoint {
    double x_lift = 0.0;
    double y = 0.0;

    [[nodiscard]] double angle() const { return wrap_angle(x_lift); }
};

struct Gradient {
    double dx = 0.0;
    double dy = 0.0;
};

namespace detail {

// exp(-lambda/y^2), or 0 on the axis and inside the underflow region.
inline double flat_factor(const PotentialParams& params, double y) {
    if (y == 0.0) return 0.0;
    const double e = params.lambda / (y * y);
    if (e > underflow_guard) return 0.0;
    return std::exp(-e);
}

}  // namespace detail

/// Phase x + mu/y of the oscillating factor, with x reduced mod 2pi.
/// Undefined on the axis.
inline double phase(const PotentialParams& params, const CylinderPoint& p) {
    return p.angle() + params.mu / p.y;
}

/// sin(x + mu/y), the sign-carrying factor of V. Returns 0 on the axis.
inline double sine_factor(const PotentialParams& params, const CylinderPoint& p) {
    if (p.y == 0.0) return 0.0;
    return std::sin(phase(params, p));
}

inline double eval_V(const PotentialParams& params, const CylinderPoint& p) {
    const double f = detail::flat_factor(params, p.y);
    if (f == 0.0) return 0.0;
    return -f * std::sin(phase(params, p));
}

inline Gradient grad_V(const PotentialParams& params, const CylinderPoint& p) {
    const double f = detail::flat_factor(params, p.y);
    if (f == 0.0) return {};
    const double y = p.y;
    const double ph = phase(params, p);
    const double s = std::sin(ph);
    const double c = std::cos(ph);
    return {
        -f * c,
        -(2.0 * params.lambda / (y * y * y)) * f * s + (params.mu / (y * y)) * f * c,
    };
}

/// Coefficient 2 - V of the sphere factor in the target metric. Lies in [1, 3].
inline double metric_coefficient(const PotentialParams& params, const CylinderPoint& p) {
    return 2.0 - eval_V(params, p);
}

/// V(p) < 0, decided from the sine factor so that it stays meaningful where
/// the flat factor underflows.
inline bool in_negative_region(const PotentialParams& params, const CylinderPoint& p) {
    if (p.y == 0.0) return false;
    return sine_factor(params, p) > 0.0;
}

struct ZeroSetBranch {
    /// Spiral x + mu/y = k*pi. The axis branch is flagged instead.
    int k = 0;
    bool axis = false;
    std::vector<CylinderPoint> points;
};

/// Sample the zero set {V = 0} in the upper half cylinder: one spiral
/// x_lift = k*pi - mu/y per k in [k_min, k_max] over y in [y_min, y_max],
/// followed by the axis branch y = 0. Spiral samples are uniform in 1/y so
/// spacing along the curve stays even as it winds toward the axis.
inline std::vector<ZeroSetBranch> zero_set_curves(const PotentialParams& params, int k_min, int k_max,
                                                  double y_min, std::size_t samples, double y_max = 1.0) {
    params.validate();
    if (!(y_min > 0.0)) throw DomainError("zero_set_curves: y_min must be > 0");
    if (!(y_max > y_min)) throw DomainError("zero_set_curves: y_max must exceed y_min");
    if (samples < 2) throw DomainError("zero_set_curves: need at least 2 samples");
    if (k_min > k_max) throw DomainError("zero_set_curves: empty k range");

    std::vector<ZeroSetBranch> out;
    out.reserve(static_cast<std::size_t>(k_max - k_min) + 2);
    const double inv_lo = 1.0 / y_max;
    const double inv_hi = 1.0 / y_min;
    for (int k = k_min; k <= k_max; ++k) {
        ZeroSetBranch b;
        b.k = k;
        b.points.reserve(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
            // i = 0 is the top of the branch; endpoints are hit exactly
            const double y = (i == 0) ? y_max : (i + 1 == samples) ? y_min : 1.0 / (inv_lo + s * (inv_hi - inv_lo));
            b.points.push_back({k * std::numbers::pi - params.mu / y, y});
        }
        out.push_back(std::move(b));
    }
    ZeroSetBranch axis;
    axis.axis = true;
    axis.points.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(samples - 1);
        axis.points.push_back({s * two_pi, 0.0});
    }
    out.push_back(std::move(axis));
    return out;
}

}  // namespace cylflow
