#pragma once

// Dormand-Prince 5(4) embedded pair with the Hairer continuous extension
// (4th order dense output) and a PI step-size controller.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace cylflow::dopri5 {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace coef {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// 5th-order minus 4th-order weights
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// continuous extension
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace coef

/// Interpolant over one step [t0, t0 + h]:
///   y(t0 + s h) = r0 + s (r1 + (1-s) (r2 + s (r3 + (1-s) r4)))
/// A segment with r2 = r3 = r4 = 0 is plain linear interpolation.
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec<N>, 5> r{};

    [[nodiscard]] double t1() const { return t0 + h; }

    [[nodiscard]] Vec<N> operator()(double t) const {
        const double s = h == 0.0 ? 0.0 : (t - t0) / h;
        const double s1 = 1.0 - s;
        Vec<N> out;
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        return out;
    }

    [[nodiscard]] double component(std::size_t i, double t) const {
        const double s = h == 0.0 ? 0.0 : (t - t0) / h;
        const double s1 = 1.0 - s;
        return r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
    }

    static DenseSegment linear(double t0, double h, const Vec<N>& y0, const Vec<N>& y1) {
        DenseSegment seg;
        seg.t0 = t0;
        seg.h = h;
        seg.r[0] = y0;
        for (std::size_t i = 0; i < N; ++i) seg.r[1][i] = y1[i] - y0[i];
        return seg;
    }
};

template <std::size_t N>
struct StepResult {
    Vec<N> y_new{};
    Vec<N> dy_new{};  ///< derivative at the new point (FSAL)
    double error = 0.0;  ///< scaled RMS error estimate; accept when <= 1
};

/// One trial step from (t, y) with derivative dy. Workspace stages are
/// retained so that dense_segment() can be called after an accepted step.
template <std::size_t N, class Rhs>
class Stepper {
public:
    explicit Stepper(Rhs rhs) : rhs_(std::move(rhs)) {}

    Vec<N> derivative(double t, const Vec<N>& y) const { return rhs_(t, y); }

    StepResult<N> step(double t, const Vec<N>& y, const Vec<N>& dy, double h, double rel_tol, double abs_tol) {
        using namespace coef;
        k1_ = dy;
        y0_ = y;
        h_ = h;
        t_ = t;
        Vec<N> tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1_[i];
        k2_ = rhs_(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        k3_ = rhs_(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        k4_ = rhs_(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        k5_ = rhs_(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        k6_ = rhs_(t + h, tmp);
        StepResult<N> res;
        for (std::size_t i = 0; i < N; ++i)
            res.y_new[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        k7_ = rhs_(t + h, res.y_new);
        res.dy_new = k7_;
        y1_ = res.y_new;

        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double err =
                h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(res.y_new[i]));
            acc += (err / scale) * (err / scale);
        }
        res.error = std::sqrt(acc / static_cast<double>(N));
        return res;
    }

    /// Interpolant of the most recent step().
    [[nodiscard]] DenseSegment<N> dense_segment() const {
        using namespace coef;
        DenseSegment<N> seg;
        seg.t0 = t_;
        seg.h = h_;
        for (std::size_t i = 0; i < N; ++i) {
            const double dy = y1_[i] - y0_[i];
            const double bspl = h_ * k1_[i] - dy;
            seg.r[0][i] = y0_[i];
            seg.r[1][i] = dy;
            seg.r[2][i] = bspl;
            seg.r[3][i] = dy - h_ * k7_[i] - bspl;
            seg.r[4][i] = h_ * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
        return seg;
    }

private:
    Rhs rhs_;
    double t_ = 0.0, h_ = 0.0;
    Vec<N> y0_{}, y1_{};
    Vec<N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
};

/// PI controller in the form used by DOPRI5 (Hairer, Norsett, Wanner).
class StepController {
public:
    static constexpr double safety = 0.9;
    static constexpr double beta = 0.04;
    static constexpr double alpha = 0.2 - 0.75 * beta;
    static constexpr double min_factor = 0.2;
    static constexpr double max_factor = 10.0;

    /// Proposed next step after a trial with scaled error `err`.
    double propose(double h, double err, bool accepted) {
        const double fac11 = std::pow(std::max(err, 1e-16), alpha);
        if (!accepted) return h / std::min(1.0 / min_factor, fac11 / safety);
        const double fac = std::clamp(fac11 / std::pow(err_old_, beta) / safety, 1.0 / max_factor, 1.0 / min_factor);
        err_old_ = std::max(err, 1e-4);
        return h / fac;
    }

private:
    double err_old_ = 1e-4;
};

}  // namespace cylflow::dopri5
