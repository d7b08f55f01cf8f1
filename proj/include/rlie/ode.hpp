#pragma once

/**
 * @file ode.hpp
 * @brief Adaptive Dormand–Prince 5(4) integrator with dense output.
 *
 * The driver steps from t0 to t1 (either direction), landing exactly on
 * every requested stop time. After each accepted step the observer sees a
 * DenseStep, which interpolates the solution and its slope inside the step
 * (Shampine's continuous extension, order 4), and may stop the run.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlie/expr.hpp"

namespace rlie {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Step control record; defaults match the CLI.
struct StepControl {
    double rtol = 1e-9;
    double atol = 1e-12;
    double h0 = 1e-3;
    double hmax = std::numeric_limits<double>::infinity();
    long max_steps = 1'000'000;
    bool fixed_step = false;  // take steps of exactly h0 with no error control
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : std::runtime_error(what + " (last good time " + detail::format_number(last_good_time) + ")"),
          last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

enum class StepVerdict { Continue, Stop };

struct IntegrationStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

template <std::size_t N>
struct IntegrationResult {
    double t;
    Vec<N> y;
    IntegrationStats stats;
    bool stopped_early = false;
};

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp

/// Continuous extension over one accepted step [t0, t0 + h].
template <std::size_t N>
struct DenseStep {
    double t0 = 0.0, h = 0.0;
    Vec<N> y0{}, y1{};
    std::array<Vec<N>, 5> r{};

    double t1() const { return t0 + h; }

    Vec<N> value(double t) const {
        const double s = (t - t0) / h, u = 1.0 - s;
        Vec<N> out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = r[0][i] + s * (r[1][i] + u * (r[2][i] + s * (r[3][i] + u * r[4][i])));
        return out;
    }

    /// d/dt of the interpolant.
    Vec<N> slope(double t) const {
        const double s = (t - t0) / h, u = 1.0 - s;
        Vec<N> out;
        for (std::size_t i = 0; i < N; ++i) {
            const double q = r[2][i] + s * (r[3][i] + u * r[4][i]);
            const double dq = r[3][i] + (u - s) * r[4][i];
            const double rr = r[1][i] + u * q;
            const double dr = -q + u * dq;
            out[i] = (rr + s * dr) / h;
        }
        return out;
    }
};

/**
 * Integrates y' = f(t, y) from t0 to t1.
 *
 * `f` is callable as Vec<N>(double, const Vec<N>&). `observer` is callable as
 * StepVerdict(const DenseStep<N>&, bool at_stop) after every accepted step.
 * `stops` must be sorted in the direction of integration; the driver lands
 * exactly on each of them.
 */
template <std::size_t N, class F, class Observer>
IntegrationResult<N> integrate(F&& f, double t0, double t1, Vec<N> y0, const StepControl& ctrl, Observer&& observer,
                               std::span<const double> stops = {});

/**
 * As integrate, but after every accepted step `project(y)` may move the
 * state back onto a constraint manifold; it returns true when it changed y.
 * The observer sees the unprojected step.
 */
template <std::size_t N, class F, class Project, class Observer>
IntegrationResult<N> integrate_projected(F&& f, double t0, double t1, Vec<N> y0, const StepControl& ctrl,
                                         Project&& project, Observer&& observer, std::span<const double> stops = {}) {
    using namespace dp;
    IntegrationResult<N> res{t0, y0, {}, false};
    if (t1 == t0) return res;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double t = t0;
    Vec<N> y = y0;
    Vec<N> k1 = f(t, y), k2, k3, k4, k5, k6, k7, tmp;
    res.stats.evaluations = 1;
    double h = std::min({std::fabs(ctrl.h0), ctrl.hmax, std::fabs(t1 - t0)});
    if (!(h > 0.0)) throw std::invalid_argument("initial step must be positive");
    std::size_t next_stop = 0;
    while (next_stop < stops.size() && dir * (stops[next_stop] - t) <= 0.0) ++next_stop;
    bool last_rejected = false;

    for (long step = 0;; ++step) {
        if (step >= ctrl.max_steps) throw IntegrationError("maximum number of steps exceeded", t);
        double target = t1;
        bool to_stop = false;
        if (next_stop < stops.size() && dir * (stops[next_stop] - t1) < 0.0) {
            target = stops[next_stop];
            to_stop = true;
        }
        double hs = h;
        bool lands = false;
        if (hs >= std::fabs(target - t) * (1.0 - 1e-12)) {
            hs = std::fabs(target - t);
            lands = true;
        }
        if (hs < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(t)))
            throw IntegrationError("step size underflow", t);
        const double hh = dir * hs;

        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hh * a21 * k1[i];
        k2 = f(t + c2 * hh, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hh * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * hh, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + hh * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * hh, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hh * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * hh, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + hh * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double tn = lands ? target : t + hh;
        k6 = f(t + hh, tmp);
        Vec<N> yn;
        for (std::size_t i = 0; i < N; ++i)
            yn[i] = y[i] + hh * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        k7 = f(tn, yn);
        res.stats.evaluations += 6;

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = ctrl.atol + ctrl.rtol * std::max(std::fabs(y[i]), std::fabs(yn[i]));
            err += (e / sc) * (e / sc);
            finite = finite && std::isfinite(yn[i]);
        }
        err = std::sqrt(err / static_cast<double>(N));
        if (!finite) err = std::numeric_limits<double>::infinity();

        if (ctrl.fixed_step || err <= 1.0) {
            DenseStep<N> ds;
            ds.t0 = t;
            ds.h = tn - t;
            ds.y0 = y;
            ds.y1 = yn;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = yn[i] - y[i];
                const double bspl = hh * k1[i] - ydiff;
                ds.r[0][i] = y[i];
                ds.r[1][i] = ydiff;
                ds.r[2][i] = bspl;
                ds.r[3][i] = ydiff - hh * k7[i] - bspl;
                ds.r[4][i] = hh * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            t = tn;
            y = yn;
            k1 = k7;
            if (project(y)) {
                k1 = f(t, y);
                ++res.stats.evaluations;
            }
            ++res.stats.accepted;
            const bool at_stop = lands && to_stop;
            if (at_stop) ++next_stop;
            const StepVerdict v = observer(static_cast<const DenseStep<N>&>(ds), at_stop);
            res.t = t;
            res.y = y;
            if (v == StepVerdict::Stop) {
                res.stopped_early = !(lands && !to_stop);
                return res;
            }
            if (lands && !to_stop) return res;
            if (!ctrl.fixed_step) {
                double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                // a step shortened to land on a stop does not shrink the proposal
                const double hn = hs * fac;
                h = std::min(lands ? std::max(hn, h) : hn, ctrl.hmax);
            }
            last_rejected = false;
        } else {
            ++res.stats.rejected;
            double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
            h = hs * fac;
            last_rejected = true;
        }
    }
}

template <std::size_t N, class F, class Observer>
IntegrationResult<N> integrate(F&& f, double t0, double t1, Vec<N> y0, const StepControl& ctrl, Observer&& observer,
                               std::span<const double> stops) {
    return integrate_projected<N>(
        std::forward<F>(f), t0, t1, y0, ctrl, [](Vec<N>&) { return false; }, std::forward<Observer>(observer), stops);
}

/// Convenience overload without an observer.
template <std::size_t N, class F>
IntegrationResult<N> integrate(F&& f, double t0, double t1, Vec<N> y0, const StepControl& ctrl) {
    return integrate<N>(std::forward<F>(f), t0, t1, y0, ctrl,
                        [](const DenseStep<N>&, bool) { return StepVerdict::Continue; });
}

/**
 * A solution of an N-dimensional ODE evaluable at any time in its span.
 *
 * One pass records the accepted knots; evaluation restarts a short
 * integration from the nearest knot, so values carry the integrator's
 * accuracy rather than an interpolant's.
 */
template <std::size_t N>
class OdeClosure {
public:
    using Rhs = std::function<Vec<N>(double, const Vec<N>&)>;

    OdeClosure(Rhs f, double t0, Vec<N> y0, double t1, StepControl ctrl)
        : f_(std::move(f)), ctrl_(ctrl), lo_(std::min(t0, t1)), hi_(std::max(t0, t1)) {
        times_.push_back(t0);
        states_.push_back(y0);
        integrate<N>(f_, t0, t1, y0, ctrl_, [&](const DenseStep<N>& s, bool) {
            times_.push_back(s.t1());
            states_.push_back(s.y1);
            return StepVerdict::Continue;
        });
        if (t1 < t0) {
            std::reverse(times_.begin(), times_.end());
            std::reverse(states_.begin(), states_.end());
        }
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<double>& knot_times() const { return times_; }
    const std::vector<Vec<N>>& knot_states() const { return states_; }

    Vec<N> value(double t) const {
        if (t < lo_ - 1e-12 * (1.0 + std::fabs(lo_)) || t > hi_ + 1e-12 * (1.0 + std::fabs(hi_)))
            throw DomainError("time outside integrated span: " + detail::format_number(t));
        auto it = std::lower_bound(times_.begin(), times_.end(), t);
        std::size_t j = static_cast<std::size_t>(it - times_.begin());
        if (j == times_.size() || (j > 0 && t - times_[j - 1] < times_[j] - t)) --j;
        if (times_[j] == t) return states_[j];
        StepControl c = ctrl_;
        c.h0 = std::fabs(t - times_[j]);
        return integrate<N>(f_, times_[j], t, states_[j], c).y;
    }

    Vec<N> slope(double t) const { return f_(t, value(t)); }

    /// Value, first and second derivative of component k. The second
    /// derivative is a central difference of the slope over two short
    /// integration steps.
    Jet jet(double t, std::size_t k) const {
        const Vec<N> y = value(t);
        const Vec<N> dy = f_(t, y);
        const double h = 1e-4 * std::max(1.0, std::fabs(t));
        double tp = std::min(t + h, hi_), tm = std::max(t - h, lo_);
        StepControl c = ctrl_;
        c.h0 = h;
        Vec<N> yp = tp > t ? integrate<N>(f_, t, tp, y, c).y : y;
        Vec<N> ym = tm < t ? integrate<N>(f_, t, tm, y, c).y : y;
        const double d2 = (f_(tp, yp)[k] - f_(tm, ym)[k]) / (tp - tm);
        return {y[k], dy[k], d2};
    }

    /// Component k as an expression of t.
    static Expr component(std::shared_ptr<const OdeClosure> self, std::size_t k, std::string name) {
        return Expr::closure(std::move(name), [self, k](double t) { return self->jet(t, k); });
    }

private:
    Rhs f_;
    StepControl ctrl_;
    double lo_, hi_;
    std::vector<double> times_;
    std::vector<Vec<N>> states_;
};

}  // namespace rlie
