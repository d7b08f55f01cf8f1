#pragma once

/**
 * @file quadrature.hpp
 * @brief Globally adaptive Gauss–Kronrod (7/15) quadrature.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlie/expr.hpp"

namespace rlie {

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadResult {
    double value;
    double error;  // estimated absolute error
    int intervals;
};

struct QuadOptions {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    int max_intervals = 4000;
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights; Gauss
// weights belong to the odd-indexed abscissae.
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = hl * kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    return {a, b, kron * hl, std::fabs((kron - gauss) * hl)};
}

}  // namespace detail

/// ∫_lo^hi f. Bisects the segment with the largest error estimate until the
/// total estimate is below max(abs_tol, rel_tol·|value|).
template <class F>
QuadResult quad(F&& f, double lo, double hi, const QuadOptions& opt = {}) {
    if (lo == hi) return {0.0, 0.0, 0};
    if (hi < lo) {
        QuadResult r = quad(f, hi, lo, opt);
        return {-r.value, r.error, r.intervals};
    }
    std::priority_queue<detail::Segment> heap;
    detail::Segment s0 = detail::gk15(f, lo, hi);
    heap.push(s0);
    double total = s0.value, err = s0.error;
    int count = 1;
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(total))) {
        if (count >= opt.max_intervals)
            throw QuadratureError("quadrature did not converge on [" + detail::format_number(lo) + ", " +
                                  detail::format_number(hi) + "], error estimate " + detail::format_number(err));
        detail::Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // segment cannot be split further in floating point
            if (worst.error <= opt.abs_tol + 1e-15 * std::fabs(total)) break;
            throw QuadratureError("quadrature segment underflow near " + detail::format_number(mid));
        }
        detail::Segment l = detail::gk15(f, worst.a, mid);
        detail::Segment r = detail::gk15(f, mid, worst.b);
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++count;
        if (count % 64 == 0) {
            // refresh the running sums against drift
            auto copy = heap;
            total = 0.0;
            err = 0.0;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    return {total, err, count};
}

/// ∫_lo^hi e(t) dt of an expression.
inline QuadResult quad(const Expr& e, double lo, double hi, const QuadOptions& opt = {}) {
    return quad([&e](double t) { return e.eval(t); }, lo, hi, opt);
}

}  // namespace rlie
