#pragma once

/**
 * @file solvers.hpp
 * @brief Closed-form and quadrature solvers: linear equations, autonomous
 * equations after a time reparametrization, and the Hovy family.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rlie/algebra.hpp"
#include "rlie/expr.hpp"
#include "rlie/quadrature.hpp"
#include "rlie/special.hpp"
#include "rlie/trace.hpp"

namespace rlie {

/// dy/dt = a(t) + b(t) y
struct LinearEq {
    Expr a, b;
};

namespace detail {

// Visits the sorted `times` moving outward from t0 in both directions and
// calls step(from, to) on consecutive pairs, then emit(index, to).
template <class Step>
void walk_from(double t0, const std::vector<double>& times, Step&& step) {
    if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("times must be sorted");
    const auto split = std::lower_bound(times.begin(), times.end(), t0);
    std::size_t k = static_cast<std::size_t>(split - times.begin());
    double prev = t0;
    bool reset = true;
    for (std::size_t i = k; i < times.size(); ++i) {
        step(i, prev, times[i], reset);
        reset = false;
        prev = times[i];
    }
    prev = t0;
    reset = true;
    for (std::size_t i = k; i-- > 0;) {
        step(i, prev, times[i], reset);
        reset = false;
        prev = times[i];
    }
}

}  // namespace detail

/**
 * y(t) = e^{B(t)} (y0 + ∫_{t0}^t e^{-B(s)} a(s) ds), B(t) = ∫_{t0}^t b.
 *
 * Both integrals are accumulated interval by interval; the inner primitive
 * of b is recomputed from the left end of the current interval.
 */
inline SolutionTrace solve_linear(const LinearEq& eq, double y0, double t0, const std::vector<double>& times,
                                  const QuadOptions& opt = {}) {
    std::vector<ExtReal> ys(times.size());
    double B = 0.0, I = 0.0;
    detail::walk_from(t0, times, [&](std::size_t i, double from, double to, bool reset) {
        if (reset) {
            B = 0.0;
            I = 0.0;
        }
        const double B0 = B;
        auto inner = [&](double s) {
            const double Bs = B0 + quad(eq.b, from, s, opt).value;
            return std::exp(-Bs) * eq.a.eval(s);
        };
        I += quad(inner, from, to, opt).value;
        B += quad(eq.b, from, to, opt).value;
        ys[i] = ExtReal(std::exp(B) * (y0 + I));
    });
    return SolutionTrace::from_values(times, std::move(ys));
}

enum class Discriminant { Positive, Zero, Negative };

inline const char* discriminant_name(Discriminant d) {
    switch (d) {
        case Discriminant::Positive: return "positive";
        case Discriminant::Zero: return "zero";
        case Discriminant::Negative: return "negative";
    }
    return "?";
}

/// Sign of c1² - 4 c0 c2, with |Δ| <= 1e-12 (c1² + |4 c0 c2|) counted as zero.
inline Discriminant classify_discriminant(double c0, double c1, double c2) {
    const double disc = c1 * c1 - 4.0 * c0 * c2;
    if (std::fabs(disc) <= 1e-12 * (c1 * c1 + std::fabs(4.0 * c0 * c2))) return Discriminant::Zero;
    return disc > 0.0 ? Discriminant::Positive : Discriminant::Negative;
}

/**
 * Flow of dy/dτ = c0 + c1 y + c2 y² for time τ from y0.
 *
 * The flow is the Möbius action of exp(τ a), a = ((c1/2, c0), (-c2, -c1/2)),
 * and a² = (Δ/4) I. The matrix is used up to scale: I + (tanh(sτ)/s) a for
 * Δ > 0, cos(sτ) I + (sin(sτ)/s) a for Δ < 0, I + τ a for Δ = 0, with
 * s = sqrt(|Δ|/4). All three stay bounded for large τ where possible.
 */
inline ExtReal autonomous_flow(double c0, double c1, double c2, double tau, const ExtReal& y0) {
    const double disc = c1 * c1 - 4.0 * c0 * c2;
    const Discriminant kind = classify_discriminant(c0, c1, c2);
    double p, q;  // matrix = p I + q a
    if (kind == Discriminant::Zero) {
        p = 1.0;
        q = tau;
    } else {
        const double s = std::sqrt(std::fabs(disc) / 4.0);
        const double x = s * tau;
        if (kind == Discriminant::Positive) {
            p = 1.0;
            q = std::fabs(x) < 1e-4 ? tau * (1.0 - x * x / 3.0) : std::tanh(x) / s;
        } else {
            p = std::cos(x);
            q = std::fabs(x) < 1e-4 ? tau * (1.0 - x * x / 6.0) : std::sin(x) / s;
        }
    }
    return mobius(p + q * c1 / 2.0, q * c0, -q * c2, p - q * c1 / 2.0, y0);
}

/**
 * Solves dy/dt = D(t)(c0 + c1 y + c2 y²) by τ(t) = ∫_{t0}^t D and the
 * autonomous flow. Poles come out as infinity.
 */
inline SolutionTrace solve_autonomous(double c0, double c1, double c2, const Expr& D, const ExtReal& y0, double t0,
                                      const std::vector<double>& times, const QuadOptions& opt = {}) {
    std::vector<ExtReal> ys(times.size());
    double tau = 0.0;
    detail::walk_from(t0, times, [&](std::size_t i, double from, double to, bool reset) {
        if (reset) tau = 0.0;
        tau += quad(D, from, to, opt).value;
        ys[i] = autonomous_flow(c0, c1, c2, tau, y0);
    });
    return SolutionTrace::from_values(times, std::move(ys));
}

/**
 * y(t) = 1 - e^{-t} tⁿ / (Γ(n+1, t) + K), the general solution of
 * dy/dt = -n/t + (1 + n/t) y - y² on t > 0. K = ∞ gives y ≡ 1.
 *
 * Returned as a closure; the second derivative uses the equation itself.
 */
inline Expr hovy_closed_form(double n, double K) {
    if (std::isinf(K)) return Expr(1.0);
    return Expr::closure("hovy", [n, K](double t) -> Jet {
        if (!(t > 0.0)) throw DomainError("hovy closed form needs t > 0");
        const double g = std::exp(n * std::log(t) - t);
        const double G = upper_gamma(n + 1.0, t) + K;
        const double dg = g * (n / t - 1.0);
        const double y = 1.0 - g / G;
        const double dy = -(dg * G + g * g) / (G * G);
        const double ft = n / (t * t) * (1.0 - y);
        const double fy = 1.0 + n / t - 2.0 * y;
        return {y, dy, ft + fy * dy};
    });
}

/// The K for which the closed form passes through y0 at t0.
inline double hovy_constant(double n, double t0, const ExtReal& y0) {
    const double gamma = upper_gamma(n + 1.0, t0);
    if (y0.is_infinite()) return -gamma;
    if (y0.value() == 1.0) return std::numeric_limits<double>::infinity();
    const double g = std::exp(n * std::log(t0) - t0);
    return g / (1.0 - y0.value()) - gamma;
}

/// The closed form sampled on `times`, with poles (Γ + K = 0) as infinity.
inline SolutionTrace hovy_trace(double n, double K, const std::vector<double>& times) {
    std::vector<ExtReal> ys;
    ys.reserve(times.size());
    for (double t : times) {
        if (std::isinf(K)) {
            ys.emplace_back(1.0);
            continue;
        }
        const double g = std::exp(n * std::log(t) - t);
        const double G = upper_gamma(n + 1.0, t) + K;
        ys.push_back(std::fabs(G) < 1e-300 ? ExtReal::infinity() : ExtReal(1.0 - g / G));
    }
    return SolutionTrace::from_values(times, std::move(ys));
}

}  // namespace rlie
