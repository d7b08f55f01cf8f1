#pragma once

/**
 * @file special.hpp
 * @brief Upper incomplete Gamma function by quadrature.
 */

#include <cmath>
#include <stdexcept>

#include "rlie/quadrature.hpp"

namespace rlie {

/**
 * Γ(a, t) = ∫_t^∞ s^{a-1} e^{-s} ds for t > 0.
 *
 * Integrates panel by panel. Past X > max(a-1, 0) the log-derivative of the
 * integrand is at most -(1 - max(a-1,0)/X), which bounds the remaining tail
 * by f(X) / (1 - max(a-1,0)/X); integration stops once that bound is below
 * 1e-16 of the accumulated value.
 */
inline double upper_gamma(double a, double t) {
    if (!(t > 0.0)) throw DomainError("upper_gamma requires t > 0");
    auto f = [a](double s) { return std::exp((a - 1.0) * std::log(s) - s); };
    const QuadOptions opt{0.0, 1e-15, 4000};
    const double am1 = std::max(a - 1.0, 0.0);
    double lo = t;
    double panel = std::max(1.0, 0.5 * t);
    double sum = 0.0;
    for (int i = 0; i < 400; ++i) {
        const double hi = lo + panel;
        sum += quad(f, lo, hi, opt).value;
        lo = hi;
        if (lo > 2.0 * am1 && lo > 1.0) {
            const double tail = f(lo) / (1.0 - am1 / lo);
            if (tail <= 1e-16 * sum) return sum;
        }
        panel *= 1.5;
    }
    throw QuadratureError("upper_gamma tail did not converge");
}

/// Γ(n+1, t) = n! e^{-t} Σ_{k=0}^{n} t^k / k! for integer n >= 0.
inline double upper_gamma_integer(int n, double t) {
    if (n < 0) throw std::invalid_argument("upper_gamma_integer requires n >= 0");
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= n; ++k) {
        term *= t / k;
        sum += term;
    }
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    return fact * std::exp(-t) * sum;
}

}  // namespace rlie
