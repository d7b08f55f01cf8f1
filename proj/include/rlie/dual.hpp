#pragma once

/**
 * @file dual.hpp
 * @brief Forward-mode dual numbers, nestable for higher derivatives.
 *
 * A Dual<T> carries v + d·ε with ε² = 0. Nesting Dual<Dual<double>> yields
 * second derivatives; the expression evaluator instantiates up to four levels.
 */

#include <cmath>
#include <type_traits>

namespace rlie {

template <class T>
struct Dual {
    T v{};  // value
    T d{};  // first-order part

    constexpr Dual() = default;
    constexpr Dual(double c) : v(c), d(0.0) {}  // NOLINT: constants promote implicitly
    constexpr Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T>
struct is_dual : std::false_type {};
template <class T>
struct is_dual<Dual<T>> : std::true_type {};

/// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T>
struct dual_depth : std::integral_constant<int, 0> {};
template <class T>
struct dual_depth<Dual<T>> : std::integral_constant<int, 1 + dual_depth<T>::value> {};

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
    return primal(x.v);
}

template <class T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
    return {a.v + b.v, a.d + b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
    return {a.v - b.v, a.d - b.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a) {
    return {-a.v, -a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
    return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
template <class T>
Dual<T> operator*(double s, const Dual<T>& a) {
    return {s * a.v, s * a.d};
}
template <class T>
Dual<T> operator*(const Dual<T>& a, double s) {
    return {a.v * s, a.d * s};
}
template <class T>
Dual<T> operator+(const Dual<T>& a, double s) {
    return {a.v + s, a.d};
}
template <class T>
Dual<T> operator+(double s, const Dual<T>& a) {
    return {s + a.v, a.d};
}
template <class T>
Dual<T> operator-(const Dual<T>& a, double s) {
    return {a.v - s, a.d};
}
template <class T>
Dual<T> operator-(double s, const Dual<T>& a) {
    return {s - a.v, -a.d};
}
template <class T>
Dual<T> operator/(const Dual<T>& a, double s) {
    return {a.v / s, a.d / s};
}
template <class T>
Dual<T> operator/(double s, const Dual<T>& a) {
    return Dual<T>(s) / a;
}

// Elementary functions. The chain rule is applied on top of the same
// functions at the inner level, so nesting works for any depth.

template <class T>
Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
}
template <class T>
Dual<T> log(const Dual<T>& a) {
    using std::log;
    return {log(a.v), a.d / a.v};
}
template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}
template <class T>
Dual<T> sin(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {sin(a.v), cos(a.v) * a.d};
}
template <class T>
Dual<T> cos(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {cos(a.v), -(sin(a.v) * a.d)};
}
template <class T>
Dual<T> tan(const Dual<T>& a) {
    using std::tan;
    T tv = tan(a.v);
    return {tv, (1.0 + tv * tv) * a.d};
}
/// x^p for a constant exponent p.
template <class T>
Dual<T> pow(const Dual<T>& a, double p) {
    using std::pow;
    if (p == 0.0) return Dual<T>(1.0);
    return {pow(a.v, p), p * pow(a.v, p - 1.0) * a.d};
}

}  // namespace rlie
