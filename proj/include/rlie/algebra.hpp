#pragma once

/**
 * @file algebra.hpp
 * @brief SL(2,R), its Lie algebra in the (M0, M1, M2) basis, the Möbius
 * action on the one-point compactified line, and curves of matrices.
 *
 *     M0 = [[0,-1],[0,0]],  M1 = 1/2 [[-1,0],[0,1]],  M2 = [[0,0],[1,0]]
 *
 * with [M0,M1] = M0, [M0,M2] = 2 M1, [M1,M2] = M2.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rlie/expr.hpp"

namespace rlie {

// ---------------------------------------------------------------------------
// Exact rationals for algebra identities

class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) : num_(n), den_(d) {  // NOLINT
        if (d == 0) throw std::invalid_argument("zero denominator");
        normalize();
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(Rational a, Rational b) {
        return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator-(Rational a, Rational b) {
        return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
    }
    friend Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
    friend Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }
    friend Rational operator-(Rational a) { return {-a.num_, a.den_}; }
    friend bool operator==(const Rational&, const Rational&) = default;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }
};

// ---------------------------------------------------------------------------
// sl(2,R)

/// Element c0 M0 + c1 M1 + c2 M2 of sl(2,R).
template <class S>
struct BasicSl2Elem {
    S c0{}, c1{}, c2{};

    friend bool operator==(const BasicSl2Elem&, const BasicSl2Elem&) = default;

    /// Matrix entries [[m00, m01], [m10, m11]].
    std::array<S, 4> matrix() const {
        const S half = S(1) / S(2);
        return {-(half * c1), -c0, c2, half * c1};
    }

    /// Coordinates of the traceless part of m.
    static BasicSl2Elem from_matrix(const std::array<S, 4>& m) { return {-m[1], m[3] - m[0], m[2]}; }

    friend BasicSl2Elem operator+(const BasicSl2Elem& a, const BasicSl2Elem& b) {
        return {a.c0 + b.c0, a.c1 + b.c1, a.c2 + b.c2};
    }
    friend BasicSl2Elem operator*(const S& s, const BasicSl2Elem& a) { return {s * a.c0, s * a.c1, s * a.c2}; }
};

using Sl2Elem = BasicSl2Elem<double>;
using Sl2ElemQ = BasicSl2Elem<Rational>;

template <class S>
BasicSl2Elem<S> basis(int j) {
    switch (j) {
        case 0: return {S(1), S(0), S(0)};
        case 1: return {S(0), S(1), S(0)};
        case 2: return {S(0), S(0), S(1)};
    }
    throw std::out_of_range("basis index");
}

/// Coordinates of XY - YX in the M-basis.
template <class S>
BasicSl2Elem<S> commutator(const BasicSl2Elem<S>& x, const BasicSl2Elem<S>& y) {
    auto a = x.matrix();
    auto b = y.matrix();
    auto mul = [](const std::array<S, 4>& p, const std::array<S, 4>& q) -> std::array<S, 4> {
        return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2],
                p[2] * q[1] + p[3] * q[3]};
    };
    auto ab = mul(a, b);
    auto ba = mul(b, a);
    return BasicSl2Elem<S>::from_matrix({ab[0] - ba[0], ab[1] - ba[1], ab[2] - ba[2], ab[3] - ba[3]});
}

// ---------------------------------------------------------------------------
// Compactified line

/// A point of R ∪ {∞}; there is a single unsigned infinity.
class ExtReal {
public:
    constexpr ExtReal() = default;
    ExtReal(double y) : value_(y), finite_(true) {  // NOLINT: finite points convert implicitly
        if (!std::isfinite(y)) {
            value_ = 0.0;
            finite_ = false;
        }
    }
    static ExtReal infinity() {
        ExtReal e;
        e.finite_ = false;
        return e;
    }

    bool is_finite() const { return finite_; }
    bool is_infinite() const { return !finite_; }
    double value() const {
        if (!finite_) throw std::logic_error("value() of the point at infinity");
        return value_;
    }

    /// Angle on the circle, θ = 2 atan(y) ∈ (-π, π], with ∞ ↦ π.
    double angle() const { return finite_ ? 2.0 * std::atan(value_) : M_PI; }

    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
    }

private:
    double value_ = 0.0;
    bool finite_ = true;
};

/// Chordal (angular) distance on the circle R̄.
inline double chordal_distance(const ExtReal& a, const ExtReal& b) {
    double d = std::fabs(a.angle() - b.angle());
    return std::min(d, 2.0 * M_PI - d);
}

/// Absolute error when both points are finite and moderate, chordal otherwise.
inline double solution_distance(const ExtReal& a, const ExtReal& b, double finite_bound = 1e3) {
    if (a.is_finite() && b.is_finite() && std::fabs(a.value()) <= finite_bound &&
        std::fabs(b.value()) <= finite_bound)
        return std::fabs(a.value() - b.value());
    return chordal_distance(a, b);
}

// ---------------------------------------------------------------------------
// SL(2,R)

inline constexpr double kDetTolerance = 1e-9;

class SL2 {
public:
    SL2() = default;
    SL2(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
        const double det = a * d - b * c;
        if (!(std::fabs(det - 1.0) <= kDetTolerance))
            throw std::invalid_argument("matrix is not in SL(2,R): det = " + detail::format_number(det));
    }

    static SL2 identity() { return {}; }

    /// Divides by sqrt(det); requires det > 0.
    static SL2 normalized(double a, double b, double c, double d) {
        const double det = a * d - b * c;
        if (!(det > 0.0)) throw std::invalid_argument("cannot normalize a matrix with det <= 0");
        const double s = std::sqrt(det);
        return SL2(a / s, b / s, c / s, d / s);
    }

    double alpha() const { return a_; }
    double beta() const { return b_; }
    double gamma() const { return c_; }
    double delta() const { return d_; }
    double det() const { return a_ * d_ - b_ * c_; }
    double trace() const { return a_ + d_; }

    SL2 inverse() const { return unchecked(d_, -b_, -c_, a_); }

    friend SL2 operator*(const SL2& x, const SL2& y) {
        return SL2::unchecked(x.a_ * y.a_ + x.b_ * y.c_, x.a_ * y.b_ + x.b_ * y.d_, x.c_ * y.a_ + x.d_ * y.c_,
                              x.c_ * y.b_ + x.d_ * y.d_);
    }

    SL2 operator-() const { return unchecked(-a_, -b_, -c_, -d_); }

private:
    double a_ = 1.0, b_ = 0.0, c_ = 0.0, d_ = 1.0;

    static SL2 unchecked(double a, double b, double c, double d) {
        SL2 m;
        m.a_ = a;
        m.b_ = b;
        m.c_ = c;
        m.d_ = d;
        return m;
    }
};

/// αδ - βγ
inline double det_check(const SL2& m) { return m.det(); }

/// Möbius action of any invertible matrix (the action is projective, so
/// no unit determinant is needed). Near-zero denominators
/// (|γy+δ| < 1e-12·(|γy|+|δ|+1)) map to ∞.
inline ExtReal mobius(double a, double b, double c, double d, const ExtReal& y) {
    if (y.is_infinite()) {
        if (std::fabs(c) <= 1e-12 * (std::fabs(a) + std::fabs(c))) return ExtReal::infinity();
        return a / c;
    }
    const double v = y.value();
    const double gy = c * v;
    const double den = gy + d;
    if (std::fabs(den) < 1e-12 * (std::fabs(gy) + std::fabs(d) + 1.0)) return ExtReal::infinity();
    return ExtReal((a * v + b) / den);
}

/// The Möbius action y ↦ (αy+β)/(γy+δ) on R̄.
inline ExtReal mobius(const SL2& m, const ExtReal& y) { return mobius(m.alpha(), m.beta(), m.gamma(), m.delta(), y); }

// ---------------------------------------------------------------------------
// Curves in SL(2,R)

struct Interval {
    double lo = -INFINITY;
    double hi = INFINITY;

    bool contains(double t) const { return t >= lo && t <= hi; }
    bool empty() const { return !(hi > lo); }
    Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
};

namespace detail {

// Piecewise cubic Hermite through tabulated matrix entries with
// finite-difference slopes, then divided by sqrt(det).
struct TabulatedTable {
    std::vector<double> times;
    std::vector<std::array<double, 4>> entries;
    std::vector<std::array<double, 4>> slopes;

    TabulatedTable(std::vector<double> ts, const std::vector<SL2>& mats) : times(std::move(ts)) {
        if (times.size() != mats.size() || times.size() < 2)
            throw std::invalid_argument("tabulated curve needs matching times and at least two matrices");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("tabulated times must increase");
        entries.reserve(mats.size());
        for (const SL2& m : mats) entries.push_back({m.alpha(), m.beta(), m.gamma(), m.delta()});
        const std::size_t n = times.size();
        slopes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < 4; ++k) {
                if (i == 0) {
                    slopes[i][k] = (entries[1][k] - entries[0][k]) / (times[1] - times[0]);
                } else if (i + 1 == n) {
                    slopes[i][k] = (entries[n - 1][k] - entries[n - 2][k]) / (times[n - 1] - times[n - 2]);
                } else {
                    // three-point derivative on a non-uniform grid
                    const double h0 = times[i] - times[i - 1], h1 = times[i + 1] - times[i];
                    const double d0 = (entries[i][k] - entries[i - 1][k]) / h0;
                    const double d1 = (entries[i + 1][k] - entries[i][k]) / h1;
                    slopes[i][k] = (h1 * d0 + h0 * d1) / (h0 + h1);
                }
            }
        }
    }

    template <class T>
    std::array<T, 4> raw(const T& t) const {
        const double tp = primal(t);
        if (tp < times.front() || tp > times.back())
            throw DomainError("time outside tabulated curve: " + format_number(tp));
        auto it = std::upper_bound(times.begin(), times.end(), tp);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - times.begin()) - 1));
        if (i + 1 >= times.size()) i = times.size() - 2;
        const double h = times[i + 1] - times[i];
        T s = (t - times[i]) / h;
        T s2 = s * s, s3 = s2 * s;
        T h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        T h10 = s3 - 2.0 * s2 + s;
        T h01 = -2.0 * s3 + 3.0 * s2;
        T h11 = s3 - s2;
        std::array<T, 4> out;
        for (std::size_t k = 0; k < 4; ++k)
            out[k] = h00 * entries[i][k] + h10 * (h * slopes[i][k]) + h01 * entries[i + 1][k] +
                     h11 * (h * slopes[i + 1][k]);
        return out;
    }

    template <class T>
    std::array<T, 4> normalized(const T& t) const {
        using std::sqrt;
        auto m = raw(t);
        T det = m[0] * m[3] - m[1] * m[2];
        if (!(primal(det) > 0.0)) throw DomainError("interpolated matrix lost positive determinant");
        T s = sqrt(det);
        for (auto& x : m) x = x / s;
        return m;
    }
};

}  // namespace detail

/// A time-parametrized family of SL(2,R) matrices.
class SL2Curve {
public:
    struct Constant {
        SL2 m;
    };
    struct Analytic {
        Expr alpha, beta, gamma, delta;
    };
    struct Tabulated {
        std::shared_ptr<const detail::TabulatedTable> table;
    };

    static SL2Curve constant(const SL2& m) { return SL2Curve(Constant{m}, Interval{}); }

    /// Entries given as expressions; det = 1 is checked on `check_grid`
    /// (tolerance 1e-8) when a grid is supplied.
    static SL2Curve analytic(Expr a, Expr b, Expr c, Expr d, Interval domain = {},
                             const Grid* check_grid = nullptr) {
        SL2Curve curve(Analytic{std::move(a), std::move(b), std::move(c), std::move(d)}, domain);
        if (check_grid) curve.check_determinant(*check_grid, 1e-8);
        return curve;
    }

    static SL2Curve tabulated(std::vector<double> times, const std::vector<SL2>& mats) {
        auto table = std::make_shared<const detail::TabulatedTable>(std::move(times), mats);
        Interval dom{table->times.front(), table->times.back()};
        return SL2Curve(Tabulated{std::move(table)}, dom);
    }

    const Interval& domain() const { return domain_; }
    bool is_constant() const { return std::holds_alternative<Constant>(rep_); }
    bool is_tabulated() const { return std::holds_alternative<Tabulated>(rep_); }

    /// The four entries (α, β, γ, δ) as expressions of t.
    std::array<Expr, 4> entries() const {
        if (auto c = std::get_if<Constant>(&rep_))
            return {Expr(c->m.alpha()), Expr(c->m.beta()), Expr(c->m.gamma()), Expr(c->m.delta())};
        if (auto a = std::get_if<Analytic>(&rep_)) return {a->alpha, a->beta, a->gamma, a->delta};
        const auto& tab = std::get<Tabulated>(rep_).table;
        std::array<Expr, 4> out;
        static const char* names[] = {"alpha_tab", "beta_tab", "gamma_tab", "delta_tab"};
        for (std::size_t k = 0; k < 4; ++k) {
            out[k] = Expr::closure(names[k], [tab, k](double t) -> Jet {
                using D2 = Dual<Dual<double>>;
                D2 x{Dual<double>{t, 1.0}, Dual<double>{1.0, 0.0}};
                auto m = tab->normalized(x);
                return {m[k].v.v, m[k].v.d, m[k].d.d};
            });
        }
        return out;
    }

    SL2 at(double t) const {
        if (auto c = std::get_if<Constant>(&rep_)) return c->m;
        if (!domain_.contains(t)) throw DomainError("time outside curve domain: " + detail::format_number(t));
        if (auto a = std::get_if<Analytic>(&rep_)) {
            const double al = a->alpha.eval(t), be = a->beta.eval(t), ga = a->gamma.eval(t), de = a->delta.eval(t);
            const double det = al * de - be * ga;
            if (!(std::fabs(det - 1.0) <= 1e-8))
                throw DomainError("analytic curve leaves SL(2,R) at t = " + detail::format_number(t));
            return SL2::normalized(al, be, ga, de);
        }
        auto m = std::get<Tabulated>(rep_).table->normalized(t);
        return SL2::normalized(m[0], m[1], m[2], m[3]);
    }

    void check_determinant(const Grid& grid, double tol) const {
        auto e = entries();
        for (double t : grid.points) {
            if (!domain_.contains(t)) continue;
            const double det = e[0].eval(t) * e[3].eval(t) - e[1].eval(t) * e[2].eval(t);
            if (!(std::fabs(det - 1.0) <= tol))
                throw std::invalid_argument("curve determinant deviates from 1 at t = " + detail::format_number(t));
        }
    }

    /// Pointwise product, as an analytic curve on the common domain.
    friend SL2Curve operator*(const SL2Curve& x, const SL2Curve& y) {
        if (x.is_constant() && y.is_constant()) return constant(x.at(0.0) * y.at(0.0));
        auto p = x.entries();
        auto q = y.entries();
        return SL2Curve(Analytic{p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3], p[2] * q[0] + p[3] * q[2],
                                 p[2] * q[1] + p[3] * q[3]},
                        x.domain_.intersect(y.domain_));
    }

    /// Pointwise inverse.
    SL2Curve inverse() const {
        if (auto c = std::get_if<Constant>(&rep_)) return constant(c->m.inverse());
        auto e = entries();
        return SL2Curve(Analytic{e[3], -e[1], -e[2], e[0]}, domain_);
    }

private:
    std::variant<Constant, Analytic, Tabulated> rep_;
    Interval domain_;

    SL2Curve(std::variant<Constant, Analytic, Tabulated> rep, Interval dom) : rep_(std::move(rep)), domain_(dom) {}
};

/// diag(sqrt(G), 1/sqrt(G)), the curve realizing y' = G(t) y for G > 0.
inline SL2Curve scaling_curve(const Expr& g, Interval domain = {}) {
    Expr s = sqrt(g);
    return SL2Curve::analytic(s, Expr(0.0), Expr(0.0), Expr(1.0) / s, domain);
}

}  // namespace rlie
