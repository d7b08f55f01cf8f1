#pragma once

/**
 * @file riccati.hpp
 * @brief Riccati equations dy/dt = b0 + b1 y + b2 y² and the action of
 * curves in SL(2,R) on them.
 */

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rlie/algebra.hpp"
#include "rlie/expr.hpp"
#include "rlie/trace.hpp"

namespace rlie {

inline constexpr std::size_t kFlagPoints = 256;

class RiccatiEq {
public:
    /// Coefficients must evaluate finitely on the flag grid of `domain`,
    /// which must be a bounded, non-empty interval.
    RiccatiEq(Expr b0, Expr b1, Expr b2, Interval domain) : b_{std::move(b0), std::move(b1), std::move(b2)}, domain_(domain) {
        if (!std::isfinite(domain_.lo) || !std::isfinite(domain_.hi) || domain_.empty())
            throw std::invalid_argument("equation domain must be a bounded non-empty interval");
        const Grid g = Grid::chebyshev(domain_.lo, domain_.hi, kFlagPoints);
        b0_nonvanishing_ = nonvanishing(b_[0], g);
        b2_nonvanishing_ = nonvanishing(b_[2], g);
        (void)nonvanishing(b_[1], g);
    }

    const Expr& b0() const { return b_[0]; }
    const Expr& b1() const { return b_[1]; }
    const Expr& b2() const { return b_[2]; }
    const Expr& coeff(std::size_t j) const { return b_.at(j); }
    const std::array<Expr, 3>& coeffs() const { return b_; }
    const Interval& domain() const { return domain_; }

    /// No zero and no sign change on the 256-point flag grid.
    bool b0_nonvanishing() const { return b0_nonvanishing_; }
    bool b2_nonvanishing() const { return b2_nonvanishing_; }

    double rhs(double t, double y) const { return b_[0].eval(t) + (b_[1].eval(t) + b_[2].eval(t) * y) * y; }

    /// The equation satisfied by w = -1/y: coefficients (b2, -b1, b0).
    RiccatiEq inverted() const { return RiccatiEq(b_[2], -b_[1], b_[0], domain_); }

    /// The default constancy grid for this equation.
    Grid grid(std::size_t n = kFlagPoints, double tol = 1e-8) const {
        return Grid::chebyshev(domain_.lo, domain_.hi, n, tol);
    }

private:
    std::array<Expr, 3> b_;
    Interval domain_;
    bool b0_nonvanishing_ = false;
    bool b2_nonvanishing_ = false;

    static bool nonvanishing(const Expr& e, const Grid& g) {
        int sign = 0;
        bool ok = true;
        for (double t : g.points) {
            const double v = e.eval(t);
            const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
            if (s == 0 || (sign != 0 && s != sign)) ok = false;
            sign = s;
        }
        return ok;
    }
};

/// The integrable target dy'/dt = D(t)(c0 + c1 y' + c2 y'²).
struct TargetForm {
    Expr D;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;

    RiccatiEq equation(Interval domain) const { return RiccatiEq(D * c0, D * c1, D * c2, domain); }
};

/**
 * The equation satisfied by y' = Φ(Ā(t), y) when y solves `eq`.
 *
 * Coefficients are built as expressions over the curve entries and their
 * derivatives, so they can be differentiated again. The result lives on the
 * intersection of the two domains.
 */
inline RiccatiEq transform(const RiccatiEq& eq, const SL2Curve& curve) {
    const Interval dom = eq.domain().intersect(curve.domain());
    if (dom.empty()) throw DomainError("curve and equation domains do not overlap");
    const auto [a, b, c, d] = curve.entries();
    const Expr da = a.derivative(), db = b.derivative(), dc = c.derivative(), dd = d.derivative();
    const Expr &b0 = eq.b0(), &b1 = eq.b1(), &b2 = eq.b2();
    Expr n2 = d * d * b2 - d * c * b1 + c * c * b0 + c * dd - d * dc;
    Expr n1 = -2.0 * b * d * b2 + (a * d + b * c) * b1 - 2.0 * a * c * b0 + d * da - a * dd + b * dc - c * db;
    Expr n0 = b * b * b2 - a * b * b1 + a * a * b0 + a * db - b * da;
    return RiccatiEq(std::move(n0), std::move(n1), std::move(n2), dom);
}

/// Pointwise y'_i = Φ(Ā(t_i), y_i). Charts are reassigned from the values.
inline SolutionTrace push_solution(const SL2Curve& curve, const SolutionTrace& trace) {
    std::vector<ExtReal> ys;
    ys.reserve(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) ys.push_back(mobius(curve.at(trace.times[i]), trace.values[i]));
    SolutionTrace out = SolutionTrace::from_values(trace.times, std::move(ys));
    return out;
}

/// Max over the grid of |b_j - b'_j|.
inline double coefficient_distance(const RiccatiEq& x, const RiccatiEq& y, const Grid& g) {
    double m = 0.0;
    for (double t : g.points)
        for (std::size_t j = 0; j < 3; ++j) m = std::max(m, std::fabs(x.coeff(j).eval(t) - y.coeff(j).eval(t)));
    return m;
}

}  // namespace rlie
