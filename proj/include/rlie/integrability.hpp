#pragma once

/**
 * @file integrability.hpp
 * @brief Grid-based integrability detectors and the transformations they
 * certify: the constant-invariant test, scalings to D(t)(c0 + c1 y + c2 y²),
 * the affine (D, M) transformations and linearization by a constant solution.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlie/algebra.hpp"
#include "rlie/expr.hpp"
#include "rlie/ode.hpp"
#include "rlie/quadrature.hpp"
#include "rlie/riccati.hpp"
#include "rlie/solvers.hpp"

namespace rlie {

/// Mean and spread of a function sampled on a grid.
struct ConstancyCheck {
    double mean = 0.0;
    double deviation = 0.0;  // max |f(t_i) - mean|
    bool constant = false;   // deviation <= tol·max(1, |mean|)
};

template <class F>
ConstancyCheck constancy(F&& f, const Grid& grid) {
    std::vector<double> v;
    v.reserve(grid.points.size());
    for (double t : grid.points) v.push_back(f(t));
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double dev = 0.0;
    for (double x : v) dev = std::max(dev, std::fabs(x - mean));
    return {mean, dev, dev <= grid.tolerance * std::max(1.0, std::fabs(mean))};
}

/// Throws DomainError naming the first grid point where e vanishes.
inline void require_nonvanishing(const Expr& e, const Grid& grid, const char* what) {
    int sign = 0;
    for (double t : grid.points) {
        const double v = e.eval(t);
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign))
            throw DomainError(std::string(what) + " vanishes near t = " + detail::format_number(t));
        sign = s;
    }
}

/// max over the grid of |e(t)|.
inline double grid_max_abs(const Expr& e, const Grid& grid) {
    double m = 0.0;
    for (double t : grid.points) m = std::max(m, std::fabs(e.eval(t)));
    return m;
}

// ---------------------------------------------------------------------------
// Constant invariant

/// (b1 + ½(ḃ2/b2 - ḃ0/b0)) / sqrt|b0 b2| at t.
inline double ctu_value(const RiccatiEq& eq, double t) {
    const double b0 = eq.b0().eval(t), b1 = eq.b1().eval(t), b2 = eq.b2().eval(t);
    const double d0 = eq.b0().deriv(t), d2 = eq.b2().deriv(t);
    return (b1 + 0.5 * (d2 / b2 - d0 / b0)) / std::sqrt(std::fabs(b0 * b2));
}

/// The invariant sampled on the grid. Throws DomainError if b0 or b2
/// vanishes on the grid; those equations reduce to linear ones instead.
inline ConstancyCheck ctu_check(const RiccatiEq& eq, const Grid& grid) {
    require_nonvanishing(eq.b0(), grid, "b0");
    require_nonvanishing(eq.b2(), grid, "b2");
    return constancy([&eq](double t) { return ctu_value(eq, t); }, grid);
}

/// The constant K when the invariant is constant on the grid.
inline std::optional<double> ctu_test(const RiccatiEq& eq, const Grid& grid) {
    const ConstancyCheck c = ctu_check(eq, grid);
    if (!c.constant) return std::nullopt;
    return c.mean;
}

// ---------------------------------------------------------------------------
// Scaling y' = G y onto D(t)(c0 + c1 y' + c2 y'²)

struct TuOutcome {
    bool ok = false;
    TargetForm target;
    Expr G;
    double kappa = 1.0;
    std::vector<double> residuals;  // per grid point, |lhs - κ c1|
    double max_residual = 0.0;
};

class SignIncompatible : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Looks for G > 0 such that y' = G(t) y maps `eq` onto
 * dy'/dt = D(t)(c0 + c1 y' + c2 y'²). Then D = κ sqrt(b0 b2 / (c0 c2)) with
 * κ = sg(b0/c0), G = sqrt(b2 c0 / (b0 c2)), and the remaining condition is
 * (b1 + ½(ḃ2/b2 - ḃ0/b0)) sqrt(c0 c2 / (b0 b2)) = κ c1.
 */
inline TuOutcome tu_transform(const RiccatiEq& eq, double c0, double c1, double c2, const Grid& grid) {
    if (c0 == 0.0 || c2 == 0.0) throw std::invalid_argument("tu_transform needs c0 c2 != 0");
    require_nonvanishing(eq.b0(), grid, "b0");
    require_nonvanishing(eq.b2(), grid, "b2");
    const double tm = grid.points.front();
    const double sb = eq.b0().eval(tm) * eq.b2().eval(tm);
    if ((sb > 0.0) != (c0 * c2 > 0.0)) throw SignIncompatible("sign of b0 b2 differs from sign of c0 c2");
    TuOutcome out;
    out.kappa = (eq.b0().eval(tm) / c0) > 0.0 ? 1.0 : -1.0;
    const Expr& b0 = eq.b0();
    const Expr& b2 = eq.b2();
    out.target = TargetForm{out.kappa * sqrt(b0 * b2 / (c0 * c2)), c0, c1, c2};
    out.G = sqrt(b2 * c0 / (b0 * c2));
    for (double t : grid.points) {
        const double v0 = b0.eval(t), v2 = b2.eval(t);
        const double lhs = (eq.b1().eval(t) + 0.5 * (b2.deriv(t) / v2 - b0.deriv(t) / v0)) *
                           std::sqrt(c0 * c2 / (v0 * v2));
        double r = std::fabs(lhs - out.kappa * c1);
        if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
        out.residuals.push_back(r);
        out.max_residual = std::max(out.max_residual, r);
    }
    out.ok = out.max_residual <= grid.tolerance * std::max(1.0, std::fabs(c1));
    return out;
}

/**
 * The equation with coefficients b0, ḃ0/b0 - Ḋ/D + c1 D, D² c0 c2 / b0:
 * every member is mapped onto D(c0 + c1 y + c2 y²) by a positive scaling.
 */
inline RiccatiEq c2tu_family(const Expr& D, double c0, double c1, double c2, const Expr& b0, Interval domain) {
    if (c0 * c2 == 0.0) throw std::invalid_argument("c2tu_family needs c0 c2 != 0");
    Expr b1 = b0.derivative() / b0 - D.derivative() / D + c1 * D;
    Expr b2 = D * D * (c0 * c2) / b0;
    return RiccatiEq(b0, std::move(b1), std::move(b2), domain);
}

// ---------------------------------------------------------------------------
// Affine transformations y' = b2/(D c2) (y + M)

class DegenerateTransform : public std::runtime_error {
public:
    DegenerateTransform(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + detail::format_number(t)), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

struct Ft2Result {
    double c0 = 0.0, c1 = 0.0, c2 = 1.0;
    std::shared_ptr<const OdeClosure<2>> flow;  // components (D, M)
    Expr D, M;
    Expr b2;

    /// y' = b2/(D c2) (y + M) at time t, as an affine map on R̄.
    ExtReal push(double t, const ExtReal& y) const {
        const double s = b2.eval(t) / (D.eval(t) * c2);
        return mobius(s, s * M.eval(t), 0.0, 1.0, y);
    }
    /// The inverse map y = (D c2/b2) y' - M.
    ExtReal pull(double t, const ExtReal& yp) const {
        const double s = b2.eval(t) / (D.eval(t) * c2);
        return mobius(1.0 / s, -M.eval(t), 0.0, 1.0, yp);
    }
};

/**
 * Integrates
 *   Ḋ = (b1 + ḃ2/b2) D - c1 D² - 2 b2 M D,
 *   Ṁ = -b0 + (c0 c2 / b2) D² + b1 M - b2 M²
 * from (D0, M0) at t0 over [t0, t1]. Along any solution
 * y' = b2/(D c2)(y + M) maps `eq` onto dy'/dt = D(c0 + c1 y' + c2 y'²).
 * Throws DegenerateTransform if D changes sign.
 */
inline Ft2Result ft2_system(const RiccatiEq& eq, double c0, double c1, double c2, double D0, double M0, double t0,
                            double t1, const StepControl& ctrl = {}) {
    if (c2 == 0.0) throw std::invalid_argument("ft2_system needs c2 != 0");
    if (D0 == 0.0) throw std::invalid_argument("ft2_system needs D0 != 0");
    const auto b = eq.coeffs();
    auto rhs = [b, c0, c1, c2](double t, const Vec<2>& x) -> Vec<2> {
        const double b0 = b[0].eval(t), b1 = b[1].eval(t), b2 = b[2].eval(t), d2 = b[2].deriv(t);
        const double D = x[0], M = x[1];
        return {(b1 + d2 / b2) * D - c1 * D * D - 2.0 * b2 * M * D, -b0 + (c0 * c2 / b2) * D * D + b1 * M - b2 * M * M};
    };
    auto flow = std::make_shared<const OdeClosure<2>>(rhs, t0, Vec<2>{D0, M0}, t1, ctrl);
    const auto& states = flow->knot_states();
    for (std::size_t i = 0; i < states.size(); ++i)
        if (states[i][0] == 0.0 || (states[i][0] > 0.0) != (D0 > 0.0))
            throw DegenerateTransform("D reaches zero", flow->knot_times()[i]);
    Ft2Result r;
    r.c0 = c0;
    r.c1 = c1;
    r.c2 = c2;
    r.flow = flow;
    r.D = OdeClosure<2>::component(flow, 0, "D");
    r.M = OdeClosure<2>::component(flow, 1, "M");
    r.b2 = eq.b2();
    return r;
}

struct SpecialM {
    Expr M;               // b1/b2
    Expr D;               // exp(∫A)/(C + c1 ∫exp(∫A)), A = -b1 + ḃ2/b2
    double lower = 0.0;   // lower limit of the quadratures, where D = 1
    double residual = 0.0;  // grid max |d/dt(b1/b2) + b0|
};

/**
 * When d/dt(b1/b2) = -b0 on the grid, M = b1/b2 solves the M equation of
 * ft2_system with c0 = 0, and the D equation becomes a Bernoulli equation
 * solved by two quadratures. The lower limit is 0 when the domain contains
 * it, else the left end; C = 1 so that D = 1 there.
 */
inline std::optional<SpecialM> ft2_special_M(const RiccatiEq& eq, double c1, const Grid& grid) {
    require_nonvanishing(eq.b2(), grid, "b2");
    const Expr M = eq.b1() / eq.b2();
    double res = 0.0, scale = 1.0;
    for (double t : grid.points) {
        res = std::max(res, std::fabs(M.deriv(t) + eq.b0().eval(t)));
        scale = std::max(scale, std::fabs(eq.b0().eval(t)));
    }
    if (!(res <= grid.tolerance * scale)) return std::nullopt;
    const Interval dom = eq.domain();
    const double lo = dom.contains(0.0) ? 0.0 : dom.lo;
    const Expr A = -eq.b1() + eq.b2().derivative() / eq.b2();
    const QuadOptions opt{1e-14, 1e-13, 4000};
    auto expA = [A, lo, opt](double s) { return std::exp(quad(A, lo, s, opt).value); };
    Expr D = Expr::closure("D", [A, lo, c1, expA, opt](double t) -> Jet {
        const double e = expA(t);
        const double I = c1 == 0.0 ? 0.0 : quad(expA, lo, t, opt).value;
        const double d = e / (1.0 + c1 * I);
        const double a = A.eval(t);
        const double dd = a * d - c1 * d * d;
        const double d2 = A.deriv(t) * d + a * dd - 2.0 * c1 * d * dd;
        return {d, dd, d2};
    });
    return SpecialM{M, std::move(D), lo, res};
}

// ---------------------------------------------------------------------------
// Linearization by a constant solution

struct Linearization {
    double c = 0.0;          // constant solution
    double K = 0.0;          // 1/c, the matching root of the invariant quadratic
    SL2 curve;               // (0, -1/γ, γ, 1) with γ = -1/c, sends c to ∞
    LinearEq linear;         // transformed equation without its quadratic term
    double residual = 0.0;   // grid max |b0 + b1 c + b2 c²| relative to its terms
    double quadratic_remainder = 0.0;  // grid max |b2'| of the transformed equation
};

/// Roots (-b1 ± sqrt(b1² - 4 b0 b2)) / (2 b0) of b0 K² + b1 K + b2 = 0 at t.
/// They are the reciprocals of the constant roots of b0 + b1 c + b2 c².
inline std::optional<std::array<double, 2>> intcond_values(const RiccatiEq& eq, double t) {
    const double b0 = eq.b0().eval(t), b1 = eq.b1().eval(t), b2 = eq.b2().eval(t);
    const double disc = b1 * b1 - 4.0 * b0 * b2;
    if (disc < 0.0 || b0 == 0.0) return std::nullopt;
    const double r = std::sqrt(disc);
    return std::array<double, 2>{(-b1 + r) / (2.0 * b0), (-b1 - r) / (2.0 * b0)};
}

namespace detail {

// Real roots of b2 c² + b1 c + b0 = 0, computed without cancellation.
inline std::vector<double> constant_roots(double b0, double b1, double b2) {
    if (b2 == 0.0) {
        if (b1 == 0.0) return {};
        return {-b0 / b1};
    }
    const double disc = b1 * b1 - 4.0 * b0 * b2;
    if (disc < 0.0) return {};
    const double q = -0.5 * (b1 + std::copysign(std::sqrt(disc), b1));
    std::vector<double> out;
    out.push_back(q / b2);
    if (q != 0.0) out.push_back(b0 / q);
    return out;
}

}  // namespace detail

/**
 * Searches for a real constant c with b0 + b1 c + b2 c² ≡ 0 on the grid.
 * Candidates are the roots at the first grid point; a candidate passes when
 * the grid max of |b0 + b1 c + b2 c²| / (|b0| + |b1 c| + |b2| c²) is within
 * the grid tolerance. Among passing roots the smallest |c| wins.
 */
inline std::optional<Linearization> linearization_test(const RiccatiEq& eq, const Grid& grid) {
    const double t0 = grid.points.front();
    std::vector<double> cands =
        detail::constant_roots(eq.b0().eval(t0), eq.b1().eval(t0), eq.b2().eval(t0));
    std::sort(cands.begin(), cands.end(), [](double a, double b) { return std::fabs(a) < std::fabs(b); });
    for (double c : cands) {
        if (c == 0.0 || !std::isfinite(c)) continue;
        double res = 0.0;
        for (double t : grid.points) {
            const double b0 = eq.b0().eval(t), b1 = eq.b1().eval(t), b2 = eq.b2().eval(t);
            const double den = std::fabs(b0) + std::fabs(b1 * c) + std::fabs(b2) * c * c;
            if (den == 0.0) continue;
            res = std::max(res, std::fabs(b0 + b1 * c + b2 * c * c) / den);
        }
        if (res > grid.tolerance) continue;
        Linearization lin;
        lin.c = c;
        lin.K = 1.0 / c;
        const double g = -1.0 / c;
        lin.curve = SL2(0.0, -1.0 / g, g, 1.0);
        const RiccatiEq tr = transform(eq, SL2Curve::constant(lin.curve));
        lin.linear = LinearEq{tr.b0(), tr.b1()};
        lin.residual = res;
        lin.quadratic_remainder = grid_max_abs(tr.b2(), grid);
        return lin;
    }
    return std::nullopt;
}

}  // namespace rlie
