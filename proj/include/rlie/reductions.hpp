#pragma once

/**
 * @file reductions.hpp
 * @brief Reductions by known particular solutions, the superposition rule
 * and the second-order equations that factor through a Riccati equation.
 */

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlie/algebra.hpp"
#include "rlie/expr.hpp"
#include "rlie/integrability.hpp"
#include "rlie/riccati.hpp"
#include "rlie/solvers.hpp"
#include "rlie/trace.hpp"

namespace rlie {

enum class StepKind { Curve, ShiftBySolution, Invert, CrossRatio, TimeReparam, SolveLinear, SolveAutonomous };

inline const char* step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::Curve: return "curve";
        case StepKind::ShiftBySolution: return "shift_by_solution";
        case StepKind::Invert: return "invert";
        case StepKind::CrossRatio: return "cross_ratio";
        case StepKind::TimeReparam: return "time_reparam";
        case StepKind::SolveLinear: return "solve_linear";
        case StepKind::SolveAutonomous: return "solve_autonomous";
    }
    return "?";
}

struct PlanStep {
    StepKind kind;
    std::string description;
    std::optional<RiccatiEq> equation;
    std::optional<LinearEq> linear;
    std::optional<TargetForm> target;
};

/// A chain of changes of variables ending in a solvable equation, with the
/// composed solver: `run(y0, t0, times)` returns the solution through y0.
struct ReductionPlan {
    std::string method;
    std::vector<PlanStep> steps;
    std::function<SolutionTrace(const ExtReal&, double, const std::vector<double>&)> run;

    SolutionTrace solve(const ExtReal& y0, double t0, const std::vector<double>& times) const {
        return run(y0, t0, times);
    }
};

class NotASolution : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Grid max of |ẏ - (b0 + b1 y + b2 y²)| relative to 1 + |ẏ|.
inline double solution_residual(const RiccatiEq& eq, const Expr& y, const Grid& grid) {
    double m = 0.0;
    for (double t : grid.points) {
        const double v = y.eval(t), dv = y.deriv(t);
        m = std::max(m, std::fabs(dv - eq.rhs(t, v)) / (1.0 + std::fabs(dv)));
    }
    return m;
}

namespace detail {

// Solution of a linear equation through x0 (∞ stays ∞).
inline std::vector<ExtReal> linear_values(const LinearEq& lin, const ExtReal& x0, double t0,
                                          const std::vector<double>& times) {
    if (x0.is_infinite()) return std::vector<ExtReal>(times.size(), ExtReal::infinity());
    return solve_linear(lin, x0.value(), t0, times).values;
}

}  // namespace detail

/**
 * With a particular solution y1: z = y - y1 gives a Bernoulli equation and
 * u = -1/z the linear u̇ = b2 - (b1 + 2 b2 y1) u. Then y = y1 - 1/u.
 */
inline ReductionPlan reduce_one_solution(const RiccatiEq& eq, const Expr& y1, const Grid& grid,
                                         double residual_tol = 1e-6) {
    const double res = solution_residual(eq, y1, grid);
    if (!(res <= residual_tol))
        throw NotASolution("particular solution residual " + detail::format_number(res) + " exceeds tolerance");
    ReductionPlan plan;
    plan.method = "particular-solution reduction";
    const Expr one = Expr(1.0);
    const RiccatiEq bern(Expr(0.0), eq.b1() + 2.0 * eq.b2() * y1, eq.b2(), eq.domain());
    const LinearEq lin{eq.b2(), -(eq.b1() + 2.0 * eq.b2() * y1)};
    plan.steps.push_back({StepKind::ShiftBySolution, "z = y - y1", bern, std::nullopt, std::nullopt});
    plan.steps.push_back({StepKind::Invert, "u = -1/z", std::nullopt, lin, std::nullopt});
    plan.steps.push_back({StepKind::SolveLinear, "integrating factor, two quadratures", std::nullopt, lin,
                          std::nullopt});
    plan.run = [y1, lin](const ExtReal& y0, double t0, const std::vector<double>& times) {
        const double y10 = y1.eval(t0);
        // u = -1/(y - y1) is the Möbius map ((0, -1), (1, -y1))
        const ExtReal u0 = mobius(0.0, -1.0, 1.0, -y10, y0);
        std::vector<ExtReal> us = detail::linear_values(lin, u0, t0, times);
        std::vector<ExtReal> ys;
        ys.reserve(times.size());
        for (std::size_t i = 0; i < times.size(); ++i) ys.push_back(mobius(y1.eval(times[i]), -1.0, 1.0, 0.0, us[i]));
        return SolutionTrace::from_values(times, std::move(ys));
    };
    return plan;
}

/**
 * With two particular solutions: z = (y - y1)/(y - y2) satisfies
 * ż = b2 (y1 - y2) z, and y = (y1 - z y2)/(1 - z). Throws DegenerateTransform
 * where y1 and y2 meet on the grid.
 */
inline ReductionPlan reduce_two_solutions(const RiccatiEq& eq, const Expr& y1, const Expr& y2, const Grid& grid,
                                          double residual_tol = 1e-6) {
    for (const Expr* y : {&y1, &y2}) {
        const double res = solution_residual(eq, *y, grid);
        if (!(res <= residual_tol))
            throw NotASolution("particular solution residual " + detail::format_number(res) +
                               " exceeds tolerance");
    }
    for (double t : grid.points) {
        const double a = y1.eval(t), b = y2.eval(t);
        if (std::fabs(a - b) <= 1e-12 * (1.0 + std::fabs(a) + std::fabs(b)))
            throw DegenerateTransform("particular solutions coincide", t);
    }
    ReductionPlan plan;
    plan.method = "two-solution reduction";
    const LinearEq lin{Expr(0.0), eq.b2() * (y1 - y2)};
    plan.steps.push_back({StepKind::CrossRatio, "z = (y - y1)/(y - y2)", std::nullopt, lin, std::nullopt});
    plan.steps.push_back({StepKind::SolveLinear, "homogeneous linear, one quadrature", std::nullopt, lin,
                          std::nullopt});
    plan.run = [y1, y2, lin](const ExtReal& y0, double t0, const std::vector<double>& times) {
        const ExtReal z0 = mobius(1.0, -y1.eval(t0), 1.0, -y2.eval(t0), y0);
        std::vector<ExtReal> zs = detail::linear_values(lin, z0, t0, times);
        std::vector<ExtReal> ys;
        ys.reserve(times.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double a = y1.eval(times[i]), b = y2.eval(times[i]);
            ys.push_back(mobius(-b, a, -1.0, 1.0, zs[i]));
        }
        return SolutionTrace::from_values(times, std::move(ys));
    };
    return plan;
}

namespace detail {

// y = (y1(y3 - y2) - k y2(y1 - y3)) / ((y3 - y2) - k(y1 - y3)) for finite inputs.
inline ExtReal superpose_finite(double y1, double y2, double y3, double k) {
    const double num = y1 * (y3 - y2) - k * y2 * (y1 - y3);
    const double den = (y3 - y2) - k * (y1 - y3);
    const double scale = std::fabs(y3 - y2) + std::fabs(k * (y1 - y3));
    if (std::fabs(den) <= 1e-14 * scale) return ExtReal::infinity();
    return ExtReal(num / den);
}

}  // namespace detail

/**
 * The nonlinear superposition rule. The formula is a cross ratio and so
 * commutes with rotations of R̄; when an input is infinite or large the
 * points are rotated to a finite chart, combined, and rotated back.
 * k = 0 returns y1; `k_infinite` returns y2.
 */
inline SolutionTrace superposition(const SolutionTrace& y1, const SolutionTrace& y2, const SolutionTrace& y3,
                                   double k, bool k_infinite = false) {
    if (y1.times != y2.times || y1.times != y3.times) throw std::invalid_argument("traces sampled on different times");
    if (k_infinite) return y2;
    if (k == 0.0) return y1;
    std::vector<ExtReal> out;
    out.reserve(y1.size());
    for (std::size_t i = 0; i < y1.size(); ++i) {
        const ExtReal p[3] = {y1.values[i], y2.values[i], y3.values[i]};
        auto big = [](const ExtReal& v) { return v.is_infinite() || std::fabs(v.value()) > 1e3; };
        if (!big(p[0]) && !big(p[1]) && !big(p[2])) {
            out.push_back(detail::superpose_finite(p[0].value(), p[1].value(), p[2].value(), k));
            continue;
        }
        // rotation R(θ) = ((cos, -sin), (sin, cos)); pick θ putting all three
        // preimages nearest the origin
        double best_theta = 0.0, best = std::numeric_limits<double>::infinity();
        for (int j = 1; j < 8; ++j) {
            const double th = j * M_PI / 8.0;
            const SL2 rinv(std::cos(th), std::sin(th), -std::sin(th), std::cos(th));
            double worst = 0.0;
            for (const ExtReal& v : p) {
                const ExtReal q = mobius(rinv, v);
                worst = std::max(worst, q.is_infinite() ? std::numeric_limits<double>::infinity() : std::fabs(q.value()));
            }
            if (worst < best) {
                best = worst;
                best_theta = th;
            }
        }
        const SL2 r(std::cos(best_theta), -std::sin(best_theta), std::sin(best_theta), std::cos(best_theta));
        const SL2 rinv = r.inverse();
        const double q0 = mobius(rinv, p[0]).value(), q1 = mobius(rinv, p[1]).value(), q2 = mobius(rinv, p[2]).value();
        out.push_back(mobius(r, detail::superpose_finite(q0, q1, q2, k)));
    }
    return SolutionTrace::from_values(y1.times, std::move(out));
}

/// k such that superposition(y1, y2, y3, k) passes through y at one time:
/// the cross ratio (y - y1)(y3 - y2) / ((y - y2)(y1 - y3)).
inline double superposition_constant(double y, double y1, double y2, double y3) {
    return (y - y1) * (y3 - y2) / ((y - y2) * (y1 - y3));
}

/**
 * For ÿ + 2P ẏ + (Ṗ + P² - φ̇ - φ²) y = 0, ψ = ẏ/y satisfies
 * ψ̇ = -ψ² - 2P ψ - (Ṗ + P² - φ̇ - φ²), with particular solution φ - P.
 */
struct SecondOrderReduction {
    RiccatiEq equation;
    Expr particular;
};

inline SecondOrderReduction second_order_to_riccati(const Expr& P, const Expr& phi, Interval domain) {
    Expr q = P.derivative() + P * P - phi.derivative() - phi * phi;
    return {RiccatiEq(-q, -2.0 * P, Expr(-1.0), domain), phi - P};
}

}  // namespace rlie
