#pragma once

/**
 * @file classify.hpp
 * @brief The detector cascade and the reduction plan for each outcome.
 */

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rlie/fixtures.hpp"
#include "rlie/integrability.hpp"
#include "rlie/oracle.hpp"
#include "rlie/reductions.hpp"
#include "rlie/solvers.hpp"

namespace rlie {

struct Evidence {
    std::optional<double> value;      // K, c, or the C of a separable reference
    double residual = 0.0;            // the grid residual behind the verdict
    std::array<double, 3> constants{};  // (c0, c1, c2) when the case has them
    int reference = -1;               // separable: index of the factored coefficient
    std::string note;
};

struct Classification {
    Case kind = Case::Unclassified;
    Evidence evidence;
};

struct ClassifyOptions {
    std::optional<Expr> particular;  // a known particular solution, if any
};

namespace detail {

inline bool identically_zero(const Expr& e, const Grid& grid, double scale, double* residual) {
    if (auto c = e.constant_value(); c && !e.depends_on_t()) {
        *residual = std::fabs(*c);
        return *c == 0.0;
    }
    *residual = grid_max_abs(e, grid);
    return *residual <= grid.tolerance * std::max(1.0, scale);
}

inline double coefficient_scale(const RiccatiEq& eq, const Grid& grid) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) s = std::max(s, grid_max_abs(eq.coeff(j), grid));
    return s;
}

inline bool nonvanishing_on(const Expr& e, const Grid& grid) {
    try {
        require_nonvanishing(e, grid, "");
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

}  // namespace detail

/**
 * Runs, in order: b2 ≡ 0, b0 ≡ 0, all coefficients constant, all
 * coefficients proportional to one function, a constant solution, a constant
 * invariant, the M = b1/b2 condition and a caller-supplied particular
 * solution. The first hit is returned with its evidence.
 */
inline Classification classify(const RiccatiEq& eq, const Grid& grid, const ClassifyOptions& opts = {}) {
    Classification out;
    const double scale = detail::coefficient_scale(eq, grid);
    double r = 0.0;
    if (detail::identically_zero(eq.b2(), grid, scale, &r)) {
        out.kind = Case::LinearAlready;
        out.evidence.residual = r;
        return out;
    }
    if (detail::identically_zero(eq.b0(), grid, scale, &r)) {
        out.kind = Case::InverseLinear;
        out.evidence.residual = r;
        return out;
    }

    std::array<ConstancyCheck, 3> cc;
    bool all_const = true;
    for (std::size_t j = 0; j < 3; ++j) {
        const Expr& b = eq.coeff(j);
        cc[j] = constancy([&b](double t) { return b.eval(t); }, grid);
        all_const = all_const && cc[j].constant;
    }
    if (all_const) {
        out.kind = Case::Autonomous;
        out.evidence.constants = {cc[0].mean, cc[1].mean, cc[2].mean};
        out.evidence.residual = std::max({cc[0].deviation, cc[1].deviation, cc[2].deviation});
        return out;
    }

    // separable: b_j = φ(t) c_j with φ the largest non-vanishing coefficient
    int ref = -1;
    double ref_size = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double m = grid_max_abs(eq.coeff(j), grid);
        if (m > ref_size && detail::nonvanishing_on(eq.coeff(j), grid)) {
            ref = j;
            ref_size = m;
        }
    }
    if (ref >= 0) {
        bool sep = true;
        double dev = 0.0;
        std::array<double, 3> c{};
        for (int j = 0; j < 3; ++j) {
            if (j == ref) {
                c[j] = 1.0;
                continue;
            }
            const Expr& bj = eq.coeff(j);
            const Expr& br = eq.coeff(ref);
            auto chk = constancy([&](double t) { return bj.eval(t) / br.eval(t); }, grid);
            sep = sep && chk.constant;
            dev = std::max(dev, chk.deviation);
            c[j] = chk.mean;
        }
        if (sep) {
            out.kind = Case::Separable;
            out.evidence.constants = c;
            out.evidence.reference = ref;
            out.evidence.residual = dev;
            out.evidence.note = "coefficients are b" + std::to_string(ref) + "(t) times constants";
            return out;
        }
    }

    if (auto lin = linearization_test(eq, grid)) {
        out.kind = Case::LinearizableByConstant;
        out.evidence.value = lin->c;
        out.evidence.residual = lin->residual;
        out.evidence.note = "K = 1/c = " + detail::format_number(lin->K);
        return out;
    }

    const bool b0nz = detail::nonvanishing_on(eq.b0(), grid);
    const bool b2nz = detail::nonvanishing_on(eq.b2(), grid);
    if (b0nz && b2nz) {
        const ConstancyCheck c = ctu_check(eq, grid);
        if (c.constant) {
            out.kind = Case::CTUIntegrable;
            out.evidence.value = c.mean;
            out.evidence.residual = c.deviation;
            return out;
        }
    }
    if (b2nz) {
        if (auto sm = ft2_special_M(eq, 0.0, grid)) {
            out.kind = Case::FT2SpecialM;
            out.evidence.residual = sm->residual;
            out.evidence.note = "d/dt(b1/b2) = -b0";
            return out;
        }
    }
    if (opts.particular) {
        const double res = solution_residual(eq, *opts.particular, grid);
        if (res <= 1e-6) {
            out.kind = Case::KnownParticularSolution;
            out.evidence.residual = res;
            return out;
        }
    }
    return out;
}

namespace detail {

inline SolutionTrace pull_back(const SolutionTrace& tr, const std::function<ExtReal(double, const ExtReal&)>& map) {
    std::vector<ExtReal> ys;
    ys.reserve(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) ys.push_back(map(tr.times[i], tr.values[i]));
    return SolutionTrace::from_values(tr.times, std::move(ys));
}

}  // namespace detail

/// The reduction plan for a classification; falls back to the oracle for
/// Unclassified (and for cases without a constructive plan).
inline ReductionPlan plan_for(const RiccatiEq& eq, const Classification& cls, const Grid& grid,
                              const ClassifyOptions& opts = {}, const StepControl& ctrl = {}) {
    ReductionPlan plan;
    switch (cls.kind) {
        case Case::LinearAlready: {
            const LinearEq lin{eq.b0(), eq.b1()};
            plan.method = "quadratures";
            plan.steps.push_back({StepKind::SolveLinear, "integrating factor", std::nullopt, lin, std::nullopt});
            plan.run = [lin](const ExtReal& y0, double t0, const std::vector<double>& times) {
                return SolutionTrace::from_values(times, detail::linear_values(lin, y0, t0, times));
            };
            return plan;
        }
        case Case::InverseLinear: {
            const LinearEq lin{eq.b2(), -eq.b1()};
            plan.method = "quadratures";
            plan.steps.push_back({StepKind::Invert, "w = -1/y", eq.inverted(), lin, std::nullopt});
            plan.steps.push_back({StepKind::SolveLinear, "integrating factor", std::nullopt, lin, std::nullopt});
            plan.run = [lin](const ExtReal& y0, double t0, const std::vector<double>& times) {
                const ExtReal w0 = mobius(0.0, -1.0, 1.0, 0.0, y0);
                SolutionTrace w = SolutionTrace::from_values(times, detail::linear_values(lin, w0, t0, times));
                return detail::pull_back(w, [](double, const ExtReal& v) { return mobius(0.0, -1.0, 1.0, 0.0, v); });
            };
            return plan;
        }
        case Case::Autonomous:
        case Case::Separable: {
            const auto c = cls.evidence.constants;
            const Expr D = cls.kind == Case::Autonomous ? Expr(1.0) : eq.coeff(static_cast<std::size_t>(cls.evidence.reference));
            plan.method = "autonomous closed form";
            if (cls.kind == Case::Separable)
                plan.steps.push_back({StepKind::TimeReparam, "tau = integral of the common factor", std::nullopt,
                                      std::nullopt, TargetForm{D, c[0], c[1], c[2]}});
            plan.steps.push_back({StepKind::SolveAutonomous,
                                  std::string("discriminant ") + discriminant_name(classify_discriminant(c[0], c[1], c[2])),
                                  std::nullopt, std::nullopt, TargetForm{D, c[0], c[1], c[2]}});
            plan.run = [c, D](const ExtReal& y0, double t0, const std::vector<double>& times) {
                return solve_autonomous(c[0], c[1], c[2], D, y0, t0, times);
            };
            return plan;
        }
        case Case::LinearizableByConstant: {
            // the constant root is a particular solution
            ReductionPlan p = reduce_one_solution(eq, Expr(*cls.evidence.value), grid);
            return p;
        }
        case Case::CTUIntegrable: {
            const double t = grid.points.front();
            const double c0 = eq.b0().eval(t) > 0.0 ? 1.0 : -1.0;
            const double c2 = eq.b2().eval(t) > 0.0 ? 1.0 : -1.0;
            const double K = *cls.evidence.value;
            TuOutcome tu = tu_transform(eq, c0, K, c2, grid);
            const SL2Curve curve = scaling_curve(tu.G, eq.domain());
            const Expr D = tu.target.D;
            plan.method = "scaling to autonomous form";
            plan.steps.push_back({StepKind::Curve, "y' = G y", transform(eq, curve), std::nullopt, tu.target});
            plan.steps.push_back({StepKind::SolveAutonomous, "tau = integral of D", std::nullopt, std::nullopt,
                                  tu.target});
            plan.run = [curve, D, c0, K, c2](const ExtReal& y0, double t0, const std::vector<double>& times) {
                const ExtReal yp0 = mobius(curve.at(t0), y0);
                SolutionTrace yp = solve_autonomous(c0, K, c2, D, yp0, t0, times);
                return detail::pull_back(yp, [&curve](double s, const ExtReal& v) {
                    return mobius(curve.at(s).inverse(), v);
                });
            };
            return plan;
        }
        case Case::FT2SpecialM: {
            auto sm = ft2_special_M(eq, 0.0, grid);
            const Expr D = sm->D, M = sm->M, b2 = eq.b2();
            plan.method = "special-M transformation";
            plan.steps.push_back({StepKind::Curve, "y' = b2/D (y + M), M = b1/b2", std::nullopt, std::nullopt,
                                  TargetForm{D, 0.0, 0.0, 1.0}});
            plan.steps.push_back({StepKind::SolveAutonomous, "dy'/dt = D y'^2", std::nullopt, std::nullopt,
                                  TargetForm{D, 0.0, 0.0, 1.0}});
            plan.run = [D, M, b2](const ExtReal& y0, double t0, const std::vector<double>& times) {
                const double s0 = b2.eval(t0) / D.eval(t0);
                const ExtReal yp0 = mobius(s0, s0 * M.eval(t0), 0.0, 1.0, y0);
                SolutionTrace yp = solve_autonomous(0.0, 0.0, 1.0, D, yp0, t0, times);
                return detail::pull_back(yp, [&](double s, const ExtReal& v) {
                    return mobius(D.eval(s) / b2.eval(s), -M.eval(s), 0.0, 1.0, v);
                });
            };
            return plan;
        }
        case Case::KnownParticularSolution:
            if (opts.particular) return reduce_one_solution(eq, *opts.particular, grid);
            break;
        case Case::Unclassified:
            break;
    }
    plan.method = "oracle";
    plan.run = [eq, ctrl](const ExtReal& y0, double t0, const std::vector<double>& times) {
        if (times.empty()) return SolutionTrace{};
        std::vector<double> fwd, bwd;
        for (double t : times) (t >= t0 ? fwd : bwd).push_back(t);
        if (!bwd.empty()) throw std::invalid_argument("oracle plan integrates forward only");
        const double t1 = fwd.back();
        if (t1 == t0) return SolutionTrace::from_values(times, std::vector<ExtReal>(times.size(), y0));
        return oracle_integrate(eq, y0, t0, t1, ctrl, fwd);
    };
    return plan;
}

}  // namespace rlie
