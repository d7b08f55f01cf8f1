#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rlie/rlie.hpp"

using namespace rlie;

namespace {

RiccatiEq random_equation(std::mt19937_64& rng, Interval dom) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.5, 2.0);
    const Expr t = Expr::t();
    auto coef = [&] { return u(rng) + 0.5 * u(rng) * sin(w(rng) * t + u(rng)); };
    Expr b0 = coef(), b1 = coef(), b2 = coef();
    return RiccatiEq(b0, b1, b2, dom);
}

// Coefficients c + a sin(wt + phi) with |c|, |a| <= amp.
RiccatiEq bounded_equation(std::mt19937_64& rng, Interval dom, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp), w(0.5, 2.0), ph(-1.0, 1.0);
    const Expr t = Expr::t();
    auto coef = [&] { return u(rng) + u(rng) * sin(w(rng) * t + ph(rng)); };
    Expr b0 = coef(), b1 = coef(), b2 = coef();
    return RiccatiEq(b0, b1, b2, dom);
}

double max_entry(const ConnectPath& p) {
    double m = 0.0;
    for (const auto& s : p.states)
        m = std::max({m, std::fabs(s.alpha), std::fabs(s.beta), std::fabs(s.gamma), std::fabs(s.delta)});
    return m;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

}  // namespace

TEST(SolveELA, ZeroEquationStaysAtIdentity) {
    const RiccatiEq eq(Expr(0.0), Expr(0.0), Expr(0.0), {0.0, 1.0});
    const GroupPath p = solve_eLA(eq, 0.0, 1.0);
    for (const SL2& m : p.mats) {
        EXPECT_EQ(m.alpha(), 1.0);
        EXPECT_EQ(m.beta(), 0.0);
        EXPECT_EQ(m.gamma(), 0.0);
        EXPECT_EQ(m.delta(), 1.0);
    }
}

TEST(SolveELA, ConstantB0IsATranslation) {
    const RiccatiEq eq(Expr(1.0), Expr(0.0), Expr(0.0), {0.0, 3.0});
    const GroupPath p = solve_eLA(eq, 0.0, 3.0, {}, linspace(0.0, 3.0, 7));
    ASSERT_EQ(p.times.size(), 7u);
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        EXPECT_NEAR(p.mats[i].alpha(), 1.0, 1e-14);
        EXPECT_NEAR(p.mats[i].beta(), p.times[i], 1e-12);
        EXPECT_NEAR(p.mats[i].gamma(), 0.0, 1e-14);
        EXPECT_NEAR(mobius(p.mats[i], 0.25).value(), 0.25 + p.times[i], 1e-12);
    }
}

TEST(SolveELA, HovyReconstructionMatchesClosedForm) {
    const Fixture f = hovy(2.0, {0.5, 4.0});
    const auto ts = linspace(0.5, 4.0, 71);
    const GroupPath p = solve_eLA(f.eq, 0.5, 4.0, {}, ts);
    const double K = hovy_constant(2.0, 0.5, 2.0);
    const SolutionTrace closed = hovy_trace(2.0, K, ts);
    EXPECT_LE(sup_distance(reconstruct(p, 2.0), closed), 1e-6);
}

TEST(SolveELA, DeterminantDriftIsSmall) {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) {
        const RiccatiEq eq = random_equation(rng, {0.0, 10.0});
        const GroupPath p = solve_eLA(eq, 0.0, 10.0);
        EXPECT_LE(p.meta.max_det_drift, 1e-8 * 10.0);
        // knots are renormalized; the residual is rounding in the products
        for (const SL2& m : p.mats) {
            const double scale = std::fabs(m.alpha() * m.delta()) + std::fabs(m.beta() * m.gamma());
            EXPECT_LE(std::fabs(m.det() - 1.0), 1e-12 * std::max(1.0, scale));
        }
    }
}

TEST(SolveELA, ReconstructionMatchesOracle) {
    std::mt19937_64 rng(2);
    const auto ts = linspace(0.0, 5.0, 51);
    for (int i = 0; i < 5; ++i) {
        const RiccatiEq eq = random_equation(rng, {0.0, 5.0});
        const GroupPath p = solve_eLA(eq, 0.0, 5.0, {}, ts);
        for (ExtReal y0 : {ExtReal(0.3), ExtReal(-1.7), ExtReal::infinity()}) {
            const SolutionTrace orc = oracle_integrate(eq, y0, 0.0, 5.0, {1e-12, 1e-14}, ts);
            EXPECT_LE(sup_chordal(reconstruct(p, y0), orc), 1e-6);
        }
    }
}

TEST(SolveELA, ObservedOrder) {
    const RiccatiEq eq(parse("1 + sin(t)"), parse("cos(2*t)"), parse("-0.5 + 0.2*t"), {0.0, 2.0});
    const SL2 ref = solve_eLA(eq, 0.0, 2.0, {1e-13, 1e-15}).mats.back();
    auto err = [&](double h) {
        StepControl c;
        c.fixed_step = true;
        c.h0 = h;
        const SL2 m = solve_eLA(eq, 0.0, 2.0, c).mats.back();
        return std::fabs(m.alpha() - ref.alpha()) + std::fabs(m.beta() - ref.beta()) +
               std::fabs(m.gamma() - ref.gamma()) + std::fabs(m.delta() - ref.delta());
    };
    const double e1 = err(0.1), e2 = err(0.05);
    EXPECT_GE(std::log2(e1 / e2), 3.5);
}

TEST(SolveELA, CoefficientDomainErrorPropagates) {
    const RiccatiEq eq(parse("1/(t - 1)"), Expr(0.0), Expr(0.0), {0.0, 2.0});
    EXPECT_THROW(solve_eLA(eq, 0.0, 2.0), std::exception);
}

TEST(Reconstruct, Examples) {
    GroupPath id;
    id.times = {0.0, 1.0, 2.0};
    id.mats = {SL2::identity(), SL2::identity(), SL2::identity()};
    for (const auto& v : reconstruct(id, 1.5).values) EXPECT_EQ(v.value(), 1.5);

    GroupPath tr;
    tr.times = {0.0, 1.0, 2.0};
    for (double t : tr.times) tr.mats.push_back(SL2(1.0, t, 0.0, 1.0));
    const SolutionTrace s = reconstruct(tr, 0.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(s.values[i].value(), tr.times[i]);

    GroupPath g;
    g.times = {0.0, 1.0};
    g.mats = {SL2(2.0, 1.0, 1.0, 1.0), SL2(1.0, 0.0, 0.0, 1.0)};
    const SolutionTrace inf = reconstruct(g, ExtReal::infinity());
    EXPECT_DOUBLE_EQ(inf.values[0].value(), 2.0);
    EXPECT_TRUE(inf.values[1].is_infinite());
}

TEST(SolveConnect, SameEquationGivesIdentity) {
    std::mt19937_64 rng(3);
    const RiccatiEq eq = random_equation(rng, {0.0, 5.0});
    const ConnectPath p = solve_connect(eq, eq, ConnectState{}, 0.0, 5.0);
    for (const auto& s : p.states) {
        EXPECT_LE(std::fabs(s.alpha - 1.0), 1e-9);
        EXPECT_LE(std::fabs(s.beta), 1e-9);
        EXPECT_LE(std::fabs(s.gamma), 1e-9);
        EXPECT_LE(std::fabs(s.delta - 1.0), 1e-9);
    }
}

TEST(SolveConnect, DeterminantIsAFirstIntegral) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        const RiccatiEq a = bounded_equation(rng, {0.0, 10.0}, 0.5);
        const RiccatiEq b = bounded_equation(rng, {0.0, 10.0}, 0.5);
        const ConnectPath p = solve_connect(a, b, ConnectState{}, 0.0, 10.0, {1e-12, 1e-15});
        EXPECT_LE(p.max_det_drift, 1e-9) << i;
    }
}

// Growing solutions: the drift follows the tolerance times |x|^2.
TEST(SolveConnect, DriftScalesWithToleranceAndSize) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const RiccatiEq a = random_equation(rng, {0.0, 10.0});
        const RiccatiEq b = random_equation(rng, {0.0, 10.0});
        const ConnectPath loose = solve_connect(a, b, ConnectState{}, 0.0, 10.0, {1e-8, 1e-11});
        const ConnectPath tight = solve_connect(a, b, ConnectState{}, 0.0, 10.0, {1e-12, 1e-15});
        const double x2 = std::pow(std::max(1.0, max_entry(tight)), 2.0);
        EXPECT_LE(loose.max_det_drift, 1e-6 * x2) << i;
        EXPECT_LE(tight.max_det_drift, 1e-10 * x2) << i;
        EXPECT_LE(tight.max_det_drift, loose.max_det_drift + 1e-13 * x2) << i;
    }
}

TEST(SolveConnect, AllenSteinCurveIsDiagonal) {
    const Expr t = Expr::t();
    const Expr b0 = 1.0 + t * t, b2 = exp(t);
    const Fixture f = allen_stein(b0, b2, 0.5, {0.0, 2.0});
    const Expr s = sqrt(b0 * b2);
    const RiccatiEq target(s, 0.5 * s, s, {0.0, 2.0});
    const double a0 = std::pow(b2.eval(0.0) / b0.eval(0.0), 0.25);
    const ConnectPath p = solve_connect(f.eq, target, ConnectState{a0, 0.0, 0.0, 1.0 / a0}, 0.0, 2.0);
    for (std::size_t i = 0; i < p.states.size(); ++i) {
        const auto& x = p.states[i];
        EXPECT_LE(std::fabs(x.beta) + std::fabs(x.gamma), 1e-7);
        EXPECT_NEAR(x.alpha, std::pow(b2.eval(p.times[i]) / b0.eval(p.times[i]), 0.25), 1e-8);
    }
}

TEST(SolveConnect, TabulatedCurveMapsEquationToTarget) {
    const RiccatiEq eq(parse("1 + 0.3*sin(t)"), parse("0.2*t"), parse("-1"), {0.0, 2.0});
    const RiccatiEq target(parse("0.5"), parse("cos(t)"), parse("0.4*t - 1"), {0.0, 2.0});
    const ConnectPath p = solve_connect(eq, target, ConnectState{}, 0.0, 2.0, {1e-12, 1e-14}, linspace(0.0, 2.0, 401));
    const RiccatiEq mapped = transform(eq, p.curve());
    EXPECT_LE(coefficient_distance(mapped, target, Grid::chebyshev(0.05, 1.95, 32)), 1e-4);
}

TEST(SolveConnect, CurveHasPositiveTraceConvention) {
    const RiccatiEq eq(Expr(1.0), Expr(0.0), Expr(1.0), {0.0, 1.0});
    const ConnectPath p = solve_connect(eq, eq, ConnectState{-1.0, 0.0, 0.0, -1.0}, 0.0, 1.0);
    EXPECT_GT(p.curve().at(0.0).trace(), 0.0);
}
