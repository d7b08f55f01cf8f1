#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rlie/rlie.hpp"

using namespace rlie;

namespace {

const StepControl kTight{1e-12, 1e-14};

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

// Sign changes through infinity between consecutive samples.
int pole_passages(const SolutionTrace& s) {
    int n = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const ExtReal &a = s.values[i - 1], &b = s.values[i];
        if (b.is_infinite()) {
            ++n;
            continue;
        }
        if (a.is_infinite()) continue;
        if (a.value() > 1.0 && b.value() < -1.0) ++n;
        if (a.value() < -1.0 && b.value() > 1.0) ++n;
    }
    return n;
}

}  // namespace

TEST(SolveLinear, Examples) {
    const auto ts = linspace(0.0, 2.0, 9);
    const SolutionTrace a = solve_linear({Expr(1.0), Expr(0.0)}, 0.0, 0.0, ts);
    const SolutionTrace b = solve_linear({Expr(0.0), Expr(1.0)}, 1.0, 0.0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        EXPECT_NEAR(a.values[i].value(), ts[i], 1e-14);
        EXPECT_NEAR(b.values[i].value(), std::exp(ts[i]), 1e-13 * std::exp(ts[i]));
    }
}

TEST(SolveLinear, StartsInsideTheTimes) {
    // y' = t y + sin t from y(1) = 0.5, sampled on both sides of t0
    const LinearEq lin{parse("sin(t)"), Expr::t()};
    const RiccatiEq eq(lin.a, lin.b, Expr(0.0), {0.0, 2.0});
    const auto ts = linspace(0.0, 2.0, 21);
    const SolutionTrace s = solve_linear(lin, 0.5, 1.0, ts);
    const std::vector<double> fwd(ts.begin() + 10, ts.end());
    const SolutionTrace orc = oracle_integrate(eq, 0.5, 1.0, 2.0, kTight, fwd);
    for (std::size_t i = 0; i < fwd.size(); ++i) EXPECT_NEAR(s.values[10 + i].value(), orc.values[i].value(), 1e-8);
    // backward half against the time-reversed equation
    const RiccatiEq rev(-parse("sin(2 - t)"), -(2.0 - Expr::t()), Expr(0.0), {0.0, 2.0});
    const SolutionTrace back = oracle_integrate(rev, 0.5, 1.0, 2.0, kTight, linspace(1.0, 2.0, 11));
    for (int i = 0; i <= 10; ++i) EXPECT_NEAR(s.values[10 - i].value(), back.values[i].value(), 1e-8);
}

TEST(SolveLinear, IbragimovEndToEnd) {
    const Fixture f = ibragimov(2.0 + cos(Expr::t()), Expr(1.0), 3.0, {0.0, 10.0});
    auto lin = linearization_test(f.eq, f.eq.grid());
    ASSERT_TRUE(lin.has_value());
    const auto ts = linspace(0.0, 10.0, 101);
    const SL2 inv = lin->curve.inverse();
    for (double y0 : {0.0, 1.0, -2.0}) {
        const ExtReal x0 = mobius(lin->curve, y0);
        const SolutionTrace x = solve_linear(lin->linear, x0.value(), 0.0, ts);
        std::vector<ExtReal> back;
        for (const auto& v : x.values) back.push_back(mobius(inv, v));
        const SolutionTrace orc = oracle_integrate(f.eq, y0, 0.0, 10.0, kTight, ts);
        EXPECT_LE(sup_chordal(SolutionTrace::from_values(ts, back), orc), 1e-6) << y0;
    }
}

TEST(SolveAutonomous, Examples) {
    const auto ts = linspace(0.0, 2.0, 21);  // includes t = 1
    const SolutionTrace a = solve_autonomous(0.0, 0.0, 1.0, Expr(1.0), 1.0, 0.0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (i == 10) {
            EXPECT_TRUE(a.values[i].is_infinite());
        } else {
            EXPECT_NEAR(a.values[i].value(), 1.0 / (1.0 - ts[i]), 1e-12 * (1.0 + std::fabs(a.values[i].value())));
        }
    }
    const SolutionTrace b = solve_autonomous(1.0, 0.0, 1.0, Expr(1.0), 0.0, 0.0, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_LE(chordal_distance(b.values[i], std::tan(ts[i])), 1e-13);
    const SolutionTrace c = solve_autonomous(-2.0, 3.0, -1.0, Expr(1.0), 1.0, 0.0, ts);
    for (const auto& v : c.values) EXPECT_NEAR(v.value(), 1.0, 1e-14);
    // infinity is an ordinary starting point: 1/(1 - t) started at t = 1
    const SolutionTrace d = solve_autonomous(0.0, 0.0, 1.0, Expr(1.0), ExtReal::infinity(), 1.0, linspace(1.0, 2.0, 3));
    EXPECT_TRUE(d.values[0].is_infinite());
    EXPECT_NEAR(d.values[2].value(), -1.0, 1e-14);
}

TEST(SolveAutonomous, DiscriminantClassification) {
    EXPECT_EQ(classify_discriminant(-2.0, 3.0, -1.0), Discriminant::Positive);
    EXPECT_EQ(classify_discriminant(1.0, 2.0, 1.0), Discriminant::Zero);
    EXPECT_EQ(classify_discriminant(1.0, 0.0, 1.0), Discriminant::Negative);
    EXPECT_EQ(classify_discriminant(1.0, 2.0 + 1e-14, 1.0), Discriminant::Zero);
}

TEST(SolveAutonomous, RandomDrawsMatchOracle) {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> u(-1.5, 1.5), uw(0.5, 2.0);
    const auto ts = linspace(0.0, 6.0, 241);
    int poles = 0;
    for (int i = 0; i < 30; ++i) {
        double c0 = u(rng), c1 = u(rng), c2 = u(rng);
        if (i % 3 == 1) c0 = c1 * c1 / (4.0 * c2);  // Δ = 0
        if (i % 3 == 2 && c1 * c1 - 4.0 * c0 * c2 >= 0.0) c0 = -c0 + (c2 > 0 ? 1.0 : -1.0) * (c1 * c1 / (4.0 * std::fabs(c2)) + 0.5);
        const Discriminant want = i % 3 == 0 ? classify_discriminant(c0, c1, c2)
                                             : (i % 3 == 1 ? Discriminant::Zero : Discriminant::Negative);
        ASSERT_EQ(classify_discriminant(c0, c1, c2), want) << i;
        const Expr D = 1.0 + 0.5 * sin(uw(rng) * Expr::t());
        const ExtReal y0 = i % 7 == 0 ? ExtReal::infinity() : ExtReal(u(rng));
        const SolutionTrace s = solve_autonomous(c0, c1, c2, D, y0, 0.0, ts, QuadOptions{1e-13, 1e-13, 2000});
        const RiccatiEq eq(D * c0, D * c1, D * c2, {0.0, 6.0});
        const SolutionTrace orc = oracle_integrate(eq, y0, 0.0, 6.0, kTight, ts);
        EXPECT_LE(sup_chordal(s, orc), 1e-6) << i;
        poles += pole_passages(orc);
    }
    EXPECT_GE(poles, 3);
}

TEST(Oracle, MinusYSquared) {
    const RiccatiEq eq(Expr(0.0), Expr(0.0), Expr(-1.0), {0.0, 1.0});
    const SolutionTrace s = oracle_integrate(eq, 1.0, 0.0, 1.0, kTight, {1.0});
    EXPECT_NEAR(s.values.back().value(), 0.5, 1e-9);
    const SolutionTrace d = oracle_integrate(eq, 1.0, 0.0, 1.0);
    EXPECT_NEAR(d.values.back().value(), 0.5, 1e-8);
    ASSERT_TRUE(d.residual.has_value());
}

TEST(Oracle, TanThroughThePole) {
    const RiccatiEq eq(Expr(1.0), Expr(0.0), Expr(1.0), {0.0, 2.0});
    OracleStats st;
    const SolutionTrace s = oracle_integrate(eq, 0.0, 0.0, 2.0, kTight, {M_PI / 2.0, 2.0}, &st);
    EXPECT_LE(chordal_distance(s.values[0], ExtReal::infinity()), 1e-9);
    EXPECT_NEAR(s.values[1].value(), std::tan(2.0), 1e-8);
    EXPECT_GE(st.chart_switches, 1);
    EXPECT_LE(st.max_switch_mismatch, 1e-9);
}

TEST(Oracle, HovyClosedForm) {
    const Fixture f = hovy(2.0, {0.5, 5.0});
    const auto ts = linspace(0.5, 5.0, 91);
    const SolutionTrace s = oracle_integrate(f.eq, 2.0, 0.5, 5.0, kTight, ts);
    EXPECT_LE(sup_distance(s, hovy_trace(2.0, hovy_constant(2.0, 0.5, 2.0), ts)), 1e-6);
}

// Halving the step of the underlying pair cuts the endpoint error by at
// least 2⁴ on a smooth stretch.
TEST(Oracle, OrderCheck) {
    const RiccatiEq eq(parse("cos(t)"), Expr(-0.5), Expr(-1.0), {0.0, 2.0});
    const double ref = oracle_integrate(eq, 0.2, 0.0, 2.0, {1e-13, 1e-15}, {2.0}).values.back().value();
    auto err = [&](double h) {
        StepControl c;
        c.fixed_step = true;
        c.h0 = h;
        return std::fabs(oracle_integrate(eq, 0.2, 0.0, 2.0, c, {2.0}).values.back().value() - ref);
    };
    EXPECT_GE(err(0.2) / err(0.1), 16.0);
}

TEST(Oracle, ChartsSwitchOnlyAtThresholds) {
    const RiccatiEq eq(Expr(1.0), parse("0.3*sin(t)"), Expr(1.0), {0.0, 8.0});
    OracleStats st;
    const SolutionTrace s = oracle_integrate(eq, 0.1, 0.0, 8.0, kTight, {}, &st);
    EXPECT_GE(st.chart_switches, 4);
    EXPECT_LE(st.max_switch_mismatch, 1e-9);
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s.charts[i] == s.charts[i - 1]) continue;
        // the last sample before a switch is where the active chart left [-2, 2]
        const double y = s.values[i - 1].is_infinite() ? INFINITY : std::fabs(s.values[i - 1].value());
        if (s.charts[i - 1] == Chart::Direct)
            EXPECT_GT(y, kChartSwitch) << s.times[i];
        else
            EXPECT_LT(y, 1.0 / kChartSwitch) << s.times[i];
        // continuity across the switch
        EXPECT_LE(chordal_distance(s.values[i - 1], s.values[i]), 0.5) << s.times[i];
    }
    s.validate();
}

TEST(HovyClosedForm, Examples) {
    const Expr zero = hovy_closed_form(0.0, 0.0);
    for (double t : {0.5, 1.0, 3.0}) EXPECT_NEAR(zero.eval(t), 0.0, 1e-14);
    const Fixture f = hovy(2.0, {0.5, 5.0});
    EXPECT_LE(solution_residual(f.eq, hovy_closed_form(2.0, 1.0), f.eq.grid()), 1e-9);
    const Expr one = hovy_closed_form(2.0, INFINITY);
    EXPECT_EQ(one.eval(2.0), 1.0);
    EXPECT_TRUE(std::isinf(hovy_constant(2.0, 0.5, 1.0)));
}

// The y' form: with D = tⁿe⁻ᵗ, M = -1 and c0 = 0, the map y' = (y - 1)/D
// (c2 = -1) carries solutions onto dy'/dt = -D y'², solved by
// y' = -1/(-K + Γ(n+1, t)).
TEST(HovyClosedForm, PrimedFormMatchesOracle) {
    const double n = 2.0, t0 = 0.5;
    const Fixture f = hovy(n, {0.5, 5.0});
    const auto ts = linspace(t0, 5.0, 46);
    for (double y0 : {2.0, 0.0, -1.0}) {
        const SolutionTrace orc = oracle_integrate(f.eq, y0, t0, 5.0, kTight, ts);
        auto D = [n](double t) { return std::exp(n * std::log(t) - t); };
        const double yp0 = (y0 - 1.0) / D(t0);
        const double K = upper_gamma(n + 1.0, t0) + 1.0 / yp0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double printed = -1.0 / (-K + upper_gamma(n + 1.0, ts[i]));
            EXPECT_LE(solution_distance(mobius(1.0 / D(ts[i]), -1.0 / D(ts[i]), 0.0, 1.0, orc.values[i]), printed),
                      1e-6 * (1.0 + std::fabs(printed)))
                << y0 << " " << ts[i];
        }
    }
}

// The (1, 0, 1) target with the same D solves to tan(τ + c), τ = ∫D.
TEST(HovyClosedForm, UnitTargetIsATangent) {
    const Expr D = parse("t^2*exp(-t)");
    const auto ts = linspace(0.5, 5.0, 10);
    const SolutionTrace s = solve_autonomous(1.0, 0.0, 1.0, D, 0.4, 0.5, ts);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double tau = upper_gamma(3.0, 0.5) - upper_gamma(3.0, ts[i]);
        EXPECT_LE(chordal_distance(s.values[i], std::tan(tau + std::atan(0.4))), 1e-12);
    }
}

TEST(TraceCsv, Format) {
    const SolutionTrace s = SolutionTrace::from_values({0.0, 0.5, 1.0}, {0.25, ExtReal::infinity(), -3.0});
    std::ostringstream os;
    s.write_csv(os);
    EXPECT_EQ(os.str(), "t,y,chart\n0,0.25,direct\n0.5,inf,inverted\n1,-3,inverted\n");
}
