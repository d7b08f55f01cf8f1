// An Allen-Stein equation taken to constant coefficients: the scaling found
// by the detector, the same curve recovered from the connecting system, and
// a solution computed through the autonomous closed form.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rlie/rlie.hpp"

using namespace rlie;

int main() {
    const Expr t = Expr::t();
    const Expr b0 = 1.0 + t * t, b2 = exp(t);
    const double C = 0.5;
    const Fixture f = allen_stein(b0, b2, C, {0.0, 2.0});
    const Grid grid = f.eq.grid();
    std::printf("b0 = %s\nb1 = %s\nb2 = %s\n", f.eq.b0().render().c_str(), f.eq.b1().render().c_str(),
                f.eq.b2().render().c_str());

    const ConstancyCheck inv = ctu_check(f.eq, grid);
    std::printf("\ninvariant %.15g, spread %.2g over %zu points\n", inv.mean, inv.deviation, grid.points.size());

    const TuOutcome tu = tu_transform(f.eq, 1.0, inv.mean, 1.0, grid);
    const SL2Curve curve = scaling_curve(tu.G, f.eq.domain());
    const RiccatiEq out = transform(f.eq, curve);
    std::printf("y' = G y with G = %s\n", tu.G.render().c_str());
    std::printf("transformed minus D (1, C, 1): %.3g\n", coefficient_distance(out, tu.target.equation(f.eq.domain()), grid));

    // the connecting system started on the diagonal follows the same curve
    const RiccatiEq target = tu.target.equation(f.eq.domain());
    const double a0 = curve.at(0.0).alpha();
    const ConnectPath p = solve_connect(f.eq, target, ConnectState{a0, 0.0, 0.0, 1.0 / a0}, 0.0, 2.0, {1e-12, 1e-14});
    double gap = 0.0;
    for (std::size_t i = 0; i < p.times.size(); ++i) {
        const SL2 m = curve.at(p.times[i]);
        const auto& s = p.states[i];
        gap = std::max({gap, std::fabs(s.alpha - m.alpha()), std::fabs(s.beta), std::fabs(s.gamma),
                        std::fabs(s.delta - m.delta())});
    }
    std::printf("connecting system: %zu steps, max |det - 1| = %.3g, distance to the scaling %.3g\n", p.times.size(),
                p.max_det_drift, gap);

    std::vector<double> ts;
    for (int i = 0; i <= 8; ++i) ts.push_back(0.25 * i);
    const double y0 = 0.5;
    const SolutionTrace yp = solve_autonomous(1.0, C, 1.0, tu.target.D, mobius(curve.at(0.0), y0), 0.0, ts);
    const SolutionTrace orc = oracle_integrate(f.eq, y0, 0.0, 2.0, {1e-12, 1e-14}, ts);
    std::printf("\n%6s %22s %22s\n", "t", "via constant form", "oracle");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const ExtReal y = mobius(curve.at(ts[i]).inverse(), yp.values[i]);
        auto show = [](const ExtReal& v) { return v.is_finite() ? v.value() : INFINITY; };
        std::printf("%6.2f %22.14g %22.14g\n", ts[i], show(y), show(orc.values[i]));
    }
    return 0;
}
