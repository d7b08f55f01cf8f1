// The Hovy family dy/dt = -n/t + (1 + n/t) y - y² solved three ways: the
// classifier's plan (reduction by y = 1), the closed form with the upper
// incomplete gamma function, and the oracle.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rlie/rlie.hpp"

using namespace rlie;

int main(int argc, char** argv) {
    const double n = argc > 1 ? std::atof(argv[1]) : 2.0;
    const double t0 = 0.5, t1 = 5.0, y0 = 2.0;
    const Fixture f = hovy(n, {t0, t1});
    const Grid grid = f.eq.grid();

    const Classification c = classify(f.eq, grid);
    std::printf("n = %g: %s, constant solution %g (%s)\n", n, case_name(c.kind), *c.evidence.value,
                c.evidence.note.c_str());
    const ReductionPlan plan = plan_for(f.eq, c, grid);
    std::printf("plan: %s\n", plan.method.c_str());
    for (const PlanStep& s : plan.steps) std::printf("  %-18s %s\n", step_kind_name(s.kind), s.description.c_str());

    std::vector<double> ts;
    for (int i = 0; i <= 9; ++i) ts.push_back(t0 + (t1 - t0) * i / 9.0);
    const double K = hovy_constant(n, t0, y0);
    const SolutionTrace planned = plan.solve(y0, t0, ts);
    const SolutionTrace closed = hovy_trace(n, K, ts);
    const SolutionTrace orc = oracle_integrate(f.eq, y0, t0, t1, {1e-12, 1e-14}, ts);
    std::printf("\nK = %.10g\n%6s %18s %18s %18s\n", K, "t", "plan", "closed form", "oracle");
    for (std::size_t i = 0; i < ts.size(); ++i)
        std::printf("%6.2f %18.12f %18.12f %18.12f\n", ts[i], planned.values[i].value(), closed.values[i].value(),
                    orc.values[i].value());
    std::printf("sup |plan - oracle| = %.3g, sup |closed - oracle| = %.3g\n", sup_distance(planned, orc),
                sup_distance(closed, orc));

    // (tⁿe⁻ᵗ, -1) solves the (D, M) system for the target D y'²
    const double D0 = std::exp(n * std::log(t0) - t0);
    const Ft2Result ft = ft2_system(f.eq, 0.0, 0.0, 1.0, D0, -1.0, t0, t1, {1e-12, 1e-14});
    double dev_d = 0.0, dev_m = 0.0;
    for (double t : ts) {
        dev_d = std::max(dev_d, std::fabs(ft.D.eval(t) - std::exp(n * std::log(t) - t)));
        dev_m = std::max(dev_m, std::fabs(ft.M.eval(t) + 1.0));
    }
    std::printf("\n(D, M) system: max |D - t^n e^-t| = %.3g, max |M + 1| = %.3g\n", dev_d, dev_m);
    return 0;
}
