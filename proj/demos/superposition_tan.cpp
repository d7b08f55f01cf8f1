// Three branches of tan for dy/dt = 1 + y² combine into further solutions
// without integrating anything; the oracle confirms each.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rlie/rlie.hpp"

using namespace rlie;

int main() {
    const RiccatiEq eq(Expr(1.0), Expr(0.0), Expr(1.0), {0.0, 3.0});
    std::vector<double> ts;
    for (int i = 0; i <= 120; ++i) ts.push_back(0.025 * i);
    auto branch = [&](double c) {
        std::vector<ExtReal> v;
        for (double t : ts) v.emplace_back(std::tan(t + c));
        return SolutionTrace::from_values(ts, v);
    };
    const SolutionTrace y1 = branch(0.0), y2 = branch(0.3), y3 = branch(0.7);

    std::printf("%8s %14s %16s %14s\n", "k", "shift c", "oracle chordal", "poles");
    for (double k : {0.0, 0.5, 1.0, -2.0, 10.0}) {
        const SolutionTrace y = superposition(y1, y2, y3, k);
        const SolutionTrace orc = oracle_integrate(eq, y.values.front(), 0.0, 3.0, {1e-12, 1e-14}, ts);
        int poles = 0;
        for (std::size_t i = 1; i < y.size(); ++i) {
            const ExtReal &a = y.values[i - 1], &b = y.values[i];
            if (b.is_infinite() || (a.is_finite() && a.value() > 1.0 && b.value() < -1.0)) ++poles;
        }
        std::printf("%8g %14.10f %16.3g %14d\n", k, std::atan(y.values.front().value()), sup_chordal(y, orc), poles);
    }
    const SolutionTrace far = superposition(y1, y2, y3, 0.0, true);
    std::printf("k -> infinity gives y2: %s\n", far.values[40] == y2.values[40] ? "yes" : "no");

    // the constant that reproduces a given fourth solution tan(t + 1)
    const double k = superposition_constant(std::tan(1.0), 0.0, std::tan(0.3), std::tan(0.7));
    const SolutionTrace y = superposition(y1, y2, y3, k);
    double dev = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) dev = std::max(dev, chordal_distance(y.values[i], std::tan(ts[i] + 1.0)));
    std::printf("tan(t + 1) from k = %.12g: max chordal deviation %.3g\n", k, dev);
    return 0;
}
