#pragma once

/**
 * @file oracle.hpp
 * @brief Reference integrator for Riccati equations on the compactified line.
 *
 * Integrates y while |y| <= 2 and w = -1/y otherwise (switching back when
 * |w| > 2). In the w chart the equation is again Riccati with coefficients
 * (b2, -b1, b0), so poles of y are ordinary points w = 0.
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rlie/ode.hpp"
#include "rlie/riccati.hpp"
#include "rlie/trace.hpp"

namespace rlie {

struct OracleStats {
    IntegrationStats steps;
    int chart_switches = 0;
    // largest |dw/dt - (dy/dt)/y²| at switch times: the two charts must
    // carry the same vector field where they overlap
    double max_switch_mismatch = 0.0;
};

/**
 * Integrates `eq` from t0 with y(t0) = y0 to t1 > t0.
 *
 * With empty `out_times` the trace holds t0 and every accepted step;
 * otherwise exactly the requested times (sorted, inside [t0, t1]). The
 * trace residual is the largest mid-step defect |ẏ - f(t, y)| of the dense
 * interpolant, measured in the active chart.
 */
inline SolutionTrace oracle_integrate(const RiccatiEq& eq, const ExtReal& y0, double t0, double t1,
                                      const StepControl& ctrl = {}, std::vector<double> out_times = {},
                                      OracleStats* stats = nullptr) {
    if (!(t1 > t0)) throw std::invalid_argument("oracle_integrate requires t1 > t0");
    std::sort(out_times.begin(), out_times.end());
    const bool all_steps = out_times.empty();
    if (!all_steps && (out_times.front() < t0 || out_times.back() > t1))
        throw std::invalid_argument("output time outside the integration span");

    const std::array<Expr, 3>& b = eq.coeffs();
    Chart chart = Chart::Direct;
    double u;  // y or w
    if (y0.is_infinite()) {
        chart = Chart::Inverted;
        u = 0.0;
    } else if (std::fabs(y0.value()) > kChartSwitch) {
        chart = Chart::Inverted;
        u = -1.0 / y0.value();
    } else {
        u = y0.value();
    }

    auto to_ext = [](Chart c, double v) -> ExtReal {
        if (c == Chart::Direct) return ExtReal(v);
        return v == 0.0 ? ExtReal::infinity() : ExtReal(-1.0 / v);
    };

    SolutionTrace out;
    OracleStats st;
    double max_defect = 0.0;
    std::size_t next_out = 0;
    if (all_steps || out_times.front() == t0) {
        out.push(t0, to_ext(chart, u), chart);
        if (!all_steps)
            while (next_out < out_times.size() && out_times[next_out] == t0) ++next_out;
    }

    double t = t0;
    StepControl c = ctrl;
    while (t < t1) {
        const Chart active = chart;
        auto f = [&b, active](double s, const Vec<1>& v) -> Vec<1> {
            const double b0 = b[0].eval(s), b1 = b[1].eval(s), b2 = b[2].eval(s);
            const double x = v[0];
            return active == Chart::Direct ? Vec<1>{b0 + (b1 + b2 * x) * x} : Vec<1>{b2 + (-b1 + b0 * x) * x};
        };
        bool switch_now = false;
        double last_h = c.h0;
        auto observer = [&](const DenseStep<1>& s, bool at_stop) {
            const double tm = s.t0 + 0.5 * s.h;
            const double defect = std::fabs(s.slope(tm)[0] - f(tm, s.value(tm))[0]);
            max_defect = std::max(max_defect, defect);
            last_h = std::fabs(s.h);
            const double v = s.y1[0];
            const bool final_out = !all_steps && s.t1() == t1 && out_times.back() == t1;
            if (all_steps || at_stop || final_out) out.push(s.t1(), to_ext(active, v), active);
            if (std::fabs(v) > kChartSwitch) {
                switch_now = true;
                return StepVerdict::Stop;
            }
            return StepVerdict::Continue;
        };
        std::span<const double> stops(out_times.data() + next_out, out_times.size() - next_out);
        IntegrationResult<1> r = integrate<1>(f, t, t1, Vec<1>{u}, c, observer, stops);
        st.steps.accepted += r.stats.accepted;
        st.steps.rejected += r.stats.rejected;
        st.steps.evaluations += r.stats.evaluations;
        t = r.t;
        u = r.y[0];
        while (next_out < out_times.size() && out_times[next_out] <= t) ++next_out;
        if (switch_now) {
            const double nu = -1.0 / u;
            const double b0 = b[0].eval(t), b1 = b[1].eval(t), b2 = b[2].eval(t);
            const double y = chart == Chart::Direct ? u : nu;
            const double w = chart == Chart::Direct ? nu : u;
            const double mismatch = std::fabs((b2 - b1 * w + b0 * w * w) - (b0 + b1 * y + b2 * y * y) / (y * y));
            st.max_switch_mismatch = std::max(st.max_switch_mismatch, mismatch);
            u = nu;
            chart = chart == Chart::Direct ? Chart::Inverted : Chart::Direct;
            ++st.chart_switches;
            c.h0 = last_h;
        } else if (!r.stopped_early) {
            break;
        }
    }
    out.residual = max_defect;
    if (stats) *stats = st;
    return out;
}

}  // namespace rlie
