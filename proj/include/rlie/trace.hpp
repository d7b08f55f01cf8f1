#pragma once

/**
 * @file trace.hpp
 * @brief Sampled solutions on the compactified line.
 */

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlie/algebra.hpp"

namespace rlie {

/// Which coordinate a sample was computed in: y itself or w = -1/y.
enum class Chart { Direct, Inverted };

inline const char* chart_name(Chart c) { return c == Chart::Direct ? "direct" : "inverted"; }

inline constexpr double kChartSwitch = 2.0;

struct SolutionTrace {
    std::vector<double> times;
    std::vector<ExtReal> values;
    std::vector<Chart> charts;
    std::optional<double> residual;

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }

    void push(double t, const ExtReal& y, Chart c) {
        times.push_back(t);
        values.push_back(y);
        charts.push_back(c);
    }

    /// Builds a trace and assigns charts by the hysteresis rule: leave the
    /// direct chart when |y| > 2, return when |y| < 1/2.
    static SolutionTrace from_values(std::vector<double> ts, std::vector<ExtReal> ys) {
        if (ts.size() != ys.size()) throw std::invalid_argument("times and values differ in length");
        SolutionTrace out;
        out.times = std::move(ts);
        out.values = std::move(ys);
        Chart c = Chart::Direct;
        for (const ExtReal& y : out.values) {
            if (c == Chart::Direct && (y.is_infinite() || std::fabs(y.value()) > kChartSwitch)) c = Chart::Inverted;
            else if (c == Chart::Inverted && y.is_finite() && std::fabs(y.value()) < 1.0 / kChartSwitch)
                c = Chart::Direct;
            out.charts.push_back(c);
        }
        return out;
    }

    void validate() const {
        if (values.size() != times.size() || charts.size() != times.size())
            throw std::logic_error("trace columns differ in length");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1])) throw std::logic_error("trace times must increase");
    }

    /// CSV with header `t,y,chart`; infinity prints as `inf`.
    void write_csv(std::ostream& os) const {
        os << "t,y,chart\n";
        for (std::size_t i = 0; i < times.size(); ++i) {
            os << detail::format_number(times[i]) << ','
               << (values[i].is_finite() ? detail::format_number(values[i].value()) : std::string("inf")) << ','
               << chart_name(charts[i]) << '\n';
        }
    }
};

/// Largest pointwise solution_distance between two traces on the same times.
inline double sup_distance(const SolutionTrace& a, const SolutionTrace& b) {
    if (a.times != b.times) throw std::invalid_argument("traces are sampled on different times");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, solution_distance(a.values[i], b.values[i]));
    return m;
}

/// Largest pointwise chordal distance between two traces on the same times.
inline double sup_chordal(const SolutionTrace& a, const SolutionTrace& b) {
    if (a.times != b.times) throw std::invalid_argument("traces are sampled on different times");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, chordal_distance(a.values[i], b.values[i]));
    return m;
}

}  // namespace rlie
