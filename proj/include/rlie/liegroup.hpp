#pragma once

/**
 * @file liegroup.hpp
 * @brief The equation on SL(2,R) whose orbits give every Riccati solution,
 * and the linear system whose solutions connect two Riccati equations.
 */

#include <cmath>
#include <span>
#include <vector>

#include "rlie/algebra.hpp"
#include "rlie/ode.hpp"
#include "rlie/riccati.hpp"
#include "rlie/trace.hpp"

namespace rlie {

struct PathMeta {
    IntegrationStats steps;
    double max_det_drift = 0.0;  // |det - 1| before renormalization
};

struct GroupPath {
    std::vector<double> times;
    std::vector<SL2> mats;
    PathMeta meta;
};

namespace detail {

// Ȧ = a(t) A with a = ((b1/2, b0), (-b2, -b1/2)), A stored row-major.
inline Vec<4> ela_rhs(const std::array<Expr, 3>& b, double t, const Vec<4>& A) {
    const double b0 = b[0].eval(t), b1 = b[1].eval(t), b2 = b[2].eval(t);
    const double a11 = 0.5 * b1, a12 = b0, a21 = -b2, a22 = -0.5 * b1;
    return {a11 * A[0] + a12 * A[2], a11 * A[1] + a12 * A[3], a21 * A[0] + a22 * A[2], a21 * A[1] + a22 * A[3]};
}

}  // namespace detail

/**
 * Integrates Ȧ = a(t) A, A(t0) = I, a = -Σ b_j M_j, renormalizing A by
 * sqrt(det A) after every accepted step. With empty `out_times` every
 * accepted step is recorded; otherwise exactly the given times.
 */
inline GroupPath solve_eLA(const RiccatiEq& eq, double t0, double t1, const StepControl& ctrl = {},
                           std::vector<double> out_times = {}) {
    GroupPath path;
    const auto& b = eq.coeffs();
    const bool all_steps = out_times.empty();
    std::sort(out_times.begin(), out_times.end());
    if (t1 < t0) std::reverse(out_times.begin(), out_times.end());
    if (all_steps || out_times.front() == t0) {
        path.times.push_back(t0);
        path.mats.push_back(SL2::identity());
    }
    auto f = [&b](double t, const Vec<4>& A) { return detail::ela_rhs(b, t, A); };
    double last_t = t0;
    auto project = [&path, &last_t](Vec<4>& A) {
        const double det = A[0] * A[3] - A[1] * A[2];
        path.meta.max_det_drift = std::max(path.meta.max_det_drift, std::fabs(det - 1.0));
        if (!(det > 0.0)) throw IntegrationError("group path lost positive determinant", last_t);
        const double s = std::sqrt(det);
        for (double& x : A) x /= s;
        return true;
    };
    auto observer = [&](const DenseStep<4>& s, bool at_stop) {
        last_t = s.t1();
        const bool final_out = !all_steps && s.t1() == t1 && out_times.back() == t1;
        if (all_steps || at_stop || final_out) {
            const Vec<4>& A = s.y1;
            path.times.push_back(s.t1());
            path.mats.push_back(SL2::normalized(A[0], A[1], A[2], A[3]));
        }
        return StepVerdict::Continue;
    };
    auto r = integrate_projected<4>(f, t0, t1, Vec<4>{1.0, 0.0, 0.0, 1.0}, ctrl, project, observer,
                                    std::span<const double>(out_times));
    path.meta.steps = r.stats;
    if (t1 < t0) {
        std::reverse(path.times.begin(), path.times.end());
        std::reverse(path.mats.begin(), path.mats.end());
    }
    return path;
}

/// y(t) = Φ(A(t), y0) along a group path.
inline SolutionTrace reconstruct(const GroupPath& path, const ExtReal& y0) {
    std::vector<ExtReal> ys;
    ys.reserve(path.mats.size());
    for (const SL2& m : path.mats) ys.push_back(mobius(m, y0));
    return SolutionTrace::from_values(path.times, std::move(ys));
}

/// A point (α, β, γ, δ) of the connecting system; not necessarily unimodular.
struct ConnectState {
    double alpha = 1.0, beta = 0.0, gamma = 0.0, delta = 1.0;

    double det() const { return alpha * delta - beta * gamma; }
    SL2 to_sl2() const { return SL2::normalized(alpha, beta, gamma, delta); }
};

struct ConnectPath {
    std::vector<double> times;
    std::vector<ConnectState> states;
    IntegrationStats steps;
    double max_det_drift = 0.0;  // max |det x(t) - det x(t0)|

    /// The path as a tabulated curve (requires det > 0 throughout). A and -A
    /// act alike; the sign is fixed so that the first matrix has trace >= 0.
    SL2Curve curve() const {
        std::vector<SL2> mats;
        mats.reserve(states.size());
        for (const auto& s : states) mats.push_back(s.to_sl2());
        if (!mats.empty() && mats.front().trace() < 0.0)
            for (auto& m : mats) m = -m;
        return SL2Curve::tabulated(times, mats);
    }
};

/**
 * Integrates the linear system Ā̇ = a'(t) Ā - Ā a(t) whose solutions map
 * solutions of `eq` (a) to solutions of `target` (a'). The determinant is a
 * first integral; it is monitored, not enforced.
 */
inline ConnectPath solve_connect(const RiccatiEq& eq, const RiccatiEq& target, const ConnectState& x0, double t0,
                                 double t1, const StepControl& ctrl = {}, std::vector<double> out_times = {}) {
    ConnectPath path;
    const auto& b = eq.coeffs();
    const auto& p = target.coeffs();
    auto f = [&b, &p](double t, const Vec<4>& x) -> Vec<4> {
        const double b0 = b[0].eval(t), b1 = b[1].eval(t), b2 = b[2].eval(t);
        const double p0 = p[0].eval(t), p1 = p[1].eval(t), p2 = p[2].eval(t);
        const double al = x[0], be = x[1], ga = x[2], de = x[3];
        const double dm = 0.5 * (p1 - b1), sm = 0.5 * (p1 + b1);
        return {dm * al + b2 * be + p0 * ga, -b0 * al + sm * be + p0 * de, -p2 * al - sm * ga + b2 * de,
                -p2 * be - b0 * ga - dm * de};
    };
    const double det0 = x0.det();
    const bool all_steps = out_times.empty();
    std::sort(out_times.begin(), out_times.end());
    if (t1 < t0) std::reverse(out_times.begin(), out_times.end());
    if (all_steps || out_times.front() == t0) {
        path.times.push_back(t0);
        path.states.push_back(x0);
    }
    auto observer = [&](const DenseStep<4>& s, bool at_stop) {
        const Vec<4>& x = s.y1;
        ConnectState cs{x[0], x[1], x[2], x[3]};
        path.max_det_drift = std::max(path.max_det_drift, std::fabs(cs.det() - det0));
        const bool final_out = !all_steps && s.t1() == t1 && out_times.back() == t1;
        if (all_steps || at_stop || final_out) {
            path.times.push_back(s.t1());
            path.states.push_back(cs);
        }
        return StepVerdict::Continue;
    };
    auto r = integrate<4>(f, t0, t1, Vec<4>{x0.alpha, x0.beta, x0.gamma, x0.delta}, ctrl, observer,
                          std::span<const double>(out_times));
    path.steps = r.stats;
    if (t1 < t0) {
        std::reverse(path.times.begin(), path.times.end());
        std::reverse(path.states.begin(), path.states.end());
    }
    return path;
}

}  // namespace rlie
