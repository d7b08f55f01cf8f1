#pragma once

/**
 * @file fixtures.hpp
 * @brief Named equation families with known integrability behaviour.
 */

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlie/expr.hpp"
#include "rlie/ode.hpp"
#include "rlie/riccati.hpp"

namespace rlie {

enum class Case {
    LinearAlready,
    InverseLinear,
    Autonomous,
    Separable,
    CTUIntegrable,
    LinearizableByConstant,
    FT2SpecialM,
    KnownParticularSolution,
    Unclassified
};

inline const char* case_name(Case c) {
    switch (c) {
        case Case::LinearAlready: return "LinearAlready";
        case Case::InverseLinear: return "InverseLinear";
        case Case::Autonomous: return "Autonomous";
        case Case::Separable: return "Separable";
        case Case::CTUIntegrable: return "CTUIntegrable";
        case Case::LinearizableByConstant: return "LinearizableByConstant";
        case Case::FT2SpecialM: return "FT2SpecialM";
        case Case::KnownParticularSolution: return "KnownParticularSolution";
        case Case::Unclassified: return "Unclassified";
    }
    return "?";
}

struct Fixture {
    std::string name;
    RiccatiEq eq;
    Case expected;
    std::optional<double> expected_value;  // K for CTUIntegrable, c for LinearizableByConstant
};

/// b1 = C sqrt(b0 b2) - ½(ḃ2/b2 - ḃ0/b0), b0 b2 > 0. The scaling
/// y' = sqrt(b2/b0) y gives sqrt(b0 b2)(1 + C y' + y'²).
inline Fixture allen_stein(const Expr& b0, const Expr& b2, double C, Interval domain) {
    Expr b1 = C * sqrt(b0 * b2) - 0.5 * (b2.derivative() / b2 - b0.derivative() / b0);
    return {"allen_stein", RiccatiEq(b0, std::move(b1), b2, domain), Case::CTUIntegrable, C};
}

/// b2 = b0 / (c v²) where v̇ = b1 v + k b0, v(t0) = v0 > 0. The scaling
/// y' = y / v gives the constant invariant -k sg(b0) sqrt(c).
/// Constant b0, b1 (b1 != 0) give v in closed form; otherwise v is integrated.
inline Fixture rao_ukidave(double c, double k, const Expr& b0, const Expr& b1, Interval domain, double v0 = 1.0,
                           const StepControl& ctrl = {1e-12, 1e-14}) {
    const double t0 = domain.lo;
    Expr v;
    auto cb0 = b0.constant_value();
    auto cb1 = b1.constant_value();
    if (!b0.depends_on_t() && !b1.depends_on_t() && cb0 && cb1 && *cb1 != 0.0) {
        const double r = k * *cb0 / *cb1;
        const Expr s = t0 == 0.0 ? Expr::t() : Expr::t() - t0;
        v = (v0 + r) * exp(*cb1 * s) - r;
    } else {
        auto rhs = [b0, b1, k](double t, const Vec<1>& x) { return Vec<1>{b1.eval(t) * x[0] + k * b0.eval(t)}; };
        auto flow = std::make_shared<const OdeClosure<1>>(rhs, t0, Vec<1>{v0}, domain.hi, ctrl);
        v = OdeClosure<1>::component(flow, 0, "v");
    }
    Expr b2 = b0 / (c * v * v);
    const double sg = b0.eval(0.5 * (domain.lo + domain.hi)) > 0.0 ? 1.0 : -1.0;
    return {"rao_ukidave", RiccatiEq(b0, b1, std::move(b2), domain), Case::CTUIntegrable, -k * sg * std::sqrt(c)};
}

/// (F, L + Ḟ/F, -K/F), invariant L/sqrt(K) for K > 0.
inline Fixture kovalevskaya(const Expr& F, double L, double K, Interval domain) {
    return {"kovalevskaya", RiccatiEq(F, L + F.derivative() / F, -K / F, domain), Case::CTUIntegrable,
            L / std::sqrt(K)};
}

/// (-c G², -(2 b G - Ġ/G), -1), invariant -2b/sqrt(c) for G > 0.
inline Fixture hong_xiang(const Expr& G, double b, double c, Interval domain) {
    return {"hong_xiang", RiccatiEq(-c * G * G, -(2.0 * b * G - G.derivative() / G), Expr(-1.0), domain),
            Case::CTUIntegrable, -2.0 * b / std::sqrt(c)};
}

/// dy/dt = -n/t + (1 + n/t) y - y², with the constant solution y = 1.
inline Fixture hovy(double n, Interval domain = {0.5, 5.0}) {
    Expr nt = Expr::param("n", n) / Expr::t();
    return {"hovy", RiccatiEq(-nt, 1.0 + nt, Expr(-1.0), domain), Case::LinearizableByConstant, 1.0};
}

/// (P, Q, k(Q - kP)), with the constant solution -1/k.
inline Fixture ibragimov(const Expr& P, const Expr& Q, double k, Interval domain) {
    return {"ibragimov", RiccatiEq(P, Q, k * (Q - k * P), domain), Case::LinearizableByConstant, -1.0 / k};
}

/// The fixtures with the parameter values used in the tests and by the CLI.
inline std::vector<Fixture> default_fixtures() {
    const Expr t = Expr::t();
    std::vector<Fixture> out;
    out.push_back(allen_stein(1.0 + t * t, exp(t), 0.5, {0.0, 2.0}));
    out.push_back(rao_ukidave(4.0, 1.0, Expr(1.0), Expr(1.0), {0.0, 2.0}));
    out.push_back(kovalevskaya(exp(t), 2.0, 4.0, {0.0, 1.0}));
    out.push_back(hong_xiang(exp(t), 1.0, 4.0, {0.0, 1.0}));
    out.push_back(hovy(2.0));
    out.push_back(ibragimov(2.0 + cos(t), Expr(1.0), 3.0, {0.0, 10.0}));
    return out;
}

}  // namespace rlie
