#pragma once

// Job specifications for the command-line tool: JSON in, validated
// equations and options out, plus a JSON writer that prints every double
// with 17 significant digits.

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlie/rlie.hpp"

namespace rlie::cli {

using nlohmann::json;

/// Malformed or inconsistent input (exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EquationSpec {
    std::string b0, b1, b2;
    Params params;
    Interval domain;

    RiccatiEq build() const {
        return RiccatiEq(parse(b0, params), parse(b1, params), parse(b2, params), domain);
    }
};

struct CurveSpec {
    std::string kind;  // "constant" | "analytic"
    std::array<double, 4> matrix{1.0, 0.0, 0.0, 1.0};
    std::array<std::string, 4> entries;
    Params params;
};

struct JobSpec {
    EquationSpec equation;
    std::optional<ExtReal> y0;
    std::optional<std::array<double, 2>> t_span;
    std::optional<CurveSpec> curve;
    std::optional<EquationSpec> target;
    std::optional<std::array<double, 4>> x0;
    std::vector<ExtReal> y0_list;
    std::optional<std::string> particular;
    std::optional<std::uint64_t> seed;
    int samples = 201;
};

namespace detail {

inline ExtReal read_point(const json& j, const char* what) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return ExtReal::infinity();
        throw InputError(std::string(what) + ": expected a number or \"inf\"");
    }
    if (!j.is_number()) throw InputError(std::string(what) + ": expected a number or \"inf\"");
    return ExtReal(j.get<double>());
}

inline Params read_params(const json& j) {
    Params p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw InputError("params must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number()) throw InputError("parameter " + it.key() + " must be a number");
        p[it.key()] = it.value().get<double>();
    }
    return p;
}

inline std::array<double, 2> read_pair(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw InputError(std::string(what) + " must be [lo, hi]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::string read_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw InputError(std::string("missing expression \"") + key + "\"");
    return j[key].get<std::string>();
}

inline EquationSpec read_equation(const json& j, const EquationSpec* inherit) {
    if (!j.is_object()) throw InputError("equation must be an object");
    EquationSpec e;
    e.b0 = read_string(j, "b0");
    e.b1 = read_string(j, "b1");
    e.b2 = read_string(j, "b2");
    e.params = inherit ? inherit->params : Params{};
    for (const auto& [k, v] : read_params(j.value("params", json()))) e.params[k] = v;
    if (j.contains("domain")) {
        auto d = read_pair(j["domain"], "domain");
        e.domain = {d[0], d[1]};
    } else if (inherit) {
        e.domain = inherit->domain;
    } else {
        throw InputError("equation needs a domain");
    }
    if (!std::isfinite(e.domain.lo) || !std::isfinite(e.domain.hi) || e.domain.empty())
        throw InputError("domain must be a finite non-empty interval");
    // validate all expressions before any computation
    (void)parse(e.b0, e.params);
    (void)parse(e.b1, e.params);
    (void)parse(e.b2, e.params);
    return e;
}

}  // namespace detail

inline JobSpec read_job(const json& j) {
    if (!j.is_object()) throw InputError("job spec must be a JSON object");
    if (!j.contains("equation")) throw InputError("job spec needs an \"equation\"");
    JobSpec s;
    s.equation = detail::read_equation(j["equation"], nullptr);
    if (j.contains("y0")) s.y0 = detail::read_point(j["y0"], "y0");
    if (j.contains("t_span")) {
        s.t_span = detail::read_pair(j["t_span"], "t_span");
        const auto& sp = *s.t_span;
        if (!(sp[1] > sp[0])) throw InputError("t_span must be increasing");
        if (sp[0] < s.equation.domain.lo || sp[1] > s.equation.domain.hi)
            throw InputError("t_span must lie inside the equation domain");
    }
    if (j.contains("curve")) {
        const json& c = j["curve"];
        CurveSpec cs;
        cs.kind = c.value("kind", "");
        if (cs.kind == "constant") {
            const json& m = c.value("matrix", json());
            if (!m.is_array() || m.size() != 4) throw InputError("constant curve needs \"matrix\": [a, b, c, d]");
            for (std::size_t i = 0; i < 4; ++i) {
                if (!m[i].is_number()) throw InputError("matrix entries must be numbers");
                cs.matrix[i] = m[i].get<double>();
            }
        } else if (cs.kind == "analytic") {
            cs.params = s.equation.params;
            for (const auto& [k, v] : detail::read_params(c.value("params", json()))) cs.params[k] = v;
            const char* keys[] = {"alpha", "beta", "gamma", "delta"};
            for (std::size_t i = 0; i < 4; ++i) {
                cs.entries[i] = detail::read_string(c, keys[i]);
                (void)parse(cs.entries[i], cs.params);
            }
        } else {
            throw InputError("curve kind must be \"constant\" or \"analytic\"");
        }
        s.curve = cs;
    }
    if (j.contains("target")) s.target = detail::read_equation(j["target"], &s.equation);
    if (j.contains("x0")) {
        const json& x = j["x0"];
        if (!x.is_array() || x.size() != 4) throw InputError("x0 must be [alpha, beta, gamma, delta]");
        std::array<double, 4> v{};
        for (std::size_t i = 0; i < 4; ++i) {
            if (!x[i].is_number()) throw InputError("x0 entries must be numbers");
            v[i] = x[i].get<double>();
        }
        s.x0 = v;
    }
    if (j.contains("y0_list")) {
        if (!j["y0_list"].is_array()) throw InputError("y0_list must be an array");
        for (const json& v : j["y0_list"]) s.y0_list.push_back(detail::read_point(v, "y0_list"));
    }
    if (j.contains("particular")) {
        if (!j["particular"].is_string()) throw InputError("particular must be an expression string");
        s.particular = j["particular"].get<std::string>();
        (void)parse(*s.particular, s.equation.params);
    }
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("samples")) {
        s.samples = j["samples"].get<int>();
        if (s.samples < 2) throw InputError("samples must be at least 2");
    }
    return s;
}

inline json equation_json(const EquationSpec& e) {
    json p = json::object();
    for (const auto& [k, v] : e.params) p[k] = v;
    return {{"b0", e.b0}, {"b1", e.b1}, {"b2", e.b2}, {"params", p}, {"domain", {e.domain.lo, e.domain.hi}}};
}

inline json point_json(const ExtReal& y) { return y.is_finite() ? json(y.value()) : json("inf"); }

/// Writes JSON with every floating value at 17 significant digits.
inline void write_json(std::ostream& os, const json& j, int indent = 2, int level = 0) {
    const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * level), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad << json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent, level + 1);
            }
            os << '\n' << close << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            bool scalars = true;
            for (const auto& v : j) scalars = scalars && !v.is_structured();
            if (scalars) {
                os << '[';
                for (std::size_t i = 0; i < j.size(); ++i) {
                    if (i) os << ", ";
                    write_json(os, j[i], indent, level + 1);
                }
                os << ']';
                return;
            }
            os << "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ",\n";
                os << pad;
                write_json(os, j[i], indent, level + 1);
            }
            os << '\n' << close << ']';
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v)) os << rlie::detail::format_number(v);
            else os << "null";
            return;
        }
        default:
            os << j.dump();
    }
}

/// The fixture families as job specs with concrete parameter values.
inline json fixture_specs() {
    json out = json::object();
    auto eq = [](const char* b0, const char* b1, const char* b2, json params, double lo, double hi) {
        return json{{"b0", b0}, {"b1", b1}, {"b2", b2}, {"params", params}, {"domain", {lo, hi}}};
    };
    out["allen_stein"] = {
        {"equation", eq("1 + t^2", "C*sqrt((1 + t^2)*exp(t)) - 0.5*(diff(exp(t))/exp(t) - diff(1 + t^2)/(1 + t^2))",
                        "exp(t)", {{"C", 0.5}}, 0.0, 2.0)},
        {"y0", 0.5},
        {"t_span", {0.0, 2.0}},
        {"curve", {{"kind", "analytic"},
                   {"alpha", "(exp(t)/(1 + t^2))^0.25"},
                   {"beta", "0"},
                   {"gamma", "0"},
                   {"delta", "((1 + t^2)/exp(t))^0.25"}}},
        {"target", {{"b0", "sqrt((1 + t^2)*exp(t))"}, {"b1", "C*sqrt((1 + t^2)*exp(t))"}, {"b2", "sqrt((1 + t^2)*exp(t))"}}},
        {"x0", {1.0, 0.0, 0.0, 1.0}}};
    out["rao_ukidave"] = {{"equation", eq("1", "1", "1/(c*(2*exp(t) - 1)^2)", {{"c", 4.0}}, 0.0, 2.0)},
                          {"y0", 0.5},
                          {"t_span", {0.0, 2.0}}};
    out["kovalevskaya"] = {{"equation", eq("exp(t)", "L + diff(exp(t))/exp(t)", "-K/exp(t)", {{"L", 2.0}, {"K", 4.0}}, 0.0, 1.0)},
                           {"y0", 0.5},
                           {"t_span", {0.0, 1.0}}};
    out["hong_xiang"] = {{"equation", eq("-c*exp(t)^2", "-(2*b*exp(t) - diff(exp(t))/exp(t))", "-1",
                                         {{"b", 1.0}, {"c", 4.0}}, 0.0, 1.0)},
                         {"y0", 0.5},
                         {"t_span", {0.0, 1.0}}};
    out["hovy"] = {{"equation", eq("-n/t", "1 + n/t", "-1", {{"n", 2.0}}, 0.5, 5.0)},
                   {"y0", 2.0},
                   {"t_span", {0.5, 5.0}},
                   {"particular", "1"}};
    out["ibragimov"] = {{"equation", eq("2 + cos(t)", "1", "k*(1 - k*(2 + cos(t)))", {{"k", 3.0}}, 0.0, 10.0)},
                        {"y0", 0.0},
                        {"t_span", {0.0, 10.0}},
                        {"curve", {{"kind", "constant"}, {"matrix", {0.0, -1.0 / 3.0, 3.0, 1.0}}}}};
    return out;
}

}  // namespace rlie::cli
