// rlie: classify, solve and transform Riccati equations from JSON job specs.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "job.hpp"

namespace {

using namespace rlie;
using namespace rlie::cli;

struct Options {
    std::string input;
    std::string output;
    std::string csv;
    std::string name;
    double rtol = 1e-9;
    double atol = 1e-12;
    int grid_points = 256;
    double tol_const = 1e-8;
    std::uint64_t seed = 1;
    bool seed_set = false;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

JobSpec load(const Options& o) {
    if (o.input.empty()) throw InputError("--input is required");
    std::ifstream in(o.input);
    if (!in) throw InputError("cannot open " + o.input);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("invalid JSON: ") + e.what());
    }
    return read_job(j);
}

void emit(const Options& o, const json& report) {
    if (o.output.empty()) {
        write_json(std::cout, report);
        std::cout << '\n';
        return;
    }
    std::ofstream out(o.output);
    if (!out) throw InputError("cannot write " + o.output);
    write_json(out, report);
    out << '\n';
}

StepControl step_control(const Options& o) {
    StepControl c;
    c.rtol = o.rtol;
    c.atol = o.atol;
    return c;
}

Grid grid_for(const RiccatiEq& eq, const Options& o) {
    return Grid::chebyshev(eq.domain().lo, eq.domain().hi, static_cast<std::size_t>(o.grid_points), o.tol_const);
}

std::vector<double> sample_times(const JobSpec& s) {
    const auto span = s.t_span ? *s.t_span : std::array<double, 2>{s.equation.domain.lo, s.equation.domain.hi};
    std::vector<double> ts;
    for (int i = 0; i < s.samples; ++i) ts.push_back(span[0] + (span[1] - span[0]) * i / (s.samples - 1));
    ts.back() = span[1];
    return ts;
}

ClassifyOptions classify_options(const JobSpec& s) {
    ClassifyOptions co;
    if (s.particular) co.particular = parse(*s.particular, s.equation.params);
    return co;
}

json evidence_json(const Classification& c) {
    json ev = json::object();
    ev["residual"] = c.evidence.residual;
    switch (c.kind) {
        case Case::CTUIntegrable:
            ev["K"] = *c.evidence.value;
            break;
        case Case::LinearizableByConstant:
            ev["c"] = *c.evidence.value;
            ev["K"] = 1.0 / *c.evidence.value;
            break;
        case Case::Autonomous:
        case Case::Separable:
            ev["constants"] = {c.evidence.constants[0], c.evidence.constants[1], c.evidence.constants[2]};
            if (c.kind == Case::Separable) ev["factor"] = "b" + std::to_string(c.evidence.reference);
            break;
        default:
            break;
    }
    if (!c.evidence.note.empty()) ev["note"] = c.evidence.note;
    return ev;
}

json plan_json(const ReductionPlan& p) {
    json steps = json::array();
    for (const auto& s : p.steps) steps.push_back({{"kind", step_kind_name(s.kind)}, {"description", s.description}});
    return {{"method", p.method}, {"steps", steps}};
}

json trace_rows(const SolutionTrace& tr) {
    json rows = json::array();
    for (std::size_t i = 0; i < tr.size(); ++i)
        rows.push_back({tr.times[i], point_json(tr.values[i]), chart_name(tr.charts[i])});
    return rows;
}

int cmd_classify(const Options& o) {
    const JobSpec s = load(o);
    const RiccatiEq eq = s.equation.build();
    const Grid g = grid_for(eq, o);
    const ClassifyOptions co = classify_options(s);
    const Classification c = classify(eq, g, co);
    const ReductionPlan plan = plan_for(eq, c, g, co, step_control(o));
    emit(o, {{"case", case_name(c.kind)}, {"evidence", evidence_json(c)}, {"suggested_plan", plan_json(plan)}});
    return 0;
}

int cmd_solve(const Options& o) {
    const JobSpec s = load(o);
    if (!s.y0) throw InputError("solve needs \"y0\"");
    const RiccatiEq eq = s.equation.build();
    const Grid g = grid_for(eq, o);
    const ClassifyOptions co = classify_options(s);
    const Classification c = classify(eq, g, co);
    const std::vector<double> ts = sample_times(s);
    const StepControl ctrl = step_control(o);
    ReductionPlan plan = plan_for(eq, c, g, co, ctrl);
    SolutionTrace tr;
    std::string note;
    try {
        tr = plan.solve(*s.y0, ts.front(), ts);
    } catch (const QuadratureError& e) {
        note = std::string("plan failed, oracle used: ") + e.what();
        plan = plan_for(eq, Classification{}, g, co, ctrl);
        tr = plan.solve(*s.y0, ts.front(), ts);
    }
    const SolutionTrace orc = oracle_integrate(eq, *s.y0, ts.front(), ts.back(), ctrl, ts);
    int poles = 0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
        const auto &a = tr.values[i - 1], &b = tr.values[i];
        if (b.is_infinite() && a.is_finite()) ++poles;
        else if (a.is_finite() && b.is_finite() && std::fabs(a.value()) > 1.0 && std::fabs(b.value()) > 1.0 &&
                 (a.value() > 0) != (b.value() > 0))
            ++poles;
    }
    json summary = {{"case", case_name(c.kind)},
                    {"method", plan.method},
                    {"samples", static_cast<int>(tr.size())},
                    {"oracle_error", sup_distance(tr, orc)},
                    {"oracle_chordal_error", sup_chordal(tr, orc)},
                    {"oracle_max_defect", orc.residual.value_or(0.0)},
                    {"pole_passages", poles}};
    if (!note.empty()) summary["note"] = note;
    if (!o.csv.empty()) {
        std::ofstream out(o.csv);
        if (!out) throw InputError("cannot write " + o.csv);
        tr.write_csv(out);
        summary["csv"] = o.csv;
    } else {
        summary["trace"] = trace_rows(tr);
    }
    emit(o, summary);
    return 0;
}

SL2Curve build_curve(const JobSpec& s, const Grid& g) {
    const CurveSpec& c = *s.curve;
    if (c.kind == "constant") {
        try {
            return SL2Curve::constant(SL2(c.matrix[0], c.matrix[1], c.matrix[2], c.matrix[3]));
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }
    try {
        return SL2Curve::analytic(parse(c.entries[0], c.params), parse(c.entries[1], c.params),
                                  parse(c.entries[2], c.params), parse(c.entries[3], c.params), {}, &g);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

int cmd_transform(const Options& o) {
    const JobSpec s = load(o);
    if (!s.curve) throw InputError("transform needs \"curve\"");
    const RiccatiEq eq = s.equation.build();
    const Grid g = grid_for(eq, o);
    const SL2Curve curve = build_curve(s, g);
    const RiccatiEq out = transform(eq, curve);
    json samples = json::array();
    const Grid probe = Grid::uniform(out.domain().lo, out.domain().hi, 9);
    for (double t : probe.points)
        samples.push_back({{"t", t}, {"b0", out.b0().eval(t)}, {"b1", out.b1().eval(t)}, {"b2", out.b2().eval(t)}});
    json params = json::object();
    for (const auto& [k, v] : s.equation.params) params[k] = v;
    json report = {{"equation",
                    {{"b0", out.b0().render()},
                     {"b1", out.b1().render()},
                     {"b2", out.b2().render()},
                     {"params", params},
                     {"domain", {out.domain().lo, out.domain().hi}}}},
                   {"samples", samples}};
    if (s.target) {
        const RiccatiEq tgt = s.target->build();
        report["target_max_deviation"] = coefficient_distance(out, tgt, g);
    }
    emit(o, report);
    return 0;
}

int cmd_connect(const Options& o) {
    const JobSpec s = load(o);
    if (!s.target) throw InputError("connect needs \"target\"");
    const RiccatiEq eq = s.equation.build();
    const RiccatiEq tgt = s.target->build();
    const auto x = s.x0.value_or(std::array<double, 4>{1.0, 0.0, 0.0, 1.0});
    const ConnectState x0{x[0], x[1], x[2], x[3]};
    const std::vector<double> ts = sample_times(s);
    const StepControl ctrl = step_control(o);
    const ConnectPath path = solve_connect(eq, tgt, x0, ts.front(), ts.back(), ctrl, ts);
    json report = {{"det0", x0.det()},
                   {"max_det_drift", path.max_det_drift},
                   {"steps", path.steps.accepted},
                   {"final", {path.states.back().alpha, path.states.back().beta, path.states.back().gamma,
                              path.states.back().delta}}};
    // push a probe solution of the source through the curve and compare
    // with the target's own solution
    if (x0.det() > 0.0) {
        const ExtReal y0 = s.y0.value_or(ExtReal(0.0));
        const SolutionTrace src = oracle_integrate(eq, y0, ts.front(), ts.back(), ctrl, ts);
        std::vector<ExtReal> pushed;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto& st = path.states[i];
            pushed.push_back(mobius(st.alpha, st.beta, st.gamma, st.delta, src.values[i]));
        }
        const SolutionTrace ptr = SolutionTrace::from_values(ts, pushed);
        const SolutionTrace ref = oracle_integrate(tgt, pushed.front(), ts.front(), ts.back(), ctrl, ts);
        report["probe_y0"] = point_json(y0);
        report["probe_chordal_error"] = sup_chordal(ptr, ref);
    }
    if (!o.csv.empty()) {
        std::ofstream out(o.csv);
        if (!out) throw InputError("cannot write " + o.csv);
        out << "t,alpha,beta,gamma,delta,det\n";
        for (std::size_t i = 0; i < path.times.size(); ++i) {
            const auto& st = path.states[i];
            out << rlie::detail::format_number(path.times[i]) << ',' << rlie::detail::format_number(st.alpha) << ','
                << rlie::detail::format_number(st.beta) << ',' << rlie::detail::format_number(st.gamma) << ','
                << rlie::detail::format_number(st.delta) << ',' << rlie::detail::format_number(st.det()) << '\n';
        }
        report["csv"] = o.csv;
    }
    emit(o, report);
    return 0;
}

int cmd_compare(const Options& o) {
    JobSpec s = load(o);
    const RiccatiEq eq = s.equation.build();
    const Grid g = grid_for(eq, o);
    const ClassifyOptions co = classify_options(s);
    const Classification c = classify(eq, g, co);
    const StepControl ctrl = step_control(o);
    const ReductionPlan plan = plan_for(eq, c, g, co, ctrl);
    const std::vector<double> ts = sample_times(s);
    const std::uint64_t seed = o.seed_set ? o.seed : s.seed.value_or(1);
    std::vector<ExtReal> y0s = s.y0_list;
    if (s.y0) y0s.insert(y0s.begin(), *s.y0);
    if (y0s.empty()) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int i = 0; i < 3; ++i) y0s.emplace_back(u(rng));
    }
    json rows = json::array();
    double worst = 0.0;
    for (const ExtReal& y0 : y0s) {
        const SolutionTrace a = plan.solve(y0, ts.front(), ts);
        const SolutionTrace b = oracle_integrate(eq, y0, ts.front(), ts.back(), ctrl, ts);
        const double e = sup_distance(a, b);
        worst = std::max(worst, e);
        rows.push_back({{"y0", point_json(y0)}, {"sup_error", e}, {"chordal_error", sup_chordal(a, b)}});
    }
    emit(o, {{"case", case_name(c.kind)}, {"method", plan.method}, {"seed", seed}, {"rows", rows}, {"max_error", worst}});
    return 0;
}

int cmd_fixtures(const Options& o) {
    const json all = fixture_specs();
    if (o.name.empty()) {
        emit(o, all);
        return 0;
    }
    if (!all.contains(o.name)) throw InputError("unknown fixture " + o.name);
    emit(o, all[o.name]);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classify, transform and solve Riccati equations"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&o](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input", o.input, "job spec (JSON)");
        if (needs_input) in->required();
        sub->add_option("--output", o.output, "report path (default stdout)");
        sub->add_option("--rtol", o.rtol, "relative tolerance");
        sub->add_option("--atol", o.atol, "absolute tolerance");
        sub->add_option("--grid-points", o.grid_points, "constancy grid size")->check(CLI::Range(8, 1 << 20));
        sub->add_option("--tol-const", o.tol_const, "constancy tolerance")->check(CLI::PositiveNumber);
        sub->add_option_function<std::uint64_t>("--seed", [&o](const std::uint64_t& v) {
            o.seed = v;
            o.seed_set = true;
        }, "seed for random probes");
    };
    auto* classify_cmd = app.add_subcommand("classify", "detect an integrable case");
    auto* solve_cmd = app.add_subcommand("solve", "solve through the reduction plan");
    auto* transform_cmd = app.add_subcommand("transform", "apply a curve in SL(2,R)");
    auto* connect_cmd = app.add_subcommand("connect", "integrate the connecting system");
    auto* compare_cmd = app.add_subcommand("compare", "plan solutions against the oracle");
    auto* fixtures_cmd = app.add_subcommand("fixtures", "print the fixture job specs");
    for (auto* sub : {classify_cmd, solve_cmd, transform_cmd, connect_cmd, compare_cmd}) add_common(sub, true);
    add_common(fixtures_cmd, false);
    solve_cmd->add_option("--csv", o.csv, "write the trace as CSV");
    connect_cmd->add_option("--csv", o.csv, "write the curve as CSV");
    fixtures_cmd->add_option("--name", o.name, "a single fixture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*classify_cmd) return cmd_classify(o);
        if (*solve_cmd) return cmd_solve(o);
        if (*transform_cmd) return cmd_transform(o);
        if (*connect_cmd) return cmd_connect(o);
        if (*compare_cmd) return cmd_compare(o);
        if (*fixtures_cmd) return cmd_fixtures(o);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const SignIncompatible& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const IntegrationError& e) {
        std::cerr << "integration failure: " << e.what() << '\n';
        return 3;
    } catch (const QuadratureError& e) {
        std::cerr << "quadrature failure: " << e.what() << '\n';
        return 3;
    } catch (const DegenerateTransform& e) {
        std::cerr << "degenerate transformation: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
