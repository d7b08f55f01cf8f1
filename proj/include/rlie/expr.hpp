#pragma once

/**
 * @file expr.hpp
 * @brief Scalar expressions in one variable t with named constant parameters.
 *
 * An Expr is an immutable, shareable expression tree. It is produced by
 * parse() from text, or assembled with the arithmetic operators and the
 * elementary functions below. Derivatives are forward-mode: evaluating the
 * tree on Dual<T> seeds dt = 1 and reads the ε part back. derivative()
 * wraps a tree in a node that performs this on evaluation, so derived
 * quantities stay differentiable (nested duals give higher orders).
 *
 * Grammar accepted by parse():
 *
 *     expr  := term (("+"|"-") term)*
 *     term  := unary (("*"|"/") unary)*
 *     unary := "-" unary | power
 *     power := atom ("^" exponent)?
 *     atom  := number | ident | ident "(" expr ")" | "(" expr ")"
 *
 * The exponent must not depend on t. Functions: exp, ln, sqrt, sin, cos,
 * tan, abs, and diff (derivative with respect to t).
 */

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlie/dual.hpp"

namespace rlie {

/// Evaluation outside the domain of a subexpression (pole, ln of a
/// non-positive number, sqrt of a negative number, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class UnknownIdentifier : public ParseError {
public:
    UnknownIdentifier(std::string name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset), name_(std::move(name)) {}
    const std::string& identifier() const noexcept { return name_; }

private:
    std::string name_;
};

using Params = std::map<std::string, double, std::less<>>;

/// Value and first two derivatives of an opaque function of t.
using Jet = std::array<double, 3>;
using JetFn = std::function<Jet(double)>;

enum class Func { Exp, Ln, Sqrt, Sin, Cos, Tan, Abs };

namespace detail {

enum class Kind { Const, Var, Param, Neg, Add, Sub, Mul, Div, Pow, Call, Diff, Closure };

struct Node {
    Kind kind{};
    double value = 0.0;  // Const and Param
    std::string name;    // Param and Closure
    Func fn{};           // Call
    std::shared_ptr<const Node> lhs, rhs;
    JetFn jet;           // Closure
};

using NodePtr = std::shared_ptr<const Node>;

inline constexpr int kMaxDualDepth = 4;

struct EvalContext {
    bool nonsmooth = false;
};

inline const char* func_name(Func f) {
    switch (f) {
        case Func::Exp: return "exp";
        case Func::Ln: return "ln";
        case Func::Sqrt: return "sqrt";
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Tan: return "tan";
        case Func::Abs: return "abs";
    }
    return "?";
}

// f^{(k)} of a closure, lifted to nested duals by the chain rule.
template <class T>
T lift_jet(const JetFn& f, int order, const T& x) {
    if constexpr (std::is_same_v<T, double>) {
        if (order > 2) throw DomainError("closure derivative order exceeds available jet");
        return f(x)[static_cast<std::size_t>(order)];
    } else {
        using U = decltype(x.v);
        return T{lift_jet<U>(f, order, x.v), lift_jet<U>(f, order + 1, x.v) * x.d};
    }
}

template <class T>
T evaluate(const Node& n, const T& t, EvalContext& ctx);

template <class T>
T eval_call(Func fn, const T& x, EvalContext& ctx) {
    using std::abs;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using std::tan;
    const double p = primal(x);
    switch (fn) {
        case Func::Exp: return exp(x);
        case Func::Ln:
            if (!(p > 0.0)) throw DomainError("ln of non-positive argument");
            return log(x);
        case Func::Sqrt:
            if (p < 0.0) throw DomainError("sqrt of negative argument");
            if constexpr (!std::is_same_v<T, double>) {
                if (p == 0.0) throw DomainError("sqrt is not differentiable at 0");
            }
            return sqrt(x);
        case Func::Sin: return sin(x);
        case Func::Cos: return cos(x);
        case Func::Tan:
            if (cos(p) == 0.0) throw DomainError("tan at a pole");
            return tan(x);
        case Func::Abs:
            if constexpr (std::is_same_v<T, double>) {
                return std::abs(x);
            } else {
                // sign(x) away from 0; at the kink, the right-derivative
                double s;
                if (p > 0.0) {
                    s = 1.0;
                } else if (p < 0.0) {
                    s = -1.0;
                } else {
                    ctx.nonsmooth = true;
                    s = primal(x.d) >= 0.0 ? 1.0 : -1.0;
                }
                return s * x;
            }
    }
    throw std::logic_error("unhandled function");
}

template <class T>
T eval_pow(const T& base, double p) {
    using std::pow;
    const double b = primal(base);
    const bool integral = std::floor(p) == p;
    if (!integral && b < 0.0) throw DomainError("non-integer power of a negative base");
    if (b == 0.0 && p < 0.0) throw DomainError("division by zero in power");
    if constexpr (!std::is_same_v<T, double>) {
        if (b == 0.0 && p > 0.0 && p < 1.0) throw DomainError("power is not differentiable at 0");
    }
    if (p == 0.0) return T(1.0);
    return pow(base, p);
}

template <class T>
T evaluate(const Node& n, const T& t, EvalContext& ctx) {
    switch (n.kind) {
        case Kind::Const:
        case Kind::Param: return T(n.value);
        case Kind::Var: return t;
        case Kind::Neg: return -evaluate(*n.lhs, t, ctx);
        case Kind::Add: return evaluate(*n.lhs, t, ctx) + evaluate(*n.rhs, t, ctx);
        case Kind::Sub: return evaluate(*n.lhs, t, ctx) - evaluate(*n.rhs, t, ctx);
        case Kind::Mul: return evaluate(*n.lhs, t, ctx) * evaluate(*n.rhs, t, ctx);
        case Kind::Div: {
            T num = evaluate(*n.lhs, t, ctx);
            T den = evaluate(*n.rhs, t, ctx);
            if (primal(den) == 0.0) throw DomainError("division by zero");
            return num / den;
        }
        case Kind::Pow: {
            EvalContext exponent_ctx;
            const double p = evaluate(*n.rhs, 0.0, exponent_ctx);
            return eval_pow(evaluate(*n.lhs, t, ctx), p);
        }
        case Kind::Call: return eval_call(n.fn, evaluate(*n.lhs, t, ctx), ctx);
        case Kind::Diff:
            if constexpr (dual_depth<T>::value < kMaxDualDepth) {
                Dual<T> r = evaluate(*n.lhs, Dual<T>{t, T(1.0)}, ctx);
                return r.d;
            } else {
                throw DomainError("derivative nesting too deep");
            }
        case Kind::Closure: return lift_jet(n.jet, 0, t);
    }
    throw std::logic_error("unhandled node kind");
}

inline bool depends_on_t(const Node& n) {
    switch (n.kind) {
        case Kind::Var:
        case Kind::Closure: return true;
        case Kind::Const:
        case Kind::Param: return false;
        case Kind::Pow: return depends_on_t(*n.lhs);
        default:
            return (n.lhs && depends_on_t(*n.lhs)) || (n.rhs && depends_on_t(*n.rhs));
    }
}

inline bool equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Kind::Const: return a.value == b.value;
        case Kind::Var: return true;
        case Kind::Param: return a.name == b.name && a.value == b.value;
        case Kind::Closure: return &a == &b;
        case Kind::Call:
            if (a.fn != b.fn) return false;
            break;
        default: break;
    }
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs)) return false;
    if (static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs)) return false;
    if (a.lhs && !equal(*a.lhs, *b.lhs)) return false;
    if (a.rhs && !equal(*a.rhs, *b.rhs)) return false;
    return true;
}

inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.
inline int precedence(const Node& n) {
    switch (n.kind) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        case Kind::Const: return n.value < 0.0 ? 3 : 5;
        default: return 5;
    }
}

inline std::string render(const Node& n);

inline std::string wrap(const Node& n, int min_prec) {
    std::string s = render(n);
    return precedence(n) < min_prec ? "(" + s + ")" : s;
}

inline std::string render(const Node& n) {
    switch (n.kind) {
        case Kind::Const: return format_number(n.value);
        case Kind::Var: return "t";
        case Kind::Param: return n.name;
        case Kind::Closure: return n.name;
        case Kind::Neg: return "-" + wrap(*n.lhs, 3);
        case Kind::Add: return render(*n.lhs) + " + " + wrap(*n.rhs, 2);
        case Kind::Sub: return render(*n.lhs) + " - " + wrap(*n.rhs, 2);
        case Kind::Mul: return wrap(*n.lhs, 2) + "*" + wrap(*n.rhs, 3);
        case Kind::Div: return wrap(*n.lhs, 2) + "/" + wrap(*n.rhs, 3);
        case Kind::Pow: return wrap(*n.lhs, 5) + "^" + wrap(*n.rhs, 5);
        case Kind::Call: return std::string(func_name(n.fn)) + "(" + render(*n.lhs) + ")";
        case Kind::Diff: return "diff(" + render(*n.lhs) + ")";
    }
    return "?";
}

inline NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

inline NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Const;
    n->value = v;
    return n;
}

}  // namespace detail

/// Result of a derivative evaluation; `nonsmooth` is set when an abs() kink
/// was hit and the right-derivative was returned.
struct DerivResult {
    double value;
    bool nonsmooth;
};

class Expr {
public:
    Expr() : node_(detail::make_const(0.0)) {}
    Expr(double c) : node_(detail::make_const(c)) {}  // NOLINT: constants convert implicitly

    static Expr t() { return Expr(detail::make(detail::Kind::Var)); }

    static Expr param(std::string name, double value) {
        auto n = std::make_shared<detail::Node>();
        n->kind = detail::Kind::Param;
        n->name = std::move(name);
        n->value = value;
        return Expr(std::move(n));
    }

    /// Opaque function of t given by its value and first two derivatives.
    /// Renders as `name`, so it does not survive a round trip through text.
    static Expr closure(std::string name, JetFn f) {
        auto n = std::make_shared<detail::Node>();
        n->kind = detail::Kind::Closure;
        n->name = std::move(name);
        n->jet = std::move(f);
        return Expr(std::move(n));
    }

    double eval(double t) const {
        detail::EvalContext ctx;
        double v = detail::evaluate(*node_, t, ctx);
        if (!std::isfinite(v)) throw DomainError("non-finite value at t = " + detail::format_number(t));
        return v;
    }
    double operator()(double t) const { return eval(t); }

    /// d/dt at t by forward-mode dual numbers.
    double deriv(double t) const { return deriv_checked(t).value; }

    DerivResult deriv_checked(double t) const {
        detail::EvalContext ctx;
        Dual<double> r = detail::evaluate(*node_, Dual<double>{t, 1.0}, ctx);
        if (!std::isfinite(r.v) || !std::isfinite(r.d))
            throw DomainError("non-finite derivative at t = " + detail::format_number(t));
        return {r.d, ctx.nonsmooth};
    }

    /// Generic evaluation on double or nested duals.
    template <class T>
    T evaluate(const T& t) const {
        detail::EvalContext ctx;
        return detail::evaluate(*node_, t, ctx);
    }

    /// The expression d/dt of this one (evaluated by nested duals).
    Expr derivative() const {
        if (!depends_on_t()) return Expr(0.0);
        return Expr(detail::make(detail::Kind::Diff, node_));
    }

    bool depends_on_t() const { return detail::depends_on_t(*node_); }

    /// The literal value when this is a bare constant.
    std::optional<double> constant_value() const {
        if (node_->kind == detail::Kind::Const || node_->kind == detail::Kind::Param) return node_->value;
        return std::nullopt;
    }

    std::string render() const { return detail::render(*node_); }

    friend bool structurally_equal(const Expr& a, const Expr& b) { return detail::equal(*a.node_, *b.node_); }

    const detail::Node& node() const { return *node_; }
    const detail::NodePtr& node_ptr() const { return node_; }
    explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

private:
    detail::NodePtr node_;
};

namespace detail {

inline bool is_literal(const Expr& e, double v) {
    const Node& n = e.node();
    return n.kind == Kind::Const && n.value == v;
}

inline bool is_literal(const Expr& e) { return e.node().kind == Kind::Const; }

}  // namespace detail

// Builders. Literal constants are folded; parameters and t are kept as is.

inline Expr operator-(const Expr& a) {
    if (detail::is_literal(a)) return Expr(-a.node().value);
    return Expr(detail::make(detail::Kind::Neg, a.node_ptr()));
}
inline Expr operator+(const Expr& a, const Expr& b) {
    if (detail::is_literal(a) && detail::is_literal(b)) return Expr(a.node().value + b.node().value);
    if (detail::is_literal(a, 0.0)) return b;
    if (detail::is_literal(b, 0.0)) return a;
    if (detail::is_literal(b) && b.node().value < 0.0)
        return Expr(detail::make(detail::Kind::Sub, a.node_ptr(), detail::make_const(-b.node().value)));
    return Expr(detail::make(detail::Kind::Add, a.node_ptr(), b.node_ptr()));
}
inline Expr operator-(const Expr& a, const Expr& b) {
    if (detail::is_literal(a) && detail::is_literal(b)) return Expr(a.node().value - b.node().value);
    if (detail::is_literal(b, 0.0)) return a;
    if (detail::is_literal(a, 0.0)) return -b;
    return Expr(detail::make(detail::Kind::Sub, a.node_ptr(), b.node_ptr()));
}
inline Expr operator*(const Expr& a, const Expr& b) {
    if (detail::is_literal(a) && detail::is_literal(b)) return Expr(a.node().value * b.node().value);
    if (detail::is_literal(a, 0.0) || detail::is_literal(b, 0.0)) return Expr(0.0);
    if (detail::is_literal(a, 1.0)) return b;
    if (detail::is_literal(b, 1.0)) return a;
    return Expr(detail::make(detail::Kind::Mul, a.node_ptr(), b.node_ptr()));
}
inline Expr operator/(const Expr& a, const Expr& b) {
    if (detail::is_literal(a) && detail::is_literal(b) && b.node().value != 0.0)
        return Expr(a.node().value / b.node().value);
    if (detail::is_literal(b, 1.0)) return a;
    return Expr(detail::make(detail::Kind::Div, a.node_ptr(), b.node_ptr()));
}

/// Power with a t-independent exponent.
inline Expr pow(const Expr& base, const Expr& exponent) {
    if (exponent.depends_on_t()) throw std::invalid_argument("exponent must not depend on t");
    if (detail::is_literal(exponent, 1.0)) return base;
    return Expr(detail::make(detail::Kind::Pow, base.node_ptr(), exponent.node_ptr()));
}

inline Expr call(Func f, const Expr& arg) {
    auto n = std::make_shared<detail::Node>();
    n->kind = detail::Kind::Call;
    n->fn = f;
    n->lhs = arg.node_ptr();
    return Expr(std::move(n));
}
inline Expr exp(const Expr& x) { return call(Func::Exp, x); }
inline Expr ln(const Expr& x) { return call(Func::Ln, x); }
inline Expr sqrt(const Expr& x) { return call(Func::Sqrt, x); }
inline Expr sin(const Expr& x) { return call(Func::Sin, x); }
inline Expr cos(const Expr& x) { return call(Func::Cos, x); }
inline Expr tan(const Expr& x) { return call(Func::Tan, x); }
inline Expr abs(const Expr& x) { return call(Func::Abs, x); }

namespace detail {

class Parser {
public:
    Parser(std::string_view src, const Params& params) : src_(src), params_(params) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view src_;
    const Params& params_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' before end of input", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    Expr expr() {
        Expr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = Expr(make(Kind::Add, lhs.node_ptr(), term().node_ptr()));
            } else if (accept('-')) {
                lhs = Expr(make(Kind::Sub, lhs.node_ptr(), term().node_ptr()));
            } else {
                return lhs;
            }
        }
    }

    Expr term() {
        Expr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = Expr(make(Kind::Mul, lhs.node_ptr(), unary().node_ptr()));
            } else if (accept('/')) {
                lhs = Expr(make(Kind::Div, lhs.node_ptr(), unary().node_ptr()));
            } else {
                return lhs;
            }
        }
    }

    Expr unary() {
        if (accept('-')) return Expr(make(Kind::Neg, unary().node_ptr()));
        return power();
    }

    Expr power() {
        Expr base = atom();
        skip_ws();
        const std::size_t at = pos_;
        if (accept('^')) {
            Expr exponent = unary();
            if (exponent.depends_on_t()) throw ParseError("exponent must not depend on t", at);
            return Expr(make(Kind::Pow, base.node_ptr(), exponent.node_ptr()));
        }
        return base;
    }

    Expr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Expr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        if (text == ".") throw ParseError("malformed number", start);
        return Expr(std::stod(text));
    }

    Expr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::map<std::string, Func, std::less<>> funcs = {
                {"exp", Func::Exp}, {"ln", Func::Ln},   {"sqrt", Func::Sqrt}, {"sin", Func::Sin},
                {"cos", Func::Cos}, {"tan", Func::Tan}, {"abs", Func::Abs}};
            ++pos_;
            Expr arg = expr();
            expect(')');
            if (name == "diff") return Expr(make(Kind::Diff, arg.node_ptr()));
            auto it = funcs.find(name);
            if (it == funcs.end()) throw UnknownIdentifier(name, start);
            return call(it->second, arg);
        }
        if (name == "t") return Expr::t();
        auto it = params_.find(name);
        if (it == params_.end()) throw UnknownIdentifier(name, start);
        return Expr::param(name, it->second);
    }
};

}  // namespace detail

/// Parses `src` against the grammar above; free names other than t must
/// appear in `params`.
inline Expr parse(std::string_view src, const Params& params = {}) {
    return detail::Parser(src, params).parse();
}

/// Strictly increasing sample times with the tolerance used by constancy
/// tests run on them.
struct Grid {
    std::vector<double> points;
    double tolerance = 1e-8;

    Grid() = default;
    Grid(std::vector<double> pts, double tol) : points(std::move(pts)), tolerance(tol) { validate(); }

    void validate() const {
        if (points.size() < 8) throw std::invalid_argument("grid needs at least 8 points");
        if (!(tolerance > 0.0)) throw std::invalid_argument("grid tolerance must be positive");
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!std::isfinite(points[i])) throw std::invalid_argument("grid point is not finite");
            if (i > 0 && !(points[i] > points[i - 1]))
                throw std::invalid_argument("grid points must be strictly increasing");
        }
    }

    /// Chebyshev nodes of the first kind on the open interval (lo, hi).
    static Grid chebyshev(double lo, double hi, std::size_t n = 256, double tol = 1e-8) {
        if (!(hi > lo)) throw std::invalid_argument("empty grid interval");
        std::vector<double> pts(n);
        for (std::size_t k = 0; k < n; ++k) {
            double x = -std::cos(M_PI * (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(n)));
            pts[k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
        }
        return Grid(std::move(pts), tol);
    }

    static Grid uniform(double lo, double hi, std::size_t n, double tol = 1e-8) {
        if (!(hi > lo) || n < 2) throw std::invalid_argument("empty grid interval");
        std::vector<double> pts(n);
        for (std::size_t k = 0; k < n; ++k)
            pts[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
        return Grid(std::move(pts), tol);
    }
};

}  // namespace rlie
