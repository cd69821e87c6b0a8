#pragma once

// Scalar expressions in t and x for the problem data.
//
// Grammar (recursive descent, '^' right-associative and tighter than unary minus):
//   expr  := term (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' unary)?
//   atom  := number | 't' | 'x' | 'pi' | 'e' | name '(' expr (',' expr)* ')' | '(' expr ')'
// Functions: exp, ln, sin, cos, sqrt, abs (one argument) and pow (two).
// There is no implicit multiplication: "2t" is rejected.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prabhakar/errors.hpp"

namespace prabhakar::expr {

enum class Var { t, x };

enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };

enum class Func { exp, ln, sin, cos, sqrt, abs, pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind = Kind::number;
    double value = 0.0;
    Var var = Var::t;
    Func func = Func::exp;
    std::vector<NodePtr> args;
    std::size_t offset = 0;  // byte offset in the source text
};

inline const char* func_name(Func f) {
    switch (f) {
        case Func::exp: return "exp";
        case Func::ln: return "ln";
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
        case Func::pow: return "pow";
    }
    return "?";
}

namespace build {

inline NodePtr number(double v, std::size_t off = 0) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::number;
    n->value = v;
    n->offset = off;
    return n;
}

inline NodePtr variable(Var v, std::size_t off = 0) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::variable;
    n->var = v;
    n->offset = off;
    return n;
}

inline NodePtr node(Kind k, std::vector<NodePtr> args, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->args = std::move(args);
    n->offset = off;
    return n;
}

inline NodePtr call(Func f, std::vector<NodePtr> args, std::size_t off) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::call;
    n->func = f;
    n->args = std::move(args);
    n->offset = off;
    return n;
}

inline bool is_number(const NodePtr& n, double v) { return n->kind == Kind::number && n->value == v; }
inline bool is_number(const NodePtr& n) { return n->kind == Kind::number; }

// Simplifying constructors used by differentiation.

inline NodePtr neg(NodePtr a) {
    if (is_number(a)) return number(-a->value, a->offset);
    if (a->kind == Kind::negate) return a->args[0];
    return node(Kind::negate, {a}, a->offset);
}

inline NodePtr fold(Kind k, const NodePtr& a, const NodePtr& b, double v) {
    if (std::isfinite(v)) return number(v, a->offset);
    return node(k, {a, b}, a->offset);
}

inline NodePtr add(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0)) return b;
    if (is_number(b, 0.0)) return a;
    if (is_number(a) && is_number(b)) return fold(Kind::add, a, b, a->value + b->value);
    if (b->kind == Kind::negate) return node(Kind::sub, {a, b->args[0]}, a->offset);
    return node(Kind::add, {a, b}, a->offset);
}

inline NodePtr sub(NodePtr a, NodePtr b) {
    if (is_number(b, 0.0)) return a;
    if (is_number(a, 0.0)) return neg(b);
    if (is_number(a) && is_number(b)) return fold(Kind::sub, a, b, a->value - b->value);
    return node(Kind::sub, {a, b}, a->offset);
}

inline NodePtr mul(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0, a->offset);
    if (is_number(a, 1.0)) return b;
    if (is_number(b, 1.0)) return a;
    if (is_number(a, -1.0)) return neg(b);
    if (is_number(b, -1.0)) return neg(a);
    if (is_number(a) && is_number(b)) return fold(Kind::mul, a, b, a->value * b->value);
    if (is_number(b)) std::swap(a, b);
    return node(Kind::mul, {a, b}, a->offset);
}

inline NodePtr div(NodePtr a, NodePtr b) {
    if (is_number(a, 0.0) && !is_number(b, 0.0)) return number(0.0, a->offset);
    if (is_number(b, 1.0)) return a;
    if (is_number(a) && is_number(b) && b->value != 0.0) return fold(Kind::div, a, b, a->value / b->value);
    return node(Kind::div, {a, b}, a->offset);
}

inline NodePtr pow(NodePtr a, NodePtr b) {
    if (is_number(b, 0.0)) return number(1.0, a->offset);
    if (is_number(b, 1.0)) return a;
    return node(Kind::pow, {a, b}, a->offset);
}

}  // namespace build

/// Recursive-descent parser; see the grammar at the top of this file.
class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError(pos_, "expression (input is empty)");
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < s_.size()) throw ParseError(pos_, "operator or end of input");
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw ParseError(pos_, std::string("'") + c + "'");
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('+')) {
                lhs = build::node(Kind::add, {lhs, parse_term()}, at);
            } else if (accept('-')) {
                lhs = build::node(Kind::sub, {lhs, parse_term()}, at);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*')) {
                lhs = build::node(Kind::mul, {lhs, parse_unary()}, at);
            } else if (accept('/')) {
                lhs = build::node(Kind::div, {lhs, parse_unary()}, at);
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        const std::size_t at = pos_;
        if (accept('-')) return build::node(Kind::negate, {parse_unary()}, at);
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        const std::size_t at = pos_;
        if (accept('^')) return build::node(Kind::pow, {base, parse_unary()}, at);
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        const std::size_t at = pos_;
        if (pos_ >= s_.size()) throw ParseError(pos_, "number, variable, function or '('");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if (is_alpha(c)) {
            std::size_t end = pos_;
            while (end < s_.size() && (is_alpha(s_[end]) || (s_[end] >= '0' && s_[end] <= '9'))) ++end;
            const std::string_view name = s_.substr(pos_, end - pos_);
            pos_ = end;
            if (name == "t") return build::variable(Var::t, at);
            if (name == "x") return build::variable(Var::x, at);
            if (name == "pi") return build::number(std::numbers::pi, at);
            if (name == "e") return build::number(std::numbers::e, at);
            Func f;
            int arity = 1;
            if (name == "exp") f = Func::exp;
            else if (name == "ln") f = Func::ln;
            else if (name == "sin") f = Func::sin;
            else if (name == "cos") f = Func::cos;
            else if (name == "sqrt") f = Func::sqrt;
            else if (name == "abs") f = Func::abs;
            else if (name == "pow") { f = Func::pow; arity = 2; }
            else throw ParseError(at, "variable t or x, constant pi or e, or a known function (unknown name '" +
                                          std::string(name) + "')");
            expect('(');
            std::vector<NodePtr> args;
            args.push_back(parse_expr());
            while (static_cast<int>(args.size()) < arity) {
                expect(',');
                args.push_back(parse_expr());
            }
            expect(')');
            return build::call(f, std::move(args), at);
        }
        throw ParseError(at, "number, variable, function or '('");
    }

    NodePtr parse_number() {
        const std::size_t at = pos_;
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (end < s_.size() && s_[end] >= '0' && s_[end] <= '9') ++end, ++n;
            return n;
        };
        std::size_t nd = digits();
        if (end < s_.size() && s_[end] == '.') {
            ++end;
            nd += digits();
        }
        if (nd == 0) throw ParseError(at, "digits in number");
        if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
            std::size_t save = end;
            ++end;
            if (end < s_.size() && (s_[end] == '+' || s_[end] == '-')) ++end;
            if (digits() == 0) end = save;  // 'e' belongs to something else; reported below
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + at, s_.data() + end, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + end) throw ParseError(at, "valid number");
        pos_ = end;
        if (pos_ < s_.size() && (is_alpha(s_[pos_]) || s_[pos_] == '.')) {
            throw ParseError(pos_, "operator after number (implicit multiplication is not supported)");
        }
        return build::number(v, at);
    }

    static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

    std::string_view s_;
    std::size_t pos_ = 0;
};

namespace detail {

inline double checked(double v, const Node& n, const char* what) {
    if (!std::isfinite(v)) throw EvalError(n.offset, what);
    return v;
}

inline double eval(const Node& n, double t, double x) {
    switch (n.kind) {
        case Kind::number: return n.value;
        case Kind::variable: return n.var == Var::t ? t : x;
        case Kind::negate: return -eval(*n.args[0], t, x);
        case Kind::add: return checked(eval(*n.args[0], t, x) + eval(*n.args[1], t, x), n, "non-finite sum");
        case Kind::sub: return checked(eval(*n.args[0], t, x) - eval(*n.args[1], t, x), n, "non-finite difference");
        case Kind::mul: return checked(eval(*n.args[0], t, x) * eval(*n.args[1], t, x), n, "non-finite product");
        case Kind::div: {
            const double den = eval(*n.args[1], t, x);
            if (den == 0.0) throw EvalError(n.offset, "division by zero");
            return checked(eval(*n.args[0], t, x) / den, n, "non-finite quotient");
        }
        case Kind::pow: return checked(std::pow(eval(*n.args[0], t, x), eval(*n.args[1], t, x)), n, "power undefined");
        case Kind::call: {
            const double a = eval(*n.args[0], t, x);
            switch (n.func) {
                case Func::exp: return checked(std::exp(a), n, "exp overflow");
                case Func::ln:
                    if (!(a > 0.0)) throw EvalError(n.offset, "ln of a non-positive value");
                    return std::log(a);
                case Func::sin: return std::sin(a);
                case Func::cos: return std::cos(a);
                case Func::sqrt:
                    if (a < 0.0) throw EvalError(n.offset, "sqrt of a negative value");
                    return std::sqrt(a);
                case Func::abs: return std::abs(a);
                case Func::pow: return checked(std::pow(a, eval(*n.args[1], t, x)), n, "power undefined");
            }
        }
    }
    throw EvalError(n.offset, "malformed expression");
}

inline bool depends_on(const Node& n, Var v) {
    if (n.kind == Kind::variable) return n.var == v;
    for (const auto& a : n.args) {
        if (depends_on(*a, v)) return true;
    }
    return false;
}

inline NodePtr power_rule(const NodePtr& u, const NodePtr& v, const NodePtr& du, const NodePtr& dv, Var var) {
    using namespace build;
    if (!depends_on(*v, var)) {
        // v u^(v-1) u'
        const NodePtr exponent = is_number(v) ? number(v->value - 1.0, v->offset) : sub(v, number(1.0));
        return mul(mul(v, pow(u, exponent)), du);
    }
    const NodePtr self = node(Kind::pow, {u, v}, u->offset);
    if (!depends_on(*u, var)) return mul(mul(self, call(Func::ln, {u}, u->offset)), dv);
    // u^v (v' ln u + v u' / u)
    return mul(self, add(mul(dv, call(Func::ln, {u}, u->offset)), div(mul(v, du), u)));
}

inline NodePtr derive(const NodePtr& n, Var var) {
    using namespace build;
    if (!depends_on(*n, var)) return number(0.0, n->offset);
    switch (n->kind) {
        case Kind::number: return number(0.0, n->offset);
        case Kind::variable: return number(n->var == var ? 1.0 : 0.0, n->offset);
        case Kind::negate: return neg(derive(n->args[0], var));
        case Kind::add: return add(derive(n->args[0], var), derive(n->args[1], var));
        case Kind::sub: return sub(derive(n->args[0], var), derive(n->args[1], var));
        case Kind::mul: {
            const auto& u = n->args[0];
            const auto& v = n->args[1];
            return add(mul(derive(u, var), v), mul(u, derive(v, var)));
        }
        case Kind::div: {
            const auto& u = n->args[0];
            const auto& v = n->args[1];
            if (!depends_on(*v, var)) return div(derive(u, var), v);
            return div(sub(mul(derive(u, var), v), mul(u, derive(v, var))), pow(v, number(2.0)));
        }
        case Kind::pow:
            return power_rule(n->args[0], n->args[1], derive(n->args[0], var), derive(n->args[1], var), var);
        case Kind::call: {
            const auto& u = n->args[0];
            const NodePtr du = derive(u, var);
            switch (n->func) {
                case Func::exp: return mul(n, du);
                case Func::ln: return div(du, u);
                case Func::sin: return mul(call(Func::cos, {u}, n->offset), du);
                case Func::cos: return neg(mul(call(Func::sin, {u}, n->offset), du));
                case Func::sqrt: return div(du, mul(number(2.0), n));
                case Func::abs: throw NonDifferentiable("abs(...) has no derivative at 0 and is not differentiated");
                case Func::pow: return power_rule(u, n->args[1], du, derive(n->args[1], var), var);
            }
        }
    }
    throw EvalError(n->offset, "malformed expression");
}

// Binding strength used when rendering: higher binds tighter.
inline int precedence(const Node& n) {
    switch (n.kind) {
        case Kind::add:
        case Kind::sub: return 1;
        case Kind::mul:
        case Kind::div: return 2;
        case Kind::negate: return 3;
        case Kind::pow: return 4;
        case Kind::number: return (n.value < 0.0 || std::signbit(n.value)) ? 3 : 5;
        default: return 5;
    }
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Shortest form that reads back to the same double.
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
        if (back == v) return buf;
    }
    return s;
}

inline void render(const Node& n, std::string& out);

inline void render_child(const Node& c, int min_prec, std::string& out) {
    if (precedence(c) < min_prec) {
        out += '(';
        render(c, out);
        out += ')';
    } else {
        render(c, out);
    }
}

inline void render(const Node& n, std::string& out) {
    switch (n.kind) {
        case Kind::number: out += format_number(n.value); return;
        case Kind::variable: out += n.var == Var::t ? 't' : 'x'; return;
        case Kind::negate:
            out += '-';
            render_child(*n.args[0], 3, out);
            return;
        case Kind::add:
        case Kind::sub:
            render_child(*n.args[0], 1, out);
            out += n.kind == Kind::add ? '+' : '-';
            render_child(*n.args[1], 2, out);
            return;
        case Kind::mul:
        case Kind::div:
            render_child(*n.args[0], 2, out);
            out += n.kind == Kind::mul ? '*' : '/';
            render_child(*n.args[1], 3, out);
            return;
        case Kind::pow:
            render_child(*n.args[0], 5, out);
            out += '^';
            render_child(*n.args[1], 3, out);
            return;
        case Kind::call:
            out += func_name(n.func);
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i) out += ',';
                render(*n.args[i], out);
            }
            out += ')';
            return;
    }
}

}  // namespace detail

/// Immutable parsed expression.
class Expr {
public:
    Expr() : root_(build::number(0.0)) {}
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static Expr parse(std::string_view text) { return Expr(Parser(text).parse()); }
    static Expr constant(double v) { return Expr(build::number(v)); }

    double operator()(double t, double x = 0.0) const { return detail::eval(*root_, t, x); }
    double eval(double t, double x = 0.0) const { return detail::eval(*root_, t, x); }

    Expr differentiate(Var v) const { return Expr(detail::derive(root_, v)); }
    bool depends_on(Var v) const { return detail::depends_on(*root_, v); }

    /// True when the expression is the literal 0 (e.g. the derivative of a constant).
    bool is_zero() const { return root_->kind == Kind::number && root_->value == 0.0; }

    std::string render() const {
        std::string out;
        detail::render(*root_, out);
        return out;
    }

    const NodePtr& root() const noexcept { return root_; }

private:
    NodePtr root_;
};

inline Expr parse(std::string_view text) { return Expr::parse(text); }

}  // namespace prabhakar::expr
