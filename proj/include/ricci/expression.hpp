#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ricci/chart.hpp"

namespace ricci {

// ---------------------------------------------------------------------------
// Expression trees
//
// Immutable, shareable symbolic expressions over real scalars. The node set
// is deliberately small: enough to write coordinate metrics, soliton vector
// fields and potentials, and their derivatives. The antiderivative node lets
// a field carry an integral with no closed form; it evaluates by adaptive
// quadrature and differentiates exactly.
// ---------------------------------------------------------------------------

enum class ExprKind {
    Constant,
    Symbol,
    Negate,
    Sum,
    Difference,
    Product,
    Quotient,
    Power,          // integer exponent
    Apply,          // built-in function of one argument
    Antiderivative, // definite integral from a base point to the variable
};

enum class Builtin { Exp, Ln, Sin, Cos, Sinh, Cosh, Sqrt, Atan };

namespace detail {

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprKind kind;
    double value = 0.0;      // Constant payload, Antiderivative base point
    std::string name;        // Symbol name, Antiderivative variable
    Builtin fn = Builtin::Exp;
    int exponent = 0;        // Power payload
    NodePtr a;               // operand / left / integrand
    NodePtr b;               // right
};

inline const char* builtin_name(Builtin f) {
    switch (f) {
        case Builtin::Exp: return "exp";
        case Builtin::Ln: return "ln";
        case Builtin::Sin: return "sin";
        case Builtin::Cos: return "cos";
        case Builtin::Sinh: return "sinh";
        case Builtin::Cosh: return "cosh";
        case Builtin::Sqrt: return "sqrt";
        case Builtin::Atan: return "atan";
    }
    return "?";
}

// Depth of same-variable antiderivative nesting below `n`. A new node over
// an integrand of depth 1 is the deepest allowed stack.
inline int antider_depth(const NodePtr& n, const std::string& var) {
    if (!n) return 0;
    int d = std::max(antider_depth(n->a, var), antider_depth(n->b, var));
    if (n->kind == ExprKind::Antiderivative && n->name == var)
        d = std::max(d, 1 + antider_depth(n->a, var));
    return d;
}

} // namespace detail

/// Value handle over an immutable expression node. Copies share structure.
class Expression {
public:
    Expression() : node_(make(ExprKind::Constant)) {}

    ExprKind kind() const { return node_->kind; }

    // -- factories ---------------------------------------------------------

    static Expression constant(double v) {
        auto n = make(ExprKind::Constant);
        n->value = v;
        return Expression(detail::NodePtr(std::move(n)));
    }

    static Expression symbol(std::string name) {
        if (!detail::is_identifier(name))
            throw ValidationError("'" + name + "' is not a valid symbol name");
        auto n = make(ExprKind::Symbol);
        n->name = std::move(name);
        return Expression(detail::NodePtr(std::move(n)));
    }

    static Expression negate(const Expression& x) {
        auto n = make(ExprKind::Negate);
        n->a = x.node_;
        return Expression(detail::NodePtr(std::move(n)));
    }

    static Expression sum(const Expression& l, const Expression& r) { return binary(ExprKind::Sum, l, r); }
    static Expression difference(const Expression& l, const Expression& r) { return binary(ExprKind::Difference, l, r); }
    static Expression product(const Expression& l, const Expression& r) { return binary(ExprKind::Product, l, r); }
    static Expression quotient(const Expression& l, const Expression& r) { return binary(ExprKind::Quotient, l, r); }

    static Expression power(const Expression& base, int exponent) {
        auto n = make(ExprKind::Power);
        n->a = base.node_;
        n->exponent = exponent;
        return Expression(detail::NodePtr(std::move(n)));
    }

    static Expression apply(Builtin fn, const Expression& arg) {
        auto n = make(ExprKind::Apply);
        n->fn = fn;
        n->a = arg.node_;
        return Expression(detail::NodePtr(std::move(n)));
    }

    /// Integral of `integrand` in `variable` from `base_point` to the value
    /// the variable holds at evaluation time. Same-variable nesting beyond
    /// one inner level is rejected.
    static Expression antiderivative(const Expression& integrand, std::string variable, double base_point) {
        if (!detail::is_identifier(variable))
            throw ValidationError("'" + variable + "' is not a valid variable name");
        if (detail::antider_depth(integrand.node_, variable) > 1)
            throw ValidationError("antiderivative nesting in '" + variable + "' exceeds one inner level");
        auto n = make(ExprKind::Antiderivative);
        n->a = integrand.node_;
        n->name = std::move(variable);
        n->value = base_point;
        return Expression(detail::NodePtr(std::move(n)));
    }

    /// Internal: adopt an existing node. Used by simplify/differentiate/parse.
    static Expression wrap(detail::NodePtr n) { return Expression(std::move(n)); }

    // -- inspectors (throw on kind mismatch) --------------------------------

    double constant_value() const { expect(ExprKind::Constant); return node_->value; }
    const std::string& symbol_name() const { expect(ExprKind::Symbol); return node_->name; }
    Builtin builtin() const { expect(ExprKind::Apply); return node_->fn; }
    int exponent() const { expect(ExprKind::Power); return node_->exponent; }
    double base_point() const { expect(ExprKind::Antiderivative); return node_->value; }
    const std::string& variable() const { expect(ExprKind::Antiderivative); return node_->name; }

    Expression operand() const {
        if (!node_->a) throw std::logic_error("expression node has no operand");
        return Expression(node_->a);
    }
    Expression left() const { return operand(); }
    Expression right() const {
        if (!node_->b) throw std::logic_error("expression node has no right operand");
        return Expression(node_->b);
    }

    bool is_constant(double v) const {
        return node_->kind == ExprKind::Constant && node_->value == v;
    }

    const detail::NodePtr& node() const { return node_; }

private:
    explicit Expression(detail::NodePtr n) : node_(std::move(n)) {}

    static std::shared_ptr<detail::ExprNode> make(ExprKind k) {
        auto n = std::make_shared<detail::ExprNode>();
        n->kind = k;
        return n;
    }

    static Expression binary(ExprKind k, const Expression& l, const Expression& r) {
        auto n = make(k);
        n->a = l.node_;
        n->b = r.node_;
        return Expression(detail::NodePtr(std::move(n)));
    }

    void expect(ExprKind k) const {
        if (node_->kind != k) throw std::logic_error("expression kind mismatch");
    }

    detail::NodePtr node_;
};

// -- operator sugar ---------------------------------------------------------

inline Expression operator-(const Expression& x) { return Expression::negate(x); }
inline Expression operator+(const Expression& l, const Expression& r) { return Expression::sum(l, r); }
inline Expression operator-(const Expression& l, const Expression& r) { return Expression::difference(l, r); }
inline Expression operator*(const Expression& l, const Expression& r) { return Expression::product(l, r); }
inline Expression operator/(const Expression& l, const Expression& r) { return Expression::quotient(l, r); }

inline Expression constant(double v) { return Expression::constant(v); }
inline Expression symbol(std::string name) { return Expression::symbol(std::move(name)); }
inline Expression pow_int(const Expression& base, int k) { return Expression::power(base, k); }
inline Expression antiderivative(const Expression& integrand, std::string variable,
                                 double base_point) {
    return Expression::antiderivative(integrand, std::move(variable), base_point);
}
inline Expression exp(const Expression& x) { return Expression::apply(Builtin::Exp, x); }
inline Expression ln(const Expression& x) { return Expression::apply(Builtin::Ln, x); }
inline Expression sin(const Expression& x) { return Expression::apply(Builtin::Sin, x); }
inline Expression cos(const Expression& x) { return Expression::apply(Builtin::Cos, x); }
inline Expression sinh(const Expression& x) { return Expression::apply(Builtin::Sinh, x); }
inline Expression cosh(const Expression& x) { return Expression::apply(Builtin::Cosh, x); }
inline Expression sqrt(const Expression& x) { return Expression::apply(Builtin::Sqrt, x); }
inline Expression atan(const Expression& x) { return Expression::apply(Builtin::Atan, x); }

// ---------------------------------------------------------------------------
// Structural predicates
// ---------------------------------------------------------------------------

namespace detail {

inline bool equal_nodes(const NodePtr& x, const NodePtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case ExprKind::Constant:
            if (x->value != y->value) return false;
            break;
        case ExprKind::Symbol:
            if (x->name != y->name) return false;
            break;
        case ExprKind::Power:
            if (x->exponent != y->exponent) return false;
            break;
        case ExprKind::Apply:
            if (x->fn != y->fn) return false;
            break;
        case ExprKind::Antiderivative:
            if (x->name != y->name || x->value != y->value) return false;
            break;
        default:
            break;
    }
    return equal_nodes(x->a, y->a) && equal_nodes(x->b, y->b);
}

inline void collect_symbols(const NodePtr& n, std::set<std::string>& out) {
    if (!n) return;
    if (n->kind == ExprKind::Symbol) out.insert(n->name);
    if (n->kind == ExprKind::Antiderivative) out.insert(n->name);
    collect_symbols(n->a, out);
    collect_symbols(n->b, out);
}

inline bool has_antiderivative(const NodePtr& n) {
    if (!n) return false;
    if (n->kind == ExprKind::Antiderivative) return true;
    return has_antiderivative(n->a) || has_antiderivative(n->b);
}

} // namespace detail

/// Deep structural equality: same shape, same payloads.
inline bool equal(const Expression& x, const Expression& y) {
    return detail::equal_nodes(x.node(), y.node());
}

/// Every symbol the expression can read at evaluation time, including the
/// sweep variable of any antiderivative node.
inline std::set<std::string> free_symbols(const Expression& e) {
    std::set<std::string> out;
    detail::collect_symbols(e.node(), out);
    return out;
}

inline bool contains_antiderivative(const Expression& e) {
    return detail::has_antiderivative(e.node());
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

constexpr double kQuadratureTol = 1e-10;
constexpr int kQuadratureMaxDepth = 40;

inline double eval_node(const NodePtr& n, const Bindings& env);

template <class F>
double simpson_rule(const F&, double a, double fa, double fm, double b, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(const F& f, double a, double fa, double b, double fb,
                            double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_rule(f, a, fa, flm, m, fm);
    double right = simpson_rule(f, m, fm, frm, b, fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw EvalError("quadrature did not converge");
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson with one-level Richardson correction, absolute tolerance.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b);
    double m = 0.5 * (a + b), fm = f(m);
    double whole = simpson_rule(f, a, fa, fm, b, fb);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

inline double ipow(double x, int k) {
    if (k < 0) {
        if (x == 0.0) throw EvalError("zero raised to a negative power");
        return 1.0 / ipow(x, -k);
    }
    double r = 1.0, base = x;
    unsigned e = static_cast<unsigned>(k);
    while (e) {
        if (e & 1u) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline double eval_builtin(Builtin fn, double x) {
    switch (fn) {
        case Builtin::Exp: return std::exp(x);
        case Builtin::Ln:
            if (x <= 0.0) throw EvalError("ln of non-positive value");
            return std::log(x);
        case Builtin::Sin: return std::sin(x);
        case Builtin::Cos: return std::cos(x);
        case Builtin::Sinh: return std::sinh(x);
        case Builtin::Cosh: return std::cosh(x);
        case Builtin::Sqrt:
            if (x < 0.0) throw EvalError("sqrt of negative value");
            return std::sqrt(x);
        case Builtin::Atan: return std::atan(x);
    }
    throw std::logic_error("unhandled builtin");
}

inline double eval_node(const NodePtr& n, const Bindings& env) {
    switch (n->kind) {
        case ExprKind::Constant: return n->value;
        case ExprKind::Symbol: return env.at(n->name);
        case ExprKind::Negate: return -eval_node(n->a, env);
        case ExprKind::Sum: return eval_node(n->a, env) + eval_node(n->b, env);
        case ExprKind::Difference: return eval_node(n->a, env) - eval_node(n->b, env);
        case ExprKind::Product: return eval_node(n->a, env) * eval_node(n->b, env);
        case ExprKind::Quotient: {
            double den = eval_node(n->b, env);
            if (den == 0.0) throw EvalError("division by zero");
            return eval_node(n->a, env) / den;
        }
        case ExprKind::Power: return ipow(eval_node(n->a, env), n->exponent);
        case ExprKind::Apply: return eval_builtin(n->fn, eval_node(n->a, env));
        case ExprKind::Antiderivative: {
            double upper = env.at(n->name);
            Bindings inner = env;
            auto f = [&](double t) {
                inner.set(n->name, t);
                return eval_node(n->a, inner);
            };
            double lo = n->value, hi = upper, sign = 1.0;
            if (hi < lo) { std::swap(lo, hi); sign = -1.0; }
            return sign * adaptive_simpson(f, lo, hi, kQuadratureTol, kQuadratureMaxDepth);
        }
    }
    throw std::logic_error("unhandled expression kind");
}

} // namespace detail

/// Evaluates `e` with every free symbol bound in `env`. Throws EvalError on
/// unbound symbols, ln/sqrt domain violations, division by zero, or
/// quadrature that fails to converge within the depth budget.
inline double evaluate(const Expression& e, const Bindings& env) {
    return detail::eval_node(e.node(), env);
}

// ---------------------------------------------------------------------------
// Simplification
//
// Conservative and value-preserving only: constant folding plus the identity
// rules x+0, x*1, x*0, x-0, 0/x (x a nonzero constant), x^0, x^1, and double
// negation. No distribution, no factoring. A single bottom-up pass is
// idempotent because every rule output is itself in simplified form.
// ---------------------------------------------------------------------------

namespace detail {

inline bool node_is_const(const NodePtr& n, double v) {
    return n && n->kind == ExprKind::Constant && n->value == v;
}

inline NodePtr const_node(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Constant;
    n->value = v;
    return n;
}

inline NodePtr simplify_node(const NodePtr& n) {
    if (!n) return n;
    auto m = std::make_shared<ExprNode>(*n);
    m->a = simplify_node(n->a);
    m->b = simplify_node(n->b);

    const bool aconst = m->a && m->a->kind == ExprKind::Constant;
    const bool bconst = m->b && m->b->kind == ExprKind::Constant;

    switch (m->kind) {
        case ExprKind::Negate:
            if (aconst) return const_node(-m->a->value);
            if (m->a->kind == ExprKind::Negate) return m->a->a;
            break;
        case ExprKind::Sum:
            if (aconst && bconst) return const_node(m->a->value + m->b->value);
            if (node_is_const(m->b, 0.0)) return m->a;
            if (node_is_const(m->a, 0.0)) return m->b;
            break;
        case ExprKind::Difference:
            if (aconst && bconst) return const_node(m->a->value - m->b->value);
            if (node_is_const(m->b, 0.0)) return m->a;
            break;
        case ExprKind::Product:
            if (aconst && bconst) return const_node(m->a->value * m->b->value);
            if (node_is_const(m->a, 0.0) || node_is_const(m->b, 0.0)) return const_node(0.0);
            if (node_is_const(m->b, 1.0)) return m->a;
            if (node_is_const(m->a, 1.0)) return m->b;
            break;
        case ExprKind::Quotient:
            if (bconst && m->b->value != 0.0) {
                if (aconst) return const_node(m->a->value / m->b->value);
                if (node_is_const(m->a, 0.0)) return const_node(0.0);
            }
            break;
        case ExprKind::Power:
            if (m->exponent == 0) return const_node(1.0);
            if (m->exponent == 1) return m->a;
            if (aconst && !(m->a->value == 0.0 && m->exponent < 0))
                return const_node(ipow(m->a->value, m->exponent));
            break;
        case ExprKind::Apply:
            if (aconst) {
                // Fold only inside the function's domain; out-of-domain
                // arguments stay symbolic and fail at evaluation instead.
                try {
                    double v = eval_builtin(m->fn, m->a->value);
                    if (std::isfinite(v)) return const_node(v);
                } catch (const EvalError&) {
                }
            }
            break;
        default:
            break;
    }
    return m;
}

} // namespace detail

inline Expression simplify(const Expression& e) {
    return Expression::wrap(detail::simplify_node(e.node()));
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace detail {

inline NodePtr binary_node(ExprKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline NodePtr unary_node(ExprKind k, NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    return n;
}

inline NodePtr power_node(NodePtr base, int k) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Power;
    n->a = std::move(base);
    n->exponent = k;
    return n;
}

inline NodePtr apply_node(Builtin fn, NodePtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Apply;
    n->fn = fn;
    n->a = std::move(a);
    return n;
}

inline NodePtr antider_node(NodePtr integrand, const std::string& var, double base) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::Antiderivative;
    n->a = std::move(integrand);
    n->name = var;
    n->value = base;
    return n;
}

inline NodePtr diff_node(const NodePtr& n, const std::string& var) {
    using K = ExprKind;
    switch (n->kind) {
        case K::Constant: return const_node(0.0);
        case K::Symbol: return const_node(n->name == var ? 1.0 : 0.0);
        case K::Negate: return unary_node(K::Negate, diff_node(n->a, var));
        case K::Sum: return binary_node(K::Sum, diff_node(n->a, var), diff_node(n->b, var));
        case K::Difference: return binary_node(K::Difference, diff_node(n->a, var), diff_node(n->b, var));
        case K::Product:
            return binary_node(K::Sum,
                               binary_node(K::Product, diff_node(n->a, var), n->b),
                               binary_node(K::Product, n->a, diff_node(n->b, var)));
        case K::Quotient:
            // (u/v)' = (u'v - uv') / v^2
            return binary_node(K::Quotient,
                               binary_node(K::Difference,
                                           binary_node(K::Product, diff_node(n->a, var), n->b),
                                           binary_node(K::Product, n->a, diff_node(n->b, var))),
                               power_node(n->b, 2));
        case K::Power:
            // (u^k)' = k u^(k-1) u'
            return binary_node(K::Product,
                               binary_node(K::Product, const_node(static_cast<double>(n->exponent)),
                                           power_node(n->a, n->exponent - 1)),
                               diff_node(n->a, var));
        case K::Apply: {
            NodePtr inner = diff_node(n->a, var);
            NodePtr outer;
            switch (n->fn) {
                case Builtin::Exp: outer = apply_node(Builtin::Exp, n->a); break;
                case Builtin::Ln: outer = binary_node(K::Quotient, const_node(1.0), n->a); break;
                case Builtin::Sin: outer = apply_node(Builtin::Cos, n->a); break;
                case Builtin::Cos: outer = unary_node(K::Negate, apply_node(Builtin::Sin, n->a)); break;
                case Builtin::Sinh: outer = apply_node(Builtin::Cosh, n->a); break;
                case Builtin::Cosh: outer = apply_node(Builtin::Sinh, n->a); break;
                case Builtin::Sqrt:
                    outer = binary_node(K::Quotient, const_node(1.0),
                                        binary_node(K::Product, const_node(2.0), apply_node(Builtin::Sqrt, n->a)));
                    break;
                case Builtin::Atan:
                    outer = binary_node(K::Quotient, const_node(1.0),
                                        binary_node(K::Sum, const_node(1.0), power_node(n->a, 2)));
                    break;
            }
            return binary_node(K::Product, outer, inner);
        }
        case K::Antiderivative:
            // d/dx integral from c to x of g = g; other variables pass under
            // the integral sign.
            if (n->name == var) return n->a;
            return antider_node(diff_node(n->a, var), n->name, n->value);
    }
    throw std::logic_error("unhandled expression kind");
}

} // namespace detail

/// Exact partial derivative with respect to `var`, simplified.
inline Expression differentiate(const Expression& e, const std::string& var) {
    return Expression::wrap(detail::simplify_node(detail::diff_node(e.node(), var)));
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' signed-integer)?
//   base   := number | identifier | fn '(' expr ')' | '(' expr ')'
//
// '^' binds tighter than unary minus: -u^2 parses as -(u^2). Identifiers
// must name a chart coordinate or a declared parameter.
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    std::size_t pos = 0;
    double number = 0.0;
    bool integral = false; // Number token had no fraction or exponent part
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
        tok_ = Token{};
        tok_.pos = i_;
        if (i_ >= src_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = src_[i_];
        switch (c) {
            case '+': tok_.kind = Token::Plus; ++i_; return;
            case '-': tok_.kind = Token::Minus; ++i_; return;
            case '*': tok_.kind = Token::Star; ++i_; return;
            case '/': tok_.kind = Token::Slash; ++i_; return;
            case '^': tok_.kind = Token::Caret; ++i_; return;
            case '(': tok_.kind = Token::LParen; ++i_; return;
            case ')': tok_.kind = Token::RParen; ++i_; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i_;
            while (j < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
                ++j;
            tok_.kind = Token::Ident;
            tok_.text = std::string(src_.substr(i_, j - i_));
            i_ = j;
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i_);
    }

    void lex_number() {
        std::size_t j = i_;
        bool integral = true;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        if (j < src_.size() && src_[j] == '.') {
            integral = false;
            ++j;
            while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        }
        if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
            std::size_t k = j + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                integral = false;
                j = k;
                while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
            }
        }
        std::string_view text = src_.substr(i_, j - i_);
        double v = 0.0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc() || res.ptr != text.data() + text.size())
            throw ParseError("malformed number '" + std::string(text) + "'", i_);
        tok_.kind = Token::Number;
        tok_.number = v;
        tok_.integral = integral;
        tok_.text = std::string(text);
        i_ = j;
    }

    std::string_view src_;
    std::size_t i_ = 0;
    Token tok_;
};

inline bool lookup_builtin(std::string_view name, Builtin& out) {
    static const std::pair<const char*, Builtin> table[] = {
        {"exp", Builtin::Exp}, {"ln", Builtin::Ln},     {"sin", Builtin::Sin},
        {"cos", Builtin::Cos}, {"sinh", Builtin::Sinh}, {"cosh", Builtin::Cosh},
        {"sqrt", Builtin::Sqrt}, {"atan", Builtin::Atan},
    };
    for (const auto& [n, f] : table)
        if (name == n) {
            out = f;
            return true;
        }
    return false;
}

class Parser {
public:
    Parser(std::string_view src, const Chart& chart, const std::vector<std::string>& params)
        : lex_(src) {
        allowed_.reserve(chart.dimension() + params.size());
        for (std::size_t i = 0; i < chart.dimension(); ++i) allowed_.push_back(chart.name(i));
        allowed_.insert(allowed_.end(), params.begin(), params.end());
    }

    Parser(std::string_view src, std::vector<std::string> symbols)
        : lex_(src), allowed_(std::move(symbols)) {}

    Expression run() {
        Expression e = parse_expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::End)
            throw ParseError("unexpected trailing input", t.pos);
        return e;
    }

private:
    Expression parse_expr() {
        Expression e = parse_term();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Plus) {
                lex_.take();
                e = e + parse_term();
            } else if (t.kind == Token::Minus) {
                lex_.take();
                e = e - parse_term();
            } else {
                return e;
            }
        }
    }

    Expression parse_term() {
        Expression e = parse_factor();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Star) {
                lex_.take();
                e = e * parse_factor();
            } else if (t.kind == Token::Slash) {
                lex_.take();
                e = e / parse_factor();
            } else {
                return e;
            }
        }
    }

    Expression parse_factor() {
        if (lex_.peek().kind == Token::Minus) {
            lex_.take();
            return -parse_factor();
        }
        Expression b = parse_base();
        if (lex_.peek().kind == Token::Caret) {
            lex_.take();
            return Expression::power(b, parse_exponent());
        }
        return b;
    }

    int parse_exponent() {
        bool neg = false;
        if (lex_.peek().kind == Token::Minus || lex_.peek().kind == Token::Plus) {
            neg = lex_.peek().kind == Token::Minus;
            lex_.take();
        }
        Token t = lex_.take();
        if (t.kind != Token::Number || !t.integral)
            throw ParseError("exponent must be a signed integer", t.pos);
        double v = t.number;
        if (v > 1e9)
            throw ParseError("exponent out of range", t.pos);
        int k = static_cast<int>(v);
        return neg ? -k : k;
    }

    Expression parse_base() {
        Token t = lex_.take();
        switch (t.kind) {
            case Token::Number:
                return Expression::constant(t.number);
            case Token::LParen: {
                Expression e = parse_expr();
                Token close = lex_.take();
                if (close.kind != Token::RParen)
                    throw ParseError("expected ')'", close.pos);
                return e;
            }
            case Token::Ident: {
                if (lex_.peek().kind == Token::LParen) {
                    Builtin fn;
                    if (!lookup_builtin(t.text, fn))
                        throw ParseError("unknown function '" + t.text + "'", t.pos);
                    lex_.take(); // '('
                    Expression arg = parse_expr();
                    Token close = lex_.take();
                    if (close.kind != Token::RParen)
                        throw ParseError("expected ')'", close.pos);
                    return Expression::apply(fn, arg);
                }
                if (std::find(allowed_.begin(), allowed_.end(), t.text) != allowed_.end())
                    return Expression::symbol(t.text);
                throw ParseError("unknown identifier '" + t.text + "'", t.pos);
            }
            default:
                throw ParseError("expected a number, identifier, or '('", t.pos);
        }
    }

    Lexer lex_;
    std::vector<std::string> allowed_;
};

} // namespace detail

/// Parses expression text against a chart plus optional parameter names.
/// Unknown identifiers and syntax errors raise ParseError with a position.
inline Expression parse(std::string_view text, const Chart& chart,
                        const std::vector<std::string>& params = {}) {
    return detail::Parser(text, chart, params).run();
}

/// Parses expression text against a bare list of allowed symbol names; used
/// for free-standing one-variable expressions such as wave profiles.
inline Expression parse(std::string_view text, const std::vector<std::string>& symbols) {
    return detail::Parser(text, symbols).run();
}

// ---------------------------------------------------------------------------
// Printing
//
// Emits text that reparses to a structurally identical tree (for trees the
// grammar can produce). Antiderivative nodes have no surface syntax and
// print in a diagnostic form.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Precedence levels: additive 1, multiplicative 2, unary minus 3, power 4,
// atom 5. A node is printed bare when its level is at least the context's.
inline int node_level(const NodePtr& n) {
    switch (n->kind) {
        case ExprKind::Sum:
        case ExprKind::Difference: return 1;
        case ExprKind::Product:
        case ExprKind::Quotient: return 2;
        case ExprKind::Negate: return 3;
        case ExprKind::Power: return 4;
        default: return 5;
    }
}

inline void print_node(const NodePtr& n, int min_level, std::string& out) {
    const bool parens = node_level(n) < min_level;
    if (parens) out += '(';
    switch (n->kind) {
        case ExprKind::Constant:
            if (n->value < 0.0 && !parens && min_level > 3) {
                // Negative constant where a bare leading '-' would bind
                // wrongly (e.g. as a power base).
                out += '(';
                out += format_double(n->value);
                out += ')';
                if (parens) out += ')';
                return;
            }
            out += format_double(n->value);
            break;
        case ExprKind::Symbol:
            out += n->name;
            break;
        case ExprKind::Negate:
            out += '-';
            print_node(n->a, 3, out);
            break;
        case ExprKind::Sum:
            print_node(n->a, 1, out);
            out += " + ";
            print_node(n->b, 2, out);
            break;
        case ExprKind::Difference:
            print_node(n->a, 1, out);
            out += " - ";
            print_node(n->b, 2, out);
            break;
        case ExprKind::Product:
            print_node(n->a, 2, out);
            out += "*";
            print_node(n->b, 3, out);
            break;
        case ExprKind::Quotient:
            print_node(n->a, 2, out);
            out += "/";
            print_node(n->b, 3, out);
            break;
        case ExprKind::Power:
            print_node(n->a, 5, out);
            out += '^';
            out += std::to_string(n->exponent);
            break;
        case ExprKind::Apply:
            out += builtin_name(n->fn);
            out += '(';
            print_node(n->a, 1, out);
            out += ')';
            break;
        case ExprKind::Antiderivative:
            out += "antider(";
            print_node(n->a, 1, out);
            out += ", ";
            out += n->name;
            out += ", ";
            out += format_double(n->value);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string to_string(const Expression& e) {
    std::string out;
    detail::print_node(e.node(), 1, out);
    return out;
}

} // namespace ricci
