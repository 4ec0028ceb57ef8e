#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "numeric.hpp"

namespace partdecomp {

/// Arithmetic expressions over x1..xn: literals, + - * / ^, unary minus and
/// exp, log, sin, cos, relu. Immutable; subtrees are shared.
class Expression {
public:
    enum class Kind { Number, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };
    enum class Function { Exp, Log, Sin, Cos, Relu };

    struct Node {
        Kind kind;
        Rational value;        // Number
        std::string literal;   // Number, as written
        int variable = 0;      // Variable
        Function function{};   // Call
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };
    using NodePtr = std::shared_ptr<const Node>;

    Expression() : root_(number(Rational(0))) {}
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }

    /// Highest variable index used; 0 for a constant.
    int max_variable() const { return max_variable(*root_); }

    static NodePtr number(const Rational& v, std::string literal = {}) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Number;
        n->value = v;
        n->literal = literal.empty() ? format_number(v) : std::move(literal);
        return n;
    }
    static NodePtr variable(int i) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Variable;
        n->variable = i;
        return n;
    }
    static NodePtr unary(Kind k, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(a);
        return n;
    }
    static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }
    static NodePtr call(Function f, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Call;
        n->function = f;
        n->lhs = std::move(a);
        return n;
    }

    static const char* function_name(Function f) {
        switch (f) {
            case Function::Exp: return "exp";
            case Function::Log: return "log";
            case Function::Sin: return "sin";
            case Function::Cos: return "cos";
            case Function::Relu: return "relu";
        }
        return "?";
    }

    /// Integers print plainly, terminating decimals as decimals, anything
    /// else as a parenthesized quotient.
    static std::string format_number(const Rational& v) {
        const Integer num = numerator(v);
        const Integer den = denominator(v);
        if (den == 1) {
            return num.str();
        }
        Integer d = den;
        int twos = 0;
        int fives = 0;
        while (d % 2 == 0) {
            d /= 2;
            ++twos;
        }
        while (d % 5 == 0) {
            d /= 5;
            ++fives;
        }
        if (d != 1) {
            return "(" + num.str() + "/" + den.str() + ")";
        }
        const int digits = std::max(twos, fives);
        Integer scaled = num * boost::multiprecision::pow(Integer(10), static_cast<unsigned>(digits)) / den;
        std::string s = Integer(abs(scaled)).str();
        if (s.size() <= static_cast<std::size_t>(digits)) {
            s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
        }
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
        return (scaled < 0 ? "-" : "") + s;
    }

private:
    static int max_variable(const Node& n) {
        int m = n.kind == Kind::Variable ? n.variable : 0;
        if (n.lhs) {
            m = std::max(m, max_variable(*n.lhs));
        }
        if (n.rhs) {
            m = std::max(m, max_variable(*n.rhs));
        }
        return m;
    }

    NodePtr root_;
};

namespace detail {

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : text_(text) {}

    Expression parse() {
        skip_ws();
        if (pos_ == text_.size()) {
            throw ParseError("empty expression; expected a number, variable, function or '('", pos_);
        }
        auto e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) {
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'; expected an operator or end of input",
                             pos_);
        }
        return Expression(e);
    }

private:
    using K = Expression::Kind;
    using NodePtr = Expression::NodePtr;

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n')) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        while (true) {
            if (accept('+')) {
                lhs = Expression::binary(K::Add, lhs, parse_product());
            } else if (accept('-')) {
                lhs = Expression::binary(K::Subtract, lhs, parse_product());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        while (true) {
            if (accept('*')) {
                lhs = Expression::binary(K::Multiply, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = Expression::binary(K::Divide, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) {
            return Expression::unary(K::Negate, parse_unary());
        }
        return parse_power();
    }

    // '^' binds tighter than unary minus and is right-associative; its
    // exponent may itself carry a unary minus.
    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) {
            return Expression::binary(K::Power, base, parse_unary());
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ == text_.size()) {
            throw ParseError("unexpected end of input; expected a number, variable, function or '('", pos_);
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            if (!accept(')')) {
                throw ParseError("expected ')'", pos_);
            }
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') {
            return parse_number();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return parse_identifier();
        }
        if (c == '*') {
            throw ParseError("unexpected '*'; expected an operand (use '^' for powers)", pos_);
        }
        throw ParseError(std::string("unexpected '") + c + "'; expected a number, variable, function or '('", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t count = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            count += digits();
        }
        if (count == 0) {
            throw ParseError("malformed number", start);
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
            }
            if (digits() == 0) {
                throw ParseError("malformed exponent in number", save);
            }
        }
        const std::string_view lit = text_.substr(start, pos_ - start);
        std::string normalized(lit);
        if (normalized.front() == '.') {
            normalized.insert(0, "0");
        }
        return Expression::number(parse_rational(normalized), std::string(lit));
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view id = text_.substr(start, pos_ - start);
        if (id.size() > 1 && id[0] == 'x' &&
            id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            if (id[1] == '0') {
                throw ParseError("variables are numbered from x1", start);
            }
            const long idx = std::stol(std::string(id.substr(1)));
            if (idx > kMaxIndex) {
                throw ParseError("variable index exceeds 64", start);
            }
            return Expression::variable(static_cast<int>(idx));
        }
        static constexpr std::pair<std::string_view, Expression::Function> kFunctions[] = {
            {"exp", Expression::Function::Exp}, {"log", Expression::Function::Log},
            {"sin", Expression::Function::Sin}, {"cos", Expression::Function::Cos},
            {"relu", Expression::Function::Relu}};
        for (const auto& [name, fn] : kFunctions) {
            if (id == name) {
                if (!accept('(')) {
                    throw ParseError("expected '(' after " + std::string(name), pos_);
                }
                NodePtr arg = parse_sum();
                if (!accept(')')) {
                    throw ParseError("expected ')'", pos_);
                }
                return Expression::call(fn, arg);
            }
        }
        throw ParseError("unknown identifier '" + std::string(id) + "'; expected x<k> or exp, log, sin, cos, relu",
                         start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline int precedence(const Expression::Node& n) {
    using K = Expression::Kind;
    switch (n.kind) {
        case K::Add:
        case K::Subtract: return 1;
        case K::Multiply:
        case K::Divide: return 2;
        case K::Negate: return 3;
        case K::Power: return 4;
        default: return 5;
    }
}

inline std::string print_node(const Expression::Node& n, int min_prec);

inline std::string wrapped(const Expression::Node& n, int min_prec) {
    std::string s = print_node(n, min_prec);
    return precedence(n) < min_prec ? "(" + s + ")" : s;
}

inline std::string print_node(const Expression::Node& n, int /*min_prec*/) {
    using K = Expression::Kind;
    switch (n.kind) {
        case K::Number: return n.literal;
        case K::Variable: return "x" + std::to_string(n.variable);
        case K::Negate: return "-" + wrapped(*n.lhs, 3);
        case K::Add: return wrapped(*n.lhs, 1) + " + " + wrapped(*n.rhs, 1);
        case K::Subtract: return wrapped(*n.lhs, 1) + " - " + wrapped(*n.rhs, 2);
        case K::Multiply: return wrapped(*n.lhs, 2) + "*" + wrapped(*n.rhs, 2);
        case K::Divide: return wrapped(*n.lhs, 2) + "/" + wrapped(*n.rhs, 3);
        case K::Power: return wrapped(*n.lhs, 5) + "^" + wrapped(*n.rhs, 3);
        case K::Call: return std::string(Expression::function_name(n.function)) + "(" + print_node(*n.lhs, 0) + ")";
    }
    return {};
}

template <Scalar T>
T integer_power(T base, Integer k) {
    const bool negative = k < 0;
    if (negative) {
        k = -k;
    }
    T result = 1;
    while (k > 0) {
        if ((k & 1) != 0) {
            result *= base;
        }
        base *= base;
        k >>= 1;
    }
    if (negative) {
        if (result == 0) {
            throw DomainError("zero raised to a negative power");
        }
        return T(1) / result;
    }
    return result;
}

template <Scalar T>
T evaluate_node(const Expression::Node& n, std::span<const T> x) {
    using K = Expression::Kind;
    using F = Expression::Function;
    switch (n.kind) {
        case K::Number: return convert<T>(n.value);
        case K::Variable:
            if (static_cast<std::size_t>(n.variable) > x.size()) {
                throw ArityError("x" + std::to_string(n.variable) + " is beyond the " + std::to_string(x.size()) +
                                 " supplied arguments");
            }
            return x[n.variable - 1];
        case K::Negate: return -evaluate_node<T>(*n.lhs, x);
        case K::Add: return evaluate_node<T>(*n.lhs, x) + evaluate_node<T>(*n.rhs, x);
        case K::Subtract: return evaluate_node<T>(*n.lhs, x) - evaluate_node<T>(*n.rhs, x);
        case K::Multiply: return evaluate_node<T>(*n.lhs, x) * evaluate_node<T>(*n.rhs, x);
        case K::Divide: {
            const T den = evaluate_node<T>(*n.rhs, x);
            if constexpr (is_exact_v<T>) {
                if (den == 0) {
                    throw DomainError("division by zero");
                }
            }
            return evaluate_node<T>(*n.lhs, x) / den;
        }
        case K::Power: {
            const T base = evaluate_node<T>(*n.lhs, x);
            const T e = evaluate_node<T>(*n.rhs, x);
            if constexpr (is_exact_v<T>) {
                if (denominator(e) != 1) {
                    throw ExactnessError("non-integer exponent has no exact value");
                }
                return integer_power<T>(base, numerator(e));
            } else {
                if (std::floor(e) == e && std::abs(e) < 1e9) {
                    return integer_power<T>(base, Integer(static_cast<long long>(e)));
                }
                if (base <= 0) {
                    throw DomainError("non-integer power of a non-positive base");
                }
                return std::exp(e * std::log(base));
            }
        }
        case K::Call: {
            const T a = evaluate_node<T>(*n.lhs, x);
            if (n.function == F::Relu) {
                return a > 0 ? a : T(0);
            }
            if constexpr (is_exact_v<T>) {
                throw ExactnessError(std::string(Expression::function_name(n.function)) + " has no exact value");
            } else {
                switch (n.function) {
                    case F::Exp: return std::exp(a);
                    case F::Log:
                        if (a <= 0) {
                            throw DomainError("log of a non-positive value");
                        }
                        return std::log(a);
                    case F::Sin: return std::sin(a);
                    case F::Cos: return std::cos(a);
                    case F::Relu: break;
                }
            }
        }
    }
    throw DomainError("malformed expression");
}

inline bool is_constant(const Expression::Node& n) {
    return n.kind != Expression::Kind::Variable && (!n.lhs || is_constant(*n.lhs)) && (!n.rhs || is_constant(*n.rhs));
}

inline bool is_polynomial_node(const Expression::Node& n) {
    using K = Expression::Kind;
    switch (n.kind) {
        case K::Number:
        case K::Variable: return true;
        case K::Negate: return is_polynomial_node(*n.lhs);
        case K::Add:
        case K::Subtract:
        case K::Multiply: return is_polynomial_node(*n.lhs) && is_polynomial_node(*n.rhs);
        case K::Divide: {
            if (!is_polynomial_node(*n.lhs) || !is_constant(*n.rhs) || !is_polynomial_node(*n.rhs)) {
                return false;
            }
            try {
                return evaluate_node<Rational>(*n.rhs, {}) != 0;
            } catch (const Error&) {
                return false;
            }
        }
        case K::Power: {
            if (!is_polynomial_node(*n.lhs) || !is_constant(*n.rhs) || !is_polynomial_node(*n.rhs)) {
                return false;
            }
            try {
                const Rational e = evaluate_node<Rational>(*n.rhs, {});
                return denominator(e) == 1 && e >= 0;
            } catch (const Error&) {
                return false;
            }
        }
        case K::Call: return false;
    }
    return false;
}

// Constructors that fold the trivial identities so derivatives stay small.
struct Build {
    using K = Expression::Kind;
    using P = Expression::NodePtr;

    static bool is_number(const P& p, int v) { return p->kind == K::Number && p->value == v; }

    static P num(int v) { return Expression::number(Rational(v)); }

    static P neg(const P& a) {
        if (is_number(a, 0)) {
            return a;
        }
        if (a->kind == K::Negate) {
            return a->lhs;
        }
        return Expression::unary(K::Negate, a);
    }
    static P add(const P& a, const P& b) {
        if (is_number(a, 0)) {
            return b;
        }
        if (is_number(b, 0)) {
            return a;
        }
        if (b->kind == K::Negate) {
            return Expression::binary(K::Subtract, a, b->lhs);
        }
        return Expression::binary(K::Add, a, b);
    }
    static P sub(const P& a, const P& b) {
        if (is_number(b, 0)) {
            return a;
        }
        if (is_number(a, 0)) {
            return neg(b);
        }
        return Expression::binary(K::Subtract, a, b);
    }
    static P mul(const P& a, const P& b) {
        if (is_number(a, 0) || is_number(b, 0)) {
            return num(0);
        }
        if (is_number(a, 1)) {
            return b;
        }
        if (is_number(b, 1)) {
            return a;
        }
        if (a->kind == K::Negate) {
            return neg(mul(a->lhs, b));
        }
        if (b->kind == K::Negate) {
            return neg(mul(a, b->lhs));
        }
        return Expression::binary(K::Multiply, a, b);
    }
    static P div(const P& a, const P& b) {
        if (is_number(a, 0)) {
            return num(0);
        }
        if (is_number(b, 1)) {
            return a;
        }
        return Expression::binary(K::Divide, a, b);
    }
    static P pow(const P& a, const P& b) {
        if (is_number(b, 0)) {
            return num(1);
        }
        if (is_number(b, 1)) {
            return a;
        }
        return Expression::binary(K::Power, a, b);
    }
    static P constant(const Rational& v) {
        if (v < 0) {
            return neg(Expression::number(-v));
        }
        return Expression::number(v);
    }
};

inline Expression::NodePtr derive(const Expression::NodePtr& p, int i) {
    using K = Expression::Kind;
    using F = Expression::Function;
    using B = Build;
    const auto& n = *p;
    switch (n.kind) {
        case K::Number: return B::num(0);
        case K::Variable: return B::num(n.variable == i ? 1 : 0);
        case K::Negate: return B::neg(derive(n.lhs, i));
        case K::Add: return B::add(derive(n.lhs, i), derive(n.rhs, i));
        case K::Subtract: return B::sub(derive(n.lhs, i), derive(n.rhs, i));
        case K::Multiply:
            return B::add(B::mul(derive(n.lhs, i), n.rhs), B::mul(n.lhs, derive(n.rhs, i)));
        case K::Divide:
            return B::div(B::sub(B::mul(derive(n.lhs, i), n.rhs), B::mul(n.lhs, derive(n.rhs, i))),
                          B::pow(n.rhs, B::num(2)));
        case K::Power: {
            if (is_constant(*n.rhs)) {
                // c * u^(c - 1) * u'
                Rational c;
                try {
                    c = evaluate_node<Rational>(*n.rhs, {});
                } catch (const ExactnessError&) {
                    return B::mul(B::mul(n.rhs, B::pow(n.lhs, B::sub(n.rhs, B::num(1)))), derive(n.lhs, i));
                }
                return B::mul(B::mul(B::constant(c), B::pow(n.lhs, B::constant(c - 1))), derive(n.lhs, i));
            }
            // u^v * (v' log u + v u' / u)
            return B::mul(p, B::add(B::mul(derive(n.rhs, i), Expression::call(F::Log, n.lhs)),
                                    B::div(B::mul(n.rhs, derive(n.lhs, i)), n.lhs)));
        }
        case K::Call: {
            const auto inner = derive(n.lhs, i);
            switch (n.function) {
                case F::Exp: return B::mul(p, inner);
                case F::Log: return B::div(inner, n.lhs);
                case F::Sin: return B::mul(Expression::call(F::Cos, n.lhs), inner);
                case F::Cos: return B::neg(B::mul(Expression::call(F::Sin, n.lhs), inner));
                case F::Relu:
                    if (B::is_number(inner, 0)) {
                        return inner;
                    }
                    throw DomainError("relu has no symbolic derivative");
            }
        }
    }
    throw DomainError("malformed expression");
}

}  // namespace detail

/// Parses an expression. Precedence, tightest first: '^' (right
/// associative), unary '-', '*' '/', '+' '-'.
inline Expression parse_expression(std::string_view text) {
    return detail::ExpressionParser(text).parse();
}

/// Canonical text with minimal parentheses; parse(print(e)) prints the same.
inline std::string print_expression(const Expression& e) {
    return detail::print_node(e.root(), 0);
}

template <Scalar T>
T evaluate(const Expression& e, std::span<const T> x) {
    return detail::evaluate_node<T>(e.root(), x);
}

/// True for rational-coefficient polynomials: no function calls, division
/// only by nonzero constants, powers only with constant nonnegative integer
/// exponents.
inline bool is_polynomial(const Expression& e) {
    return detail::is_polynomial_node(e.root());
}

/// Symbolic partial derivative in x_i.
inline Expression differentiate(const Expression& e, int i) {
    if (i < 1) {
        throw DomainError("derivative index must be >= 1");
    }
    return Expression(detail::derive(e.node(), i));
}

/// Oracle of arity n (defaults to the highest variable used, at least 1).
template <Scalar T>
FunctionOracle<T> make_oracle(const Expression& e, int n = 0) {
    const int used = e.max_variable();
    if (n == 0) {
        n = std::max(used, 1);
    }
    if (used > n) {
        throw ArityError("expression uses x" + std::to_string(used) + " but arity is " + std::to_string(n));
    }
    return FunctionOracle<T>{n, [e](std::span<const T> x) { return evaluate<T>(e, x); }};
}

}  // namespace partdecomp
