#pragma once

// Expression language for the surface functions h(x, y) and H(x, y).
//
// Grammar (whitespace-insensitive, no implicit multiplication):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' integer)*            left-associative
//   atom   := number | 'x' | 'y' | 'a' | 'pi' | fn '(' expr ')' | '(' expr ')'
//   fn     := sin cos tan sinh cosh tanh coth exp ln sqrt
//
// Constants are bound at evaluation time, so one AST serves parameter
// sweeps over a.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "calabi/jet.hpp"

namespace calabi {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp { Add, Sub, Mul, Div };
enum class Var { X, Y };

struct Expr {
    struct Number {
        double value;
        bool operator==(const Number&) const = default;
    };
    struct Variable {
        Var which;
        bool operator==(const Variable&) const = default;
    };
    struct Constant {
        std::string name;  // "a" or "pi"
        bool operator==(const Constant&) const = default;
    };
    struct Negate {
        ExprPtr child;
    };
    struct Binary {
        BinOp op;
        ExprPtr lhs, rhs;
    };
    struct Power {
        ExprPtr base;
        int exponent;  // unsigned in the grammar
    };
    struct Call {
        Elem fn;
        ExprPtr arg;
    };

    std::variant<Number, Variable, Constant, Negate, Binary, Power, Call> node;
};

inline bool ast_equal(const Expr& a, const Expr& b);

namespace detail {

struct AstEq {
    const Expr& other;
    bool operator()(const Expr::Number& n) const {
        auto* o = std::get_if<Expr::Number>(&other.node);
        return o && *o == n;
    }
    bool operator()(const Expr::Variable& v) const {
        auto* o = std::get_if<Expr::Variable>(&other.node);
        return o && *o == v;
    }
    bool operator()(const Expr::Constant& c) const {
        auto* o = std::get_if<Expr::Constant>(&other.node);
        return o && *o == c;
    }
    bool operator()(const Expr::Negate& n) const {
        auto* o = std::get_if<Expr::Negate>(&other.node);
        return o && ast_equal(*n.child, *o->child);
    }
    bool operator()(const Expr::Binary& b) const {
        auto* o = std::get_if<Expr::Binary>(&other.node);
        return o && o->op == b.op && ast_equal(*b.lhs, *o->lhs) && ast_equal(*b.rhs, *o->rhs);
    }
    bool operator()(const Expr::Power& p) const {
        auto* o = std::get_if<Expr::Power>(&other.node);
        return o && o->exponent == p.exponent && ast_equal(*p.base, *o->base);
    }
    bool operator()(const Expr::Call& c) const {
        auto* o = std::get_if<Expr::Call>(&other.node);
        return o && o->fn == c.fn && ast_equal(*c.arg, *o->arg);
    }
};

}  // namespace detail

inline bool ast_equal(const Expr& a, const Expr& b) {
    return std::visit(detail::AstEq{b}, a.node);
}

namespace detail {

inline std::optional<Elem> function_by_name(std::string_view name) {
    if (name == "sin") return Elem::Sin;
    if (name == "cos") return Elem::Cos;
    if (name == "tan") return Elem::Tan;
    if (name == "sinh") return Elem::Sinh;
    if (name == "cosh") return Elem::Cosh;
    if (name == "tanh") return Elem::Tanh;
    if (name == "coth") return Elem::Coth;
    if (name == "exp") return Elem::Exp;
    if (name == "ln") return Elem::Ln;
    if (name == "sqrt") return Elem::Sqrt;
    return std::nullopt;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(pos_, "expected operator or end of input");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            if (eat('+'))
                lhs = make(Expr::Binary{BinOp::Add, lhs, term()});
            else if (eat('-'))
                lhs = make(Expr::Binary{BinOp::Sub, lhs, term()});
            else
                return lhs;
        }
    }

    ExprPtr term() {
        ExprPtr lhs = unary();
        for (;;) {
            if (eat('*'))
                lhs = make(Expr::Binary{BinOp::Mul, lhs, unary()});
            else if (eat('/'))
                lhs = make(Expr::Binary{BinOp::Div, lhs, unary()});
            else
                return lhs;
        }
    }

    ExprPtr unary() {
        if (eat('-')) return make(Expr::Negate{unary()});
        return power();
    }

    ExprPtr power() {
        ExprPtr base = atom();
        while (eat('^')) base = make(Expr::Power{base, exponent()});
        return base;
    }

    int exponent() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == start) throw ParseError(start, "expected integer exponent after '^'");
        int value = 0;
        for (std::size_t i = start; i < pos_; ++i) {
            value = value * 10 + (src_[i] - '0');
            if (value > 64) throw ParseError(start, "exponent too large");
        }
        return value;
    }

    ExprPtr atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError(pos_, "unexpected end of input");
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        if (c == '(') {
            ++pos_;
            ExprPtr e = expr();
            if (!eat(')')) throw ParseError(pos_, "expected ')'");
            return e;
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'");
    }

    ExprPtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                pos_ = mark;  // "2e" is "2" followed by an identifier, let the caller fail
            } else {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        return make(Expr::Number{std::stod(text)});
    }

    ExprPtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string_view name = src_.substr(start, pos_ - start);
        if (auto fn = function_by_name(name)) {
            if (!eat('(')) throw ParseError(pos_, "expected '(' after function name");
            ExprPtr arg = expr();
            if (!eat(')')) throw ParseError(pos_, "expected ')'");
            return make(Expr::Call{*fn, arg});
        }
        if (name == "x") return make(Expr::Variable{Var::X});
        if (name == "y") return make(Expr::Variable{Var::Y});
        if (name == "a" || name == "pi") return make(Expr::Constant{std::string(name)});
        throw UnknownIdentifier(start, std::string(name));
    }

    template <class Node>
    static ExprPtr make(Node&& n) {
        return std::make_shared<Expr>(Expr{std::forward<Node>(n)});
    }
};

}  // namespace detail

inline ExprPtr parse(std::string_view source) { return detail::Parser(source).parse(); }

namespace detail {

// Precedence levels used by the printer: 0 add, 1 mul, 2 unary minus, 3 pow, 4 atom.
inline int precedence(const Expr& e) {
    return std::visit(
        [](const auto& n) -> int {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Expr::Binary>)
                return (n.op == BinOp::Add || n.op == BinOp::Sub) ? 0 : 1;
            else if constexpr (std::is_same_v<T, Expr::Negate>)
                return 2;
            else if constexpr (std::is_same_v<T, Expr::Power>)
                return 3;
            else
                return 4;
        },
        e.node);
}

inline void print_to(const Expr& e, std::string& out);

inline void print_child(const Expr& child, int parent_prec, bool is_right, std::string& out) {
    const int prec = precedence(child);
    const bool wrap = prec < parent_prec || (prec == parent_prec && is_right);
    if (wrap) out += '(';
    print_to(child, out);
    if (wrap) out += ')';
}

inline void print_to(const Expr& e, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Expr::Number>) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                out += buf;
            } else if constexpr (std::is_same_v<T, Expr::Variable>) {
                out += (n.which == Var::X ? 'x' : 'y');
            } else if constexpr (std::is_same_v<T, Expr::Constant>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Expr::Negate>) {
                out += '-';
                print_child(*n.child, 2, true, out);
            } else if constexpr (std::is_same_v<T, Expr::Binary>) {
                const int prec = (n.op == BinOp::Add || n.op == BinOp::Sub) ? 0 : 1;
                print_child(*n.lhs, prec, false, out);
                switch (n.op) {
                    case BinOp::Add: out += '+'; break;
                    case BinOp::Sub: out += '-'; break;
                    case BinOp::Mul: out += '*'; break;
                    case BinOp::Div: out += '/'; break;
                }
                print_child(*n.rhs, prec, true, out);
            } else if constexpr (std::is_same_v<T, Expr::Power>) {
                print_child(*n.base, 4, false, out);  // base must be atom-tight
                out += '^';
                out += std::to_string(n.exponent);
            } else if constexpr (std::is_same_v<T, Expr::Call>) {
                out += elem_name(n.fn);
                out += '(';
                print_to(*n.arg, out);
                out += ')';
            }
        },
        e.node);
}

}  // namespace detail

inline std::string pretty_print(const Expr& e) {
    std::string out;
    detail::print_to(e, out);
    return out;
}

using Bindings = std::map<std::string, double>;

inline double binding_value(const std::string& name, const Bindings& bindings) {
    if (name == "pi") {
        auto it = bindings.find(name);
        return it != bindings.end() ? it->second : 3.14159265358979323846;
    }
    auto it = bindings.find(name);
    if (it == bindings.end()) throw UnboundConstant(name);
    return it->second;
}

// Jet of the expression at base (x, y, ., .); z and t never enter.
inline Jet eval_jet(const Expr& e, const Point4& base, const Bindings& bindings) {
    return std::visit(
        [&](const auto& n) -> Jet {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Expr::Number>) {
                return jet_constant(n.value, base);
            } else if constexpr (std::is_same_v<T, Expr::Variable>) {
                return jet_variable(n.which == Var::X ? 0 : 1, base);
            } else if constexpr (std::is_same_v<T, Expr::Constant>) {
                return jet_constant(binding_value(n.name, bindings), base);
            } else if constexpr (std::is_same_v<T, Expr::Negate>) {
                return -eval_jet(*n.child, base, bindings);
            } else if constexpr (std::is_same_v<T, Expr::Binary>) {
                const Jet l = eval_jet(*n.lhs, base, bindings);
                const Jet r = eval_jet(*n.rhs, base, bindings);
                switch (n.op) {
                    case BinOp::Add: return l + r;
                    case BinOp::Sub: return l - r;
                    case BinOp::Mul: return l * r;
                    case BinOp::Div: return l / r;
                }
                throw DomainError("unreachable");
            } else if constexpr (std::is_same_v<T, Expr::Power>) {
                return jet_pow(eval_jet(*n.base, base, bindings), n.exponent);
            } else {
                return jet_apply(n.fn, eval_jet(*n.arg, base, bindings));
            }
        },
        e.node);
}

inline Jet eval_jet(const Expr& e, double x, double y, const Bindings& bindings) {
    return eval_jet(e, Point4{x, y, 0.0, 0.0}, bindings);
}

// Plain scalar evaluation, used where no derivatives are needed.
inline double eval_value(const Expr& e, double x, double y, const Bindings& bindings) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Expr::Number>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, Expr::Variable>) {
                return n.which == Var::X ? x : y;
            } else if constexpr (std::is_same_v<T, Expr::Constant>) {
                return binding_value(n.name, bindings);
            } else if constexpr (std::is_same_v<T, Expr::Negate>) {
                return -eval_value(*n.child, x, y, bindings);
            } else if constexpr (std::is_same_v<T, Expr::Binary>) {
                const double l = eval_value(*n.lhs, x, y, bindings);
                const double r = eval_value(*n.rhs, x, y, bindings);
                switch (n.op) {
                    case BinOp::Add: return l + r;
                    case BinOp::Sub: return l - r;
                    case BinOp::Mul: return l * r;
                    case BinOp::Div: return l / r;
                }
                throw DomainError("unreachable");
            } else if constexpr (std::is_same_v<T, Expr::Power>) {
                double b = eval_value(*n.base, x, y, bindings);
                double r = 1.0;
                for (int i = 0; i < n.exponent; ++i) r *= b;
                return r;
            } else {
                const double v = eval_value(*n.arg, x, y, bindings);
                return detail::elem_derivatives(n.fn, v)[0];
            }
        },
        e.node);
}

}  // namespace calabi
