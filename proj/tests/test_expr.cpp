#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "calabi/expr.hpp"
#include "test_support.hpp"

using namespace calabi;
using calabi::testing::fd_laplacian_xy;
using calabi::testing::uniform;

namespace {

// Random AST with non-negative numeric literals (the grammar has no signed
// literals; minus is always a Negate node).
ExprPtr random_ast(std::mt19937_64& rng, int depth) {
    auto node = [&](auto&& n) { return std::make_shared<Expr>(Expr{n}); };
    const int leaf_kind = int(rng() % 4);
    if (depth <= 0) {
        switch (leaf_kind) {
            case 0: return node(Expr::Number{uniform(rng, 0.0, 9.0)});
            case 1: return node(Expr::Variable{Var::X});
            case 2: return node(Expr::Variable{Var::Y});
            default: return node(Expr::Constant{rng() % 2 ? "a" : "pi"});
        }
    }
    switch (rng() % 7) {
        case 0:
            return node(Expr::Binary{BinOp(rng() % 4), random_ast(rng, depth - 1),
                                     random_ast(rng, depth - 1)});
        case 1: return node(Expr::Negate{random_ast(rng, depth - 1)});
        case 2: return node(Expr::Power{random_ast(rng, depth - 1), int(rng() % 4)});
        case 3: {
            static const Elem fns[] = {Elem::Sin, Elem::Cos,  Elem::Tan,  Elem::Sinh, Elem::Cosh,
                                       Elem::Tanh, Elem::Coth, Elem::Exp, Elem::Ln,   Elem::Sqrt};
            return node(Expr::Call{fns[rng() % 10], random_ast(rng, depth - 1)});
        }
        default: return random_ast(rng, 0);
    }
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

}  // namespace

TEST_CASE("grammar shapes") {
    SECTION("1/(1+x^2+y^2)") {
        const ExprPtr e = parse("1/(1+x^2+y^2)");
        const auto* div = std::get_if<Expr::Binary>(&e->node);
        REQUIRE(div != nullptr);
        CHECK(div->op == BinOp::Div);
        CHECK(std::get<Expr::Number>(div->lhs->node).value == 1.0);
        const auto* add = std::get_if<Expr::Binary>(&div->rhs->node);
        REQUIRE(add != nullptr);
        CHECK(add->op == BinOp::Add);  // (1 + x^2) + y^2, left-associative
        const auto* pow = std::get_if<Expr::Power>(&add->rhs->node);
        REQUIRE(pow != nullptr);
        CHECK(pow->exponent == 2);
    }
    SECTION("sqrt(2)/(a*(1+x^2+y^2)) references the constant a") {
        const ExprPtr e = parse("sqrt(2)/(a*(1+x^2+y^2))");
        CHECK(std::abs(eval_value(*e, 0, 0, {{"a", 2.0}}) - std::sqrt(2.0) / 2.0) < 1e-15);
    }
    SECTION("whitespace is insignificant") {
        CHECK(ast_equal(*parse(" 1 + x * y "), *parse("1+x*y")));
    }
}

TEST_CASE("parse errors carry byte offsets") {
    try {
        parse("1 + )");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.offset == 4);
    }
    CHECK_THROWS_AS(parse("2x"), ParseError);          // no implicit multiplication
    CHECK_THROWS_AS(parse("b*(1+x)"), UnknownIdentifier);
    CHECK_THROWS_AS(parse("sin"), ParseError);         // function requires (
    CHECK_THROWS_AS(parse("x^y"), ParseError);         // integer exponents only
    CHECK_THROWS_AS(parse("x^(2)"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("(1+x"), ParseError);
    CHECK_THROWS_AS(parse("1..2"), ParseError);
    CHECK_THROWS_AS(parse("1+*2"), ParseError);
}

TEST_CASE("malformed fuzz inputs always raise ParseError, never crash") {
    std::mt19937_64 rng(4242);
    const std::string alphabet = "xy a+-*/^().123456789sincoshtanexplnqrt";
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        const int len = int(rng() % 12);
        for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        try {
            parse(s);
        } catch (const ParseError&) {
        }
    }
    SUCCEED();
}

TEST_CASE("precedence") {
    const Bindings none;
    CHECK(eval_value(*parse("-x^2"), 2, 0, none) == -4.0);      // ^ binds tighter than unary -
    CHECK(eval_value(*parse("2^3^2"), 0, 0, none) == 64.0);     // left-associative
    CHECK(eval_value(*parse("1-2-3"), 0, 0, none) == -4.0);
    CHECK(eval_value(*parse("6/3/2"), 0, 0, none) == 1.0);
    CHECK(eval_value(*parse("2*-3"), 0, 0, none) == -6.0);
    CHECK(eval_value(*parse("1+2*3"), 0, 0, none) == 7.0);
    CHECK(std::abs(eval_value(*parse("cos(pi)"), 0, 0, none) + 1.0) < 1e-15);
}

TEST_CASE("parse . pretty_print . parse is the identity on ASTs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const ExprPtr ast = random_ast(rng, 4);
        const std::string printed = pretty_print(*ast);
        const ExprPtr reparsed = parse(printed);
        INFO("printed: " << printed);
        CHECK(ast_equal(*ast, *reparsed));
        CHECK(pretty_print(*reparsed) == printed);
    }
}

TEST_CASE("eval_jet is exact on polynomials of degree <= 3") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        double coef[4][4] = {};
        std::string src;
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; j <= 3 - i; ++j) {
                coef[i][j] = std::floor(uniform(rng, -9, 9));
                if (!src.empty()) src += "+";
                src += std::to_string(coef[i][j]) + "*x^" + std::to_string(i) + "*y^" +
                       std::to_string(j);
            }
        const double x0 = uniform(rng, -1, 1), y0 = uniform(rng, -1, 1);
        const Jet jet = eval_jet(*parse(src), x0, y0, {});
        for (int p = 0; p <= 3; ++p)
            for (int q = 0; q <= 3 - p; ++q) {
                double expect = 0.0;
                for (int i = p; i <= 3; ++i)
                    for (int j = q; j <= 3 - i; ++j)
                        expect += coef[i][j] * binom(i, p) * binom(j, q) *
                                  std::pow(x0, i - p) * std::pow(y0, j - q);
                MultiIndex m{{std::uint8_t(p), std::uint8_t(q), 0, 0}};
                CHECK(calabi::testing::rel_err(jet.coeff(m), expect) < 1e-13);
            }
    }
}

TEST_CASE("surface-function jets") {
    SECTION("flat-example h: 1/(1+x^2+y^2)") {
        const ExprPtr h = parse("1/(1+x^2+y^2)");
        const Jet j = eval_jet(*h, 0.0, 0.0, {});
        CHECK(j.value() == 1.0);
        const double lap = laplacian_xy(log(j));
        CHECK(std::abs(lap + 4.0) < 1e-13);
        auto f = [&](const Point4& q) {
            return std::log(1.0 / (1.0 + q[0] * q[0] + q[1] * q[1]));
        };
        CHECK(std::abs(lap - fd_laplacian_xy(f, {0, 0, 0, 0}, 1e-4)) < 1e-6);
    }
    SECTION("H = exp(c^2 (x^2+y^2)) has constant Delta ln H = 4 c^2") {
        const ExprPtr H = parse("exp((x^2+y^2)/2)");  // c^2 = 1/2
        for (double x0 : {0.0, 0.4, -0.7}) {
            const Jet j = eval_jet(*H, x0, 0.3, {});
            CHECK(std::abs(laplacian_xy(log(j)) - 2.0) < 1e-12);
        }
    }
    SECTION("constant expression") {
        const Jet j = eval_jet(*parse("2"), 1.7, -3.2, {});
        CHECK(j.value() == 2.0);
        for (int i = 1; i < kNumCoeffs; ++i) CHECK(j.c[std::size_t(i)] == 0.0);
    }
    SECTION("z and t never enter an expression jet") {
        const Jet j = eval_jet(*parse("x*y+sin(x)"), Point4{0.3, 0.5, -1.2, 0.9}, {});
        for (int i = 0; i < kNumCoeffs; ++i) {
            const auto m = calabi::detail::JetTables::get().index_of[std::size_t(i)];
            if (m.e[2] > 0 || m.e[3] > 0) CHECK(j.c[std::size_t(i)] == 0.0);
        }
    }
}

TEST_CASE("unbound constants are reported") {
    const ExprPtr e = parse("a*x");
    CHECK_THROWS_AS(eval_jet(*e, 1, 1, {}), UnboundConstant);
    CHECK(eval_value(*e, 3, 0, {{"a", 2.0}}) == 6.0);
    // pi has a built-in value, bindings may still override it
    CHECK(std::abs(eval_value(*parse("pi"), 0, 0, {}) - 3.14159265358979323846) < 1e-18);
}

TEST_CASE("domain failures inside evaluation propagate as DomainError") {
    CHECK_THROWS_AS(eval_jet(*parse("ln(x)"), -1.0, 0.0, {}), DomainError);
    CHECK_THROWS_AS(eval_jet(*parse("1/x"), 0.0, 0.0, {}), DomainError);
}
