#include <partdecomp/expression.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace partdecomp;

namespace {

Rational eval_exact(const std::string& text, std::vector<Rational> x) {
    return evaluate<Rational>(parse_expression(text), std::span<const Rational>(x));
}

double eval_double(const std::string& text, std::vector<double> x) {
    return evaluate<double>(parse_expression(text), std::span<const double>(x));
}

}  // namespace

TEST_CASE("parse and evaluate", "[expression]") {
    CHECK(eval_exact("x1*x2 + 1/2", {Rational(2), Rational(3)}) == Rational(13, 2));
    CHECK(eval_exact("-x1^2", {Rational(3)}) == -9);
    CHECK(eval_exact("(-x1)^2", {Rational(3)}) == 9);
    CHECK(eval_exact("2^3^2", {}) == 512);
    CHECK(eval_exact("2^-1", {}) == Rational(1, 2));
    CHECK(eval_exact("10 - 4 - 3", {}) == 3);
    CHECK(eval_exact("12 / 3 / 2", {}) == 2);
    CHECK(eval_exact("0.1 + .25 + 1e-2", {}) == Rational(36, 100));
    CHECK(eval_exact("relu(x1 - 1)", {Rational(-4)}) == 0);
    CHECK(eval_exact("relu(x1 - 1)", {Rational(4)}) == 3);
    CHECK(eval_exact("x1^0", {Rational(0)}) == 1);
    CHECK(eval_double("exp(x1) * log(x2)", {1.0, std::exp(2.0)}) == Catch::Approx(2 * std::exp(1.0)));
    CHECK(eval_double("x1^0.5", {2.0}) == Catch::Approx(std::sqrt(2.0)));
    CHECK(eval_double("sin(x1)^2 + cos(x1)^2", {0.7}) == Catch::Approx(1.0));
    CHECK(parse_expression("x3 + x12*x1").max_variable() == 12);
    CHECK(parse_expression("7").max_variable() == 0);
}

TEST_CASE("parse errors", "[expression][errors]") {
    try {
        parse_expression("x1**2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("use '^' for powers") != std::string::npos);
        CHECK(e.position() == 3);
    }
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x0 + 1"), ParseError);
    CHECK_THROWS_AS(parse_expression("y + 1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 +"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 x2"), ParseError);
    CHECK_THROWS_AS(parse_expression("exp x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("1e"), ParseError);
    CHECK_THROWS_AS(parse_expression("x65"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 # 2"), ParseError);
}

TEST_CASE("evaluation errors", "[expression][errors]") {
    CHECK_THROWS_AS(eval_exact("exp(x1)", {Rational(0)}), ExactnessError);
    CHECK_THROWS_AS(eval_exact("x1^(1/2)", {Rational(4)}), ExactnessError);
    CHECK_THROWS_AS(eval_exact("1/(x1 - 1)", {Rational(1)}), DomainError);
    CHECK_THROWS_AS(eval_exact("x1^-1", {Rational(0)}), DomainError);
    CHECK_THROWS_AS(eval_double("log(x1)", {0.0}), DomainError);
    CHECK_THROWS_AS(eval_exact("x2", {Rational(1)}), ArityError);
    CHECK_THROWS_AS(make_oracle<Rational>(parse_expression("x3"), 2), ArityError);
    CHECK(make_oracle<Rational>(parse_expression("5")).arity == 1);
    CHECK(make_oracle<Rational>(parse_expression("x1"), 3).arity == 3);
}

TEST_CASE("printing round-trips", "[expression]") {
    const char* cases[] = {"x1 - (x2 - x3)", "(x1 + x2)*x3",  "x1^x2^x3",     "(x1^x2)^x3", "-x1^2",
                           "(-x1)^2",        "x1/(x2*x3)",    "x1 - -x2",     "exp(x1 + 2*x2)",
                           "(1/3)*x1",       "0.25*x1 + 1e3", "relu(x1)*sin(x2)/cos(x3)"};
    for (const char* text : cases) {
        const std::string once = print_expression(parse_expression(text));
        CHECK(print_expression(parse_expression(once)) == once);
    }
    CHECK(print_expression(parse_expression("((x1))+((x2*x3))")) == "x1 + x2*x3");
    CHECK(print_expression(parse_expression("x1-(x2-x3)")) == "x1 - (x2 - x3)");
    CHECK(print_expression(parse_expression("(x1^x2)^x3")) == "(x1^x2)^x3");

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto e = parse_expression(testing::random_polynomial(3, rng));
        const auto again = parse_expression(print_expression(e));
        const std::vector<Rational> x{Rational(2, 3), Rational(-5), Rational(7, 2)};
        CHECK(evaluate<Rational>(e, x) == evaluate<Rational>(again, x));
    }
}

TEST_CASE("polynomial detection", "[expression]") {
    CHECK(is_polynomial(parse_expression("x1*x2 + 3")));
    CHECK(is_polynomial(parse_expression("(x1 + x2)^3 / 4")));
    CHECK(is_polynomial(parse_expression("x1^(4/2)")));
    CHECK_FALSE(is_polynomial(parse_expression("x1 / x2")));
    CHECK_FALSE(is_polynomial(parse_expression("x1^-1")));
    CHECK_FALSE(is_polynomial(parse_expression("x1^(1/2)")));
    CHECK_FALSE(is_polynomial(parse_expression("x1 / (2 - 2)")));
    CHECK_FALSE(is_polynomial(parse_expression("exp(x1)")));
    CHECK_FALSE(is_polynomial(parse_expression("relu(x1)")));
    CHECK_FALSE(is_polynomial(parse_expression("x1^x2")));
}

TEST_CASE("symbolic derivatives", "[expression]") {
    CHECK(print_expression(differentiate(parse_expression("x1*x2"), 1)) == "x2");
    CHECK(print_expression(differentiate(parse_expression("x1*x2"), 3)) == "0");
    CHECK(print_expression(differentiate(parse_expression("x1^3"), 1)) == "3*x1^2");
    CHECK_THROWS_AS(differentiate(parse_expression("relu(x1)"), 1), DomainError);
    CHECK(print_expression(differentiate(parse_expression("relu(x1)"), 2)) == "0");
    CHECK_THROWS_AS(differentiate(parse_expression("x1"), 0), DomainError);

    const char* cases[] = {"exp(x1 + x2*x3)", "sin(x1*x2) / (1 + x3^2)", "log(x1^2 + 1) * cos(x2)",
                           "x1^x2",           "(x1 - x3)^5 - 3*x2/x1", "x2^(1/3)"};
    const std::vector<double> x{0.8, 1.3, -0.4};
    for (const char* text : cases) {
        const auto e = parse_expression(text);
        for (int i = 1; i <= 3; ++i) {
            const double h = 1e-6;
            std::vector<double> up = x;
            std::vector<double> down = x;
            up[i - 1] += h;
            down[i - 1] -= h;
            const double numeric =
                (evaluate<double>(e, std::span<const double>(up)) - evaluate<double>(e, std::span<const double>(down))) /
                (2 * h);
            const double symbolic = evaluate<double>(differentiate(e, i), std::span<const double>(x));
            CHECK(symbolic == Catch::Approx(numeric).epsilon(1e-6).margin(1e-8));
        }
    }

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto e = parse_expression(testing::random_polynomial(2, rng));
        const auto d = differentiate(e, 1);
        CHECK(is_polynomial(d));
    }
}
