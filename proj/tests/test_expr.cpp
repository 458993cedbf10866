#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ptcalc/errors.hpp"
#include "ptcalc/expr.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace ptcalc;

namespace {
const std::vector<std::string> xy{"x", "y"};

double eval_value(const std::string& text, std::vector<double> pt) {
    return eval_jet(parse_expression(text, xy), pt, 0).value();
}
} // namespace

TEST_CASE("grammar structure of x^2 + sin(y)") {
    Expr e = parse_expression("x^2 + sin(y)", xy);
    REQUIRE(e.kind == Expr::Kind::Add);
    CHECK(e.kids[0].kind == Expr::Kind::Pow);
    CHECK(e.kids[0].num == 2.0);
    CHECK(e.kids[0].kids[0].kind == Expr::Kind::Var);
    CHECK(e.kids[0].kids[0].var == 0);
    CHECK(e.kids[1].kind == Expr::Kind::Sin);
    CHECK(e.kids[1].kids[0].var == 1);
}

TEST_CASE("unbalanced parenthesis reports offset and expected token") {
    try {
        parse_expression("(1 + x^2", xy);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 8); // end of input
        CHECK(e.expected.find(")") != std::string::npos);
    }
}

TEST_CASE("round-sphere conformal factor parses and evaluates") {
    Expr e = parse_expression("4/(1 + x^2 + y^2)^2", xy);
    Jet j = eval_jet(e, std::vector<double>{0.0, 0.0}, 2);
    CHECK(j.value() == doctest::Approx(4.0));
    CHECK(j.deriv1(0) == doctest::Approx(0.0));
    CHECK(j.deriv2(0, 0) == doctest::Approx(-16.0)); // d^2/dx^2 of 4(1+r^2)^-2 at 0
}

TEST_CASE("precedence and associativity") {
    CHECK(eval_value("2 - 3 - 4", {0, 0}) == doctest::Approx(-5.0));
    CHECK(eval_value("12 / 3 / 2", {0, 0}) == doctest::Approx(2.0));
    CHECK(eval_value("2 + 3 * 4", {0, 0}) == doctest::Approx(14.0));
    CHECK(eval_value("-x^2", {3, 0}) == doctest::Approx(-9.0));  // power binds tighter than unary minus
    CHECK(eval_value("2 * x^2", {3, 0}) == doctest::Approx(18.0));
    CHECK(eval_value("x^-2", {2, 0}) == doctest::Approx(0.25));
    CHECK(eval_value("(x^2)^3", {2, 0}) == doctest::Approx(64.0));
}

TEST_CASE("reserved constants") {
    CHECK(eval_value("sin(pi)", {0, 0}) == doctest::Approx(0.0));
    CHECK(eval_value("log(e)", {0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("unknown identifier") {
    try {
        parse_expression("x + foo", xy);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset == 4);
        CHECK(e.expected.find("foo") != std::string::npos);
    }
}

TEST_CASE("unknown function name") {
    CHECK_THROWS_AS(parse_expression("tan(x)", xy), ParseError);
}

TEST_CASE("non-constant exponent is rejected") {
    CHECK_THROWS_AS(parse_expression("x^y", xy), ParseError);
    CHECK_NOTHROW(parse_expression("x^(1 + 2)", xy));
}

TEST_CASE("statically nonpositive log/sqrt arguments are rejected at parse time") {
    CHECK_THROWS_AS(parse_expression("log(0 - 1)", xy), ParseError);
    CHECK_THROWS_AS(parse_expression("sqrt(-2)", xy), ParseError);
    CHECK_NOTHROW(parse_expression("log(x)", xy));
}

TEST_CASE("pole raises a domain error naming the subexpression") {
    Expr e = parse_expression("1/x", xy);
    try {
        eval_jet(e, std::vector<double>{0.0, 1.0}, 2);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        CHECK(err.subexpr.find("x0") != std::string::npos);
    }
}

TEST_CASE("eval domain errors at runtime") {
    CHECK_THROWS_AS(eval_value("log(x)", {-1.0, 0}), DomainError);
    CHECK_THROWS_AS(eval_value("sqrt(x)", {-0.5, 0}), DomainError);
}

TEST_CASE("chain rule: eval of composite equals jet composition") {
    // f(u) = sin(u), g(x) = x^2 + 1; compare eval(sin(x^2+1)) with the
    // composition of the two univariate jets
    const double x0 = 0.6;
    const int K = 4;
    Jet inner = eval_jet(parse_expression("x^2 + 1", xy), std::vector<double>{x0, 0.0}, K);
    Jet outer = eval_jet(parse_expression("sin(x)", xy), std::vector<double>{inner.value(), 0.0}, K);
    // compose: sum_j outer_j (inner - inner0)^j, reusing the series evaluator
    std::vector<double> d(static_cast<std::size_t>(K) + 1);
    for (int j = 0; j <= K; ++j) {
        std::vector<int> alpha{j, 0};
        double fact = 1.0;
        for (int m = 2; m <= j; ++m) fact *= m;
        d[static_cast<std::size_t>(j)] = outer.deriv(alpha) / fact;
    }
    Jet composed = Jet::compose_series(inner, d);
    Jet direct = eval_jet(parse_expression("sin(x^2 + 1)", xy), std::vector<double>{x0, 0.0}, K);
    for (std::size_t i = 0; i < direct.coeffs().size(); ++i)
        CHECK(composed.coeffs()[i] == doctest::Approx(direct.coeffs()[i]).epsilon(1e-12));
}

TEST_CASE("arbitrary input never escapes the error contract") {
    // random byte soup must either parse or throw ParseError; evaluation may
    // only throw DomainError
    std::mt19937 rng(321);
    const std::string alphabet = "xy+-*/^()0123456789. abcsinlogqrtepE_,";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(1, 24);
    int parsed = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::string text;
        for (int i = 0, m = len(rng); i < m; ++i) text += alphabet[pick(rng)];
        try {
            Expr e = parse_expression(text, xy);
            ++parsed;
            try {
                eval_jet(e, std::vector<double>{0.3, -0.4}, 3);
            } catch (const DomainError&) {
            }
        } catch (const ParseError&) {
        }
    }
    CHECK(parsed > 0); // the soup occasionally forms valid expressions
}

TEST_CASE("to_string survives a reparse") {
    Expr e = parse_expression("4/(1 + x^2 + y^2)^2 - sin(x)*cos(y)", xy);
    std::string s = to_string(e);
    // printer uses canonical variable names x0, x1
    Expr e2 = parse_expression(s, std::vector<std::string>{"x0", "x1"});
    Jet a = eval_jet(e, std::vector<double>{0.3, -0.2}, 3);
    Jet b = eval_jet(e2, std::vector<double>{0.3, -0.2}, 3);
    for (std::size_t i = 0; i < a.coeffs().size(); ++i)
        CHECK(a.coeffs()[i] == doctest::Approx(b.coeffs()[i]).epsilon(1e-13));
}
