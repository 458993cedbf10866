#pragma once

#include "ptcalc/jet.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptcalc {

/// AST of a scalar chart function. Power exponents are constant reals folded
/// at parse time; everything else is evaluated in jet arithmetic.
struct Expr {
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt };

    Kind kind = Kind::Num;
    double num = 0.0;       // Kind::Num value, or Kind::Pow exponent
    int var = -1;           // Kind::Var index into the chart variables
    std::vector<Expr> kids;

    static Expr number(double v);
    static Expr variable(int idx);
    static Expr unary(Kind k, Expr a);
    static Expr binary(Kind k, Expr a, Expr b);
    static Expr power(Expr base, double exponent);
};

/// Parses `text` over the named variables ("pi" and "e" are reserved
/// constants). Throws ParseError with a byte offset on malformed input.
Expr parse_expression(std::string_view text, std::span<const std::string> variables);

/// Degree-`order` Taylor expansion of `e` at `point`. Throws DomainError at
/// singular values, naming the offending subexpression.
Jet eval_jet(const Expr& e, std::span<const double> point, int order);

std::string to_string(const Expr& e);

/// Largest variable index appearing in the tree, -1 if none.
int max_variable(const Expr& e);

} // namespace ptcalc
