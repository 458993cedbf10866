#include "ptcalc/expr.hpp"

#include "ptcalc/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

namespace ptcalc {

Expr Expr::number(double v) {
    Expr e;
    e.kind = Kind::Num;
    e.num = v;
    return e;
}

Expr Expr::variable(int idx) {
    Expr e;
    e.kind = Kind::Var;
    e.var = idx;
    return e;
}

Expr Expr::unary(Kind k, Expr a) {
    Expr e;
    e.kind = k;
    e.kids.push_back(std::move(a));
    return e;
}

Expr Expr::binary(Kind k, Expr a, Expr b) {
    Expr e;
    e.kind = k;
    e.kids.push_back(std::move(a));
    e.kids.push_back(std::move(b));
    return e;
}

Expr Expr::power(Expr base, double exponent) {
    Expr e;
    e.kind = Kind::Pow;
    e.num = exponent;
    e.kids.push_back(std::move(base));
    return e;
}

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE  = 2.71828182845904523536;

std::optional<double> const_fold(const Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
    case K::Num: return e.num;
    case K::Var: return std::nullopt;
    default: break;
    }
    std::vector<double> v;
    for (const auto& kid : e.kids) {
        auto f = const_fold(kid);
        if (!f) return std::nullopt;
        v.push_back(*f);
    }
    switch (e.kind) {
    case K::Add: return v[0] + v[1];
    case K::Sub: return v[0] - v[1];
    case K::Mul: return v[0] * v[1];
    case K::Div: if (v[1] == 0.0) return std::nullopt; return v[0] / v[1];
    case K::Pow: return std::pow(v[0], e.num);
    case K::Neg: return -v[0];
    case K::Sin: return std::sin(v[0]);
    case K::Cos: return std::cos(v[0]);
    case K::Exp: return std::exp(v[0]);
    case K::Log: if (v[0] <= 0.0) return std::nullopt; return std::log(v[0]);
    case K::Sqrt: if (v[0] < 0.0) return std::nullopt; return std::sqrt(v[0]);
    default: return std::nullopt;
    }
}

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string> vars)
        : text_(text), vars_(vars) {}

    Expr run() {
        Expr e = parse_sum();
        skip_ws();
        if (pos_ != text_.size()) fail("end of input or an operator");
        validate(e);
        return e;
    }

private:
    std::string_view text_;
    std::span<const std::string> vars_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& expected) const {
        throw ParseError(pos_, expected);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            if (eat('+')) e = Expr::binary(Expr::Kind::Add, std::move(e), parse_term());
            else if (eat('-')) e = Expr::binary(Expr::Kind::Sub, std::move(e), parse_term());
            else return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_unary();
        for (;;) {
            if (eat('*')) e = Expr::binary(Expr::Kind::Mul, std::move(e), parse_unary());
            else if (eat('/')) e = Expr::binary(Expr::Kind::Div, std::move(e), parse_unary());
            else return e;
        }
    }

    Expr parse_unary() {
        if (eat('-')) return Expr::unary(Expr::Kind::Neg, parse_unary());
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        while (eat('^')) {
            std::size_t at = pos_;
            Expr expo = parse_unary();
            auto folded = const_fold(expo);
            if (!folded) {
                pos_ = at;
                fail("a constant exponent");
            }
            base = Expr::power(std::move(base), *folded);
        }
        return base;
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("a number, identifier or '('");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!eat(')')) fail("\")\"");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        fail("a number, identifier or '('");
    }

    Expr parse_number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double v = 0.0;
        auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc()) fail("a numeric literal");
        pos_ = static_cast<std::size_t>(res.ptr - text_.data());
        return Expr::number(v);
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek() == '(') {
            using K = Expr::Kind;
            K k;
            if (name == "sin") k = K::Sin;
            else if (name == "cos") k = K::Cos;
            else if (name == "exp") k = K::Exp;
            else if (name == "log") k = K::Log;
            else if (name == "sqrt") k = K::Sqrt;
            else {
                pos_ = start;
                fail("a known function (sin, cos, exp, log, sqrt)");
            }
            eat('(');
            Expr arg = parse_sum();
            if (!eat(')')) fail("\")\"");
            return Expr::unary(k, std::move(arg));
        }
        if (name == "pi") return Expr::number(kPi);
        if (name == "e") return Expr::number(kE);
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return Expr::variable(static_cast<int>(i));
        pos_ = start;
        fail("a declared variable name (unknown identifier \"" + name + "\")");
    }

    // statically constant-nonpositive log/sqrt arguments and non-finite
    // exponents are rejected up front
    void validate(const Expr& e) const {
        using K = Expr::Kind;
        if (e.kind == K::Pow && !std::isfinite(e.num))
            throw ParseError(0, "a finite exponent");
        if (e.kind == K::Log || e.kind == K::Sqrt) {
            if (auto v = const_fold(e.kids[0]); v && *v <= 0.0)
                throw ParseError(0, std::string(e.kind == K::Log ? "log" : "sqrt") +
                                        " argument to be positive (constant " +
                                        std::to_string(*v) + " given)");
        }
        for (const auto& kid : e.kids) validate(kid);
    }
};

int precedence(const Expr& e) {
    using K = Expr::Kind;
    switch (e.kind) {
    case K::Add: case K::Sub: return 1;
    case K::Mul: case K::Div: return 2;
    case K::Neg: return 3;
    case K::Pow: return 4;
    default: return 5;
    }
}

void print(std::ostringstream& os, const Expr& e, int parent_prec) {
    using K = Expr::Kind;
    int prec = precedence(e);
    bool parens = prec < parent_prec;
    if (parens) os << '(';
    switch (e.kind) {
    case K::Num: os << e.num; break;
    case K::Var: os << "x" << e.var; break;
    case K::Add: print(os, e.kids[0], prec); os << " + "; print(os, e.kids[1], prec + 1); break;
    case K::Sub: print(os, e.kids[0], prec); os << " - "; print(os, e.kids[1], prec + 1); break;
    case K::Mul: print(os, e.kids[0], prec); os << "*"; print(os, e.kids[1], prec + 1); break;
    case K::Div: print(os, e.kids[0], prec); os << "/"; print(os, e.kids[1], prec + 1); break;
    case K::Pow: print(os, e.kids[0], prec + 1); os << "^" << e.num; break;
    case K::Neg: os << "-"; print(os, e.kids[0], prec); break;
    case K::Sin: os << "sin("; print(os, e.kids[0], 0); os << ")"; break;
    case K::Cos: os << "cos("; print(os, e.kids[0], 0); os << ")"; break;
    case K::Exp: os << "exp("; print(os, e.kids[0], 0); os << ")"; break;
    case K::Log: os << "log("; print(os, e.kids[0], 0); os << ")"; break;
    case K::Sqrt: os << "sqrt("; print(os, e.kids[0], 0); os << ")"; break;
    }
    if (parens) os << ')';
}

} // namespace

Expr parse_expression(std::string_view text, std::span<const std::string> variables) {
    return Parser(text, variables).run();
}

std::string to_string(const Expr& e) {
    std::ostringstream os;
    print(os, e, 0);
    return os.str();
}

int max_variable(const Expr& e) {
    int m = e.kind == Expr::Kind::Var ? e.var : -1;
    for (const auto& kid : e.kids) m = std::max(m, max_variable(kid));
    return m;
}

Jet eval_jet(const Expr& e, std::span<const double> point, int order) {
    using K = Expr::Kind;
    const int n = static_cast<int>(point.size());
    switch (e.kind) {
    case K::Num: return Jet::constant(n, order, e.num);
    case K::Var:
        if (e.var < 0 || e.var >= n)
            throw Error("expression references variable " + std::to_string(e.var) +
                        " outside chart dimension " + std::to_string(n));
        return Jet::variable(n, order, e.var, point[static_cast<std::size_t>(e.var)]);
    case K::Add: return eval_jet(e.kids[0], point, order) + eval_jet(e.kids[1], point, order);
    case K::Sub: return eval_jet(e.kids[0], point, order) - eval_jet(e.kids[1], point, order);
    case K::Mul: return eval_jet(e.kids[0], point, order) * eval_jet(e.kids[1], point, order);
    case K::Div: {
        Jet num = eval_jet(e.kids[0], point, order);
        Jet den = eval_jet(e.kids[1], point, order);
        if (den.value() == 0.0) throw DomainError("division by zero", to_string(e.kids[1]));
        return num / den;
    }
    case K::Pow: {
        Jet base = eval_jet(e.kids[0], point, order);
        try {
            return pow(base, e.num);
        } catch (const DomainError&) {
            throw DomainError("power of a singular value", to_string(e));
        }
    }
    case K::Neg: return -eval_jet(e.kids[0], point, order);
    case K::Sin: return sin(eval_jet(e.kids[0], point, order));
    case K::Cos: return cos(eval_jet(e.kids[0], point, order));
    case K::Exp: return exp(eval_jet(e.kids[0], point, order));
    case K::Log: {
        Jet a = eval_jet(e.kids[0], point, order);
        if (a.value() <= 0.0) throw DomainError("log of a nonpositive value", to_string(e.kids[0]));
        return log(a);
    }
    case K::Sqrt: {
        Jet a = eval_jet(e.kids[0], point, order);
        if (a.value() <= 0.0) throw DomainError("sqrt of a nonpositive value", to_string(e.kids[0]));
        return sqrt(a);
    }
    }
    throw Error("eval_jet: unreachable");
}

} // namespace ptcalc
