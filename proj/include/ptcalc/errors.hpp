#pragma once

#include <stdexcept>
#include <string>

namespace ptcalc {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Expression text could not be parsed. `offset` is the byte offset of the
/// failure; `expected` describes the token set that would have been accepted.
struct ParseError : Error {
    std::size_t offset;
    std::string expected;
    ParseError(std::size_t off, const std::string& exp)
        : Error("syntax error at offset " + std::to_string(off) + ": expected " + exp),
          offset(off), expected(exp) {}
};

/// Evaluation hit a point where the expression is not smooth (log/sqrt of a
/// nonpositive value, division by zero, ...). Carries the offending
/// subexpression in printable form.
struct DomainError : Error {
    std::string subexpr;
    DomainError(const std::string& what, const std::string& sub)
        : Error(what + " in subexpression: " + sub), subexpr(sub) {}
};

struct SingularMetricError : Error {
    double det;
    SingularMetricError(double d, const std::string& where)
        : Error("metric is singular (det = " + std::to_string(d) + ") at " + where), det(d) {}
};

struct DegenerateSigmaError : Error {
    double det;
    explicit DegenerateSigmaError(double d)
        : Error("sigma is degenerate (det = " + std::to_string(d) + ")"), det(d) {}
};

/// L(sigma) is singular as a bilinear form; for solutions this happens exactly
/// where the scalar curvature of g^sigma vanishes.
struct AlgebraicDegeneracyError : Error {
    double detL;
    explicit AlgebraicDegeneracyError(double d)
        : Error("L(sigma) is algebraically degenerate (det = " + std::to_string(d) + ")"), detL(d) {}
};

struct ZeroTauError : Error {
    ZeroTauError() : Error("tau vanishes at the requested point") {}
};

struct NotInKernelError : Error {
    double residual;
    explicit NotInKernelError(double r)
        : Error("form is not in ker(kostant_codiff_1): residual = " + std::to_string(r)), residual(r) {}
};

struct KernelVectorError : Error {
    double residual;
    explicit KernelVectorError(double r)
        : Error("vector is not in the numerical kernel of the accumulated constraints"
                " (residual = " + std::to_string(r) + ")"), residual(r) {}
};

struct PathDomainError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    std::string path;
    SchemaError(const std::string& what, const std::string& where)
        : Error(what + " (at " + where + ")"), path(where) {}
};

} // namespace ptcalc
