#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ptcalc {

// Truncated multivariate Taylor arithmetic. A Jet of dimension n and order k
// holds the Taylor coefficients f_alpha = (d^alpha f)/alpha! for every
// multi-index |alpha| <= k, enumerated in graded-lexicographic order so that
// the coefficients of order k-1 are a prefix of the coefficients of order k.

inline constexpr int kJetMaxDim   = 6;
inline constexpr int kJetMaxOrder = 8;

/// Shared per-(n,k) enumeration of multi-indices plus a product table.
struct JetLayout {
    int n = 0;
    int k = 0;
    int count = 0;
    std::vector<std::array<std::uint8_t, kJetMaxDim>> mindex;
    std::vector<int> degree;
    std::vector<std::int32_t> lookup;    // mixed-radix (k+1)^n -> rank, -1 if |alpha| > k
    std::vector<std::int32_t> prod;      // count*count -> rank of alpha+beta, -1 if degree overflows

    int rank(std::span<const int> alpha) const;
};

const JetLayout& jet_layout(int n, int k);

class Jet {
public:
    Jet() = default;

    static Jet constant(int n, int k, double v);
    /// Seed for coordinate i: value plus unit first-order coefficient.
    static Jet variable(int n, int k, int i, double value);

    int dim() const { return n_; }
    int order() const { return k_; }
    bool valid() const { return n_ > 0; }

    double value() const { return c_.empty() ? 0.0 : c_[0]; }
    std::span<const double> coeffs() const { return c_; }
    double& coeff(int rank) { return c_[static_cast<std::size_t>(rank)]; }
    double coeff(int rank) const { return c_[static_cast<std::size_t>(rank)]; }

    /// Partial derivative d^alpha f (Taylor coefficient times alpha!).
    double deriv(std::span<const int> alpha) const;
    double deriv1(int i) const;
    double deriv2(int i, int j) const;

    /// Same jet truncated to order k2 <= order().
    Jet truncated(int k2) const;

    /// d/dx_i as a jet of order k-1. Requires order() >= 1.
    Jet derivative(int i) const;

    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator+=(double s);
    Jet& operator-=(double s);
    Jet& operator*=(double s);
    Jet& operator/=(double s);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(double s, const Jet& a);

    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);

    friend Jet sin(const Jet& x);
    friend Jet cos(const Jet& x);
    friend Jet exp(const Jet& x);
    friend Jet log(const Jet& x);
    friend Jet sqrt(const Jet& x);
    friend Jet pow(const Jet& x, double p);

    /// Horner evaluation of sum_j d[j] h^j with h = x - x.value(); used by all
    /// the analytic functions above.
    static Jet compose_series(const Jet& x, std::span<const double> d);

private:
    Jet(int n, int k);
    const JetLayout& layout() const { return jet_layout(n_, k_); }

    int n_ = 0;
    int k_ = 0;
    std::vector<double> c_;
};

std::string to_string(const Jet& j);

} // namespace ptcalc
