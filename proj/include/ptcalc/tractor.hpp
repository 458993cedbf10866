#pragma once

#include "ptcalc/geometry.hpp"
#include "ptcalc/tensor.hpp"

#include <Eigen/Dense>

namespace ptcalc {

// Tractor calculus in the splitting determined by the working special
// connection. Slot conventions:
//   cotractor E_A  = (sigma: weight-1 density, mu_b: weight-1 covector)
//   tractor   E^A  = (nu^b: weight -1 vector, rho: weight -1 density)
//   S^2 tractor    = (sigma^{bc} sym, mu^b, rho), all weight -2
// flatten() layout is frozen: sigma upper-triangular lexicographic
// (sigma^{11}, sigma^{12}, ..., sigma^{nn}), then mu^1..mu^n, then rho;
// length N = (n+1)(n+2)/2.

template <class T>
struct CotractorValue {
    T sigma;
    Vec<T> mu;
};

template <class T>
struct TractorValue {
    Vec<T> nu;
    T rho;
};

template <class T>
struct TractorS2 {
    Mat<T> sigma;
    Vec<T> mu;
    T rho;
};

/// 1-form with values in the indicated bundle; the first index is the form index.
template <class T>
struct CotractorForm1 {
    Vec<T> sigma; // (a)
    Mat<T> mu;    // (a, b)
};

template <class T>
struct TractorForm1 {
    Mat<T> nu; // (a, b)
    Vec<T> rho;
};

template <class T>
struct S2Form1 {
    Ten3<T> sigma; // (a, b, c), symmetric in (b, c)
    Mat<T> mu;     // (a, b)
    Vec<T> rho;    // (a)
};

/// 2-form, antisymmetric in the form indices (a, b).
template <class T>
struct S2Form2 {
    Ten4<T> sigma; // (a, b, c, d), symmetric in (c, d)
    Ten3<T> mu;    // (a, b, c)
    Mat<T> rho;    // (a, b)
};

inline int s2_flat_size(int n) { return (n + 1) * (n + 2) / 2; }
int s2_flat_index(int n, int i, int j); // index of sigma^{ij} (i <= j) in the flat layout

Eigen::VectorXd flatten(const TractorS2<double>& v);
TractorS2<double> unflatten(int n, const Eigen::VectorXd& v);
std::vector<Jet> flatten(const TractorS2<Jet>& v);
TractorS2<Jet> unflatten_jets(int n, const std::vector<Jet>& v);

/// Values of a jet-valued section.
TractorS2<double> values_of(const TractorS2<Jet>& v);
S2Form1<double> values_of(const S2Form1<Jet>& f);

/// The (n+1)x(n+1) symmetric matrix of an S^2 tractor in the splitting,
/// indexed (nu^1..nu^n, rho-direction).
template <class T>
Mat<T> s2_matrix(const TractorS2<T>& v) {
    const int n = v.sigma.n;
    Mat<T> m(n + 1, zero_like(v.rho));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v.sigma(i, j);
    for (int i = 0; i < n; ++i) {
        m(i, n) = v.mu(i);
        m(n, i) = v.mu(i);
    }
    m(n, n) = v.rho;
    return m;
}

// the cotractor, tractor and S^2 tractor connections in the working splitting
CotractorForm1<Jet> cotractor_derivative(const CotractorValue<Jet>& s, const Mat<Jet>& P,
                                         const Ten3<Jet>& gamma);
TractorForm1<Jet> tractor_derivative(const TractorValue<Jet>& t, const Mat<Jet>& P,
                                     const Ten3<Jet>& gamma);
S2Form1<Jet> s2_derivative(const TractorS2<Jet>& v, const Mat<Jet>& P, const Ten3<Jet>& gamma);

/// Tractor pairing <(sigma, mu), (nu, rho)> = sigma rho + mu_b nu^b.
template <class T>
T tractor_pairing(const CotractorValue<T>& s, const TractorValue<T>& t) {
    T acc = s.sigma * t.rho;
    for (int b = 0; b < s.mu.n; ++b) acc = acc + s.mu(b) * t.nu(b);
    return acc;
}

/// Kostant codifferential in degree 1: phi |-> (0, phi_i{}^{ib}, 2 phi_i{}^i).
template <class T>
TractorS2<T> kostant_codiff_1(const S2Form1<T>& phi) {
    const int n = phi.mu.n;
    T zero = zero_like(phi.rho(0));
    TractorS2<T> out{Mat<T>(n, zero), Vec<T>(n, zero), zero};
    for (int b = 0; b < n; ++b) {
        T s = zero;
        for (int i = 0; i < n; ++i) s = s + phi.sigma(i, i, b);
        out.mu(b) = s;
    }
    T r = zero;
    for (int i = 0; i < n; ++i) r = r + phi.mu(i, i);
    out.rho = 2.0 * r;
    return out;
}

/// Degree 2: (d* psi)_a = sum_b X(e^b) psi_{ab}, i.e.
/// (0, sum_b psi_ab{}^{bc}, 2 sum_b psi_ab{}^b). Composes to zero with the
/// degree-1 map identically.
template <class T>
S2Form1<T> kostant_codiff_2(const S2Form2<T>& psi) {
    const int n = psi.rho.n;
    T zero = zero_like(psi.rho(0, 0));
    S2Form1<T> out{Ten3<T>(n, zero), Mat<T>(n, zero), Vec<T>(n, zero)};
    for (int a = 0; a < n; ++a) {
        for (int c = 0; c < n; ++c) {
            T s = zero;
            for (int b = 0; b < n; ++b) s = s + psi.sigma(a, b, b, c);
            out.mu(a, c) = s;
        }
        T r = zero;
        for (int b = 0; b < n; ++b) r = r + psi.mu(a, b, b);
        out.rho(a) = 2.0 * r;
    }
    return out;
}

/// Trace-free part of a top-slot tensor T_a{}^{bc} (symmetric in bc):
/// T - (delta^b_a T_i{}^{ic} + delta^c_a T_i{}^{ib})/(n+1).
template <class T>
Ten3<T> trace_free_top(const Ten3<T>& t) {
    const int n = t.n;
    Vec<T> tr(n, zero_like(t(0, 0, 0)));
    for (int c = 0; c < n; ++c) {
        T s = zero_like(t(0, 0, 0));
        for (int i = 0; i < n; ++i) s = s + t(i, i, c);
        tr(c) = s;
    }
    Ten3<T> out = t;
    const double f = 1.0 / (n + 1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                if (b == a) out(a, b, c) = out(a, b, c) - f * tr(c);
                if (c == a) out(a, b, c) = out(a, b, c) - f * tr(b);
            }
    return out;
}

/// BGG splitting operator: lifts sigma^{bc} (weight -2, order >= 2 jets) to the
/// unique S^2 tractor with Pi(L(sigma)) = sigma and d*(nabla L(sigma)) = 0:
///   mu^b = -(1/(n+1)) nabla_i sigma^{ib}
///   rho  = -(1/n)(nabla_i mu^i - P_ij sigma^{ij})
TractorS2<Jet> splitting_L(const Mat<Jet>& sigma, const Mat<Jet>& P, const Ten3<Jet>& gamma);

/// Homology projection of a form in ker(d*): the trace-free part of the top
/// slot. Applied to s2_derivative(splitting_L(sigma)) this is D(sigma).
/// Throws NotInKernelError when ||d* phi|| > tol * max(1, ||phi||).
Ten3<Jet> bgg_project(const S2Form1<Jet>& phi, double tol = 1e-8);

} // namespace ptcalc
