#pragma once

#include "ptcalc/errors.hpp"
#include "ptcalc/jet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace ptcalc {

// Small dense containers of uniform dimension, generic over the scalar so the
// whole tensor pipeline runs equally on doubles and jets.

template <class T>
struct Vec {
    int n = 0;
    std::vector<T> d;
    Vec() = default;
    Vec(int n_, const T& init) : n(n_), d(static_cast<std::size_t>(n_), init) {}
    T& operator()(int i) { return d[static_cast<std::size_t>(i)]; }
    const T& operator()(int i) const { return d[static_cast<std::size_t>(i)]; }
};

template <class T>
struct Mat {
    int n = 0; // square
    std::vector<T> d;
    Mat() = default;
    Mat(int n_, const T& init) : n(n_), d(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), init) {}
    T& operator()(int i, int j) { return d[static_cast<std::size_t>(i * n + j)]; }
    const T& operator()(int i, int j) const { return d[static_cast<std::size_t>(i * n + j)]; }
};

template <class T>
struct Ten3 {
    int n = 0;
    std::vector<T> d;
    Ten3() = default;
    Ten3(int n_, const T& init) : n(n_), d(static_cast<std::size_t>(n_) * n_ * n_, init) {}
    T& operator()(int i, int j, int k) { return d[static_cast<std::size_t>((i * n + j) * n + k)]; }
    const T& operator()(int i, int j, int k) const { return d[static_cast<std::size_t>((i * n + j) * n + k)]; }
};

template <class T>
struct Ten4 {
    int n = 0;
    std::vector<T> d;
    Ten4() = default;
    Ten4(int n_, const T& init) : n(n_), d(static_cast<std::size_t>(n_) * n_ * n_ * n_, init) {}
    T& operator()(int i, int j, int k, int l) { return d[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)]; }
    const T& operator()(int i, int j, int k, int l) const { return d[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)]; }
};

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

/// Additive zero with the same dimension/order as x.
template <class T>
T zero_like(const T& x) { return x - x; }

template <class C>
double sup_value(const C& c) {
    double m = 0.0;
    for (const auto& v : c.d) m = std::max(m, std::abs(value_of(v)));
    return m;
}

namespace detail {

template <class T>
T det_expand(const Mat<T>& m, std::vector<int>& rows, int col) {
    if (col == m.n - 1) {
        // rows holds exactly one remaining row
        for (int r = 0; r < m.n; ++r)
            if (rows[static_cast<std::size_t>(r)]) return m(r, col);
    }
    T acc = m(0, 0) - m(0, 0);
    double sign = 1.0;
    for (int r = 0; r < m.n; ++r) {
        if (!rows[static_cast<std::size_t>(r)]) continue;
        rows[static_cast<std::size_t>(r)] = 0;
        acc = acc + sign * (m(r, col) * det_expand(m, rows, col + 1));
        rows[static_cast<std::size_t>(r)] = 1;
        sign = -sign;
    }
    return acc;
}

} // namespace detail

/// Division-free Laplace expansion; exact for jets regardless of pivot values.
template <class T>
T determinant(const Mat<T>& m) {
    std::vector<int> rows(static_cast<std::size_t>(m.n), 1);
    return detail::det_expand(m, rows, 0);
}

/// Inverse by Gauss-Jordan elimination with partial pivoting on jet values.
template <class T>
Mat<T> inverse(Mat<T> m) {
    const int n = m.n;
    T zero = m(0, 0) - m(0, 0);
    T one = zero + 1.0;
    Mat<T> inv(n, zero);
    for (int i = 0; i < n; ++i) inv(i, i) = one;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(value_of(m(r, col))) > std::abs(value_of(m(piv, col)))) piv = r;
        if (value_of(m(piv, col)) == 0.0)
            throw Error("inverse: matrix is singular");
        if (piv != col)
            for (int c = 0; c < n; ++c) {
                std::swap(m(piv, c), m(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        T p = m(col, col);
        for (int c = 0; c < n; ++c) {
            m(col, c) = m(col, c) / p;
            inv(col, c) = inv(col, c) / p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            T f = m(r, col);
            for (int c = 0; c < n; ++c) {
                m(r, c) = m(r, c) - f * m(col, c);
                inv(r, c) = inv(r, c) - f * inv(col, c);
            }
        }
    }
    return inv;
}

inline Eigen::MatrixXd values_of(const Mat<Jet>& m) {
    Eigen::MatrixXd out(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) out(i, j) = m(i, j).value();
    return out;
}

inline Eigen::MatrixXd values_of(const Mat<double>& m) {
    Eigen::MatrixXd out(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) out(i, j) = m(i, j);
    return out;
}

inline Vec<double> values_of(const Vec<Jet>& v) {
    Vec<double> out(v.n, 0.0);
    for (int i = 0; i < v.n; ++i) out(i) = v(i).value();
    return out;
}

template <class T>
Mat<T> matmul(const Mat<T>& a, const Mat<T>& b) {
    Mat<T> out(a.n, a.d[0] - a.d[0]);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            T s = a(i, 0) * b(0, j);
            for (int k = 1; k < a.n; ++k) s = s + a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

} // namespace ptcalc
