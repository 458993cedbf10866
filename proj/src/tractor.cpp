#include "ptcalc/tractor.hpp"

#include "ptcalc/errors.hpp"

#include <cmath>

namespace ptcalc {

int s2_flat_index(int n, int i, int j) {
    if (i > j) std::swap(i, j);
    // row i of the upper triangle starts after i*n - i(i-1)/2 entries
    return i * n - i * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd flatten(const TractorS2<double>& v) {
    const int n = v.sigma.n;
    Eigen::VectorXd out(s2_flat_size(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out(s2_flat_index(n, i, j)) = v.sigma(i, j);
    const int base = n * (n + 1) / 2;
    for (int b = 0; b < n; ++b) out(base + b) = v.mu(b);
    out(base + n) = v.rho;
    return out;
}

TractorS2<double> unflatten(int n, const Eigen::VectorXd& v) {
    TractorS2<double> out{Mat<double>(n, 0.0), Vec<double>(n, 0.0), 0.0};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            out.sigma(i, j) = v(s2_flat_index(n, i, j));
            out.sigma(j, i) = out.sigma(i, j);
        }
    const int base = n * (n + 1) / 2;
    for (int b = 0; b < n; ++b) out.mu(b) = v(base + b);
    out.rho = v(base + n);
    return out;
}

std::vector<Jet> flatten(const TractorS2<Jet>& v) {
    const int n = v.sigma.n;
    std::vector<Jet> out(static_cast<std::size_t>(s2_flat_size(n)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) out[static_cast<std::size_t>(s2_flat_index(n, i, j))] = v.sigma(i, j);
    const int base = n * (n + 1) / 2;
    for (int b = 0; b < n; ++b) out[static_cast<std::size_t>(base + b)] = v.mu(b);
    out[static_cast<std::size_t>(base + n)] = v.rho;
    return out;
}

TractorS2<Jet> unflatten_jets(int n, const std::vector<Jet>& v) {
    TractorS2<Jet> out{Mat<Jet>(n, zero_like(v[0])), Vec<Jet>(n, zero_like(v[0])), zero_like(v[0])};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            out.sigma(i, j) = v[static_cast<std::size_t>(s2_flat_index(n, i, j))];
            out.sigma(j, i) = out.sigma(i, j);
        }
    const int base = n * (n + 1) / 2;
    for (int b = 0; b < n; ++b) out.mu(b) = v[static_cast<std::size_t>(base + b)];
    out.rho = v[static_cast<std::size_t>(base + n)];
    return out;
}

TractorS2<double> values_of(const TractorS2<Jet>& v) {
    const int n = v.sigma.n;
    TractorS2<double> out{Mat<double>(n, 0.0), Vec<double>(n, 0.0), v.rho.value()};
    for (int i = 0; i < n; ++i) {
        out.mu(i) = v.mu(i).value();
        for (int j = 0; j < n; ++j) out.sigma(i, j) = v.sigma(i, j).value();
    }
    return out;
}

S2Form1<double> values_of(const S2Form1<Jet>& f) {
    const int n = f.mu.n;
    S2Form1<double> out{Ten3<double>(n, 0.0), Mat<double>(n, 0.0), Vec<double>(n, 0.0)};
    for (int a = 0; a < n; ++a) {
        out.rho(a) = f.rho(a).value();
        for (int b = 0; b < n; ++b) {
            out.mu(a, b) = f.mu(a, b).value();
            for (int c = 0; c < n; ++c) out.sigma(a, b, c) = f.sigma(a, b, c).value();
        }
    }
    return out;
}

namespace {

Vec<Jet> cov_deriv_scalar(const Jet& s) {
    // weight-w densities are trivialized by the working scale, so the induced
    // derivative is the plain coordinate one
    Vec<Jet> out(s.dim(), Jet());
    for (int a = 0; a < s.dim(); ++a) out(a) = s.derivative(a);
    return out;
}

Mat<Jet> cov_deriv_vec_down(const Vec<Jet>& v, const Ten3<Jet>& gamma) {
    const int n = v.n;
    Mat<Jet> out(n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Jet s = v(b).derivative(a);
            for (int i = 0; i < n; ++i) s -= gamma(i, a, b) * v(i);
            out(a, b) = s;
        }
    return out;
}

} // namespace

CotractorForm1<Jet> cotractor_derivative(const CotractorValue<Jet>& s, const Mat<Jet>& P,
                                         const Ten3<Jet>& gamma) {
    const int n = gamma.n;
    Vec<Jet> dsigma = cov_deriv_scalar(s.sigma);
    Mat<Jet> dmu = cov_deriv_vec_down(s.mu, gamma);
    CotractorForm1<Jet> out{Vec<Jet>(n, Jet()), Mat<Jet>(n, Jet())};
    for (int a = 0; a < n; ++a) {
        out.sigma(a) = dsigma(a) - s.mu(a);
        for (int b = 0; b < n; ++b) out.mu(a, b) = dmu(a, b) + P(a, b) * s.sigma;
    }
    return out;
}

TractorForm1<Jet> tractor_derivative(const TractorValue<Jet>& t, const Mat<Jet>& P,
                                     const Ten3<Jet>& gamma) {
    const int n = gamma.n;
    Mat<Jet> dnu = cov_deriv_vec_up(t.nu, gamma);
    Vec<Jet> drho = cov_deriv_scalar(t.rho);
    TractorForm1<Jet> out{Mat<Jet>(n, Jet()), Vec<Jet>(n, Jet())};
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            out.nu(a, b) = dnu(a, b);
            if (a == b) out.nu(a, b) += t.rho;
        }
        Jet s = drho(a);
        for (int b = 0; b < n; ++b) s -= P(a, b) * t.nu(b);
        out.rho(a) = s;
    }
    return out;
}

S2Form1<Jet> s2_derivative(const TractorS2<Jet>& v, const Mat<Jet>& P, const Ten3<Jet>& gamma) {
    const int n = gamma.n;
    Ten3<Jet> dsigma = cov_deriv_t20(v.sigma, gamma);
    Mat<Jet> dmu = cov_deriv_vec_up(v.mu, gamma);
    Vec<Jet> drho = cov_deriv_scalar(v.rho);

    S2Form1<Jet> out{Ten3<Jet>(n, Jet()), Mat<Jet>(n, Jet()), Vec<Jet>(n, Jet())};
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                Jet s = dsigma(a, b, c);
                if (a == b) s += v.mu(c);
                if (a == c) s += v.mu(b);
                out.sigma(a, b, c) = s;
            }
            Jet m = dmu(a, b);
            if (a == b) m += v.rho;
            for (int c = 0; c < n; ++c) m -= P(a, c) * v.sigma(b, c);
            out.mu(a, b) = m;
        }
        Jet r = drho(a);
        for (int b = 0; b < n; ++b) r -= 2.0 * P(a, b) * v.mu(b);
        out.rho(a) = r;
    }
    return out;
}

TractorS2<Jet> splitting_L(const Mat<Jet>& sigma, const Mat<Jet>& P, const Ten3<Jet>& gamma) {
    const int n = gamma.n;
    Ten3<Jet> dsigma = cov_deriv_t20(sigma, gamma);
    TractorS2<Jet> out{sigma, Vec<Jet>(n, Jet()), Jet()};
    for (int b = 0; b < n; ++b) {
        Jet s = dsigma(0, 0, b);
        for (int i = 1; i < n; ++i) s += dsigma(i, i, b);
        out.mu(b) = (-1.0 / (n + 1)) * s;
    }
    Mat<Jet> dmu = cov_deriv_vec_up(out.mu, gamma);
    Jet divmu = dmu(0, 0);
    for (int i = 1; i < n; ++i) divmu += dmu(i, i);
    Jet psig = zero_like(P(0, 0) * sigma(0, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) psig += P(i, j) * sigma(i, j);
    out.rho = (-1.0 / n) * (divmu - psig);
    return out;
}

Ten3<Jet> bgg_project(const S2Form1<Jet>& phi, double tol) {
    TractorS2<Jet> ks = kostant_codiff_1(phi);
    double knorm = std::max(sup_value(ks.mu), std::abs(ks.rho.value()));
    double scale = std::max({1.0, sup_value(phi.sigma), sup_value(phi.mu), sup_value(phi.rho)});
    if (knorm > tol * scale) throw NotInKernelError(knorm / scale);
    return trace_free_top(phi.sigma);
}

} // namespace ptcalc
