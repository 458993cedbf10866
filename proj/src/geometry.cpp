#include "ptcalc/geometry.hpp"

#include "ptcalc/errors.hpp"

#include <cmath>
#include <sstream>

namespace ptcalc {

namespace {

std::string point_string(std::span<const double> point) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
    os << ")";
    return os.str();
}

} // namespace

Mat<Jet> eval_metric(const ChartGeometry& geom, std::span<const double> point, int order) {
    if (!geom.has_metric) throw Error("geometry \"" + geom.name + "\" has no metric");
    Mat<Jet> g(geom.n, Jet());
    for (int i = 0; i < geom.n; ++i)
        for (int j = 0; j < geom.n; ++j)
            g(i, j) = eval_jet(geom.metric(i, j), point, order);
    return g;
}

Ten3<Jet> christoffels_from_metric(const Mat<Jet>& g, std::span<const double> point) {
    const int n = g.n;
    Jet detg = determinant(g);
    if (std::abs(detg.value()) < 1e-12)
        throw SingularMetricError(detg.value(), point_string(point));
    Mat<Jet> ginv = inverse(g);

    Ten3<Jet> dg(n, Jet::constant(g.d[0].dim(), g.d[0].order() - 1, 0.0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) dg(a, b, c) = g(b, c).derivative(a);

    Ten3<Jet> gamma(n, dg.d[0]);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                Jet s = ginv(c, 0) * (dg(a, 0, b) + dg(b, 0, a) - dg(0, a, b));
                for (int d = 1; d < n; ++d)
                    s += ginv(c, d) * (dg(a, d, b) + dg(b, d, a) - dg(d, a, b));
                gamma(c, a, b) = 0.5 * s;
            }
    return gamma;
}

Ten3<Jet> specialize_connection(const Ten3<Jet>& gamma) {
    const int n = gamma.n;
    Vec<Jet> alpha(n, gamma.d[0] - gamma.d[0]);
    for (int a = 0; a < n; ++a) {
        Jet s = gamma(0, 0, a);
        for (int i = 1; i < n; ++i) s += gamma(i, i, a);
        alpha(a) = -s;
    }
    Ten3<Jet> out = gamma;
    const double f = 1.0 / (n + 1);
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (c == a) out(c, a, b) += f * alpha(b);
                if (c == b) out(c, a, b) += f * alpha(a);
            }
    return out;
}

Ten3<Jet> cov_deriv_t20(const Mat<Jet>& t, const Ten3<Jet>& gamma) {
    const int n = t.n;
    Ten3<Jet> out(n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                Jet s = t(b, c).derivative(a);
                for (int i = 0; i < n; ++i)
                    s += gamma(b, a, i) * t(i, c) + gamma(c, a, i) * t(b, i);
                out(a, b, c) = s;
            }
    return out;
}

Ten3<Jet> cov_deriv_t02(const Mat<Jet>& t, const Ten3<Jet>& gamma) {
    const int n = t.n;
    Ten3<Jet> out(n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                Jet s = t(b, c).derivative(a);
                for (int i = 0; i < n; ++i)
                    s -= gamma(i, a, b) * t(i, c) + gamma(i, a, c) * t(b, i);
                out(a, b, c) = s;
            }
    return out;
}

Mat<Jet> cov_deriv_vec_up(const Vec<Jet>& v, const Ten3<Jet>& gamma) {
    const int n = v.n;
    Mat<Jet> out(n, Jet());
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Jet s = v(b).derivative(a);
            for (int i = 0; i < n; ++i) s += gamma(b, a, i) * v(i);
            out(a, b) = s;
        }
    return out;
}

CurvaturePack curvature_pack(const Ten3<Jet>& gamma, bool want_cotton) {
    const int n = gamma.n;
    const int m = gamma.d[0].order();
    if (m < 1) throw Error("curvature_pack: connection jets must have order >= 1");
    if (want_cotton && m < 2)
        throw Error("curvature_pack: Cotton tensor needs connection jets of order >= 2");

    CurvaturePack pack;
    Jet zero1 = Jet::constant(gamma.d[0].dim(), m - 1, 0.0);
    pack.riemann = Ten4<Jet>(n, zero1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    Jet s = gamma(c, b, d).derivative(a) - gamma(c, a, d).derivative(b);
                    for (int i = 0; i < n; ++i)
                        s += gamma(c, a, i) * gamma(i, b, d) - gamma(c, b, i) * gamma(i, a, d);
                    pack.riemann(a, b, c, d) = s;
                }

    pack.ricci = Mat<Jet>(n, zero1);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            Jet s = pack.riemann(0, a, 0, b);
            for (int c = 1; c < n; ++c) s += pack.riemann(c, a, c, b);
            pack.ricci(a, b) = s;
        }

    pack.schouten = pack.ricci;
    for (auto& v : pack.schouten.d) v /= (n - 1);

    pack.weyl = pack.riemann;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    if (c == a) pack.weyl(a, b, c, d) -= pack.schouten(b, d);
                    if (c == b) pack.weyl(a, b, c, d) += pack.schouten(a, d);
                }

    if (want_cotton) {
        Ten3<Jet> dP = cov_deriv_t02(pack.schouten, gamma);
        pack.cotton = Ten3<Jet>(n, Jet::constant(gamma.d[0].dim(), m - 2, 0.0));
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) pack.cotton(a, b, c) = dP(a, b, c) - dP(b, a, c);
        pack.has_cotton = true;
    }
    return pack;
}

Ten3<Jet> apply_scale_change(const Ten3<Jet>& gamma, const Vec<Jet>& upsilon) {
    Ten3<Jet> out = gamma;
    const int n = gamma.n;
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (c == a) out(c, a, b) += upsilon(b);
                if (c == b) out(c, a, b) += upsilon(a);
            }
    return out;
}

Jet density_rescale(const Jet& component, const Jet& u, double weight) {
    return exp(u * weight) * component;
}

Frame make_frame(const ChartGeometry& geom, std::span<const double> point, int source_order,
                 ScaleMode mode) {
    Frame f;
    f.n = geom.n;
    f.x.assign(point.begin(), point.end());
    if (geom.has_metric) {
        f.has_metric = true;
        f.g = eval_metric(geom, point, source_order);
        Ten3<Jet> lc = christoffels_from_metric(f.g, point);
        if (mode == ScaleMode::Metric) {
            f.gamma = lc;
            Jet detg = determinant(f.g);
            Jet adet = detg.value() < 0.0 ? -detg : detg;
            f.logv = 0.5 * log(adet);
        } else {
            f.gamma = specialize_connection(lc);
            f.logv = Jet::constant(geom.n, source_order, 0.0);
        }
    } else {
        if (mode == ScaleMode::Metric)
            throw Error("metric scale requested for a connection-sourced geometry");
        Ten3<Jet> raw(geom.n, Jet());
        for (int c = 0; c < geom.n; ++c)
            for (int a = 0; a < geom.n; ++a)
                for (int b = 0; b < geom.n; ++b)
                    raw(c, a, b) = eval_jet(geom.gamma(c, a, b), point, source_order);
        f.gamma = specialize_connection(raw);
        f.logv = Jet::constant(geom.n, source_order, 0.0);
    }
    return f;
}

namespace {

Jet metric_trace(const Mat<Jet>& ginv, const Mat<Jet>& t) {
    Jet s = zero_like(ginv(0, 0) * t(0, 0));
    for (int a = 0; a < t.n; ++a)
        for (int b = 0; b < t.n; ++b) s += ginv(a, b) * t(a, b);
    return s;
}

} // namespace

Jet scalar_curvature(const Mat<Jet>& g, std::span<const double> point) {
    Ten3<Jet> lc = christoffels_from_metric(g, point);
    CurvaturePack pack = curvature_pack(lc, false);
    return metric_trace(inverse(g), pack.ricci);
}

Mat<Jet> trace_free_ricci(const Mat<Jet>& g, std::span<const double> point) {
    Ten3<Jet> lc = christoffels_from_metric(g, point);
    CurvaturePack pack = curvature_pack(lc, false);
    Jet sc = metric_trace(inverse(g), pack.ricci);
    Mat<Jet> phi = pack.ricci;
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b) phi(a, b) -= (1.0 / g.n) * sc * g(a, b);
    return phi;
}

Jet gauss_curvature(const Mat<Jet>& g, std::span<const double> point) {
    if (g.n != 2) throw Error("gauss_curvature: defined for n = 2 only");
    return 0.5 * scalar_curvature(g, point);
}

} // namespace ptcalc
