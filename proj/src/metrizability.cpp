#include "ptcalc/metrizability.hpp"

#include "ptcalc/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ptcalc {

Mat<Jet> sigma_from_metric(const Mat<Jet>& g, const Jet& logv) {
    Jet detg = determinant(g);
    if (std::abs(detg.value()) < 1e-12) throw SingularMetricError(detg.value(), "sigma_from_metric");
    double sign = detg.value() < 0.0 ? -1.0 : 1.0;
    Jet absdet = sign < 0.0 ? -detg : detg;
    // (|det g| / v^2)^{1/(n+1)} via logs; keeps indefinite signatures real
    Jet factor = exp((log(absdet) - 2.0 * logv) * (1.0 / (g.n + 1)));
    Mat<Jet> out = inverse(g);
    for (auto& v : out.d) v = sign * factor * v;
    return out;
}

Jet tau_from_sigma(const Mat<Jet>& sigma, const Jet& logv) {
    return exp(2.0 * logv) * determinant(sigma);
}

Mat<Jet> metric_from_sigma(const Mat<Jet>& sigma, const Jet& logv) {
    Jet dets = determinant(sigma);
    if (std::abs(dets.value()) <= 1e-12) throw DegenerateSigmaError(dets.value());
    Jet tau = exp(2.0 * logv) * dets;
    Mat<Jet> weighted = sigma;
    for (auto& v : weighted.d) v = tau * v;
    return inverse(weighted);
}

std::pair<int, int> signature_of(const Mat<double>& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values_of(g));
    int pos = 0, neg = 0;
    for (int i = 0; i < g.n; ++i) {
        if (es.eigenvalues()(i) > 0) ++pos;
        else if (es.eigenvalues()(i) < 0) ++neg;
    }
    return {pos, neg};
}

Frame working_frame(const ChartGeometry& geom, std::span<const double> point,
                    const EvalOptions& opts) {
    Frame f = make_frame(geom, point, opts.order, ScaleMode::Chart);
    if (opts.scale_u) {
        int uorder = f.gamma.d[0].order() + 1;
        Jet u = eval_jet(*opts.scale_u, point, uorder);
        Vec<Jet> ups(f.n, Jet());
        for (int a = 0; a < f.n; ++a) ups(a) = u.derivative(a);
        f.gamma = apply_scale_change(f.gamma, ups);
        f.logv = f.logv.truncated(uorder) + static_cast<double>(f.n + 1) * u;
    }
    return f;
}

Mat<Jet> eval_sigma(const ChartGeometry& geom, const Frame& frame, const EvalOptions& opts) {
    if (geom.has_sigma) {
        Mat<Jet> out(geom.n, Jet());
        for (int i = 0; i < geom.n; ++i)
            for (int j = 0; j < geom.n; ++j)
                out(i, j) = eval_jet(geom.sigma(i, j), frame.x, opts.order);
        if (opts.scale_u) {
            Jet u = eval_jet(*opts.scale_u, frame.x, opts.order);
            for (auto& v : out.d) v = density_rescale(v, u, -2.0);
        }
        return out;
    }
    if (!geom.has_metric)
        throw Error("geometry \"" + geom.name + "\" supplies neither a metric nor a sigma field");
    return sigma_from_metric(frame.g, frame.logv);
}

ResidualReport metrizability_residual(const ChartGeometry& geom,
                                      const std::vector<std::vector<double>>& points,
                                      const EvalOptions& opts) {
    ResidualReport rep;
    for (const auto& pt : points) {
        Frame f = working_frame(geom, pt, opts);
        Mat<Jet> sigma = eval_sigma(geom, f, opts);
        Ten3<Jet> d = trace_free_top(cov_deriv_t20(sigma, f.gamma));
        double r = sup_value(d);
        rep.per_point.push_back(r);
        rep.sup = std::max(rep.sup, r);
    }
    return rep;
}

ResidualReport normality_residual(const ChartGeometry& geom,
                                  const std::vector<std::vector<double>>& points,
                                  const EvalOptions& opts) {
    ResidualReport rep;
    for (const auto& pt : points) {
        Frame f = working_frame(geom, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, false);
        Mat<Jet> sigma = eval_sigma(geom, f, opts);
        TractorS2<Jet> L = splitting_L(sigma, pack.schouten, f.gamma);
        S2Form1<Jet> dL = s2_derivative(L, pack.schouten, f.gamma);
        double r = std::max({sup_value(dL.sigma), sup_value(dL.mu), sup_value(dL.rho)});
        rep.per_point.push_back(r);
        rep.sup = std::max(rep.sup, r);
    }
    return rep;
}

ResidualReport einstein_check(const ChartGeometry& geom,
                              const std::vector<std::vector<double>>& points, int order) {
    if (!geom.has_metric) throw Error("einstein_check requires a metric geometry");
    ResidualReport rep;
    for (const auto& pt : points) {
        Mat<Jet> g = eval_metric(geom, pt, order);
        double r;
        if (geom.n == 2) {
            Jet K = gauss_curvature(g, pt);
            r = 0.0;
            for (int a = 0; a < 2; ++a) r = std::max(r, std::abs(K.deriv1(a)));
        } else {
            r = sup_value(trace_free_ricci(g, pt));
        }
        rep.per_point.push_back(r);
        rep.sup = std::max(rep.sup, r);
    }
    return rep;
}

ResidualReport projective_flatness_check(const ChartGeometry& geom,
                                         const std::vector<std::vector<double>>& points,
                                         const EvalOptions& opts) {
    ResidualReport rep;
    for (const auto& pt : points) {
        Frame f = working_frame(geom, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, geom.n == 2);
        double r = geom.n == 2 ? sup_value(pack.cotton) : sup_value(pack.weyl);
        rep.per_point.push_back(r);
        rep.sup = std::max(rep.sup, r);
    }
    return rep;
}

std::vector<Mat<Jet>> prolongation_matrices(const ChartGeometry& geom,
                                            std::span<const double> point, int jet_order,
                                            const EvalOptions& opts) {
    // Y sits two orders below the connection jets, so evaluate the source deep
    // enough for A entries of order jet_order.
    int gamma_order = jet_order + 2;
    int source_order = geom.has_metric ? gamma_order + 1 : gamma_order;
    EvalOptions local = opts;
    local.order = std::max(opts.order, source_order);
    Frame f = working_frame(geom, point, local);
    CurvaturePack pack = curvature_pack(f.gamma, true);

    const int n = geom.n;
    const int N = s2_flat_size(n);
    Jet zero = Jet::constant(n, jet_order, 0.0);
    std::vector<Mat<Jet>> A(static_cast<std::size_t>(n), Mat<Jet>(N, zero));

    for (int col = 0; col < N; ++col) {
        Eigen::VectorXd basis = Eigen::VectorXd::Zero(N);
        basis(col) = 1.0;
        TractorS2<double> v = unflatten(n, basis);
        for (int a = 0; a < n; ++a) {
            // the non-derivative part of the prolongation system applied to the basis section;
            // basis sections are sparse, so skip the zero entries
            TractorS2<Jet> out{Mat<Jet>(n, zero), Vec<Jet>(n, zero), zero};
            for (int b = 0; b < n; ++b) {
                for (int c = 0; c < n; ++c) {
                    Jet s = zero;
                    for (int i = 0; i < n; ++i) {
                        if (v.sigma(i, c) != 0.0) s += f.gamma(b, a, i) * v.sigma(i, c);
                        if (v.sigma(b, i) != 0.0) s += f.gamma(c, a, i) * v.sigma(b, i);
                    }
                    if (a == b && v.mu(c) != 0.0) s += v.mu(c);
                    if (a == c && v.mu(b) != 0.0) s += v.mu(b);
                    out.sigma(b, c) = s.truncated(jet_order);
                }
                Jet m = zero;
                for (int i = 0; i < n; ++i)
                    if (v.mu(i) != 0.0) m += f.gamma(b, a, i) * v.mu(i);
                if (a == b && v.rho != 0.0) m += v.rho;
                for (int c = 0; c < n; ++c) {
                    if (v.sigma(b, c) != 0.0) m -= pack.schouten(a, c) * v.sigma(b, c);
                    for (int d = 0; d < n; ++d)
                        if (v.sigma(c, d) != 0.0)
                            m += (1.0 / n) * pack.weyl(a, c, b, d) * v.sigma(c, d);
                }
                out.mu(b) = m.truncated(jet_order);
            }
            Jet r = zero;
            for (int b = 0; b < n; ++b) {
                if (v.mu(b) != 0.0) r -= 2.0 * pack.schouten(a, b) * v.mu(b);
                for (int c = 0; c < n; ++c)
                    if (v.sigma(b, c) != 0.0) r -= (2.0 / n) * pack.cotton(a, b, c) * v.sigma(b, c);
            }
            out.rho = r.truncated(jet_order);

            std::vector<Jet> flat = flatten(out);
            for (int row = 0; row < N; ++row) A[static_cast<std::size_t>(a)](row, col) = flat[static_cast<std::size_t>(row)];
        }
    }
    return A;
}

ResidualReport prolongation_residual(const ChartGeometry& geom,
                                     const std::vector<std::vector<double>>& points,
                                     const EvalOptions& opts) {
    ResidualReport rep;
    const int n = geom.n;
    const int N = s2_flat_size(n);
    for (const auto& pt : points) {
        Frame f = working_frame(geom, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, false);
        Mat<Jet> sigma = eval_sigma(geom, f, opts);
        TractorS2<Jet> L = splitting_L(sigma, pack.schouten, f.gamma);
        std::vector<Jet> v = flatten(L);
        std::vector<Mat<Jet>> A = prolongation_matrices(geom, pt, 0, opts);
        double r = 0.0;
        for (int a = 0; a < n; ++a)
            for (int row = 0; row < N; ++row) {
                double s = v[static_cast<std::size_t>(row)].derivative(a).value();
                for (int colv = 0; colv < N; ++colv)
                    s += A[static_cast<std::size_t>(a)](row, colv).value() * v[static_cast<std::size_t>(colv)].value();
                r = std::max(r, std::abs(s));
            }
        rep.per_point.push_back(r);
        rep.sup = std::max(rep.sup, r);
    }
    return rep;
}

Verdict theorem_mt_verdict(const ChartGeometry& geom,
                           const std::vector<std::vector<double>>& points, double tol,
                           double witness, const EvalOptions& opts) {
    Verdict v;
    v.tolerance = tol;
    v.witness_threshold = witness;
    v.d_residual = metrizability_residual(geom, points, opts).sup;
    v.normality_res = normality_residual(geom, points, opts).sup;
    v.einstein_res = einstein_check(geom, points, opts.order).sup;
    v.flatness_res = projective_flatness_check(geom, points, opts).sup;
    v.solves_metrizability = v.d_residual <= tol;
    v.is_normal = v.normality_res <= tol;
    v.is_einstein = v.einstein_res <= tol;
    v.is_projectively_flat = v.flatness_res <= tol;
    v.theorem_mt_consistent = (v.is_normal == v.is_einstein);
    return v;
}

Jet corresponding_tau_at(const Frame& frame, const Mat<Jet>& sigma, const Mat<Jet>& schouten,
                         double degeneracy_tol) {
    TractorS2<Jet> L = splitting_L(sigma, schouten, frame.gamma);
    Mat<Jet> M = s2_matrix(L);
    Jet detM = determinant(M);
    double scale = std::max(1.0, sup_value(M));
    if (std::abs(detM.value()) <= degeneracy_tol * std::pow(scale, M.n))
        throw AlgebraicDegeneracyError(detM.value());
    Mat<Jet> H = inverse(M);
    return H(frame.n, frame.n);
}

Mat<Jet> corresponding_sigma_at(const Frame& frame, const Jet& tau) {
    if (std::abs(tau.value()) < 1e-14) throw ZeroTauError();
    double sign = tau.value() < 0.0 ? -1.0 : 1.0;
    Jet abstau = sign < 0.0 ? -tau : tau;
    Jet u = -0.5 * log(abstau);
    Vec<Jet> ups(frame.n, Jet());
    for (int a = 0; a < frame.n; ++a) ups(a) = u.derivative(a);
    Ten3<Jet> gamma_tau = apply_scale_change(frame.gamma, ups);
    Mat<Jet> P_tau = curvature_pack(gamma_tau, false).schouten;
    Jet detP = determinant(P_tau);
    if (std::abs(detP.value()) < 1e-14)
        throw Error("corresponding_sigma: Schouten tensor of the tau-scale is singular");
    Mat<Jet> sig_tau = inverse(P_tau);
    for (auto& v : sig_tau.d) v = sign * v;
    // back from the tau-scale (components there are relative to tau = +-1)
    Mat<Jet> out = sig_tau;
    Jet back = exp(2.0 * u);
    for (auto& v : out.d) v = back * v;
    return out;
}

DetLReport det_L(const ChartGeometry& geom, const std::vector<std::vector<double>>& points,
                 double constancy_tol, const EvalOptions& opts) {
    DetLReport rep;
    for (const auto& pt : points) {
        Frame f = working_frame(geom, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, false);
        Mat<Jet> sigma = eval_sigma(geom, f, opts);
        TractorS2<Jet> L = splitting_L(sigma, pack.schouten, f.gamma);
        rep.det_values.push_back(determinant(s2_matrix(L)).value());
        if (std::abs(determinant(sigma).value()) > 1e-12) {
            Mat<Jet> g = metric_from_sigma(sigma, f.logv);
            rep.scalar_curvatures.push_back(scalar_curvature(g, pt).value());
        } else {
            rep.scalar_curvatures.push_back(0.0);
        }
    }
    double mean = 0.0;
    for (double d : rep.det_values) mean += d;
    mean /= static_cast<double>(rep.det_values.size());
    for (double d : rep.det_values) rep.spread = std::max(rep.spread, std::abs(d - mean));
    rep.constant = rep.spread <= constancy_tol * std::max(1.0, std::abs(mean));
    return rep;
}

} // namespace ptcalc
