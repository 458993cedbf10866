#include "ptcalc/solver.hpp"

#include "ptcalc/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ptcalc {

namespace {

Eigen::MatrixXd jet_values(const Mat<Jet>& m) {
    Eigen::MatrixXd out(m.n, m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) out(i, j) = m(i, j).value();
    return out;
}

std::vector<Eigen::MatrixXd> eval_A(const ChartGeometry& geom, std::span<const double> point,
                                    const EvalOptions& opts) {
    std::vector<Mat<Jet>> A = prolongation_matrices(geom, point, 0, opts);
    std::vector<Eigen::MatrixXd> out;
    out.reserve(A.size());
    for (const auto& m : A) out.push_back(jet_values(m));
    return out;
}

void check_in_box(const ChartGeometry& geom, std::span<const double> x) {
    for (int i = 0; i < geom.n; ++i) {
        if (x[static_cast<std::size_t>(i)] < geom.domain[static_cast<std::size_t>(i)][0] - 1e-9 ||
            x[static_cast<std::size_t>(i)] > geom.domain[static_cast<std::size_t>(i)][1] + 1e-9) {
            std::ostringstream os;
            os << "path leaves the domain box in coordinate " << i << " (value "
               << x[static_cast<std::size_t>(i)] << ")";
            throw PathDomainError(os.str());
        }
    }
}

Eigen::MatrixXd transport_once(const ChartGeometry& geom,
                               const std::vector<std::vector<double>>& path, int steps,
                               const EvalOptions& opts) {
    const int N = s2_flat_size(geom.n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(N, N);
    std::vector<double> x(static_cast<std::size_t>(geom.n));
    auto B = [&](const std::vector<double>& from, const std::vector<double>& dir, double t) {
        for (int i = 0; i < geom.n; ++i)
            x[static_cast<std::size_t>(i)] = from[static_cast<std::size_t>(i)] + t * dir[static_cast<std::size_t>(i)];
        std::vector<Eigen::MatrixXd> A = eval_A(geom, x, opts);
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
        for (int a = 0; a < geom.n; ++a) out -= dir[static_cast<std::size_t>(a)] * A[static_cast<std::size_t>(a)];
        return out;
    };
    for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
        const auto& p = path[seg];
        const auto& q = path[seg + 1];
        check_in_box(geom, p);
        check_in_box(geom, q);
        std::vector<double> dir(static_cast<std::size_t>(geom.n));
        for (int i = 0; i < geom.n; ++i) dir[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)];
        const double h = 1.0 / steps;
        Eigen::MatrixXd B0 = B(p, dir, 0.0);
        for (int s = 0; s < steps; ++s) {
            double t = s * h;
            Eigen::MatrixXd Bm = B(p, dir, t + 0.5 * h);
            Eigen::MatrixXd B1 = B(p, dir, t + h);
            Eigen::MatrixXd k1 = B0 * M;
            Eigen::MatrixXd k2 = Bm * (M + 0.5 * h * k1);
            Eigen::MatrixXd k3 = Bm * (M + 0.5 * h * k2);
            Eigen::MatrixXd k4 = B1 * (M + h * k3);
            M += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            B0 = B1;
        }
    }
    return M;
}

} // namespace

TransportResult transport(const ChartGeometry& geom, const std::vector<std::vector<double>>& path,
                          int steps, const EvalOptions& opts) {
    if (path.size() < 2) throw Error("transport: path needs at least two nodes");
    steps = std::max(steps, 16);
    TransportResult r;
    r.M = transport_once(geom, path, steps, opts);
    Eigen::MatrixXd half = transport_once(geom, path, steps / 2, opts);
    r.step_halving_error = (r.M - half).cwiseAbs().maxCoeff();
    return r;
}

namespace {

Eigen::MatrixXd transport_matrix(const ChartGeometry& geom,
                                 const std::vector<std::vector<double>>& path, int steps,
                                 const EvalOptions& opts) {
    return transport_once(geom, path, std::max(steps, 16), opts);
}

} // namespace

std::vector<Eigen::MatrixXd> curvature_constraints(const ChartGeometry& geom,
                                                   std::span<const double> point,
                                                   const EvalOptions& opts) {
    const int n = geom.n;
    std::vector<Mat<Jet>> A = prolongation_matrices(geom, point, 1, opts);
    std::vector<Eigen::MatrixXd> out;
    const int N = s2_flat_size(n);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Eigen::MatrixXd Aa = jet_values(A[static_cast<std::size_t>(a)]);
            Eigen::MatrixXd Ab = jet_values(A[static_cast<std::size_t>(b)]);
            Eigen::MatrixXd omega(N, N);
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    omega(i, j) = A[static_cast<std::size_t>(b)](i, j).derivative(a).value() -
                                  A[static_cast<std::size_t>(a)](i, j).derivative(b).value();
            omega += Aa * Ab - Ab * Aa;
            out.push_back(omega);
        }
    return out;
}

std::vector<Eigen::MatrixXd> derived_constraints(const ChartGeometry& geom,
                                                 std::span<const double> point,
                                                 const EvalOptions& opts) {
    const int n = geom.n;
    const int N = s2_flat_size(n);
    std::vector<Mat<Jet>> A = prolongation_matrices(geom, point, 2, opts);
    std::vector<Eigen::MatrixXd> Av;
    for (const auto& m : A) Av.push_back(jet_values(m));

    std::vector<Eigen::MatrixXd> out;
    Jet zero1 = Jet::constant(n, 1, 0.0);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Mat<Jet> omega(N, zero1);
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    Jet s = A[static_cast<std::size_t>(b)](i, j).derivative(a) -
                            A[static_cast<std::size_t>(a)](i, j).derivative(b);
                    for (int k = 0; k < N; ++k)
                        s += A[static_cast<std::size_t>(a)](i, k) * A[static_cast<std::size_t>(b)](k, j) -
                             A[static_cast<std::size_t>(b)](i, k) * A[static_cast<std::size_t>(a)](k, j);
                    omega(i, j) = s;
                }
            Eigen::MatrixXd omega_v = jet_values(omega);
            for (int c = 0; c < n; ++c) {
                Eigen::MatrixXd d(N, N);
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) d(i, j) = omega(i, j).derivative(c).value();
                out.push_back(d - omega_v * Av[static_cast<std::size_t>(c)]);
            }
        }
    return out;
}

RankEstimate estimate_rank(const Eigen::MatrixXd& stack, double gap_ratio, double floor_factor) {
    RankEstimate rc;
    if (stack.rows() == 0 || stack.cols() == 0) return rc;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stack);
    Eigen::VectorXd s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) rc.svals.push_back(s(i));
    if (s(0) < 1e-12) return rc; // numerically the zero matrix
    double floor = floor_factor * s(0);
    int r = 0;
    while (r < s.size() && s(r) > floor) ++r;
    rc.rank = r;
    if (r < s.size() && s(r) > 0.0) {
        rc.gap = s(r - 1) / s(r);
        rc.indeterminate = rc.gap < gap_ratio;
    }
    return rc;
}

namespace {

std::string fmt_point(std::span<const double> x) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
    os << "]";
    return os.str();
}

struct Accumulated {
    Eigen::MatrixXd stack;
    std::vector<ConstraintRecord> records;
    int rank = 0;
    RankEstimate final_cut;
};

void append_rows(Eigen::MatrixXd& stack, const Eigen::MatrixXd& rows) {
    if (stack.rows() == 0) {
        stack = rows;
        return;
    }
    Eigen::MatrixXd merged(stack.rows() + rows.rows(), stack.cols());
    merged << stack, rows;
    stack = merged;
}

Accumulated accumulate(const ChartGeometry& geom,
                       const std::vector<std::vector<double>>& sample_points,
                       const ObstructionParams& params) {
    const int n = geom.n;
    const int N = s2_flat_size(n);
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x0[static_cast<std::size_t>(i)] = 0.5 * (geom.domain[static_cast<std::size_t>(i)][0] +
                                                 geom.domain[static_cast<std::size_t>(i)][1]);

    Accumulated acc;
    acc.stack = Eigen::MatrixXd(0, N);

    auto add_batch = [&](const std::string& source, const Eigen::MatrixXd& rows, double noise) {
        ConstraintRecord rec;
        rec.source = source;
        rec.sup = rows.rows() ? rows.cwiseAbs().maxCoeff() : 0.0;
        if (rec.sup <= noise) {
            rec.skipped = true;
            acc.records.push_back(rec);
            return;
        }
        append_rows(acc.stack, rows);
        RankEstimate rc = estimate_rank(acc.stack, params.gap_ratio, params.floor_factor);
        rec.rank_added = std::max(0, rc.rank - acc.rank);
        acc.rank = std::max(acc.rank, rc.rank);
        acc.records.push_back(rec);
    };

    for (const auto& pt : sample_points) {
        Eigen::MatrixXd T = transport_matrix(geom, {x0, pt}, params.transport_steps, params.opts);
        std::vector<Eigen::MatrixXd> omegas = curvature_constraints(geom, pt, params.opts);
        Eigen::MatrixXd rows(static_cast<int>(omegas.size()) * N, N);
        for (std::size_t k = 0; k < omegas.size(); ++k)
            rows.middleRows(static_cast<int>(k) * N, N) = omegas[k] * T;
        add_batch("curvature@" + fmt_point(pt), rows, params.curvature_noise);

        if (params.depth >= 1) {
            std::vector<Eigen::MatrixXd> der = derived_constraints(geom, pt, params.opts);
            Eigen::MatrixXd drows(static_cast<int>(der.size()) * N, N);
            for (std::size_t k = 0; k < der.size(); ++k)
                drows.middleRows(static_cast<int>(k) * N, N) = der[k] * T;
            add_batch("derived-curvature@" + fmt_point(pt), drows, params.curvature_noise);
        }
    }

    if (params.use_loops) {
        const double scales[3] = {0.15, 0.3, 0.6};
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (double s : scales) {
                    double ai = s * 0.5 * (geom.domain[static_cast<std::size_t>(i)][1] -
                                           geom.domain[static_cast<std::size_t>(i)][0]);
                    double aj = s * 0.5 * (geom.domain[static_cast<std::size_t>(j)][1] -
                                           geom.domain[static_cast<std::size_t>(j)][0]);
                    std::vector<std::vector<double>> loop;
                    auto node = [&](double di, double dj) {
                        std::vector<double> p = x0;
                        p[static_cast<std::size_t>(i)] += di;
                        p[static_cast<std::size_t>(j)] += dj;
                        return p;
                    };
                    loop.push_back(x0);
                    loop.push_back(node(ai, 0));
                    loop.push_back(node(ai, aj));
                    loop.push_back(node(0, aj));
                    loop.push_back(x0);
                    Eigen::MatrixXd H = transport_matrix(geom, loop, params.transport_steps, params.opts);
                    std::ostringstream os;
                    os << "holonomy@loop(" << i << "," << j << ";" << s << ")";
                    add_batch(os.str(), H - Eigen::MatrixXd::Identity(N, N), params.holonomy_noise);
                }
    }

    acc.final_cut = estimate_rank(acc.stack, params.gap_ratio, params.floor_factor);
    return acc;
}

} // namespace

Eigen::MatrixXd constraint_stack(const ChartGeometry& geom,
                                 const std::vector<std::vector<double>>& sample_points,
                                 const ObstructionParams& params) {
    return accumulate(geom, sample_points, params).stack;
}

ObstructionReport dimension_bound(const ChartGeometry& geom,
                                  const std::vector<std::vector<double>>& sample_points,
                                  const ObstructionParams& params) {
    if (sample_points.empty()) throw Error("dimension_bound: needs at least one sample point");
    Accumulated acc = accumulate(geom, sample_points, params);
    ObstructionReport rep;
    rep.N = s2_flat_size(geom.n);
    rep.constraints = acc.records;
    rep.rank = acc.final_cut.rank;
    rep.dim_upper_bound = rep.N - rep.rank;
    rep.sv_gap = acc.final_cut.gap;
    rep.indeterminate = acc.final_cut.indeterminate;
    rep.singular_values = acc.final_cut.svals;
    return rep;
}

ReconstructionResult reconstruct_solution(const ChartGeometry& geom, const Eigen::VectorXd& v0,
                                          const std::vector<std::vector<double>>& targets,
                                          const Eigen::MatrixXd* constraints, double kernel_tol,
                                          const ObstructionParams& params) {
    const int n = geom.n;
    const int N = s2_flat_size(n);
    if (v0.size() != N) throw Error("reconstruct_solution: v0 has the wrong length");
    if (constraints && constraints->rows() > 0) {
        double cn = constraints->cwiseAbs().maxCoeff();
        double res = (*constraints * v0).cwiseAbs().maxCoeff();
        double rel = res / std::max(1e-30, cn * v0.cwiseAbs().maxCoeff());
        if (rel > kernel_tol) throw KernelVectorError(rel);
    }

    std::vector<double> x0(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x0[static_cast<std::size_t>(i)] = 0.5 * (geom.domain[static_cast<std::size_t>(i)][0] +
                                                 geom.domain[static_cast<std::size_t>(i)][1]);

    ReconstructionResult out;
    auto value_at = [&](const std::vector<double>& x) {
        Eigen::VectorXd v = transport_matrix(geom, {x0, x}, params.transport_steps, params.opts) * v0;
        return v;
    };

    double hmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        hmin = std::min(hmin, geom.domain[static_cast<std::size_t>(i)][1] -
                                  geom.domain[static_cast<std::size_t>(i)][0]);
    const double h = 1e-4 * hmin;

    for (const auto& x : targets) {
        Eigen::VectorXd v = value_at(x);
        TractorS2<double> val = unflatten(n, v);
        out.values.push_back(val);
        out.sigma_samples.push_back(val.sigma);

        // staircase route for the path-independence check
        std::vector<double> mid = x0;
        mid[0] = x[0];
        Eigen::VectorXd v2 = transport_matrix(geom, {x0, mid, x}, params.transport_steps, params.opts) * v0;
        double pd = (v - v2).cwiseAbs().maxCoeff() / std::max(1.0, v.cwiseAbs().maxCoeff());
        out.path_dependence = std::max(out.path_dependence, pd);

        // finite-difference D(sigma) on transported values
        Frame f = make_frame(geom, x, 2, ScaleMode::Chart);
        Ten3<double> dsig(n, 0.0);
        for (int a = 0; a < n; ++a) {
            std::vector<double> xp = x, xm = x;
            xp[static_cast<std::size_t>(a)] += h;
            xm[static_cast<std::size_t>(a)] -= h;
            TractorS2<double> vp = unflatten(n, value_at(xp));
            TractorS2<double> vm = unflatten(n, value_at(xm));
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    dsig(a, b, c) = (vp.sigma(b, c) - vm.sigma(b, c)) / (2.0 * h);
        }
        Ten3<double> nabla = dsig;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        s += f.gamma(b, a, i).value() * val.sigma(i, c) +
                             f.gamma(c, a, i).value() * val.sigma(b, i);
                    nabla(a, b, c) += s;
                }
        out.d_residual = std::max(out.d_residual, sup_value(trace_free_top(nabla)));
    }
    out.path_dependent = out.path_dependence > 1e-6;
    return out;
}

} // namespace ptcalc
