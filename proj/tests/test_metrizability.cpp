#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "corpus.hpp"
#include "ptcalc/metrizability.hpp"
#include "ptcalc/sampling.hpp"

#include <cmath>
#include <random>

using namespace ptcalc;
using ptcalc::testing::corpus;
using ptcalc::testing::random_polynomial_metric;

namespace {

std::mt19937 rng(550);

Mat<Jet> const_metric(int n, std::mt19937& gen, bool indefinite) {
    // random symmetric with eigenvalues pushed away from zero
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Mat<Jet> g(n, Jet());
    Mat<double> m(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            m(i, j) = 0.3 * d(gen);
            m(j, i) = m(i, j);
        }
    for (int i = 0; i < n; ++i) m(i, i) += (indefinite && i == 0) ? -2.0 : 2.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = Jet::constant(n, 2, m(i, j));
    return g;
}

} // namespace

TEST_CASE("sigma dictionary closed forms") {
    const int n = 2;
    Jet logv = Jet::constant(n, 2, 0.0);
    Mat<Jet> delta(n, Jet::constant(n, 2, 0.0));
    delta(0, 0) = Jet::constant(n, 2, 1.0);
    delta(1, 1) = Jet::constant(n, 2, 1.0);

    Mat<Jet> s = sigma_from_metric(delta, logv);
    CHECK(s(0, 0).value() == doctest::Approx(1.0));
    CHECK(s(1, 1).value() == doctest::Approx(1.0));
    CHECK(tau_from_sigma(s, logv).value() == doctest::Approx(1.0));

    // sigma = 2^{-2/3} delta (the unit sphere value at the origin): tau = 2^{-4/3}
    Mat<Jet> ssph = delta;
    ssph(0, 0) = Jet::constant(n, 2, std::pow(2.0, -2.0 / 3.0));
    ssph(1, 1) = ssph(0, 0);
    CHECK(tau_from_sigma(ssph, logv).value() ==
          doctest::Approx(std::pow(2.0, -4.0 / 3.0)).epsilon(1e-13));

    // g = diag(1, 4): det 4, sigma = 4^{1/3} diag(1, 1/4)
    Mat<Jet> g14 = delta;
    g14(1, 1) = Jet::constant(n, 2, 4.0);
    Mat<Jet> s14 = sigma_from_metric(g14, logv);
    CHECK(s14(0, 0).value() == doctest::Approx(std::pow(4.0, 1.0 / 3.0)).epsilon(1e-13));
    CHECK(s14(1, 1).value() == doctest::Approx(std::pow(4.0, 1.0 / 3.0) / 4.0).epsilon(1e-13));

    // sigma = diag(1, -1): tau = -1, g = diag(-1, 1), signature (1,1)
    Mat<Jet> sind = delta;
    sind(1, 1) = Jet::constant(n, 2, -1.0);
    CHECK(tau_from_sigma(sind, logv).value() == doctest::Approx(-1.0));
    Mat<Jet> gind = metric_from_sigma(sind, logv);
    CHECK(gind(0, 0).value() == doctest::Approx(-1.0));
    CHECK(gind(1, 1).value() == doctest::Approx(1.0));
    Mat<double> gv(n, 0.0);
    gv(0, 0) = gind(0, 0).value();
    gv(1, 1) = gind(1, 1).value();
    auto sig = signature_of(gv);
    CHECK(sig.first == 1);
    CHECK(sig.second == 1);

    // degenerate sigma: tau = 0 and metric_from_sigma raises
    Mat<Jet> sdeg = delta;
    sdeg(1, 1) = Jet::constant(n, 2, 0.0);
    CHECK(tau_from_sigma(sdeg, logv).value() == 0.0);
    CHECK_THROWS_AS(metric_from_sigma(sdeg, logv), DegenerateSigmaError);
}

TEST_CASE("round trip metric -> sigma -> metric on random constant metrics") {
    for (int n = 2; n <= 4; ++n) {
        Jet logv = Jet::constant(n, 2, 0.0);
        for (int trial = 0; trial < 25; ++trial) {
            // odd n: only positive determinants admit an exact round trip
            bool indefinite = (n % 2 == 0) ? (trial % 2 == 1) : (trial % 3 == 0);
            Mat<Jet> g = const_metric(n, rng, indefinite);
            if (n % 2 == 1 && determinant(g).value() < 0.0) continue;
            Mat<Jet> back = metric_from_sigma(sigma_from_metric(g, logv), logv);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    CHECK(back(i, j).value() == doctest::Approx(g(i, j).value()).epsilon(1e-12));
        }
    }
}

TEST_CASE("sigma of a metric solves the metrizability equation in its class") {
    for (const char* name : {"sphere2", "hyperbolic2", "noneinstein3d", "nonconstcurv2d"}) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 10, 1);
        CHECK(metrizability_residual(geom, pts).sup <= 1e-9);
    }
}

TEST_CASE("metrizability residual of a linear perturbation on flat space") {
    // sigma = delta + 0.3 x e1 (x) e1 on flat 2d: D = tf(d sigma) by hand
    ChartGeometry flat = corpus("flat2");
    flat.has_sigma = true;
    flat.sigma = Mat<Expr>(2, Expr::number(0.0));
    flat.sigma(0, 0) = parse_expression("1 + 0.3*x", flat.variables);
    flat.sigma(1, 1) = parse_expression("1", flat.variables);
    std::vector<std::vector<double>> pts{{0.2, -0.4}};
    EvalOptions opts;
    Frame f = working_frame(flat, pts[0], opts);
    Mat<Jet> sigma = eval_sigma(flat, f, opts);
    Ten3<Jet> D = trace_free_top(cov_deriv_t20(sigma, f.gamma));
    CHECK(D(0, 0, 0).value() == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(D(1, 1, 0).value() == doctest::Approx(-0.1).epsilon(1e-13));
    CHECK(D(1, 0, 1).value() == doctest::Approx(-0.1).epsilon(1e-13));
    CHECK(D(0, 1, 1).value() == doctest::Approx(0.0));
    CHECK(metrizability_residual(flat, pts).sup == doctest::Approx(0.1).epsilon(1e-12));

    // constant sigma on flat space has zero residual
    ChartGeometry flatc = corpus("flat2");
    flatc.has_sigma = true;
    flatc.sigma = Mat<Expr>(2, Expr::number(0.0));
    flatc.sigma(0, 0) = Expr::number(1.0);
    flatc.sigma(1, 1) = Expr::number(1.0);
    CHECK(metrizability_residual(flatc, pts).sup == 0.0);
}

TEST_CASE("prolongation matrices on flat space are the constant algebraic part") {
    ChartGeometry flat = corpus("flat2");
    std::vector<double> pt{0.3, 0.3};
    auto A = prolongation_matrices(flat, pt, 1);
    // entries are constant: first derivatives vanish
    for (int a = 0; a < 2; ++a)
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                CHECK(std::abs(A[static_cast<std::size_t>(a)](i, j).derivative(0).value()) <= 1e-14);
                CHECK(std::abs(A[static_cast<std::size_t>(a)](i, j).derivative(1).value()) <= 1e-14);
            }
    // constant section (delta, 0, 0) is killed by the algebraic action
    TractorS2<double> v{Mat<double>(2, 0.0), Vec<double>(2, 0.0), 0.0};
    v.sigma(0, 0) = 1.0;
    v.sigma(1, 1) = 1.0;
    Eigen::VectorXd flat_v = flatten(v);
    for (int a = 0; a < 2; ++a) {
        Eigen::VectorXd Av = Eigen::VectorXd::Zero(6);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                Av(i) += A[static_cast<std::size_t>(a)](i, j).value() * flat_v(j);
        CHECK(Av.cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("prolongation system is solved by L(sigma(g)) for Einstein and non-Einstein metrics") {
    for (const char* name : {"sphere2", "hyperbolic2", "noneinstein3d"}) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 8, 1);
        CHECK(prolongation_residual(geom, pts).sup <= 1e-8);
    }
}

TEST_CASE("prolongation-system top slot reproduces the D-residual pattern for non-solutions") {
    const int n = 2;
    ChartGeometry geom = corpus("sphere2");
    geom.has_sigma = true;
    geom.sigma = Mat<Expr>(n, Expr::number(0.0));
    geom.sigma(0, 0) = parse_expression("1 + 0.2*x - 0.1*y^2", geom.variables);
    geom.sigma(1, 1) = parse_expression("1 - 0.3*y", geom.variables);
    geom.sigma(0, 1) = parse_expression("0.1*x*y", geom.variables);
    geom.sigma(1, 0) = geom.sigma(0, 1);

    std::vector<double> pt{0.25, -0.35};
    EvalOptions opts;
    Frame f = working_frame(geom, pt, opts);
    CurvaturePack pack = curvature_pack(f.gamma, false);
    Mat<Jet> sigma = eval_sigma(geom, f, opts);
    TractorS2<Jet> L = splitting_L(sigma, pack.schouten, f.gamma);
    std::vector<Jet> v = flatten(L);
    auto A = prolongation_matrices(geom, pt, 0, opts);
    const int N = s2_flat_size(n);

    // top-slot rows of dv + Av, as a (a, bc) tensor
    Ten3<double> top(n, 0.0);
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                int row = s2_flat_index(n, i, j);
                double s = v[static_cast<std::size_t>(row)].derivative(a).value();
                for (int col = 0; col < N; ++col)
                    s += A[static_cast<std::size_t>(a)](row, col).value() * v[static_cast<std::size_t>(col)].value();
                top(a, i, j) = s;
                top(a, j, i) = s;
            }
    Ten3<double> tf_top = trace_free_top(top);
    Ten3<Jet> D = trace_free_top(cov_deriv_t20(sigma, f.gamma));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                CHECK(std::abs(tf_top(a, b, c) - D(a, b, c).value()) <= 1e-9);
}

TEST_CASE("normality residuals across the corpus") {
    ChartGeometry sphere = corpus("sphere2");
    auto pts = sample_points(sphere.domain, 12, 1);
    CHECK(normality_residual(sphere, pts).sup <= 1e-8);

    ChartGeometry witness = corpus("noneinstein3d");
    auto pts3 = sample_points(witness.domain, 12, 1);
    CHECK(normality_residual(witness, pts3).sup >= 1e-3);

    ChartGeometry flat = corpus("flat2");
    flat.has_sigma = true;
    flat.sigma = Mat<Expr>(2, Expr::number(0.0));
    flat.sigma(0, 0) = Expr::number(1.0);
    flat.sigma(1, 1) = Expr::number(1.0);
    CHECK(normality_residual(flat, pts).sup == 0.0);
}

TEST_CASE("normality slot structure in the metric scale") {
    ChartGeometry geom = corpus("noneinstein3d");
    const int n = 3;
    std::vector<double> pt{0.4, 0.2, -0.3};
    Frame f = make_frame(geom, pt, 4, ScaleMode::Metric);
    CurvaturePack pack = curvature_pack(f.gamma, false);
    Mat<Jet> sigma = sigma_from_metric(f.g, f.logv);
    TractorS2<Jet> L = splitting_L(sigma, pack.schouten, f.gamma);
    S2Form1<Jet> dL = s2_derivative(L, pack.schouten, f.gamma);

    // top slot vanishes (nabla sigma = 0 in the metric's own scale)
    CHECK(sup_value(dL.sigma) <= 1e-10);
    // middle slot is delta rho - P sigma = -(P sigma - tr/n delta)
    Mat<double> ps(n, 0.0);
    double tr = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) ps(a, b) += pack.schouten(a, c).value() * sigma(b, c).value();
        tr += ps(a, a);
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double expected = -(ps(a, b) - (a == b ? tr / n : 0.0));
            CHECK(std::abs(dL.mu(a, b).value() - expected) <= 1e-9);
        }
    // bottom slot is (1/n) d_a (P_ij sigma^{ij})
    Jet psig = zero_like(pack.schouten(0, 0) * sigma(0, 0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) psig += pack.schouten(i, j) * sigma(i, j);
    for (int a = 0; a < n; ++a)
        CHECK(std::abs(dL.rho(a).value() - psig.derivative(a).value() / n) <= 1e-9);
}

TEST_CASE("einstein check across the corpus") {
    auto run = [](const char* name) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 10, 1);
        return einstein_check(geom, pts).sup;
    };
    CHECK(run("sphere2") <= 1e-9);
    CHECK(run("hyperbolic2") <= 1e-9);
    CHECK(run("hyperbolic3") <= 1e-9);
    CHECK(run("flat4") == 0.0);
    CHECK(run("noneinstein3d") >= 1e-3);
    CHECK(run("nonconstcurv2d") >= 1e-3);
}

TEST_CASE("projective flatness check and the Beltrami equivalence in 2d") {
    const double tol = 1e-7;
    for (const char* name : {"sphere2", "hyperbolic2", "flat2", "skewflat2", "nonconstcurv2d"}) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 10, 1);
        bool flat = projective_flatness_check(geom, pts).sup <= tol;
        bool einstein = einstein_check(geom, pts).sup <= tol;
        CHECK(flat == einstein);
    }
}

TEST_CASE("theorem verdicts") {
    auto verdict = [](const char* name) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 12, 1);
        return theorem_mt_verdict(geom, pts);
    };
    Verdict s = verdict("sphere2");
    CHECK(s.solves_metrizability);
    CHECK(s.is_normal);
    CHECK(s.is_einstein);
    CHECK(s.theorem_mt_consistent);

    Verdict w = verdict("noneinstein3d");
    CHECK(w.solves_metrizability);
    CHECK_FALSE(w.is_normal);
    CHECK_FALSE(w.is_einstein);
    CHECK(w.theorem_mt_consistent);
    CHECK(w.normality_res >= 1e-3);
    CHECK(w.einstein_res >= 1e-3);

    Verdict h = verdict("hyperbolic2");
    CHECK(h.is_normal);
    CHECK(h.is_einstein);
    CHECK(h.theorem_mt_consistent);
}

TEST_CASE("tau correspondence: forward, inverse, degeneracy") {
    EvalOptions opts;
    for (const char* name : {"sphere2", "hyperbolic2"}) {
        ChartGeometry geom = corpus(name);
        auto pts = sample_points(geom.domain, 8, 1);
        double ratio0 = 0.0;
        for (const auto& pt : pts) {
            Frame f = working_frame(geom, pt, opts);
            CurvaturePack pack = curvature_pack(f.gamma, false);
            Mat<Jet> sigma = eval_sigma(geom, f, opts);
            Jet tau = corresponding_tau_at(f, sigma, pack.schouten);
            double ratio = tau.value() / tau_from_sigma(sigma, f.logv).value();
            if (ratio0 == 0.0) ratio0 = ratio;
            CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-6)); // constant factor over samples
            Mat<Jet> back = corresponding_sigma_at(f, tau);
            for (int i = 0; i < geom.n; ++i)
                for (int j = 0; j < geom.n; ++j)
                    CHECK(std::abs(back(i, j).value() - sigma(i, j).value()) <= 1e-6);
        }
    }

    // unit sphere: the measured constant is 1 with these normalizations
    {
        ChartGeometry geom = corpus("sphere2");
        std::vector<double> pt{0.1, 0.2};
        Frame f = working_frame(geom, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, false);
        Mat<Jet> sigma = eval_sigma(geom, f, opts);
        Jet tau = corresponding_tau_at(f, sigma, pack.schouten);
        CHECK(tau.value() / tau_from_sigma(sigma, f.logv).value() == doctest::Approx(1.0).epsilon(1e-9));
    }

    // flat space: L(sigma) is singular (zero scalar curvature)
    {
        ChartGeometry flat = corpus("flat2");
        std::vector<double> pt{0.3, -0.3};
        Frame f = working_frame(flat, pt, opts);
        CurvaturePack pack = curvature_pack(f.gamma, false);
        Mat<Jet> sigma = eval_sigma(flat, f, opts);
        CHECK_THROWS_AS(corresponding_tau_at(f, sigma, pack.schouten), AlgebraicDegeneracyError);
    }

    // zero tau raises
    {
        ChartGeometry sph = corpus("sphere2");
        std::vector<double> pt{0.0, 0.0};
        Frame f = working_frame(sph, pt, opts);
        CHECK_THROWS_AS(corresponding_sigma_at(f, Jet::constant(2, 3, 0.0)), ZeroTauError);
    }
}

TEST_CASE("det L: constancy for Einstein, proportional to scalar curvature in general") {
    auto pts2 = sample_points(corpus("sphere2").domain, 10, 1);
    DetLReport sph = det_L(corpus("sphere2"), pts2);
    CHECK(sph.constant);
    // unit sphere: det L = Sc/(n(n-1)) = 1
    for (double d : sph.det_values) CHECK(d == doctest::Approx(1.0).epsilon(1e-9));

    ChartGeometry wit = corpus("noneinstein3d");
    auto pts3 = sample_points(wit.domain, 10, 1);
    DetLReport w = det_L(wit, pts3);
    CHECK_FALSE(w.constant);
    for (std::size_t i = 0; i < w.det_values.size(); ++i)
        CHECK(w.det_values[i] / w.scalar_curvatures[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-6));

    // flat with sigma = delta: det vanishes identically
    ChartGeometry flat = corpus("flat2");
    flat.has_sigma = true;
    flat.sigma = Mat<Expr>(2, Expr::number(0.0));
    flat.sigma(0, 0) = Expr::number(1.0);
    flat.sigma(1, 1) = Expr::number(1.0);
    DetLReport fl = det_L(flat, pts2);
    for (double d : fl.det_values) CHECK(std::abs(d) <= 1e-14);
}

TEST_CASE("user-supplied sigma on a connection-sourced geometry") {
    // the perturbed connection admits no solutions, so any candidate sigma
    // leaves a visible D-residual
    ChartGeometry pert = corpus("perturbed2d");
    pert.has_sigma = true;
    pert.sigma = Mat<Expr>(2, Expr::number(0.0));
    pert.sigma(0, 0) = Expr::number(1.0);
    pert.sigma(1, 1) = Expr::number(1.0);
    auto pts = sample_points(pert.domain, 10, 1);
    CHECK(metrizability_residual(pert, pts).sup >= 1e-3);
    CHECK(prolongation_residual(pert, pts).sup >= 1e-3);
}

TEST_CASE("det L vanishes exactly where the scalar curvature of g^sigma does") {
    // g = dx^2 + e^{-x^2} dy^2 has K = 1 - x^2, crossing zero at x = 1
    ChartGeometry g;
    g.name = "sign-crossing-curvature";
    g.n = 2;
    g.variables = {"x", "y"};
    g.domain = {{0.5, 1.5}, {-1.0, 1.0}};
    g.has_metric = true;
    g.metric = Mat<Expr>(2, Expr::number(0.0));
    g.metric(0, 0) = Expr::number(1.0);
    g.metric(1, 1) = parse_expression("exp(0 - x^2)", g.variables);

    auto pts = sample_points(g.domain, 20, 3);
    DetLReport rep = det_L(g, pts);
    bool saw_positive = false, saw_negative = false;
    for (std::size_t i = 0; i < rep.det_values.size(); ++i) {
        double sc = rep.scalar_curvatures[i];
        // closed form: Sc = 2K = 2(1 - x^2); det L = Sc/(n(n-1)) = K
        CHECK(rep.det_values[i] == doctest::Approx(sc / 2.0).epsilon(1e-9));
        CHECK((std::abs(rep.det_values[i]) > 1e-10) == (std::abs(sc) > 2e-10));
        (sc > 0 ? saw_positive : saw_negative) = true;
    }
    CHECK(saw_positive);
    CHECK(saw_negative);
}

TEST_CASE("scale invariance of verdicts, residuals and the recovered metric") {
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    ChartGeometry sph = corpus("sphere2");
    auto pts = sample_points(sph.domain, 6, 2);
    for (int trial = 0; trial < 4; ++trial) {
        std::string utext = std::to_string(d(rng)) + "*x + " + std::to_string(d(rng)) + "*y + " +
                            std::to_string(d(rng)) + "*x*y + " + std::to_string(d(rng)) + "*y^2";
        Expr u = parse_expression(utext, sph.variables);
        EvalOptions opts;
        opts.scale_u = &u;

        CHECK(metrizability_residual(sph, pts, opts).sup <= 1e-7);
        CHECK(normality_residual(sph, pts, opts).sup <= 1e-7);

        // g^sigma computed in the changed scale still returns the round metric
        for (const auto& pt : pts) {
            Frame f = working_frame(sph, pt, opts);
            Mat<Jet> sigma = eval_sigma(sph, f, opts);
            Mat<Jet> g = metric_from_sigma(sigma, f.logv);
            Mat<Jet> g0 = eval_metric(sph, pt, 2);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    CHECK(std::abs(g(i, j).value() - g0(i, j).value()) <= 1e-8);
        }
    }

    // non-normal solutions stay non-normal under scale changes
    ChartGeometry wit = corpus("noneinstein3d");
    Expr u3 = parse_expression("0.2*x - 0.1*y*z", wit.variables);
    EvalOptions opts3;
    opts3.scale_u = &u3;
    auto pts3 = sample_points(wit.domain, 6, 2);
    CHECK(metrizability_residual(wit, pts3, opts3).sup <= 1e-7);
    CHECK(normality_residual(wit, pts3, opts3).sup >= 1e-3);
}
