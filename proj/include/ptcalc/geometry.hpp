#pragma once

#include "ptcalc/expr.hpp"
#include "ptcalc/jet.hpp"
#include "ptcalc/tensor.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace ptcalc {

/// A single coordinate chart with either metric components g_ab or Christoffel
/// symbols Gamma^c_ab given as expressions of the chart variables.
struct ChartGeometry {
    std::string name;
    int n = 0;
    std::vector<std::string> variables;
    std::vector<std::array<double, 2>> domain;

    bool has_metric = false;
    Mat<Expr> metric;   // symmetric
    Ten3<Expr> gamma;   // Gamma^c_ab = gamma(c,a,b), symmetric in (a,b)

    bool has_sigma = false;
    Mat<Expr> sigma;    // optional user-supplied sigma^{bc} components

    int samples = 25;
    unsigned seed = 1;
};

/// Curvature quantities of a torsion-free connection at a point, as jets:
/// riemann(a,b,c,d) = R_ab{}^c{}_d with [nabla_a, nabla_b] v^c = R_ab{}^c{}_d v^d,
/// ricci(a,b) = R_ca{}^c{}_b, schouten = ricci/(n-1), weyl its trace
/// adjustment, cotton(a,b,c) = nabla_a P_bc - nabla_b P_ac.
struct CurvaturePack {
    Ten4<Jet> riemann;
    Mat<Jet> ricci;
    Mat<Jet> schouten;
    Ten4<Jet> weyl;
    Ten3<Jet> cotton;
    bool has_cotton = false;
};

/// Working data at a point: the special connection in use, the log of the
/// coordinate density of its preserved volume form (0 for the chart volume),
/// and the metric jets when the chart is metric-sourced.
struct Frame {
    int n = 0;
    std::vector<double> x;
    Ten3<Jet> gamma;
    Jet logv;
    bool has_metric = false;
    Mat<Jet> g;
};

enum class ScaleMode { Chart, Metric };

Mat<Jet> eval_metric(const ChartGeometry& geom, std::span<const double> point, int order);

/// Levi-Civita symbols of g: Gamma^c_ab = (1/2) g^{cd}(d_a g_db + d_b g_da - d_d g_ab).
/// One jet order lower than g. Throws SingularMetricError when |det g| < 1e-12.
Ten3<Jet> christoffels_from_metric(const Mat<Jet>& g, std::span<const double> point);

/// The connection in the projective class of `gamma` preserving the chart
/// volume form: Gamma + (alpha_a delta^c_b + alpha_b delta^c_a)/(n+1) with
/// alpha_a = -Gamma^i_ia. The output satisfies Gamma^i_ia = 0.
Ten3<Jet> specialize_connection(const Ten3<Jet>& gamma);

CurvaturePack curvature_pack(const Ten3<Jet>& gamma, bool want_cotton = true);

/// Gamma-hat = Gamma + delta^c_a Upsilon_b + delta^c_b Upsilon_a (scale change
/// between special connections by an exact one-form Upsilon = du).
Ten3<Jet> apply_scale_change(const Ten3<Jet>& gamma, const Vec<Jet>& upsilon);

/// Component of a weight-w density after the scale change by u: e^{w u} times
/// the old component.
Jet density_rescale(const Jet& component, const Jet& u, double weight);

// covariant derivatives in the working connection; first output index is the
// derivative index
Ten3<Jet> cov_deriv_t20(const Mat<Jet>& t, const Ten3<Jet>& gamma); // nabla_a T^{bc}
Ten3<Jet> cov_deriv_t02(const Mat<Jet>& t, const Ten3<Jet>& gamma); // nabla_a T_{bc}
Mat<Jet> cov_deriv_vec_up(const Vec<Jet>& v, const Ten3<Jet>& gamma); // nabla_a v^b

/// Builds the working frame at a point. `source_order` is the jet order at
/// which the source expressions (metric or connection components) are
/// evaluated; a metric source yields connection jets of order source_order - 1.
Frame make_frame(const ChartGeometry& geom, std::span<const double> point, int source_order,
                 ScaleMode mode = ScaleMode::Chart);

// metric invariants (always computed in the metric's own scale)
Jet scalar_curvature(const Mat<Jet>& g, std::span<const double> point);
Mat<Jet> trace_free_ricci(const Mat<Jet>& g, std::span<const double> point);
Jet gauss_curvature(const Mat<Jet>& g, std::span<const double> point); // n = 2

} // namespace ptcalc
