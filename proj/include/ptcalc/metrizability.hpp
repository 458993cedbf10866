#pragma once

#include "ptcalc/geometry.hpp"
#include "ptcalc/tractor.hpp"

#include <utility>
#include <vector>

namespace ptcalc {

// The sigma <-> g dictionary, the metrizability operator D, normality and
// Einstein verdicts, the prolongation system, and the correspondence with the
// third-order equation via the inverse of L(sigma). All density components are
// relative to the frame's working scale; logv is the log of that scale's
// coordinate volume density (identically 0 in the chart scale).

/// sigma^{ab} = sign(det g) (|det g| / v^2)^{1/(n+1)} g^{ab}; the unique real
/// sigma with g^sigma = g (up to the odd-n sign obstruction for det g < 0).
Mat<Jet> sigma_from_metric(const Mat<Jet>& g, const Jet& logv);

/// tau^sigma = v^2 det(sigma-components); plain determinant normalization.
Jet tau_from_sigma(const Mat<Jet>& sigma, const Jet& logv);

/// g^sigma = (tau^sigma sigma)^{-1}. Throws DegenerateSigmaError when
/// |det sigma| <= 1e-12.
Mat<Jet> metric_from_sigma(const Mat<Jet>& sigma, const Jet& logv);

/// (positive, negative) eigenvalue counts.
std::pair<int, int> signature_of(const Mat<double>& g);

/// Evaluation settings shared by the residual drivers.
struct EvalOptions {
    int order = 4;                  // jet order for the source expressions
    const Expr* scale_u = nullptr;  // optional exact scale change on top of the chart scale
};

/// Frame plus the optional scale change of `opts` applied.
Frame working_frame(const ChartGeometry& geom, std::span<const double> point,
                    const EvalOptions& opts);

/// The sigma field of the geometry at a frame: user-supplied component
/// expressions when present, else sigma_from_metric. Components follow the
/// frame's scale.
Mat<Jet> eval_sigma(const ChartGeometry& geom, const Frame& frame, const EvalOptions& opts);

struct ResidualReport {
    std::vector<double> per_point;
    double sup = 0.0;
};

/// sup-norm over samples of D(sigma) = trace-free(nabla_a sigma^{bc}).
ResidualReport metrizability_residual(const ChartGeometry& geom,
                                      const std::vector<std::vector<double>>& points,
                                      const EvalOptions& opts = {});

/// sup-norm over samples of all slots of nabla(L(sigma)).
ResidualReport normality_residual(const ChartGeometry& geom,
                                  const std::vector<std::vector<double>>& points,
                                  const EvalOptions& opts = {});

/// n >= 3: sup |trace-free Ricci|; n = 2: sup |dK| (constant Gauss curvature).
ResidualReport einstein_check(const ChartGeometry& geom,
                              const std::vector<std::vector<double>>& points, int order = 4);

/// n >= 3: sup |W|; n = 2: sup |Y| (both insensitive to the choice of scale).
ResidualReport projective_flatness_check(const ChartGeometry& geom,
                                         const std::vector<std::vector<double>>& points,
                                         const EvalOptions& opts = {});

/// The first-order closed form of D as dv/dx^a + A_a v = 0 on the flattened
/// (sigma, mu, rho): A_a collects the connection action of the S^2 tractor
/// derivative plus the (1/n)(0, W sigma, -2 Y sigma) deformation. Entries are
/// jets of order jet_order (source expressions are evaluated as needed).
std::vector<Mat<Jet>> prolongation_matrices(const ChartGeometry& geom,
                                            std::span<const double> point, int jet_order,
                                            const EvalOptions& opts = {});

/// Residual of the prolongation system on v = L(sigma): sup over samples of
/// |d_a v + A_a v|.
ResidualReport prolongation_residual(const ChartGeometry& geom,
                                     const std::vector<std::vector<double>>& points,
                                     const EvalOptions& opts = {});

struct Verdict {
    bool solves_metrizability = false;
    bool is_normal = false;
    bool is_einstein = false;
    bool is_projectively_flat = false;
    double d_residual = 0.0;
    double normality_res = 0.0;
    double einstein_res = 0.0;
    double flatness_res = 0.0;
    double tolerance = 1e-7;
    double witness_threshold = 1e-3;
    bool theorem_mt_consistent = false; // is_normal <=> is_einstein
};

Verdict theorem_mt_verdict(const ChartGeometry& geom,
                           const std::vector<std::vector<double>>& points, double tol = 1e-7,
                           double witness = 1e-3, const EvalOptions& opts = {});

/// tau = H(X, X) with H the fiberwise inverse of L(sigma); equals tau^sigma up
/// to a global constant on the nondegenerate locus. Throws
/// AlgebraicDegeneracyError where det L(sigma) vanishes (zero scalar curvature).
Jet corresponding_tau_at(const Frame& frame, const Mat<Jet>& sigma, const Mat<Jet>& schouten,
                         double degeneracy_tol = 1e-10);

/// Inverse map: sigma = (tau P^tau)^{-1} computed in the scale where the tau
/// component is +-1, transformed back to the frame's scale. Throws
/// ZeroTauError when tau vanishes at the point.
Mat<Jet> corresponding_sigma_at(const Frame& frame, const Jet& tau);

/// Determinant of the (n+1)x(n+1) matrix of L(sigma) in the frame's splitting;
/// for solutions this equals the scalar curvature of g^sigma up to a constant
/// (1/(n(n-1)) with these conventions), so it is constant for normal solutions.
struct DetLReport {
    std::vector<double> det_values;
    std::vector<double> scalar_curvatures; // of g^sigma, when sigma is nondegenerate
    double spread = 0.0;                   // max |det - mean| over samples
    bool constant = false;
};
DetLReport det_L(const ChartGeometry& geom, const std::vector<std::vector<double>>& points,
                 double constancy_tol = 1e-8, const EvalOptions& opts = {});

} // namespace ptcalc
