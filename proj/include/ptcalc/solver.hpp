#pragma once

#include "ptcalc/metrizability.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ptcalc {

// Treats the prolongation system as a linear connection on the rank-N bundle
// of flattened (sigma, mu, rho) and bounds the solution space of the
// metrizability equation by accumulating linear constraints on parallel
// sections: pointwise curvature, its derivatives, and loop holonomy.

struct TransportResult {
    Eigen::MatrixXd M;        // transport matrix along the path
    double step_halving_error = 0.0;
};

/// Solves M' = -A_{x'(t)}(x(t)) M, M(0) = I by classical RK4 along the
/// piecewise-linear path; `steps` RK4 steps per segment (minimum 16). Throws
/// PathDomainError when a node leaves the domain box.
TransportResult transport(const ChartGeometry& geom, const std::vector<std::vector<double>>& path,
                          int steps = 256, const EvalOptions& opts = {});

/// Prolongation curvature Omega_ab = d_a A_b - d_b A_a + [A_a, A_b] for each
/// pair a < b; any parallel section satisfies Omega_ab v = 0.
std::vector<Eigen::MatrixXd> curvature_constraints(const ChartGeometry& geom,
                                                   std::span<const double> point,
                                                   const EvalOptions& opts = {});

/// Derivatives of the curvature along coordinate directions,
/// D_c Omega_ab = d_c Omega_ab - Omega_ab A_c; also annihilate parallel sections.
std::vector<Eigen::MatrixXd> derived_constraints(const ChartGeometry& geom,
                                                 std::span<const double> point,
                                                 const EvalOptions& opts = {});

/// Rank determination with the gap criterion: singular values below
/// floor_factor * s_max are discarded; the cut is trusted only when the ratio
/// across it is at least gap_ratio, otherwise the estimate is indeterminate.
struct RankEstimate {
    int rank = 0;
    double gap = std::numeric_limits<double>::infinity();
    bool indeterminate = false;
    std::vector<double> svals;
};
RankEstimate estimate_rank(const Eigen::MatrixXd& stack, double gap_ratio = 1e3,
                           double floor_factor = 1e-8);

struct ConstraintRecord {
    std::string source;
    double sup = 0.0;      // largest entry of the batch before thresholding
    int rank_added = 0;
    bool skipped = false;  // below its noise floor, not stacked
};

struct ObstructionReport {
    int N = 0;
    std::vector<ConstraintRecord> constraints;
    int rank = 0;
    int dim_upper_bound = 0;
    double sv_gap = 0.0;          // ratio at the rank cut (inf when nothing discarded)
    bool indeterminate = false;
    std::vector<double> singular_values;
};

struct ObstructionParams {
    int depth = 1;              // 0: curvature only; 1: plus first derivatives
    bool use_loops = true;      // coordinate rectangles at 3 scales around x0
    int transport_steps = 192;
    double gap_ratio = 1e3;     // required SVD gap at the rank cut
    double floor_factor = 1e-8; // absolute floor as a fraction of s_max
    double curvature_noise = 1e-9;  // batches below these sups are not stacked
    double holonomy_noise = 3e-6;
    EvalOptions opts;
};

/// Accumulates constraints pulled back to the box center along straight
/// chords; dim_upper_bound = N - rank bounds the dimension of the space of
/// solutions of the metrizability equation.
ObstructionReport dimension_bound(const ChartGeometry& geom,
                                  const std::vector<std::vector<double>>& sample_points,
                                  const ObstructionParams& params = {});

struct ReconstructionResult {
    std::vector<TractorS2<double>> values;    // at the target points
    std::vector<Mat<double>> sigma_samples;
    double d_residual = 0.0;                  // finite-difference D on transported values
    double path_dependence = 0.0;
    bool path_dependent = false;              // > 1e-6 mismatch between chord routes
};

/// Transports v0 from the box center to each target and unflattens; checks
/// v0 against `constraints` (pass the stacked matrix from dimension_bound)
/// when provided. Throws KernelVectorError if the constraint residual exceeds
/// kernel_tol.
ReconstructionResult reconstruct_solution(const ChartGeometry& geom, const Eigen::VectorXd& v0,
                                          const std::vector<std::vector<double>>& targets,
                                          const Eigen::MatrixXd* constraints = nullptr,
                                          double kernel_tol = 1e-6,
                                          const ObstructionParams& params = {});

/// Stacked constraint matrix of a report run (same accumulation as
/// dimension_bound); exposed for kernel extraction and reconstruct checks.
Eigen::MatrixXd constraint_stack(const ChartGeometry& geom,
                                 const std::vector<std::vector<double>>& sample_points,
                                 const ObstructionParams& params = {});

} // namespace ptcalc
