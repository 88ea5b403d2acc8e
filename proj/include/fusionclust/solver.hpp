#pragma once

#include <optional>
#include <vector>

#include "fusionclust/model.hpp"
#include "fusionclust/penalty.hpp"

namespace fusionclust {

enum class LinearSolverKind {
    Auto,              // direct when the factorization budget allows, else CG
    Direct,            // one dense Cholesky per distinct feature mask pattern
    ConjugateGradient, // Jacobi-preconditioned CG, all features in one batch
};

enum class InitKind {
    MeanImpute, // unobserved entries take the observed mean of their feature
    ZeroFill,
};

struct LinearSolveOptions {
    LinearSolverKind kind = LinearSolverKind::Auto;
    double cg_tol = 1e-10; // relative residual per feature
    int cg_max_iters = 0;  // 0 means 10 * N
};

struct SolverConfig {
    double lambda = 1.0;
    PenaltySpec penalty;
    int max_outer_iters = 200;
    double objective_rel_tol = 1e-8;
    LinearSolveOptions linear;
    double ridge = 1e-8; // pull toward observed feature means
    InitKind init = InitKind::MeanImpute;
    /// H1 only: sigma is multiplied by this factor after every outer
    /// iteration until it reaches sigma_floor. 1 disables annealing.
    double sigma_anneal = 1.0;
    double sigma_floor = 0.0;

    void validate() const;
};

/// Surrogate variables (column i is u_i) and the symmetric pairwise
/// weights of the last majorization step.
struct CentroidSet {
    Matrix U;
    Matrix W;
};

struct SolveTrace {
    std::vector<double> objective; // entry 0 is the initial point
    int iterations = 0;
    bool converged = false;
};

struct ClusterResult {
    CentroidSet centroids;
    SolveTrace trace;
};

/// sum_i ||S_i (u_i - x_i)||^2 + lambda * sum_{i,j} phi(||u_i - u_j||), the
/// double sum running over ordered pairs.
double objective(const ObservedDataset& data, const Matrix& U, double lambda, const PenaltySpec& penalty);

/// Analytic gradient of objective() with respect to U.
Matrix objective_gradient(const ObservedDataset& data, const Matrix& U, double lambda,
                          const PenaltySpec& penalty);

/// Symmetric N x N matrix of ||u_i - u_j||_2.
Matrix pairwise_distances(const Matrix& U);

/// w_ij = weight(||u_i - u_j||), zero diagonal.
Matrix update_weights(const Matrix& U, const PenaltySpec& penalty);

/// Mean of the observed entries of each feature, 0 where none is observed.
Vector observed_feature_means(const ObservedDataset& data);

/// Exact minimizer over U of the quadratic majorizer with weights W. For
/// every feature p it solves
///   (D_p + 2 lambda L_W + rho I) u_p = D_p x_p + rho mbar_p 1
/// where D_p is the observation mask of feature p and L_W the Laplacian
/// of W. The solve is done for the step away from `warm_start` (zero if
/// absent), so a start that already solves the system is returned unchanged.
Matrix update_centroids(const ObservedDataset& data, const Matrix& W, double lambda, double rho,
                        const LinearSolveOptions& options = {},
                        const Matrix* warm_start = nullptr);

/// Per-feature ||A_p u_p - b_p|| / ||b_p|| of the system above (absolute
/// residual where b_p = 0).
Vector centroid_system_residuals(const ObservedDataset& data, const Matrix& W, double lambda,
                                 double rho, const Matrix& U);

Matrix initial_centroids(const ObservedDataset& data, InitKind init);

/// Alternates weight and centroid updates until the relative change of
/// objective() drops below the tolerance. Throws std::runtime_error
/// ("majorization violated") if the objective increases.
///
/// Lp only: a pair closer than tau, or whose coupling 2 lambda w_ij exceeds
/// 1e8, is treated with the infinite-curvature limit of its majorizer and
/// shares one centroid in that step. The floored weight alone would not
/// majorize phi there, and the cap keeps the linear systems well conditioned.
ClusterResult mm_cluster(const ObservedDataset& data, const SolverConfig& config);

/// 1e-3 times the largest pairwise centroid distance, or 1 if all coincide.
double default_merge_tol(const Matrix& U);

/// Connected components of the graph joining u_i, u_j when
/// ||u_i - u_j|| <= merge_tol. Labels follow first occurrence.
Partition extract_clusters(const Matrix& U, double merge_tol);

/// sqrt(P / c) * ||x_i - x_j|| over the c commonly observed features, for
/// every pair i < j with c > 0.
std::vector<double> rescaled_pairwise_distances(const ObservedDataset& data);

/// Same distances as a symmetric N x N matrix; NaN on the diagonal and
/// where two points share no observed feature.
Matrix rescaled_pairwise_distances_matrix(const ObservedDataset& data);

inline constexpr double kH1SigmaFactor = 0.35;

/// Scale-adaptive H1 width: kH1SigmaFactor times the median over points of
/// the distance to the nearest other point, measured between the starting
/// centroids so that it matches what the first weight update sees. Returns
/// 1 if that median is zero.
double default_h1_sigma(const ObservedDataset& data, InitKind init = InitKind::MeanImpute);

} // namespace fusionclust
