#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fusionclust/model.hpp"
#include "fusionclust/solver.hpp"

namespace fusionclust {

/// True iff the partitions agree up to a relabelling.
bool exact_success(const Partition& found, const Partition& truth);

/// Hubert-Arabie adjusted Rand index from the pair-counting contingency
/// table. When both partitions are trivial in the same way (the index is
/// 0/0) the result is 1.
double adjusted_rand_index(const Partition& a, const Partition& b);

/// Projects the columns of a P x Q matrix onto its top `dims` principal
/// directions after centering. Each direction is signed so its
/// largest-magnitude coordinate is positive.
Matrix pca_project(const Matrix& points, int dims = 2);

enum class PlotFill {
    FromCentroid, // unobserved x_ip takes u_ip
    FeatureMean,
};

/// Dense copy of the data for plotting; unobserved entries filled per `fill`.
Matrix fill_for_plot(const ObservedDataset& data, const Matrix& U, PlotFill fill);

/// One row per point: joint 2-D PCA of the filled points and their
/// centroids, stacked.
struct PlotRow {
    int point_id = 0;
    int truth_label = 0;
    double pc1 = 0.0, pc2 = 0.0;
    double centroid_pc1 = 0.0, centroid_pc2 = 0.0;
};
std::vector<PlotRow> centroid_plot(const ObservedDataset& data, const Partition& truth, const Matrix& U,
                                   PlotFill fill = PlotFill::FromCentroid);

enum class SigmaRule {
    Fixed,          // use the H1 sigma in the base config as given
    DataAdaptive,   // default_h1_sigma() of the masked data, times sigma_scale
};

/// Relative lambda multipliers, ascending so a sweep that stops at the
/// first exact recovery uses the weakest fusion that succeeds.
inline const std::vector<double> kDefaultLambdaGrid{500, 700, 1000, 1400, 2000, 2800, 4000, 5600, 8000};

/// Runs the MM solver for each lambda on a grid and keeps the best
/// partition against a reference. Lambda values are multipliers of
/// s^(2-q) / N, where s is the penalty scale (sigma for H1, half the
/// median rescaled distance for Lp), q = 0 for H1 and q = p for Lp.
struct LambdaSweep {
    SolverConfig base;
    std::vector<double> lambda_grid = kDefaultLambdaGrid;
    bool relative_lambda = true;
    SigmaRule sigma_rule = SigmaRule::DataAdaptive;
    double sigma_scale = 1.0;
    double merge_tol = 0.0; // 0 selects default_merge_tol per solve
    bool stop_at_success = true;
};

struct SweepOutcome {
    Partition best;
    double best_ari = -1.0;
    double best_lambda = 0.0;
    bool success = false;
    ClusterResult result; // solver output for `best`
    double sigma = 0.0;   // H1 width actually used
};

/// Absolute lambda values the sweep will use for this dataset.
std::vector<double> sweep_lambdas(const ObservedDataset& data, const LambdaSweep& sweep, double* sigma_out = nullptr);

SweepOutcome sweep_lambda(const ObservedDataset& data, const Partition& truth, const LambdaSweep& sweep);

struct TrialInstance {
    ObservedDataset data; // fully observed
    Partition truth;
    ClusterGeometry geometry;
};

/// Builds the fully observed instance for one trial with M points per cluster.
using InstanceGenerator = std::function<TrialInstance(int M, std::uint64_t seed)>;

struct SuccessExperiment {
    InstanceGenerator generator;
    std::vector<double> p0_grid;
    std::vector<int> M_grid;
    int trials = 20;
    std::uint64_t seed = 0;
    LambdaSweep sweep;
    unsigned threads = 1;
};

struct SuccessRow {
    double p0 = 0.0;
    int M = 0;
    int successes = 0;
    int trials = 0;
    double success_rate = 0.0;
    double mean_best_ari = 0.0;
    double mean_kappa = 0.0;
    double mean_mu0 = 0.0;
};

/// Per (p0, M): fraction of seeded trials in which the best lambda of the
/// sweep recovers the ground truth exactly. Each trial draws a fresh
/// instance and mask; rows are ordered M-major, then p0.
std::vector<SuccessRow> success_curve(const SuccessExperiment& experiment);

} // namespace fusionclust
