#include "fusionclust/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "fusionclust/datagen.hpp"
#include "fusionclust/parallel.hpp"

namespace fusionclust {
namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }

void require_same_length(const Partition& a, const Partition& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("partitions differ in length");
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

} // namespace

bool exact_success(const Partition& found, const Partition& truth)
{
    require_same_length(found, truth);
    return found.canonicalized() == truth.canonicalized();
}

double adjusted_rand_index(const Partition& a, const Partition& b)
{
    require_same_length(a, b);
    if (a.size() < 2) throw std::invalid_argument("ARI needs at least two points");

    std::map<std::pair<int, int>, double> table;
    std::vector<double> rows(static_cast<std::size_t>(a.cluster_count()), 0.0);
    std::vector<double> cols(static_cast<std::size_t>(b.cluster_count()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[static_cast<std::size_t>(a[i])] += 1.0;
        cols[static_cast<std::size_t>(b[i])] += 1.0;
    }
    double index = 0.0;
    for (const auto& [cell, n] : table) index += choose2(n);
    double sum_rows = 0.0;
    double sum_cols = 0.0;
    for (double r : rows) sum_rows += choose2(r);
    for (double c : cols) sum_cols += choose2(c);
    const double expected = sum_rows * sum_cols / choose2(static_cast<double>(a.size()));
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

Matrix pca_project(const Matrix& points, int dims)
{
    if (points.cols() < 2) throw std::invalid_argument("PCA needs at least two points");
    if (dims < 1) throw std::invalid_argument("PCA needs dims >= 1");
    Matrix centered = points;
    centered.colwise() -= points.rowwise().mean();

    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU);
    const Matrix& dirs = svd.matrixU();
    Matrix out = Matrix::Zero(dims, points.cols());
    const Eigen::Index available = std::min<Eigen::Index>(dims, dirs.cols());
    for (Eigen::Index k = 0; k < available; ++k) {
        Vector d = dirs.col(k);
        Eigen::Index arg = 0;
        d.cwiseAbs().maxCoeff(&arg);
        if (d(arg) < 0.0) d = -d;
        out.row(k) = d.transpose() * centered;
        // Directions beyond the numerical rank carry no signal.
        if (svd.singularValues()(k) <= 1e-12 * std::max(1.0, svd.singularValues()(0))) out.row(k).setZero();
    }
    return out;
}

Matrix fill_for_plot(const ObservedDataset& data, const Matrix& U, PlotFill fill)
{
    const Vector means = observed_feature_means(data);
    Matrix X = data.values();
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
        for (Eigen::Index p = 0; p < X.rows(); ++p) {
            if (!data.observed(p, i)) X(p, i) = fill == PlotFill::FromCentroid ? U(p, i) : means(p);
        }
    }
    return X;
}

std::vector<PlotRow> centroid_plot(const ObservedDataset& data, const Partition& truth, const Matrix& U,
                                   PlotFill fill)
{
    const Eigen::Index N = data.points();
    Matrix stacked(data.features(), 2 * N);
    stacked << fill_for_plot(data, U, fill), U;
    const Matrix pcs = pca_project(stacked, 2);
    std::vector<PlotRow> rows;
    rows.reserve(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
        rows.push_back({static_cast<int>(i), truth[static_cast<std::size_t>(i)], pcs(0, i), pcs(1, i),
                        pcs(0, N + i), pcs(1, N + i)});
    }
    return rows;
}

std::vector<double> sweep_lambdas(const ObservedDataset& data, const LambdaSweep& sweep, double* sigma_out)
{
    double scale = 1.0;
    double q = 0.0;
    if (const auto* h = std::get_if<H1Penalty>(&sweep.base.penalty.kind)) {
        scale = sweep.sigma_rule == SigmaRule::DataAdaptive ? sweep.sigma_scale * default_h1_sigma(data, sweep.base.init)
                                                            : h->sigma;
    } else {
        q = std::get<LpPenalty>(sweep.base.penalty.kind).p;
        const double med = median_of(rescaled_pairwise_distances(data));
        scale = med > 0.0 ? 0.5 * med : 1.0;
    }
    if (sigma_out) *sigma_out = scale;
    std::vector<double> out;
    const double unit = sweep.relative_lambda
                            ? std::pow(scale, 2.0 - q) / static_cast<double>(data.points())
                            : 1.0;
    for (double c : sweep.lambda_grid) out.push_back(c * unit);
    return out;
}

SweepOutcome sweep_lambda(const ObservedDataset& data, const Partition& truth, const LambdaSweep& sweep)
{
    if (sweep.lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
    double scale = 0.0;
    const auto lambdas = sweep_lambdas(data, sweep, &scale);

    SolverConfig config = sweep.base;
    if (config.penalty.is_h1()) std::get<H1Penalty>(config.penalty.kind).sigma = scale;

    std::optional<SweepOutcome> best;
    for (double lambda : lambdas) {
        config.lambda = lambda;
        ClusterResult res = mm_cluster(data, config);
        const double tol = sweep.merge_tol > 0.0 ? sweep.merge_tol : default_merge_tol(res.centroids.U);
        Partition found = extract_clusters(res.centroids.U, tol);
        const double ari = found.size() >= 2 ? adjusted_rand_index(found, truth) : 1.0;
        const bool ok = exact_success(found, truth);
        if (!best || ari > best->best_ari) {
            best = SweepOutcome{std::move(found), ari, lambda, ok, std::move(res),
                                config.penalty.is_h1() ? scale : 0.0};
        }
        if (ok && sweep.stop_at_success) break;
    }
    return std::move(*best);
}

std::vector<SuccessRow> success_curve(const SuccessExperiment& ex)
{
    if (!ex.generator) throw std::invalid_argument("experiment has no instance generator");
    if (ex.p0_grid.empty() || ex.M_grid.empty() || ex.trials < 1) {
        throw std::invalid_argument("experiment grids must be non-empty and trials >= 1");
    }

    struct Cell {
        bool success = false;
        double ari = 0.0;
        double kappa = 0.0;
        double mu0 = 0.0;
    };
    const std::size_t n_p0 = ex.p0_grid.size();
    const std::size_t n_trials = static_cast<std::size_t>(ex.trials);
    const std::size_t jobs = ex.M_grid.size() * n_trials;
    std::vector<std::vector<Cell>> cells(jobs, std::vector<Cell>(n_p0));

    // One job per (M, trial): the instance and the mask stream are shared by
    // every p0, so the masks at different p0 come from the same uniform draws.
    parallel_for(jobs, ex.threads, [&](std::size_t job) {
        const std::size_t mi = job / n_trials;
        const std::size_t t = job % n_trials;
        const int M = ex.M_grid[mi];
        const TrialInstance inst =
            ex.generator(M, derive_seed(ex.seed, {0x1157ULL, static_cast<std::uint64_t>(M), t}));
        const std::uint64_t mask_seed = derive_seed(ex.seed, {0x3a5cULL, static_cast<std::uint64_t>(M), t});
        for (std::size_t pi = 0; pi < n_p0; ++pi) {
            const ObservedDataset masked = apply_mask(inst.data, {ex.p0_grid[pi], mask_seed});
            const SweepOutcome out = sweep_lambda(masked, inst.truth, ex.sweep);
            cells[job][pi] = {out.success, out.best_ari, inst.geometry.kappa, inst.geometry.mu0};
        }
    });

    std::vector<SuccessRow> rows;
    for (std::size_t mi = 0; mi < ex.M_grid.size(); ++mi) {
        for (std::size_t pi = 0; pi < n_p0; ++pi) {
            SuccessRow row;
            row.p0 = ex.p0_grid[pi];
            row.M = ex.M_grid[mi];
            row.trials = ex.trials;
            for (std::size_t t = 0; t < n_trials; ++t) {
                const Cell& c = cells[mi * n_trials + t][pi];
                row.successes += c.success ? 1 : 0;
                row.mean_best_ari += c.ari;
                row.mean_kappa += c.kappa;
                row.mean_mu0 += c.mu0;
            }
            const double n = static_cast<double>(ex.trials);
            row.success_rate = row.successes / n;
            row.mean_best_ari /= n;
            row.mean_kappa /= n;
            row.mean_mu0 /= n;
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace fusionclust
