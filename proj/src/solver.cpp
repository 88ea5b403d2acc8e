#include "fusionclust/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fusionclust/csv_io.hpp"

namespace fusionclust {
namespace {

// Dense factorization budget (flops) for LinearSolverKind::Auto.
constexpr double kDirectFlopBudget = 5e8;

// Largest pair coupling 2 lambda w_ij kept as a finite Lp weight.
constexpr double kFuseStiffness = 1e8;

Matrix mask_as_double(const ObservedDataset& data)
{
    return data.mask().cast<double>().matrix();
}

void check_weights(const Matrix& W, Eigen::Index N)
{
    if (W.rows() != N || W.cols() != N) {
        throw std::invalid_argument("weight matrix must be N x N");
    }
}

// Centroid system over n nodes, each a group of points forced to share one
// centroid. Per feature p it reads
//   (diag(fit_p) + 2 lambda L_W + diag(ridge)) v_p = rhs_p
// where fit(g, p) counts observed entries of feature p in group g. With
// singleton groups this is the system documented on update_centroids().
struct CentroidSystem {
    Matrix fit;   // n x P
    Vector ridge; // n
    Matrix W;     // n x n, zero diagonal
    Matrix rhs;   // n x P
    double lambda = 0.0;
};

// group[i] is the node of point i; nodes are 0..n-1.
CentroidSystem contract(const ObservedDataset& data, const Matrix& W, double lambda, double rho,
                        const std::vector<int>& group, int n)
{
    const Eigen::Index N = data.points();
    const Eigen::Index P = data.features();
    const Vector means = observed_feature_means(data);
    const Matrix observed = data.mask().select(data.values(), 0.0);
    const Matrix mask = mask_as_double(data);
    CentroidSystem sys{Matrix::Zero(n, P), Vector::Zero(n), Matrix::Zero(n, n), Matrix::Zero(n, P), lambda};
    for (Eigen::Index i = 0; i < N; ++i) {
        const int g = group[static_cast<std::size_t>(i)];
        sys.fit.row(g) += mask.col(i).transpose();
        sys.rhs.row(g) += observed.col(i).transpose();
        sys.ridge(g) += rho;
        if (rho > 0.0) sys.rhs.row(g) += rho * means.transpose();
        for (Eigen::Index j = 0; j < N; ++j) {
            const int h = group[static_cast<std::size_t>(j)];
            if (g != h) sys.W(g, h) += W(i, j);
        }
    }
    return sys;
}

std::vector<int> identity_groups(Eigen::Index N)
{
    std::vector<int> g(static_cast<std::size_t>(N));
    std::iota(g.begin(), g.end(), 0);
    return g;
}

// Groups features with identical fit columns; map key is the column.
std::vector<std::vector<Eigen::Index>> group_features_by_fit(const Matrix& fit)
{
    std::map<std::vector<double>, std::vector<Eigen::Index>> groups;
    for (Eigen::Index p = 0; p < fit.cols(); ++p) {
        groups[std::vector<double>(fit.col(p).begin(), fit.col(p).end())].push_back(p);
    }
    std::vector<std::vector<Eigen::Index>> out;
    out.reserve(groups.size());
    for (auto& [key, members] : groups) out.push_back(std::move(members));
    // Deterministic processing order independent of the map's key ordering.
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

// Left-hand side of the system applied to n x P node values.
Matrix apply_system(const CentroidSystem& sys, const Matrix& Y)
{
    const Vector degree = sys.W.rowwise().sum();
    Matrix out = (2.0 * sys.lambda) * (degree.asDiagonal() * Y - sys.W * Y);
    out += sys.fit.cwiseProduct(Y);
    out += sys.ridge.asDiagonal() * Y;
    return out;
}

Matrix solve_direct(const CentroidSystem& sys)
{
    const Vector degree = sys.W.rowwise().sum();
    Matrix base = -2.0 * sys.lambda * sys.W;
    base.diagonal() += 2.0 * sys.lambda * degree + sys.ridge;

    Matrix V(sys.rhs.rows(), sys.rhs.cols());
    for (const auto& group : group_features_by_fit(sys.fit)) {
        Matrix A = base;
        A.diagonal() += sys.fit.col(group.front());
        Eigen::LLT<Matrix> llt(A);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("centroid system is singular (use a positive ridge)");
        }
        Matrix rhs(sys.rhs.rows(), static_cast<Eigen::Index>(group.size()));
        for (std::size_t g = 0; g < group.size(); ++g) rhs.col(static_cast<Eigen::Index>(g)) = sys.rhs.col(group[g]);
        const Matrix sol = llt.solve(rhs);
        for (std::size_t g = 0; g < group.size(); ++g) V.col(group[g]) = sol.col(static_cast<Eigen::Index>(g));
    }
    return V;
}

// Batched Jacobi-preconditioned CG: column p of the n x P unknown solves
// the system of feature p. All columns share the Laplacian product.
Matrix solve_cg(const CentroidSystem& sys, const LinearSolveOptions& options)
{
    const Eigen::Index n = sys.rhs.rows();
    const Eigen::Index P = sys.rhs.cols();
    const Vector degree = sys.W.rowwise().sum();
    const double lambda = sys.lambda;
    const Matrix& B = sys.rhs;
    auto apply = [&](const Matrix& Y) { return apply_system(sys, Y); };

    Matrix diag = sys.fit;
    diag.colwise() += 2.0 * lambda * degree + sys.ridge;
    if ((diag.array() <= 0.0).any()) {
        throw std::runtime_error("centroid system is singular (use a positive ridge)");
    }

    Matrix X = Matrix::Zero(n, P);
    Matrix R = B;
    Matrix Z = R.cwiseQuotient(diag);
    Matrix D = Z;
    Vector rz = R.cwiseProduct(Z).colwise().sum().transpose();
    const Vector bnorm = B.colwise().norm().transpose();
    std::vector<bool> done(static_cast<std::size_t>(P), false);

    auto converged = [&](Eigen::Index p) {
        return R.col(p).norm() <= options.cg_tol * (bnorm(p) > 0.0 ? bnorm(p) : 1.0);
    };

    const int max_iters = options.cg_max_iters > 0 ? options.cg_max_iters : static_cast<int>(10 * n);
    for (int it = 0;; ++it) {
        bool all_done = true;
        for (Eigen::Index p = 0; p < P; ++p) {
            if (!done[static_cast<std::size_t>(p)] && converged(p)) done[static_cast<std::size_t>(p)] = true;
            all_done = all_done && done[static_cast<std::size_t>(p)];
        }
        if (all_done) break;
        if (it >= max_iters) {
            double worst = 0.0;
            for (Eigen::Index p = 0; p < P; ++p) {
                worst = std::max(worst, R.col(p).norm() / (bnorm(p) > 0.0 ? bnorm(p) : 1.0));
            }
            throw std::runtime_error("conjugate gradient did not converge; relative residual " +
                                     format_double(worst));
        }

        const Matrix AD = apply(D);
        for (Eigen::Index p = 0; p < P; ++p) {
            if (done[static_cast<std::size_t>(p)]) continue;
            const double curv = D.col(p).dot(AD.col(p));
            if (!(curv > 0.0)) {
                done[static_cast<std::size_t>(p)] = true;
                continue;
            }
            const double alpha = rz(p) / curv;
            X.col(p) += alpha * D.col(p);
            R.col(p) -= alpha * AD.col(p);
            Z.col(p) = R.col(p).cwiseQuotient(diag.col(p));
            const double rz_new = R.col(p).dot(Z.col(p));
            D.col(p) = Z.col(p) + (rz_new / rz(p)) * D.col(p);
            rz(p) = rz_new;
        }
    }
    return X;
}

// Solves the contracted system and expands node centroids back to points.
Matrix solve_grouped(const ObservedDataset& data, const Matrix& W, double lambda, double rho,
                     const std::vector<int>& group, int n, const LinearSolveOptions& options,
                     const Matrix* warm_start)
{
    check_weights(W, data.points());
    if (!(lambda >= 0.0) || !(rho >= 0.0)) {
        throw std::invalid_argument("lambda and rho must be non-negative");
    }
    const CentroidSystem sys = contract(data, W, lambda, rho, group, n);

    LinearSolverKind kind = options.kind;
    if (kind == LinearSolverKind::Auto) {
        const double nodes = static_cast<double>(n);
        const double patterns = static_cast<double>(group_features_by_fit(sys.fit).size());
        kind = patterns * nodes * nodes * nodes / 3.0 <= kDirectFlopBudget ? LinearSolverKind::Direct
                                                                           : LinearSolverKind::ConjugateGradient;
    }
    // Node start value: the centroid of the group's first point.
    Matrix start = Matrix::Zero(n, data.features());
    if (warm_start) {
        for (std::size_t i = group.size(); i-- > 0;) start.row(group[i]) = warm_start->col(static_cast<Eigen::Index>(i)).transpose();
    }
    // A feature nobody observes solves to the constant rhs / ridge = mbar_p
    // exactly (the Laplacian annihilates constants); the general solve would
    // have to resolve a ridge-sized eigenvalue next to the fusion couplings.
    std::vector<Eigen::Index> informative;
    for (Eigen::Index p = 0; p < sys.fit.cols(); ++p) {
        if (!(sys.fit.col(p).array() == 0.0).all() || !(sys.ridge.array() > 0.0).all()) informative.push_back(p);
    }
    Matrix V = sys.rhs.cwiseQuotient(sys.ridge.replicate(1, sys.rhs.cols()));
    if (!informative.empty()) {
        // Correction form: solve for the step from the start, so a start that
        // already satisfies the system is returned bit for bit.
        const auto cols = Eigen::all;
        CentroidSystem sub{sys.fit(cols, informative), sys.ridge, sys.W, sys.rhs(cols, informative), sys.lambda};
        const Matrix base = start(cols, informative);
        sub.rhs -= apply_system(sub, base);
        V(cols, informative) = base + (kind == LinearSolverKind::Direct ? solve_direct(sub) : solve_cg(sub, options));
    }
    Matrix U(data.features(), data.points());
    for (std::size_t i = 0; i < group.size(); ++i) U.col(static_cast<Eigen::Index>(i)) = V.row(group[i]).transpose();
    return U;
}

// Labels of the connected components of the graph on N nodes with an edge
// wherever linked(i, j), numbered by first occurrence.
template <class Linked>
Partition components(Eigen::Index N, Linked linked)
{
    std::vector<int> parent(static_cast<std::size_t>(N));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = i + 1; j < N; ++j) {
            if (linked(i, j)) {
                const int a = find(static_cast<int>(i));
                const int b = find(static_cast<int>(j));
                if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
            }
        }
    }
    std::vector<int> roots(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = find(static_cast<int>(i));
    return Partition::canonical(roots);
}

// Lp only. The exact tangent majorizer has curvature diverging at distance
// 0, so a pair at distance <= tau (where the floored weight under-estimates
// it) or whose coupling 2 lambda w exceeds kFuseStiffness is handled by its
// infinite-curvature limit: both points share one centroid. The cap keeps
// the centroid system well conditioned; the skipped descent steps would
// move the pair by less than the round-off of an unfused solve. Returns
// the node count.
int fused_groups(const Matrix& U, const Matrix& W, double lambda, const PenaltySpec& penalty,
                 std::vector<int>& group)
{
    const Eigen::Index N = U.cols();
    if (penalty.is_h1()) {
        group = identity_groups(N);
        return static_cast<int>(N);
    }
    const Partition p = components(N, [&](Eigen::Index i, Eigen::Index j) {
        return 2.0 * lambda * W(i, j) >= kFuseStiffness || (U.col(i) - U.col(j)).norm() <= penalty.tau;
    });
    group = p.labels();
    return p.cluster_count();
}

} // namespace

void SolverConfig::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be non-negative");
    if (max_outer_iters < 1) throw std::invalid_argument("max_outer_iters must be >= 1");
    if (!(objective_rel_tol >= 0.0)) throw std::invalid_argument("objective tolerance must be >= 0");
    if (!(sigma_anneal > 0.0 && sigma_anneal <= 1.0)) {
        throw std::invalid_argument("sigma annealing factor must lie in (0,1]");
    }
    penalty.validate();
}

Matrix pairwise_distances(const Matrix& U)
{
    const Eigen::Index N = U.cols();
    Matrix D = Matrix::Zero(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = j + 1; i < N; ++i) {
            const double d = (U.col(i) - U.col(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return D;
}

double objective(const ObservedDataset& data, const Matrix& U, double lambda, const PenaltySpec& penalty)
{
    if (U.rows() != data.features() || U.cols() != data.points()) {
        throw std::invalid_argument("centroid shape does not match data");
    }
    const double fit = data.mask().select(U - data.values(), 0.0).squaredNorm();
    double fusion = 0.0;
    const Eigen::Index N = U.cols();
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = j + 1; i < N; ++i) {
            fusion += phi((U.col(i) - U.col(j)).norm(), penalty);
        }
    }
    // Ordered pairs: each unordered pair appears twice, the diagonal adds phi(0) = 0.
    return fit + lambda * 2.0 * fusion;
}

Matrix objective_gradient(const ObservedDataset& data, const Matrix& U, double lambda,
                          const PenaltySpec& penalty)
{
    Matrix G = 2.0 * data.mask().select(U - data.values(), 0.0);
    const Eigen::Index N = U.cols();
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = j + 1; i < N; ++i) {
            const Vector diff = U.col(i) - U.col(j);
            const double d = diff.norm();
            if (d == 0.0) continue;
            // Both orderings (i,j) and (j,i) contribute phi'(d) (u_i - u_j) / d.
            const Vector g = (2.0 * lambda * phi_derivative(d, penalty) / d) * diff;
            G.col(i) += g;
            G.col(j) -= g;
        }
    }
    return G;
}

Matrix update_weights(const Matrix& U, const PenaltySpec& penalty)
{
    const Eigen::Index N = U.cols();
    Matrix W = Matrix::Zero(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = j + 1; i < N; ++i) {
            const double w = weight((U.col(i) - U.col(j)).norm(), penalty);
            W(i, j) = w;
            W(j, i) = w;
        }
    }
    return W;
}

Vector observed_feature_means(const ObservedDataset& data)
{
    const Matrix mask = mask_as_double(data);
    const Vector counts = mask.rowwise().sum();
    const Vector sums = data.mask().select(data.values(), 0.0).rowwise().sum();
    Vector means = Vector::Zero(data.features());
    for (Eigen::Index p = 0; p < means.size(); ++p) {
        if (counts(p) > 0.0) means(p) = sums(p) / counts(p);
    }
    return means;
}

Matrix update_centroids(const ObservedDataset& data, const Matrix& W, double lambda, double rho,
                        const LinearSolveOptions& options, const Matrix* warm_start)
{
    const Eigen::Index N = data.points();
    return solve_grouped(data, W, lambda, rho, identity_groups(N), static_cast<int>(N), options,
                         warm_start);
}

Vector centroid_system_residuals(const ObservedDataset& data, const Matrix& W, double lambda,
                                 double rho, const Matrix& U)
{
    check_weights(W, data.points());
    const Eigen::Index N = data.points();
    const CentroidSystem sys = contract(data, W, lambda, rho, identity_groups(N), static_cast<int>(N));
    const Matrix& B = sys.rhs;
    const Matrix Ut = U.transpose();
    const Vector degree = W.rowwise().sum();
    Matrix AU = (2.0 * lambda) * (degree.asDiagonal() * Ut - W * Ut);
    AU += sys.fit.cwiseProduct(Ut) + rho * Ut;
    Vector res(data.features());
    for (Eigen::Index p = 0; p < res.size(); ++p) {
        const double bn = B.col(p).norm();
        res(p) = (AU.col(p) - B.col(p)).norm() / (bn > 0.0 ? bn : 1.0);
    }
    return res;
}

Matrix initial_centroids(const ObservedDataset& data, InitKind init)
{
    const Vector fill = init == InitKind::MeanImpute ? observed_feature_means(data)
                                                     : Vector::Zero(data.features());
    Matrix U = data.values();
    for (Eigen::Index i = 0; i < U.cols(); ++i) {
        for (Eigen::Index p = 0; p < U.rows(); ++p) {
            if (!data.observed(p, i)) U(p, i) = fill(p);
        }
    }
    return U;
}

ClusterResult mm_cluster(const ObservedDataset& data, const SolverConfig& config)
{
    config.validate();
    PenaltySpec penalty = config.penalty;
    const bool annealing = penalty.is_h1() && config.sigma_anneal < 1.0;

    ClusterResult result;
    Matrix U = initial_centroids(data, config.init);
    Matrix W;
    std::vector<int> group;
    double current = objective(data, U, config.lambda, penalty);
    result.trace.objective.push_back(current);
    // Round-off scale for objectives at or near zero.
    const double floor = 1e-14 * (1.0 + data.mask().select(data.values(), 0.0).squaredNorm());

    for (int it = 1; it <= config.max_outer_iters; ++it) {
        W = update_weights(U, penalty);
        const int nodes = fused_groups(U, W, config.lambda, penalty, group);
        U = solve_grouped(data, W, config.lambda, config.ridge, group, nodes, config.linear, &U);
        const double next = objective(data, U, config.lambda, penalty);
        if (!std::isfinite(next)) {
            throw std::runtime_error("objective became non-finite");
        }
        if (next > current + 1e-10 * std::abs(current) + floor) {
            throw std::runtime_error("majorization violated: objective rose from " + format_double(current) + " to " +
                                     format_double(next));
        }
        result.trace.objective.push_back(next);
        result.trace.iterations = it;

        const bool settled = std::abs(current - next) <= config.objective_rel_tol * std::abs(current) + floor;
        current = next;

        if (annealing) {
            auto& h1 = std::get<H1Penalty>(penalty.kind);
            if (h1.sigma > config.sigma_floor) {
                h1.sigma = std::max(h1.sigma * config.sigma_anneal, config.sigma_floor);
                // The objective changes with sigma; restart descent bookkeeping.
                current = objective(data, U, config.lambda, penalty);
                continue;
            }
        }
        if (settled) {
            result.trace.converged = true;
            break;
        }
    }
    result.centroids = CentroidSet{std::move(U), std::move(W)};
    if (result.centroids.W.size() == 0) result.centroids.W = Matrix::Zero(data.points(), data.points());
    return result;
}

double default_merge_tol(const Matrix& U)
{
    const double widest = U.cols() > 1 ? pairwise_distances(U).maxCoeff() : 0.0;
    return widest > 0.0 ? 1e-3 * widest : 1.0;
}

Partition extract_clusters(const Matrix& U, double merge_tol)
{
    if (!(merge_tol > 0.0)) throw std::invalid_argument("merge tolerance must be positive");
    return components(U.cols(), [&](Eigen::Index i, Eigen::Index j) { return (U.col(i) - U.col(j)).norm() <= merge_tol; });
}

Matrix rescaled_pairwise_distances_matrix(const ObservedDataset& data)
{
    const Eigen::Index N = data.points();
    const Eigen::Index P = data.features();
    const Matrix mask = mask_as_double(data);
    const Matrix X = data.mask().select(data.values(), 0.0);
    // For each pair: common count, and sum over common features of (x_i - x_j)^2
    // = sum m_i m_j x_i^2 + sum m_i m_j x_j^2 - 2 sum m_i m_j x_i x_j.
    const Matrix common = mask.transpose() * mask;
    const Matrix sq = X.cwiseProduct(X);
    const Matrix a = sq.transpose() * mask;
    Matrix ss = a + a.transpose() - 2.0 * (X.transpose() * X);
    Matrix out(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
        for (Eigen::Index i = 0; i < N; ++i) {
            const double c = common(i, j);
            out(i, j) = (i == j || c == 0.0) ? std::numeric_limits<double>::quiet_NaN()
                                             : std::sqrt(std::max(ss(i, j), 0.0) * static_cast<double>(P) / c);
        }
    }
    return out;
}

std::vector<double> rescaled_pairwise_distances(const ObservedDataset& data)
{
    const Matrix dist = rescaled_pairwise_distances_matrix(data);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < dist.cols(); ++j) {
            if (!std::isnan(dist(i, j))) out.push_back(dist(i, j));
        }
    }
    return out;
}

double default_h1_sigma(const ObservedDataset& data, InitKind init)
{
    const Eigen::Index N = data.points();
    if (N < 2) return 1.0;
    const Matrix dist = pairwise_distances(initial_centroids(data, init));
    std::vector<double> nearest(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < N; ++j) {
            if (j != i) best = std::min(best, dist(i, j));
        }
        nearest[static_cast<std::size_t>(i)] = best;
    }
    const auto mid = nearest.begin() + static_cast<std::ptrdiff_t>(nearest.size() / 2);
    std::nth_element(nearest.begin(), mid, nearest.end());
    return *mid > 0.0 ? kH1SigmaFactor * *mid : 1.0;
}

} // namespace fusionclust
