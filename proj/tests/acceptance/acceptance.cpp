// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Optional arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fusionclust/analysis.hpp"
#include "fusionclust/cli.hpp"
#include "fusionclust/datagen.hpp"
#include "fusionclust/oracle.hpp"
#include "fusionclust/penalty.hpp"
#include "fusionclust/solver.hpp"
#include "fusionclust/theory.hpp"

using namespace fusionclust;
namespace fs = std::filesystem;

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Matrix gaussian_matrix(Rng& rng, int rows, int cols, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
    return m;
}

MaskMatrix bernoulli_mask(Rng& rng, int rows, int cols, double p0)
{
    std::bernoulli_distribution b(p0);
    MaskMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = b(rng);
    return m;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------- 1

Outcome theory_pins()
{
    using namespace theory;
    double worst = 0.0;
    worst = std::max(worst, rel_err(std::exp(log_gamma0(1.0, 2)), 2.0 / std::exp(1.0)));
    worst = std::max(worst, rel_err(std::exp(log_delta0(1.0, 50, 0.5, 1.5)), std::exp(-12.5)));
    const bool beta_exact = std::abs(beta0(0.2, 0.1) - 0.28) <= 1e-15;
    for (double b : {0.9, 0.5, 0.1}) {
        worst = std::max(worst, rel_err(eta0(2, 2, std::log(b)), 4 * b));
        worst = std::max(worst, rel_err(eta0(2, 3, std::log(b)), 18 * b * b));
    }
    return {worst <= 1e-12 && beta_exact,
            "worst relative error " + num(worst) + ", beta0(0.2,0.1) exact: " + (beta_exact ? "yes" : "no")};
}

// ---------------------------------------------------------------- 2

Outcome enumerator_matches_closed_sum()
{
    double worst = 0.0;
    for (int M = 2; M <= 12; ++M) {
        for (double b : {0.9, 0.5, 0.1, 1e-3}) {
            const double closed = theory::eta0_two_clusters(M, std::log(b));
            const double general = theory::eta0_enumerate(2, M, std::log(b));
            worst = std::max(worst, closed == 0.0 ? std::abs(general) : rel_err(general, closed));
        }
    }
    return {worst <= 1e-10, "worst relative difference " + num(worst) + " over 2 <= M <= 12"};
}

// ---------------------------------------------------------------- 3

Outcome majorizer_dominates()
{
    Rng rng(3);
    double worst_gap = 0.0, worst_touch = 0.0;
    for (const auto& s : {PenaltySpec::h1(1.0), PenaltySpec::lp(0.5)}) {
        for (int t = 0; t < 10000; ++t) {
            const double x0 = std::exp(uniform(rng, std::log(1e-4), std::log(20.0)));
            const double y = std::exp(uniform(rng, std::log(1e-6), std::log(50.0)));
            const double w = weight(x0, s);
            const double offset = phi(x0, s) - w * x0 * x0;
            worst_gap = std::max(worst_gap, phi(y, s) - (w * y * y + offset));
            worst_touch = std::max(worst_touch, std::abs(w * x0 * x0 + offset - phi(x0, s)));
        }
    }
    return {worst_gap <= 1e-10 && worst_touch <= 1e-10,
            "max phi - surrogate " + num(worst_gap) + ", max tangency gap " + num(worst_touch)};
}

// ---------------------------------------------------------------- 4

Outcome solver_monotone()
{
    Rng rng(4);
    int instances = 0, violations = 0;
    for (double p0 : {1.0, 0.7, 0.4}) {
        for (bool h1 : {true, false}) {
            for (int t = 0; t < 20; ++t) {
                const int K = integer(rng, 2, 4), M = integer(rng, 2, 8), P = integer(rng, 2, 10);
                const Matrix centers = gaussian_matrix(rng, P, K, 3.0);
                Matrix X = gaussian_matrix(rng, P, K * M, uniform(rng, 0.1, 1.0));
                for (int i = 0; i < K * M; ++i) X.col(i) += centers.col(i / M);
                const ObservedDataset data(X, bernoulli_mask(rng, P, K * M, p0));
                const double sigma = default_h1_sigma(data);
                const double scale = std::exp(uniform(rng, 0.0, std::log(3000.0)));
                SolverConfig c;
                c.penalty = h1 ? PenaltySpec::h1(sigma) : PenaltySpec::lp(uniform(rng, 0.2, 1.0));
                c.lambda = scale * (h1 ? sigma * sigma : 0.1) / (K * M);
                ++instances;
                try {
                    const auto obj = mm_cluster(data, c).trace.objective;
                    for (std::size_t k = 1; k < obj.size(); ++k)
                        if (obj[k] > obj[k - 1] + 1e-10 * std::abs(obj[k - 1])) {
                            ++violations;
                            break;
                        }
                } catch (const std::exception&) {
                    ++violations;
                }
            }
        }
    }
    return {violations == 0 && instances >= 100,
            std::to_string(violations) + " of " + std::to_string(instances) + " instances increased"};
}

// ---------------------------------------------------------------- 5

Outcome stationarity_and_gradient()
{
    Rng rng(5);
    double worst_residual = 0.0, worst_gradient = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int N = integer(rng, 2, 30), P = integer(rng, 1, 8);
        const ObservedDataset d(gaussian_matrix(rng, P, N, 3.0), bernoulli_mask(rng, P, N, uniform(rng, 0.3, 1.0)));
        const Matrix W = update_weights(initial_centroids(d, InitKind::MeanImpute), PenaltySpec::h1(2.0));
        for (auto kind : {LinearSolverKind::Direct, LinearSolverKind::ConjugateGradient}) {
            const Matrix U = update_centroids(d, W, 2.0, 1e-8, {kind});
            worst_residual = std::max(worst_residual, centroid_system_residuals(d, W, 2.0, 1e-8, U).maxCoeff());
        }

        const Matrix U = gaussian_matrix(rng, P, N);
        for (const auto& pen : {PenaltySpec::h1(uniform(rng, 0.5, 2.0)), PenaltySpec::lp(0.5)}) {
            const double lambda = uniform(rng, 0.1, 2.0);
            const Matrix G = objective_gradient(d, U, lambda, pen);
            Matrix fd(P, N);
            const double h = 1e-6 * std::max(1.0, U.cwiseAbs().maxCoeff());
            for (int i = 0; i < N; ++i) {
                for (int p = 0; p < P; ++p) {
                    Matrix up = U, dn = U;
                    up(p, i) += h;
                    dn(p, i) -= h;
                    fd(p, i) = (objective(d, up, lambda, pen) - objective(d, dn, lambda, pen)) / (2 * h);
                }
            }
            worst_gradient = std::max(worst_gradient, (G - fd).norm() / std::max(G.norm(), 1e-12));
        }
    }
    return {worst_residual < 1e-8 && worst_gradient < 1e-5,
            "worst relative residual " + num(worst_residual) + ", worst gradient error " + num(worst_gradient)};
}

// ---------------------------------------------------------------- 6

Outcome oracle_recovers_truth()
{
    Rng rng(6);
    int hits = 0;
    for (int t = 0; t < 50; ++t) {
        const int K = integer(rng, 2, 3);
        const int M = integer(rng, 2, 8 / K);
        const int P = integer(rng, K, 5);
        const KappaDataset k = gen_uniform_kappa(K, M, P, uniform(rng, 0.1, 0.9), static_cast<std::uint64_t>(t));
        if (!(k.geometry.kappa < 1.0)) continue;
        const OracleResult r = l0_solve(k.data, k.geometry.epsilon);
        hits += r.minimizers.size() == 1 && exact_success(r.minimizers.front(), k.truth);
    }
    return {hits == 50, std::to_string(hits) + "/50 unique ground-truth minimizers"};
}

// ---------------------------------------------------------------- 7

Outcome pair_and_defeat_rates_bounded()
{
    bool ok = true;
    std::string detail;
    for (std::uint64_t inst = 0; inst < 3; ++inst) {
        const KappaDataset k = gen_uniform_kappa(2, 3, 20, 0.5, derive_seed(7, {inst}));
        for (double p0 : {0.6, 0.8}) {
            const BoundCheckReport r = monte_carlo_bound_check(k.data, k.truth, p0, 2000, derive_seed(70, {inst}));
            ok = ok && r.pair_feasible.within && r.defeat.within;
            detail += " p0=" + num(p0) + ": feasible " + num(r.pair_feasible.empirical) + " <= " +
                      num(r.pair_feasible.bound) + ", defeat " + num(r.defeat.empirical) + " <= " +
                      num(r.defeat.bound) + ";";
        }
    }
    return {ok, "kappa~0.5, 3 instances," + detail};
}

// ---------------------------------------------------------------- 8

// Violations of "non-decreasing" along a sequence.
int inversions(const std::vector<double>& v)
{
    int n = 0;
    for (std::size_t i = 1; i < v.size(); ++i) n += v[i] < v[i - 1];
    return n;
}

Outcome success_curve_shape()
{
    SuccessExperiment ex;
    ex.generator = [](int M, std::uint64_t seed) {
        KappaDataset k = gen_uniform_kappa(2, M, 50, 0.39, seed);
        return TrialInstance{std::move(k.data), std::move(k.truth), k.geometry};
    };
    for (int i = 2; i <= 10; ++i) ex.p0_grid.push_back(i / 10.0);
    ex.M_grid = {10, 50};
    ex.trials = 20;
    ex.seed = 8;
    const auto rows = success_curve(ex);
    const std::size_t n = ex.p0_grid.size();
    std::vector<double> small, large;
    double mu0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        small.push_back(rows[i].success_rate);
        large.push_back(rows[n + i].success_rate);
        mu0 += (rows[i].mean_mu0 + rows[n + i].mean_mu0) / (2.0 * static_cast<double>(n));
    }
    int crossings = 0;
    for (std::size_t i = 0; i < n; ++i) crossings += large[i] < small[i];
    std::string curve = "M=10:";
    for (double s : small) curve += " " + num(s);
    curve += " | M=50:";
    for (double s : large) curve += " " + num(s);
    const bool ok = small.back() == 1.0 && large.back() == 1.0 && inversions(small) <= 1 && inversions(large) <= 1 &&
                    crossings <= 1;
    return {ok, curve + " (mean mu0 " + num(mu0) + ")"};
}

// ---------------------------------------------------------------- 9

int gaussian_recoveries(double center_scale, double p0)
{
    int hits = 0;
    for (std::uint64_t t = 0; t < 20; ++t) {
        SyntheticSpec spec;
        spec.K = 3;
        spec.M = 200;
        spec.P = 50;
        spec.centers = block_centers(3, 50, center_scale);
        spec.noise = GaussianNoise{0.1};
        spec.seed = derive_seed(9, {t});
        const GeneratedDataset g = gen_gaussian(spec);
        const ObservedDataset masked = apply_mask(g.data, {p0, derive_seed(90, {t})});
        hits += sweep_lambda(masked, g.truth, LambdaSweep{}).success;
    }
    return hits;
}

Outcome gaussian_datasets_recovered()
{
    bool ok = true;
    std::string detail;
    for (double p0 : {1.0, 0.9, 0.8}) {
        const int h = gaussian_recoveries(2.0, p0);
        ok = ok && h >= 19;
        detail += "dataset 1 p0=" + num(p0) + ": " + std::to_string(h) + "/20; ";
    }
    const int h = gaussian_recoveries(1.0, 1.0);
    ok = ok && h >= 19;
    detail += "dataset 2 p0=1: " + std::to_string(h) + "/20";
    return {ok, detail};
}

// ---------------------------------------------------------------- 10

Outcome wine_degrades_gracefully()
{
    const WineDataset wine = wine_prepare(fs::path(FUSIONCLUST_TEST_DATA_DIR) / "wine.data", 40);
    LambdaSweep sweep;
    sweep.stop_at_success = false;
    std::map<double, double> ari;
    for (double p0 : {1.0, 0.9, 0.3}) {
        const ObservedDataset masked = apply_mask(wine.data, {p0, derive_seed(10, {0})});
        ari[p0] = sweep_lambda(masked, wine.truth, sweep).best_ari;
    }
    const bool ok = wine.checksum_matches && ari[1.0] >= 0.8 && ari[0.9] >= ari[0.3] - 0.05;
    return {ok, "ARI p0=1: " + num(ari[1.0]) + ", p0=0.9: " + num(ari[0.9]) + ", p0=0.3: " + num(ari[0.3])};
}

// ---------------------------------------------------------------- 11

std::map<std::string, std::string> run_and_collect(const std::vector<std::string>& args, const fs::path& dir)
{
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<std::string> full = {"--out-dir", dir.string()};
    full.insert(full.end(), args.begin(), args.end());
    // Progress lines would interleave with the verdicts; keep them out.
    std::ostringstream progress;
    auto* saved = std::cout.rdbuf(progress.rdbuf());
    const int code = cli::run(full);
    std::cout.rdbuf(saved);
    if (code != cli::kExitOk) throw std::runtime_error("preset failed: " + args[0]);
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[entry.path().filename().string()] = s.str();
    }
    return files;
}

Outcome presets_deterministic()
{
    const std::string wine = (fs::path(FUSIONCLUST_TEST_DATA_DIR) / "wine.data").string();
    const std::vector<std::vector<std::string>> presets = {
        {"theory", "--preset", "fig2"},
        {"theory", "--P", "50", "--kappa", "0.5", "--M", "50"},
        {"simulate", "--preset", "fig3a", "--trials", "2", "--p0-grid", "0.4,1", "--M-grid", "10"},
        {"simulate", "--preset", "fig3c", "--trials", "2", "--p0-grid", "0.4,1", "--M-grid", "10"},
        {"simulate", "--preset", "fig4-dataset1", "--M", "40", "--p0-grid", "1,0.6"},
        {"simulate", "--preset", "fig4-dataset2", "--M", "40", "--p0-grid", "1,0.6"},
        {"wine", "--preset", "fig5-wine", "--data", wine, "--p0-grid", "1,0.5"},
        {"oracle-check", "--trials", "200"},
    };
    const fs::path dir = fs::temp_directory_path() / "fusionclust_acceptance_determinism";
    int identical = 0, files = 0;
    std::string differing;
    for (const auto& args : presets) {
        const auto a = run_and_collect(args, dir);
        const auto b = run_and_collect(args, dir);
        bool same = !a.empty() && a == b;
        identical += same;
        files += static_cast<int>(a.size());
        if (!same) differing += " " + args[0] + (args.size() > 2 ? " " + args[2] : "");
    }
    fs::remove_all(dir);
    const int n = static_cast<int>(presets.size());
    return {identical == n, std::to_string(identical) + "/" + std::to_string(n) + " presets byte identical over " +
                                std::to_string(files) + " files" + (differing.empty() ? "" : "; differ:" + differing)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s; // 0 means unbounded
    std::function<Outcome()> check;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> criteria = {
        {1, "theory formula pins", 1, theory_pins},
        {2, "general enumerator equals the two-cluster sum", 10, enumerator_matches_closed_sum},
        {3, "majorizer dominates and touches the penalty", 5, majorizer_dominates},
        {4, "solver objective is monotone", 120, solver_monotone},
        {5, "stationarity and gradient", 30, stationarity_and_gradient},
        {6, "exact oracle recovers full-observation truth", 120, oracle_recovers_truth},
        {7, "Monte Carlo rates respect the bounds", 300, pair_and_defeat_rates_bounded},
        {8, "success curve shape, kappa 0.39", 900, success_curve_shape},
        {9, "Gaussian datasets recovered", 1200, gaussian_datasets_recovered},
        {10, "Wine ARI", 300, wine_degrades_gracefully},
        {11, "CLI presets are deterministic", 0, presets_deterministic},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_s == 0 || secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failures += !pass;
        std::printf("%s criterion %d: %s: %s [%.2f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, in_time ? "" : " over budget");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
