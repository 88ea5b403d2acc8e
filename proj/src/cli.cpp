#include "fusionclust/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fusionclust/analysis.hpp"
#include "fusionclust/csv_io.hpp"
#include "fusionclust/datagen.hpp"
#include "fusionclust/oracle.hpp"
#include "fusionclust/theory.hpp"

namespace fusionclust::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 0;
};

// Everything an output file needs to identify the run that produced it.
struct RunContext {
    std::vector<std::string> args;
    Common common;

    std::vector<std::string> header() const
    {
        std::string line = "argv: fusionclust";
        for (const auto& a : args) line += " " + a;
        return {"fusionclust " FUSIONCLUST_VERSION, line, "seed: " + std::to_string(common.seed)};
    }

    fs::path path(const std::string& name) const
    {
        const fs::path p(name);
        return p.is_absolute() ? p : fs::path(common.out_dir) / p;
    }

    std::ofstream open(const fs::path& p) const
    {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        return out;
    }

    // Opens a CSV output and writes the comment header plus any extra notes.
    std::ofstream open_csv(const std::string& name, const std::vector<std::string>& notes = {}) const
    {
        auto out = open(path(name));
        for (const auto& h : header()) out << "# " << h << '\n';
        for (const auto& n : notes) out << "# " << n << '\n';
        return out;
    }

    nlohmann::ordered_json json_header() const
    {
        nlohmann::ordered_json h;
        h["version"] = FUSIONCLUST_VERSION;
        h["argv"] = header()[1].substr(6);
        h["seed"] = common.seed;
        return h;
    }
};

std::string fmt(double v) { return format_double(v); }

std::string join(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
    return out;
}

std::vector<int> to_ints(const std::vector<double>& v)
{
    std::vector<int> out;
    for (double x : v) {
        if (x != std::floor(x) || x < 1) throw UsageError("expected positive integers, got " + fmt(x));
        out.push_back(static_cast<int>(x));
    }
    return out;
}

std::vector<double> grid_or_throw(const std::string& text)
{
    try {
        return parse_grid(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------- theory

struct TheoryOptions {
    std::string preset;
    int P = 50;
    double mu0 = 1.5;
    double kappa = 0.5;
    int K = 2;
    int M = 50;
    std::string p0_grid = "0:1:0.02";
    std::string out = "theory.csv";
};

void write_theory(const RunContext& ctx, const std::string& name, const theory::GuaranteeInputs& in,
                  const std::vector<double>& grid)
{
    const auto reports = theory::guarantee_curve(grid, in);
    auto out = ctx.open_csv(name, {"P=" + std::to_string(in.P) + " mu0=" + fmt(in.mu0) + " kappa=" + fmt(in.kappa) +
                                   " K=" + std::to_string(in.K) + " M=" + std::to_string(in.M)});
    out << "p0,gamma0,delta0,beta0,eta0,eta0_approx,approx_valid,success_lower_bound\n";
    for (const auto& r : reports) {
        out << fmt(r.p0) << ',' << fmt(r.gamma0()) << ',' << fmt(r.delta0()) << ',' << fmt(r.beta0()) << ','
            << fmt(r.eta0) << ',' << fmt(r.eta0_approx) << ',' << (r.approx_valid ? 1 : 0) << ','
            << fmt(r.success_lower_bound) << '\n';
    }
}

int run_theory(const RunContext& ctx, const TheoryOptions& o)
{
    const auto grid = grid_or_throw(o.p0_grid);
    if (o.preset.empty()) {
        write_theory(ctx, o.out, {grid.front(), o.P, o.kappa, o.mu0, o.K, o.M}, grid);
        std::cout << "wrote " << ctx.path(o.out).string() << '\n';
        return kExitOk;
    }
    if (o.preset != "fig2") throw UsageError("theory preset must be fig2");
    // Panel (a) varies P; the others fix P = 50, mu0 = 1.5, K = 2 and vary kappa and M.
    std::vector<theory::GuaranteeInputs> runs;
    for (int P : {10, 20, 50, 100}) runs.push_back({0.0, P, 0.5, 1.5, 2, 50});
    for (double kappa : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (int M : {10, 20, 50}) {
            if (!(kappa == 0.5 && M == 50)) runs.push_back({0.0, 50, kappa, 1.5, 2, M});
        }
    }
    for (const auto& in : runs) {
        const std::string name = "fig2_P" + std::to_string(in.P) + "_kappa" + fmt(in.kappa) + "_M" +
                                 std::to_string(in.M) + ".csv";
        write_theory(ctx, name, in, grid);
    }
    std::cout << "wrote " << runs.size() << " curves to " << ctx.common.out_dir << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- shared solver flags

struct SolverFlags {
    std::string penalty = "h1";
    double sigma = 0.0; // 0 selects the data-adaptive width
    double p = 0.5;
    double tau = 1e-9;
    double merge_tol = 0.0;
    int max_iters = 200;
    double tol = 1e-8;
    std::string linear = "auto";
    std::string init = "mean";
    double anneal = 1.0;
    double sigma_floor = 0.0;
    double sigma_scale = 1.0;
    std::string lambda_grid;

    void add_to(CLI::App* app, bool sweep)
    {
        app->add_option("--penalty", penalty, "h1 or lp")->check(CLI::IsMember({"h1", "lp"}));
        app->add_option("--sigma", sigma, "H1 width; 0 picks it from the data")->check(CLI::NonNegativeNumber);
        app->add_option("--p", p, "Lp exponent in (0,1]");
        app->add_option("--tau", tau, "Lp weight distance floor")->check(CLI::PositiveNumber);
        app->add_option("--merge-tol", merge_tol, "centroid merge distance; 0 selects 1e-3 of the spread")
            ->check(CLI::NonNegativeNumber);
        app->add_option("--max-iters", max_iters, "outer MM iterations")->check(CLI::PositiveNumber);
        app->add_option("--tol", tol, "relative objective change to stop")->check(CLI::PositiveNumber);
        app->add_option("--linear-solver", linear, "auto, direct or cg")->check(CLI::IsMember({"auto", "direct", "cg"}));
        app->add_option("--init", init, "mean or zero fill of unobserved entries")
            ->check(CLI::IsMember({"mean", "zero"}));
        app->add_option("--anneal", anneal, "H1 sigma factor per iteration; 1 disables")->check(CLI::Range(1e-6, 1.0));
        app->add_option("--sigma-floor", sigma_floor, "smallest annealed sigma")->check(CLI::NonNegativeNumber);
        if (sweep) {
            app->add_option("--sigma-scale", sigma_scale, "multiplier on the data-adaptive sigma")
                ->check(CLI::PositiveNumber);
            app->add_option("--lambda-grid", lambda_grid, "relative lambda multipliers, a:b:step or list");
        }
    }

    SolverConfig config(double lambda) const
    {
        SolverConfig c;
        c.lambda = lambda;
        c.penalty = penalty == "h1" ? PenaltySpec::h1(sigma > 0.0 ? sigma : 1.0, tau) : PenaltySpec::lp(p, tau);
        c.max_outer_iters = max_iters;
        c.objective_rel_tol = tol;
        c.linear.kind = linear == "direct" ? LinearSolverKind::Direct
                        : linear == "cg"   ? LinearSolverKind::ConjugateGradient
                                           : LinearSolverKind::Auto;
        c.init = init == "zero" ? InitKind::ZeroFill : InitKind::MeanImpute;
        c.sigma_anneal = anneal;
        c.sigma_floor = sigma_floor;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }

    LambdaSweep sweep() const
    {
        LambdaSweep s;
        s.base = config(1.0);
        if (!lambda_grid.empty()) s.lambda_grid = grid_or_throw(lambda_grid);
        s.sigma_rule = sigma > 0.0 ? SigmaRule::Fixed : SigmaRule::DataAdaptive;
        s.sigma_scale = sigma_scale;
        s.merge_tol = merge_tol;
        return s;
    }
};

void write_plot(const RunContext& ctx, const std::string& name, const std::vector<PlotRow>& rows,
                const std::vector<std::string>& notes)
{
    auto out = ctx.open_csv(name, notes);
    out << "point_id,truth_label,pc1,pc2,centroid_pc1,centroid_pc2\n";
    for (const auto& r : rows) {
        out << r.point_id << ',' << r.truth_label << ',' << fmt(r.pc1) << ',' << fmt(r.pc2) << ','
            << fmt(r.centroid_pc1) << ',' << fmt(r.centroid_pc2) << '\n';
    }
}

void write_labels(const RunContext& ctx, const std::string& name, const Partition& found,
                  const std::optional<Partition>& truth, const std::vector<std::string>& notes = {})
{
    auto out = ctx.open_csv(name, notes);
    out << "point_id,label" << (truth ? ",truth_label" : "") << '\n';
    for (std::size_t i = 0; i < found.size(); ++i) {
        out << i << ',' << found[i];
        if (truth) out << ',' << (*truth)[i];
        out << '\n';
    }
}

void write_centroids(const RunContext& ctx, const std::string& name, const Matrix& U)
{
    auto out = ctx.open_csv(name);
    out << "point_id";
    for (Eigen::Index p = 0; p < U.rows(); ++p) out << ",u" << p + 1;
    out << '\n';
    for (Eigen::Index i = 0; i < U.cols(); ++i) {
        out << i;
        for (Eigen::Index p = 0; p < U.rows(); ++p) out << ',' << fmt(U(p, i));
        out << '\n';
    }
}

std::string p0_tag(double p0) { return "p0_" + fmt(p0); }

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string preset;
    std::string p0_grid;
    std::string M_grid;
    int M = 0;
    int trials = 20;
    SolverFlags solver;
};

TrialInstance uniform_instance(double kappa, int M, std::uint64_t seed)
{
    KappaDataset k = gen_uniform_kappa(2, M, 50, kappa, seed);
    return {std::move(k.data), std::move(k.truth), k.geometry};
}

int run_success_preset(const RunContext& ctx, const SimulateOptions& o, double kappa)
{
    SuccessExperiment ex;
    ex.generator = [kappa](int M, std::uint64_t seed) { return uniform_instance(kappa, M, seed); };
    ex.p0_grid = grid_or_throw(o.p0_grid.empty() ? "0.2:1:0.1" : o.p0_grid);
    ex.M_grid = to_ints(grid_or_throw(o.M_grid.empty() ? "10,50" : o.M_grid));
    ex.trials = o.trials;
    ex.seed = ctx.common.seed;
    ex.sweep = o.solver.sweep();
    ex.threads = ctx.common.threads;
    const auto rows = success_curve(ex);

    auto out = ctx.open_csv(o.preset + "_success.csv",
                            {"K=2 P=50 uniform noise, target kappa=" + fmt(kappa),
                             "relative lambda grid: " + join(ex.sweep.lambda_grid)});
    out << "p0,M,success_rate,successes,trials,mean_best_ari,mean_kappa,mean_mu0\n";
    for (const auto& r : rows) {
        out << fmt(r.p0) << ',' << r.M << ',' << fmt(r.success_rate) << ',' << r.successes << ',' << r.trials << ','
            << fmt(r.mean_best_ari) << ',' << fmt(r.mean_kappa) << ',' << fmt(r.mean_mu0) << '\n';
        std::cout << "M=" << r.M << " p0=" << fmt(r.p0) << " success=" << fmt(r.success_rate) << '\n';
    }
    return kExitOk;
}

int run_dataset_preset(const RunContext& ctx, const SimulateOptions& o, double center_scale)
{
    SyntheticSpec spec;
    spec.K = 3;
    spec.M = o.M > 0 ? o.M : 200;
    spec.P = 50;
    spec.centers = block_centers(3, 50, center_scale);
    spec.noise = GaussianNoise{0.1};
    spec.seed = derive_seed(ctx.common.seed, {0x1157ULL});
    const GeneratedDataset g = gen_gaussian(spec);
    const ClusterGeometry geo = estimate_geometry(g.data, g.truth);
    const std::uint64_t mask_seed = derive_seed(ctx.common.seed, {0x3a5cULL});
    const LambdaSweep sweep = o.solver.sweep();

    const std::string geometry_note = "delta=" + fmt(geo.delta) + " epsilon=" + fmt(geo.epsilon) +
                                      " mu0=" + fmt(geo.mu0) + " kappa=" + fmt(geo.kappa);
    {
        auto out = ctx.open(ctx.path(o.preset + "_data.csv"));
        write_dataset_csv(out, g.data, g.truth, ctx.header());
    }
    auto summary = ctx.open_csv(o.preset + "_summary.csv",
                                {geometry_note, "relative lambda grid: " + join(sweep.lambda_grid)});
    summary << "p0,success,ari,clusters,lambda,sigma,iterations\n";
    for (double p0 : grid_or_throw(o.p0_grid.empty() ? "1,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2" : o.p0_grid)) {
        const ObservedDataset masked = apply_mask(g.data, {p0, mask_seed});
        const SweepOutcome res = sweep_lambda(masked, g.truth, sweep);
        const std::string tag = o.preset + "_" + p0_tag(p0);
        write_labels(ctx, tag + "_labels.csv", res.best, g.truth);
        write_plot(ctx, tag + "_plot.csv", centroid_plot(masked, g.truth, res.result.centroids.U), {geometry_note});
        summary << fmt(p0) << ',' << (res.success ? 1 : 0) << ',' << fmt(res.best_ari) << ','
                << res.best.cluster_count() << ',' << fmt(res.best_lambda) << ',' << fmt(res.sigma) << ','
                << res.result.trace.iterations << '\n';
        std::cout << "p0=" << fmt(p0) << " success=" << res.success << " ari=" << fmt(res.best_ari) << '\n';
    }
    return kExitOk;
}

int run_simulate(const RunContext& ctx, const SimulateOptions& o)
{
    if (o.trials < 1) throw UsageError("--trials must be >= 1");
    if (o.preset == "fig3a") return run_success_preset(ctx, o, 0.39);
    if (o.preset == "fig3c") return run_success_preset(ctx, o, 1.15);
    if (o.preset == "fig4-dataset1") return run_dataset_preset(ctx, o, 2.0);
    if (o.preset == "fig4-dataset2") return run_dataset_preset(ctx, o, 1.0);
    throw UsageError("simulate needs --preset fig3a, fig3c, fig4-dataset1 or fig4-dataset2");
}

// ---------------------------------------------------------------- cluster

struct ClusterOptions {
    std::string input;
    double lambda = 1.0;
    std::string out_labels = "labels.csv";
    std::string out_centroids = "centroids.csv";
    std::string out_trace = "trace.csv";
    SolverFlags solver;
};

int run_cluster(const RunContext& ctx, const ClusterOptions& o)
{
    const LabeledDataset in = read_dataset_csv(fs::path(o.input));
    SolverConfig config = o.solver.config(o.lambda);
    if (config.penalty.is_h1() && !(o.solver.sigma > 0.0)) {
        std::get<H1Penalty>(config.penalty.kind).sigma = default_h1_sigma(in.data, config.init);
    }
    const ClusterResult res = mm_cluster(in.data, config);
    const double tol = o.solver.merge_tol > 0.0 ? o.solver.merge_tol : default_merge_tol(res.centroids.U);
    const Partition found = extract_clusters(res.centroids.U, tol);

    write_labels(ctx, o.out_labels, found, in.truth, {"penalty " + config.penalty.describe() + " lambda=" + fmt(o.lambda) +
                                                      " merge_tol=" + fmt(tol)});
    write_centroids(ctx, o.out_centroids, res.centroids.U);
    auto trace = ctx.open_csv(o.out_trace);
    trace << "iteration,objective\n";
    for (std::size_t k = 0; k < res.trace.objective.size(); ++k) trace << k << ',' << fmt(res.trace.objective[k]) << '\n';

    std::cout << "clusters: " << found.cluster_count() << "\niterations: " << res.trace.iterations
              << (res.trace.converged ? "" : " (not converged)") << '\n';
    if (in.truth && found.size() >= 2) std::cout << "ari: " << fmt(adjusted_rand_index(found, *in.truth)) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- wine

struct WineOptions {
    std::string preset;
    std::string data;
    int M_per_class = 40;
    std::string p0_grid = "1,0.9,0.7,0.5,0.3";
    int trials = 1;
    SolverFlags solver;
};

fs::path wine_path(const std::string& flag)
{
    if (!flag.empty()) return flag;
    if (const char* dir = std::getenv("FUSIONCLUST_DATA_DIR"); dir && *dir) return fs::path(dir) / "wine.data";
    return fs::path(FUSIONCLUST_DEFAULT_DATA_DIR) / "wine.data";
}

int run_wine(const RunContext& ctx, const WineOptions& o)
{
    if (!o.preset.empty() && o.preset != "fig5-wine") throw UsageError("wine preset must be fig5-wine");
    if (o.trials < 1) throw UsageError("--trials must be >= 1");
    const fs::path path = wine_path(o.data);
    const WineDataset wine = wine_prepare(path, o.M_per_class);
    if (!wine.checksum_matches) {
        std::cerr << "warning: " << path.string() << " does not match the expected Wine checksum\n";
    }
    const LambdaSweep sweep = [&] {
        LambdaSweep s = o.solver.sweep();
        s.stop_at_success = false;
        return s;
    }();
    const std::string prefix = o.preset.empty() ? "wine" : o.preset;

    auto summary = ctx.open_csv(prefix + "_summary.csv",
                                {"retained per class: " + std::to_string(o.M_per_class),
                                 "relative lambda grid: " + join(sweep.lambda_grid)});
    summary << "p0,trial,ari,clusters,lambda,sigma\n";
    for (double p0 : grid_or_throw(o.p0_grid)) {
        double mean_ari = 0.0;
        for (int t = 0; t < o.trials; ++t) {
            const std::uint64_t mask_seed = derive_seed(ctx.common.seed, {0x3a5cULL, static_cast<std::uint64_t>(t)});
            const ObservedDataset masked = apply_mask(wine.data, {p0, mask_seed});
            const SweepOutcome res = sweep_lambda(masked, wine.truth, sweep);
            if (t == 0) {
                write_plot(ctx, prefix + "_" + p0_tag(p0) + "_plot.csv",
                           centroid_plot(masked, wine.truth, res.result.centroids.U), {});
            }
            summary << fmt(p0) << ',' << t << ',' << fmt(res.best_ari) << ',' << res.best.cluster_count() << ','
                    << fmt(res.best_lambda) << ',' << fmt(res.sigma) << '\n';
            mean_ari += res.best_ari / o.trials;
        }
        std::cout << "p0=" << fmt(p0) << " mean_ari=" << fmt(mean_ari) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- oracle-check

struct OracleOptions {
    int K = 2;
    int M = 3;
    int P = 20;
    double kappa = 0.5;
    std::string p0_grid = "0.6,0.8";
    int trials = 2000;
    double epsilon_scale = 1.0;
    std::string out = "oracle_check.json";
};

nlohmann::ordered_json to_json(const RateCheck& c)
{
    nlohmann::ordered_json j;
    j["empirical"] = c.empirical;
    j["bound"] = c.bound;
    j["standard_error"] = c.standard_error;
    j["samples"] = c.samples;
    j["within"] = c.within;
    return j;
}

int run_oracle(const RunContext& ctx, const OracleOptions& o)
{
    if (o.K * o.M > kOracleMaxPoints) throw UsageError("K * M must not exceed " + std::to_string(kOracleMaxPoints));
    if (o.trials < 1) throw UsageError("--trials must be >= 1");
    const KappaDataset inst = gen_uniform_kappa(o.K, o.M, o.P, o.kappa, derive_seed(ctx.common.seed, {0x1157ULL}));

    nlohmann::ordered_json doc;
    doc["header"] = ctx.json_header();
    auto& g = doc["instance"];
    g["K"] = o.K;
    g["M"] = o.M;
    g["P"] = o.P;
    g["delta"] = inst.geometry.delta;
    g["epsilon"] = inst.geometry.epsilon;
    g["mu0"] = inst.geometry.mu0;
    g["kappa"] = inst.geometry.kappa;
    g["epsilon_scale"] = o.epsilon_scale;
    doc["results"] = nlohmann::ordered_json::array();
    bool all = true;
    for (double p0 : grid_or_throw(o.p0_grid)) {
        const auto r = monte_carlo_bound_check(inst.data, inst.truth, p0, o.trials,
                                               derive_seed(ctx.common.seed, {0x0c1eULL}), o.epsilon_scale,
                                               ctx.common.threads);
        nlohmann::ordered_json row;
        row["p0"] = p0;
        row["trials"] = r.trials;
        row["gamma0"] = r.guarantee.gamma0();
        row["beta0"] = r.guarantee.beta0();
        row["eta0"] = r.guarantee.eta0;
        row["few_common"] = to_json(r.few_common);
        row["pair_feasible"] = to_json(r.pair_feasible);
        row["defeat"] = to_json(r.defeat);
        row["all_within"] = r.all_within();
        doc["results"].push_back(row);
        all = all && r.all_within();
        std::cout << "p0=" << fmt(p0) << " feasible=" << fmt(r.pair_feasible.empirical) << " (beta0 "
                  << fmt(r.guarantee.beta0()) << ") defeat=" << fmt(r.defeat.empirical) << " (eta0 "
                  << fmt(r.guarantee.eta0) << ")" << (r.all_within() ? "" : " EXCEEDED") << '\n';
    }
    doc["all_within"] = all;
    auto out = ctx.open(ctx.path(o.out));
    out << doc.dump(2) << '\n';
    return kExitOk;
}

} // namespace

std::vector<double> parse_grid(const std::string& text)
{
    auto number = [](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v)) throw std::invalid_argument("bad number '" + s + "'");
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw std::invalid_argument("range must be a:b:step");
        const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0) || b < a) throw std::invalid_argument("range needs step > 0 and a <= b");
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        if (n > 1000000) throw std::invalid_argument("range has too many points");
        for (long k = 0; k < n; ++k) out.push_back(std::round((a + static_cast<double>(k) * step) * 1e12) / 1e12);
        return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(number(part));
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Fusion-penalty clustering of data with missing entries", "fusionclust"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file; flags on the command line take precedence");

    RunContext ctx;
    ctx.args = args;
    app.add_option("--seed", ctx.common.seed, "base seed for every random stream");
    app.add_option("--out-dir", ctx.common.out_dir, "directory for output files");
    app.add_option("--threads", ctx.common.threads, "worker threads; 0 uses all cores");

    TheoryOptions th;
    auto* theory_cmd = app.add_subcommand("theory", "guarantee curves over a p0 grid");
    theory_cmd->add_option("--preset", th.preset, "fig2");
    theory_cmd->add_option("--P", th.P, "dimension")->check(CLI::PositiveNumber);
    theory_cmd->add_option("--mu0", th.mu0, "coherence bound");
    theory_cmd->add_option("--kappa", th.kappa, "difficulty, below 1");
    theory_cmd->add_option("--K", th.K, "clusters");
    theory_cmd->add_option("--M", th.M, "points per cluster");
    theory_cmd->add_option("--p0-grid", th.p0_grid, "a:b:step or list");
    theory_cmd->add_option("--out", th.out, "output CSV");

    SimulateOptions sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "synthetic experiments");
    simulate_cmd->add_option("--preset", sim.preset, "fig3a, fig3c, fig4-dataset1 or fig4-dataset2")->required();
    simulate_cmd->add_option("--p0,--p0-grid", sim.p0_grid, "observation probabilities, a:b:step or list");
    simulate_cmd->add_option("--M-grid", sim.M_grid, "points per cluster for success curves");
    simulate_cmd->add_option("--M", sim.M, "points per cluster for fig4 datasets")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--trials", sim.trials, "trials per (p0, M)");
    sim.solver.add_to(simulate_cmd, true);

    ClusterOptions cl;
    auto* cluster_cmd = app.add_subcommand("cluster", "cluster a CSV dataset");
    cluster_cmd->add_option("--input", cl.input, "dataset CSV")->required();
    cluster_cmd->add_option("--lambda", cl.lambda, "fusion weight")->check(CLI::PositiveNumber);
    cluster_cmd->add_option("--out-labels", cl.out_labels);
    cluster_cmd->add_option("--out-centroids", cl.out_centroids);
    cluster_cmd->add_option("--out-trace", cl.out_trace);
    cl.solver.add_to(cluster_cmd, false);

    WineOptions wi;
    auto* wine_cmd = app.add_subcommand("wine", "Wine experiment");
    wine_cmd->add_option("--preset", wi.preset, "fig5-wine");
    wine_cmd->add_option("--data", wi.data, "raw UCI wine.data; defaults to $FUSIONCLUST_DATA_DIR/wine.data");
    wine_cmd->add_option("--M-per-class", wi.M_per_class, "rows kept per class")->check(CLI::PositiveNumber);
    wine_cmd->add_option("--p0,--p0-grid", wi.p0_grid, "observation probabilities");
    wine_cmd->add_option("--trials", wi.trials, "masks per p0");
    wi.solver.add_to(wine_cmd, true);

    OracleOptions orc;
    auto* oracle_cmd = app.add_subcommand("oracle-check", "Monte Carlo check of the failure bounds");
    oracle_cmd->add_option("--K", orc.K)->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--M", orc.M)->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--P", orc.P)->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--kappa", orc.kappa, "target difficulty")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--p0,--p0-grid", orc.p0_grid);
    oracle_cmd->add_option("--trials", orc.trials);
    oracle_cmd->add_option("--epsilon-scale", orc.epsilon_scale, "feasibility tolerance multiplier")
        ->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--out", orc.out, "output JSON");

    app.add_subcommand("version", "print the version");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (app.got_subcommand("version")) {
            std::cout << "fusionclust " FUSIONCLUST_VERSION "\n";
            return kExitOk;
        }
        if (app.got_subcommand(theory_cmd)) return run_theory(ctx, th);
        if (app.got_subcommand(simulate_cmd)) return run_simulate(ctx, sim);
        if (app.got_subcommand(cluster_cmd)) return run_cluster(ctx, cl);
        if (app.got_subcommand(wine_cmd)) return run_wine(ctx, wi);
        if (app.got_subcommand(oracle_cmd)) return run_oracle(ctx, orc);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace fusionclust::cli
