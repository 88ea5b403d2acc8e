#include "fusionclust/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fusionclust {
namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<int> random_order(int n, std::mt19937_64& rng)
{
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

// Points c_{label} + half_width * noise for a fixed noise draw.
Matrix assemble(const Matrix& centers, const std::vector<int>& labels, const Matrix& unit_noise,
                double half_width)
{
    Matrix X = half_width * unit_noise;
    for (Eigen::Index i = 0; i < X.cols(); ++i) X.col(i) += centers.col(labels[static_cast<std::size_t>(i)]);
    return X;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts)
{
    std::uint64_t h = splitmix64(base);
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

Matrix block_centers(int K, int P, double scale)
{
    if (K < 1 || P < K) throw std::invalid_argument("block centers need 1 <= K <= P");
    Matrix C = Matrix::Zero(P, K);
    for (int k = 0; k < K; ++k) {
        const int begin = k * P / K;
        const int end = (k + 1) * P / K;
        C.block(begin, k, end - begin, 1).setConstant(scale);
    }
    return C;
}

GeneratedDataset generate(const SyntheticSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const int N = spec.K * spec.M;
    Matrix X(spec.P, N);
    std::vector<int> cluster_of(static_cast<std::size_t>(N));

    const auto* gaussian = std::get_if<GaussianNoise>(&spec.noise);
    std::normal_distribution<double> standard_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double scale = gaussian ? std::sqrt(gaussian->variance)
                                  : std::get<UniformNoise>(spec.noise).half_width;

    for (int k = 0; k < spec.K; ++k) {
        for (int m = 0; m < spec.M; ++m) {
            const int idx = k * spec.M + m;
            cluster_of[static_cast<std::size_t>(idx)] = k;
            for (int p = 0; p < spec.P; ++p) {
                const double n = gaussian ? standard_normal(rng) : unit(rng);
                X(p, idx) = spec.centers(p, k) + scale * n;
            }
        }
    }

    const auto order = random_order(N, rng);
    Matrix shuffled(spec.P, N);
    std::vector<int> labels(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        shuffled.col(i) = X.col(order[static_cast<std::size_t>(i)]);
        labels[static_cast<std::size_t>(i)] = cluster_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    return {ObservedDataset(std::move(shuffled)), Partition(std::move(labels))};
}

GeneratedDataset gen_gaussian(const SyntheticSpec& spec)
{
    if (!std::holds_alternative<GaussianNoise>(spec.noise)) {
        throw std::invalid_argument("gen_gaussian needs a Gaussian noise model");
    }
    return generate(spec);
}

KappaDataset gen_uniform_kappa(int K, int M, int P, double target_kappa, std::uint64_t seed)
{
    if (!(target_kappa > 0.0)) throw std::invalid_argument("target kappa must be positive");
    if (K < 2 || M < 2) throw std::invalid_argument("kappa targeting needs K >= 2 and M >= 2");

    const Matrix centers = block_centers(K, P, 1.0);
    const int N = K * M;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Matrix noise(P, N);
    for (Eigen::Index i = 0; i < noise.cols(); ++i)
        for (Eigen::Index p = 0; p < noise.rows(); ++p) noise(p, i) = unit(rng);
    std::vector<int> labels(static_cast<std::size_t>(N));
    const auto order = random_order(N, rng);
    for (int i = 0; i < N; ++i) labels[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)] / M;
    const Partition truth(labels);

    auto measure = [&](double h) {
        return estimate_geometry(ObservedDataset(assemble(centers, labels, noise, h)), truth);
    };

    double lo = 0.0;
    double hi = 1.0;
    for (int doubling = 0; measure(hi).kappa < target_kappa; ++doubling) {
        if (doubling >= 60) throw std::runtime_error("target kappa is not reachable with this noise draw");
        lo = hi;
        hi *= 2.0;
    }

    double best_h = hi;
    ClusterGeometry best = measure(hi);
    for (int step = 0; step < 100; ++step) {
        const double mid = 0.5 * (lo + hi);
        const ClusterGeometry g = measure(mid);
        if (std::abs(g.kappa - target_kappa) < std::abs(best.kappa - target_kappa)) {
            best = g;
            best_h = mid;
        }
        if (std::abs(g.kappa - target_kappa) <= 1e-6 * target_kappa) break;
        (g.kappa < target_kappa ? lo : hi) = mid;
    }
    if (std::abs(best.kappa - target_kappa) > 0.05 * target_kappa) {
        throw std::runtime_error("kappa bisection did not reach the target within 5%");
    }
    return {ObservedDataset(assemble(centers, labels, noise, best_h)), truth, best, best_h};
}

ObservedDataset apply_mask(const ObservedDataset& data, const MaskSpec& spec)
{
    if (!(spec.p0 >= 0.0 && spec.p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0,1]");
    std::mt19937_64 rng(spec.seed);
    std::bernoulli_distribution keep(spec.p0);
    MaskMatrix mask(data.features(), data.points());
    for (Eigen::Index i = 0; i < mask.cols(); ++i)
        for (Eigen::Index p = 0; p < mask.rows(); ++p) mask(p, i) = keep(rng);
    return data.with_mask(std::move(mask));
}

std::uint64_t fnv1a_checksum(std::istream& in)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

WineDataset wine_prepare(const std::filesystem::path& raw_csv, int M_per_class)
{
    constexpr int kRows = 178;
    constexpr int kFeatures = 13;
    constexpr int kClasses = 3;

    std::uint64_t checksum = 0;
    {
        std::ifstream bin(raw_csv, std::ios::binary);
        if (!bin) throw std::runtime_error("cannot open wine data " + raw_csv.string());
        checksum = fnv1a_checksum(bin);
    }

    std::ifstream in(raw_csv);
    std::vector<int> cls;
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r" || line.front() == '#') continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            try {
                fields.push_back(std::stod(f));
            } catch (const std::exception&) {
                throw std::runtime_error("wine data: non-numeric field '" + f + "'");
            }
        }
        if (fields.size() != kFeatures + 1) {
            throw std::runtime_error("wine data: expected 14 columns, got " + std::to_string(fields.size()));
        }
        const int c = static_cast<int>(fields[0]);
        if (c < 1 || c > kClasses || fields[0] != c) throw std::runtime_error("wine data: bad class label");
        cls.push_back(c - 1);
        rows.emplace_back(fields.begin() + 1, fields.end());
    }
    if (static_cast<int>(rows.size()) != kRows) {
        throw std::runtime_error("wine data: expected 178 rows, got " + std::to_string(rows.size()));
    }

    Matrix Z(kFeatures, kRows);
    for (int i = 0; i < kRows; ++i)
        for (int p = 0; p < kFeatures; ++p) Z(p, i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
    const Vector mean = Z.rowwise().mean();
    Z.colwise() -= mean;
    const Vector sd = (Z.array().square().rowwise().sum() / kRows).sqrt().matrix();
    for (int p = 0; p < kFeatures; ++p) Z.row(p) /= sd(p);

    std::vector<bool> keep(kRows, false);
    for (int c = 0; c < kClasses; ++c) {
        std::vector<int> members;
        for (int i = 0; i < kRows; ++i) if (cls[static_cast<std::size_t>(i)] == c) members.push_back(i);
        if (M_per_class < 1 || M_per_class > static_cast<int>(members.size())) {
            throw std::invalid_argument("wine: M_per_class " + std::to_string(M_per_class) +
                                        " exceeds class size " + std::to_string(members.size()));
        }
        Vector centre = Vector::Zero(kFeatures);
        for (int i : members) centre += Z.col(i);
        centre /= static_cast<double>(members.size());
        std::vector<double> dist(kRows, 0.0);
        for (int i : members) dist[static_cast<std::size_t>(i)] = (Z.col(i) - centre).norm();
        std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
            return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
        });
        for (int r = 0; r < M_per_class; ++r) keep[static_cast<std::size_t>(members[static_cast<std::size_t>(r)])] = true;
    }

    Matrix X(kFeatures, kClasses * M_per_class);
    std::vector<int> labels;
    for (int i = 0, col = 0; i < kRows; ++i) {
        if (!keep[static_cast<std::size_t>(i)]) continue;
        X.col(col++) = Z.col(i);
        labels.push_back(cls[static_cast<std::size_t>(i)]);
    }
    return {ObservedDataset(std::move(X)), Partition(std::move(labels)), checksum, checksum == kWineChecksum};
}

} // namespace fusionclust
