#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "fusionclust/model.hpp"

// Hand-rolled generators for property tests. Every generator takes the
// engine by reference so a test case replays from its seed.
namespace testgen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline fusionclust::Matrix matrix(Rng& rng, int rows, int cols, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    fusionclust::Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
    return m;
}

inline fusionclust::MaskMatrix mask(Rng& rng, int rows, int cols, double p0)
{
    std::bernoulli_distribution b(p0);
    fusionclust::MaskMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = b(rng);
    return m;
}

inline fusionclust::ObservedDataset dataset(Rng& rng, int P, int N, double p0, double scale = 1.0)
{
    return {matrix(rng, P, N, scale), mask(rng, P, N, p0)};
}

// Clustered points: K well separated Gaussian blobs of M points each,
// labels in blob order.
struct Blobs {
    fusionclust::ObservedDataset data;
    fusionclust::Partition truth;
};

inline Blobs blobs(Rng& rng, int K, int M, int P, double separation, double noise)
{
    const fusionclust::Matrix centers = matrix(rng, P, K, separation);
    fusionclust::Matrix X = matrix(rng, P, K * M, noise);
    std::vector<int> labels;
    for (int k = 0; k < K; ++k) {
        for (int m = 0; m < M; ++m) {
            X.col(k * M + m) += centers.col(k);
            labels.push_back(k);
        }
    }
    return {fusionclust::ObservedDataset(X), fusionclust::Partition(labels)};
}

inline std::vector<int> permutation(Rng& rng, int n)
{
    std::vector<int> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

inline std::vector<int> labels(Rng& rng, int n, int k)
{
    std::vector<int> out(static_cast<std::size_t>(n));
    for (auto& v : out) v = integer(rng, 0, k - 1);
    return out;
}

} // namespace testgen
