#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fusionclust/model.hpp"
#include "fusionclust/theory.hpp"

namespace fusionclust {

// Exhaustive solver for the constrained l0 fusion problem
//
//   min sum_{i,j} ||u_i - u_j||_{2,0}  s.t.  ||S_i (x_i - u_i)||_inf <= eps / 2,
//
// usable on tiny instances. For a partition the objective counts ordered
// pairs in different groups, N^2 - sum_g n_g^2, and a partition is feasible
// iff each group admits one shared u.

inline constexpr int kOracleMaxPoints = 12;

struct OracleResult {
    std::vector<Partition> minimizers; // restricted-growth order
    long long min_cost = 0;
    long long feasible_partition_count = 0;
};

/// True iff, for every feature, the observed values of the members span at
/// most epsilon (the boxes [x_ip - eps/2, x_ip + eps/2] intersect).
bool group_feasible(const ObservedDataset& data, std::span<const int> members, double epsilon);

/// N^2 - sum of squared group sizes.
long long partition_cost(const Partition& partition);

/// Enumerates all set partitions of the points (N <= kOracleMaxPoints),
/// pruning as soon as a group becomes infeasible. Work is sharded over
/// the block assignments of the first few points.
OracleResult l0_solve(const ObservedDataset& data, double epsilon, unsigned threads = 1);

struct RateCheck {
    double empirical = 0.0;
    double bound = 0.0;
    double standard_error = 0.0; // binomial SE at the bound, clamped to [0,1]
    long long samples = 0;
    bool within = false;         // empirical <= bound + 3 SE
};

struct BoundCheckReport {
    ClusterGeometry geometry;
    double p0 = 0.0;
    int trials = 0;
    int K = 0;
    int M = 0;
    theory::GuaranteeReport guarantee;
    RateCheck few_common;     // inter-cluster pairs with <= p0^2 P / 2 shared coordinates vs gamma0
    RateCheck pair_feasible;  // inter-cluster pairs that admit a shared u vs beta0
    RateCheck defeat;         // trials where ground truth is not the unique minimizer vs eta0

    bool all_within() const { return few_common.within && pair_feasible.within && defeat.within; }
};

/// Random-mask Monte Carlo check of the pairwise and global failure bounds
/// on a fixed fully observed instance with equal cluster sizes and kappa < 1.
/// epsilon is the measured intra-cluster diameter times epsilon_scale.
BoundCheckReport monte_carlo_bound_check(const ObservedDataset& full, const Partition& truth, double p0,
                                         int trials, std::uint64_t seed, double epsilon_scale = 1.0,
                                         unsigned threads = 1);

/// Same check on an instance drawn from `spec`.
BoundCheckReport monte_carlo_bound_check(const SyntheticSpec& spec, double p0, int trials, std::uint64_t seed);

} // namespace fusionclust
