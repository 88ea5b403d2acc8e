#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusionclust/analysis.hpp"
#include "fusionclust/datagen.hpp"
#include "fusionclust/oracle.hpp"
#include "generators.hpp"

using namespace fusionclust;

namespace {

bool feasible(const ObservedDataset& d, std::vector<int> members, double eps)
{
    return group_feasible(d, members, eps);
}

ObservedDataset permuted(const ObservedDataset& d, const std::vector<int>& perm)
{
    Matrix X(d.features(), d.points());
    MaskMatrix m(d.features(), d.points());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        X.col(static_cast<Eigen::Index>(i)) = d.values().col(perm[i]);
        m.col(static_cast<Eigen::Index>(i)) = d.mask().col(perm[i]);
    }
    return {X, m};
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("group feasibility examples")
{
    Matrix X(1, 2);
    X << 0.0, 0.5;
    const ObservedDataset d(X);
    CHECK(feasible(d, {1}, 0.0));
    CHECK(feasible(d, {0, 1}, 0.5));
    CHECK_FALSE(feasible(d, {0, 1}, 0.49));

    Matrix Y(2, 2);
    Y << 0.0, 100.0, -50.0, 7.0;
    MaskMatrix m(2, 2);
    m << true, false, false, true;
    CHECK(feasible(ObservedDataset(Y, m), {0, 1}, 0.0));
    CHECK_THROWS_AS(feasible(d, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(feasible(d, {0}, -1.0), std::invalid_argument);
}

TEST_CASE("feasibility is monotone in members and in observations")
{
    testgen::Rng rng(31);
    for (int t = 0; t < 300; ++t) {
        const int N = testgen::integer(rng, 2, 8);
        const int P = testgen::integer(rng, 1, 6);
        const ObservedDataset d = testgen::dataset(rng, P, N, testgen::uniform(rng, 0.3, 1.0));
        const double eps = testgen::uniform(rng, 0.0, 3.0);
        std::vector<int> group;
        for (int i = 0; i < N; ++i)
            if (testgen::integer(rng, 0, 1)) group.push_back(i);
        if (group.empty()) group.push_back(0);
        if (!group_feasible(d, group, eps)) continue;
        std::vector<int> sub(group.begin(), group.begin() + testgen::integer(rng, 1, static_cast<int>(group.size())));
        CHECK(group_feasible(d, sub, eps));
        const ObservedDataset thinner = d.with_mask(d.mask() && testgen::mask(rng, P, N, 0.5));
        CHECK(group_feasible(thinner, group, eps));
    }
}

TEST_CASE("partition cost counts ordered cross-group pairs")
{
    CHECK(partition_cost(Partition({0, 0, 1, 1})) == 8);
    CHECK(partition_cost(Partition({0, 0, 0})) == 0);
    CHECK(partition_cost(Partition({0, 1, 2})) == 6);
}

TEST_CASE("oracle examples")
{
    Matrix X(2, 4);
    X << 0, 0, 10, 10, 0, 0, 10, 10;
    const OracleResult r = l0_solve(ObservedDataset(X), 0.1);
    REQUIRE(r.minimizers.size() == 1);
    CHECK(r.minimizers.front().labels() == std::vector<int>{0, 0, 1, 1});
    CHECK(r.min_cost == 8);
    CHECK(r.feasible_partition_count == 4); // {01}{23}, {0}{1}{23}, {01}{2}{3}, all singletons

    const OracleResult same = l0_solve(ObservedDataset(Matrix::Constant(3, 5, 1.25)), 0.0);
    REQUIRE(same.minimizers.size() == 1);
    CHECK(same.minimizers.front().cluster_count() == 1);
    CHECK(same.min_cost == 0);
    CHECK(same.feasible_partition_count == 52); // Bell(5)

    CHECK_THROWS_WITH_AS(l0_solve(ObservedDataset(Matrix::Zero(1, kOracleMaxPoints + 1)), 1.0),
                         "oracle enumeration bound exceeded", std::invalid_argument);
}

TEST_CASE("sharded enumeration matches a single thread")
{
    testgen::Rng rng(37);
    for (int t = 0; t < 10; ++t) {
        const ObservedDataset d = testgen::dataset(rng, 3, testgen::integer(rng, 5, 9), 0.7);
        const OracleResult a = l0_solve(d, 1.0, 1);
        const OracleResult b = l0_solve(d, 1.0, 4);
        CHECK(a.min_cost == b.min_cost);
        CHECK(a.feasible_partition_count == b.feasible_partition_count);
        CHECK(a.minimizers == b.minimizers);
    }
}

TEST_CASE("minimal cost is invariant under point permutation")
{
    testgen::Rng rng(41);
    for (int t = 0; t < 20; ++t) {
        const int N = testgen::integer(rng, 3, 8);
        const ObservedDataset d = testgen::dataset(rng, 2, N, 0.8);
        const double eps = testgen::uniform(rng, 0.2, 1.5);
        const auto perm = testgen::permutation(rng, N);
        const OracleResult a = l0_solve(d, eps);
        const OracleResult b = l0_solve(permuted(d, perm), eps);
        CHECK(a.min_cost == b.min_cost);
        REQUIRE(a.minimizers.size() == b.minimizers.size());
        // Each permuted minimizer pulled back is a minimizer of the original.
        for (const auto& m : b.minimizers) {
            std::vector<int> back(static_cast<std::size_t>(N));
            for (int i = 0; i < N; ++i) back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = m[static_cast<std::size_t>(i)];
            const Partition pulled = Partition::canonical(back);
            CHECK(std::find(a.minimizers.begin(), a.minimizers.end(), pulled) != a.minimizers.end());
        }
    }
}

TEST_CASE("full observation with kappa below one: ground truth is the unique minimizer")
{
    testgen::Rng rng(43);
    for (int t = 0; t < 50; ++t) {
        const int K = testgen::integer(rng, 2, 3);
        const int M = testgen::integer(rng, 2, 8 / K);
        const int P = testgen::integer(rng, K, 5);
        const KappaDataset k = gen_uniform_kappa(K, M, P, testgen::uniform(rng, 0.1, 0.9),
                                                 static_cast<std::uint64_t>(t));
        REQUIRE(k.geometry.kappa < 1.0);
        const OracleResult r = l0_solve(k.data, k.geometry.epsilon);
        REQUIRE(r.minimizers.size() == 1);
        CHECK(exact_success(r.minimizers.front(), k.truth));
    }
}

TEST_CASE("intra-cluster pairs are always feasible")
{
    const KappaDataset k = gen_uniform_kappa(2, 4, 6, 0.6, 5);
    testgen::Rng rng(47);
    for (int t = 0; t < 50; ++t) {
        const ObservedDataset m = k.data.with_mask(testgen::mask(rng, 6, 8, 0.5));
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j)
                if (k.truth[static_cast<std::size_t>(i)] == k.truth[static_cast<std::size_t>(j)])
                    CHECK(feasible(m, {i, j}, k.geometry.epsilon));
    }
}

TEST_CASE("Monte Carlo endpoints")
{
    const KappaDataset k = gen_uniform_kappa(2, 3, 20, 0.5, 9);
    const BoundCheckReport full = monte_carlo_bound_check(k.data, k.truth, 1.0, 50, 1);
    CHECK(full.pair_feasible.empirical == 0.0);
    CHECK(full.defeat.empirical == 0.0);
    CHECK(full.few_common.empirical == 0.0);
    CHECK(full.all_within());

    const BoundCheckReport none = monte_carlo_bound_check(k.data, k.truth, 0.0, 20, 1);
    CHECK(none.few_common.empirical == 1.0);
    CHECK(none.few_common.bound == 1.0);
    CHECK(none.few_common.within);
}

TEST_CASE("Monte Carlo is deterministic and thread independent")
{
    const KappaDataset k = gen_uniform_kappa(2, 3, 20, 0.5, 9);
    const BoundCheckReport a = monte_carlo_bound_check(k.data, k.truth, 0.7, 200, 3, 1.0, 1);
    const BoundCheckReport b = monte_carlo_bound_check(k.data, k.truth, 0.7, 200, 3, 1.0, 3);
    CHECK(a.pair_feasible.empirical == b.pair_feasible.empirical);
    CHECK(a.defeat.empirical == b.defeat.empirical);
    CHECK(a.few_common.empirical == b.few_common.empirical);
    CHECK_THROWS(monte_carlo_bound_check(k.data, Partition({0, 0, 0, 0, 1, 1}), 0.7, 10, 3));
}

}
