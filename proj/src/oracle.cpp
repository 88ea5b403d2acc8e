#include "fusionclust/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fusionclust/analysis.hpp"
#include "fusionclust/datagen.hpp"
#include "fusionclust/parallel.hpp"

namespace fusionclust {
namespace {

// Depth of the restricted-growth prefixes that define parallel shards.
constexpr int kShardDepth = 4;

// Depth-first enumeration of restricted-growth strings. Each open block
// keeps the running min/max of every feature observed by its members, so
// testing whether a point fits costs O(P).
class PartitionSearch {
public:
    PartitionSearch(const ObservedDataset& data, double epsilon)
        : data_(data), eps_(epsilon), N_(static_cast<int>(data.points())), P_(static_cast<int>(data.features())),
          labels_(static_cast<std::size_t>(N_), 0), sizes_(static_cast<std::size_t>(N_), 0),
          lo_(static_cast<std::size_t>(N_ * P_)), hi_(static_cast<std::size_t>(N_ * P_)),
          seen_(static_cast<std::size_t>(N_ * P_), 0)
    {
    }

    bool place(int i, int b)
    {
        if (b > blocks_) return false;
        if (b < blocks_ && !fits(i, b)) return false;
        for (int p = 0; p < P_; ++p) {
            if (!data_.observed(p, i)) continue;
            const double x = data_.values()(p, i);
            const std::size_t k = slot(b, p);
            if (!seen_[k]) {
                lo_[k] = hi_[k] = x;
                seen_[k] = 1;
            } else {
                lo_[k] = std::min(lo_[k], x);
                hi_[k] = std::max(hi_[k], x);
            }
        }
        labels_[static_cast<std::size_t>(i)] = b;
        if (b == blocks_) ++blocks_;
        ++sizes_[static_cast<std::size_t>(b)];
        return true;
    }

    /// Enumerates completions of the first `depth` placed points.
    template <typename Visit>
    void complete(int depth, Visit& visit)
    {
        if (depth == N_) {
            visit(labels_, sizes_, blocks_);
            return;
        }
        for (int b = 0; b <= blocks_; ++b) {
            if (b < blocks_ && !fits(depth, b)) continue;
            const auto saved = snapshot(b);
            const int saved_blocks = blocks_;
            place(depth, b);
            complete(depth + 1, visit);
            restore(b, saved);
            blocks_ = saved_blocks;
            --sizes_[static_cast<std::size_t>(b)];
        }
    }

    int points() const { return N_; }

private:
    struct Snapshot {
        std::vector<double> lo, hi;
        std::vector<char> seen;
    };

    std::size_t slot(int b, int p) const { return static_cast<std::size_t>(b * P_ + p); }

    bool fits(int i, int b) const
    {
        for (int p = 0; p < P_; ++p) {
            if (!data_.observed(p, i)) continue;
            const std::size_t k = slot(b, p);
            if (!seen_[k]) continue;
            const double x = data_.values()(p, i);
            if (std::max(hi_[k], x) - std::min(lo_[k], x) > eps_) return false;
        }
        return true;
    }

    Snapshot snapshot(int b) const
    {
        const auto first = static_cast<std::ptrdiff_t>(slot(b, 0));
        const auto last = first + P_;
        return {{lo_.begin() + first, lo_.begin() + last},
                {hi_.begin() + first, hi_.begin() + last},
                {seen_.begin() + first, seen_.begin() + last}};
    }

    void restore(int b, const Snapshot& s)
    {
        const auto first = static_cast<std::ptrdiff_t>(slot(b, 0));
        std::copy(s.lo.begin(), s.lo.end(), lo_.begin() + first);
        std::copy(s.hi.begin(), s.hi.end(), hi_.begin() + first);
        std::copy(s.seen.begin(), s.seen.end(), seen_.begin() + first);
    }

    const ObservedDataset& data_;
    double eps_;
    int N_;
    int P_;
    int blocks_ = 0;
    std::vector<int> labels_;
    std::vector<int> sizes_;
    std::vector<double> lo_, hi_;
    std::vector<char> seen_;
};

struct ShardResult {
    long long count = 0;
    long long min_cost = std::numeric_limits<long long>::max();
    std::vector<std::vector<int>> minimizers;
};

// Feasible restricted-growth prefixes of the first `depth` points.
std::vector<std::vector<int>> feasible_prefixes(const ObservedDataset& data, double epsilon, int depth)
{
    std::vector<std::vector<int>> out;
    std::vector<int> prefix;
    auto extend = [&](auto&& self, int blocks) -> void {
        if (static_cast<int>(prefix.size()) == depth) {
            out.push_back(prefix);
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            prefix.push_back(b);
            PartitionSearch probe(data, epsilon);
            bool ok = true;
            for (std::size_t i = 0; i < prefix.size() && ok; ++i) ok = probe.place(static_cast<int>(i), prefix[i]);
            if (ok) self(self, std::max(blocks, b + 1));
            prefix.pop_back();
        }
    };
    extend(extend, 0);
    return out;
}

} // namespace

bool group_feasible(const ObservedDataset& data, std::span<const int> members, double epsilon)
{
    if (members.empty()) throw std::invalid_argument("group must be non-empty");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    for (Eigen::Index p = 0; p < data.features(); ++p) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int i : members) {
            if (!data.observed(p, i)) continue;
            lo = std::min(lo, data.values()(p, i));
            hi = std::max(hi, data.values()(p, i));
        }
        if (hi - lo > epsilon) return false;
    }
    return true;
}

long long partition_cost(const Partition& partition)
{
    const auto n = static_cast<long long>(partition.size());
    long long cost = n * n;
    for (int s : partition.cluster_sizes()) cost -= static_cast<long long>(s) * s;
    return cost;
}

OracleResult l0_solve(const ObservedDataset& data, double epsilon, unsigned threads)
{
    if (data.points() > kOracleMaxPoints) {
        throw std::invalid_argument("oracle enumeration bound exceeded");
    }
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");

    const int N = static_cast<int>(data.points());
    const auto prefixes = feasible_prefixes(data, epsilon, std::min(N, kShardDepth));
    std::vector<ShardResult> shards(prefixes.size());

    parallel_for(prefixes.size(), threads, [&](std::size_t s) {
        PartitionSearch search(data, epsilon);
        const auto& prefix = prefixes[s];
        for (std::size_t i = 0; i < prefix.size(); ++i) search.place(static_cast<int>(i), prefix[i]);
        ShardResult& out = shards[s];
        auto visit = [&](const std::vector<int>& labels, const std::vector<int>& sizes, int blocks) {
            ++out.count;
            long long cost = static_cast<long long>(N) * N;
            for (int b = 0; b < blocks; ++b) cost -= static_cast<long long>(sizes[static_cast<std::size_t>(b)]) * sizes[static_cast<std::size_t>(b)];
            if (cost < out.min_cost) {
                out.min_cost = cost;
                out.minimizers.clear();
            }
            if (cost == out.min_cost) out.minimizers.push_back(labels);
        };
        search.complete(static_cast<int>(prefix.size()), visit);
    });

    OracleResult result;
    long long best = std::numeric_limits<long long>::max();
    for (const auto& s : shards) {
        result.feasible_partition_count += s.count;
        if (s.count > 0) best = std::min(best, s.min_cost);
    }
    result.min_cost = best;
    for (const auto& s : shards) {
        if (s.count == 0 || s.min_cost != best) continue;
        for (const auto& labels : s.minimizers) result.minimizers.emplace_back(labels);
    }
    return result;
}

namespace {

RateCheck make_check(long long hits, long long samples, double bound)
{
    RateCheck c;
    c.samples = samples;
    c.empirical = samples > 0 ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
    c.bound = bound;
    const double b = std::clamp(bound, 0.0, 1.0);
    c.standard_error = samples > 0 ? std::sqrt(b * (1.0 - b) / static_cast<double>(samples)) : 0.0;
    c.within = c.empirical <= bound + 3.0 * c.standard_error;
    return c;
}

} // namespace

BoundCheckReport monte_carlo_bound_check(const ObservedDataset& full, const Partition& truth, double p0,
                                         int trials, std::uint64_t seed, double epsilon_scale, unsigned threads)
{
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (full.points() > kOracleMaxPoints) throw std::invalid_argument("oracle enumeration bound exceeded");
    const auto sizes = truth.cluster_sizes();
    if (sizes.size() < 2 || std::adjacent_find(sizes.begin(), sizes.end(), std::not_equal_to<>()) != sizes.end()) {
        throw std::invalid_argument("bound check needs at least two equal-size clusters");
    }

    BoundCheckReport report;
    report.geometry = estimate_geometry(full, truth);
    report.p0 = p0;
    report.trials = trials;
    report.K = static_cast<int>(sizes.size());
    report.M = sizes.front();

    theory::GuaranteeInputs in;
    in.p0 = p0;
    in.P = report.geometry.P;
    in.kappa = report.geometry.kappa;
    in.mu0 = report.geometry.mu0;
    in.K = report.K;
    in.M = report.M;
    report.guarantee = theory::evaluate(in);

    const double epsilon = report.geometry.epsilon * epsilon_scale;
    const double common_threshold = p0 * p0 * report.geometry.P / 2.0;
    const int N = static_cast<int>(full.points());

    struct TrialCounts {
        long long pairs = 0, few = 0, feasible = 0;
        bool defeated = false;
    };
    std::vector<TrialCounts> counts(static_cast<std::size_t>(trials));
    parallel_for(counts.size(), threads, [&](std::size_t t) {
        const ObservedDataset masked = apply_mask(full, {p0, derive_seed(seed, {0x0c1eULL, t})});
        TrialCounts& c = counts[t];
        for (int i = 0; i < N; ++i) {
            for (int j = i + 1; j < N; ++j) {
                if (truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)]) continue;
                ++c.pairs;
                const auto common = (masked.mask().col(i) && masked.mask().col(j)).count();
                if (static_cast<double>(common) <= common_threshold) ++c.few;
                const int pair[2] = {i, j};
                if (group_feasible(masked, pair, epsilon)) ++c.feasible;
            }
        }
        const OracleResult oracle = l0_solve(masked, epsilon);
        c.defeated = !(oracle.minimizers.size() == 1 && exact_success(oracle.minimizers.front(), truth));
    });

    long long pairs = 0, few = 0, feasible = 0, defeats = 0;
    for (const auto& c : counts) {
        pairs += c.pairs;
        few += c.few;
        feasible += c.feasible;
        defeats += c.defeated ? 1 : 0;
    }
    report.few_common = make_check(few, pairs, report.guarantee.gamma0());
    report.pair_feasible = make_check(feasible, pairs, report.guarantee.beta0());
    report.defeat = make_check(defeats, trials, report.guarantee.eta0);
    return report;
}

BoundCheckReport monte_carlo_bound_check(const SyntheticSpec& spec, double p0, int trials, std::uint64_t seed)
{
    const GeneratedDataset g = generate(spec);
    return monte_carlo_bound_check(g.data, g.truth, p0, trials, seed);
}

} // namespace fusionclust
