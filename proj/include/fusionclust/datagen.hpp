#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "fusionclust/model.hpp"

namespace fusionclust {

struct GeneratedDataset {
    ObservedDataset data;
    Partition truth;
};

struct KappaDataset {
    ObservedDataset data;
    Partition truth;
    ClusterGeometry geometry; // measured on the generated points
    double half_width = 0.0;  // noise half-width that produced it
};

struct MaskSpec {
    double p0 = 1.0;
    std::uint64_t seed = 0;
};

/// P x K centers; center k equals `scale` on the k-th of K contiguous,
/// near-equal coordinate blocks and 0 elsewhere.
Matrix block_centers(int K, int P, double scale);

/// K*M points z = c_k + n, in a seeded random order. Works for both noise
/// models in the spec.
GeneratedDataset generate(const SyntheticSpec& spec);

/// Gaussian-noise instance; throws if the spec carries uniform noise.
GeneratedDataset gen_gaussian(const SyntheticSpec& spec);

/// Uniform box noise around block centers of unit scale, with the box
/// half-width tuned by bisection until the measured kappa is within 5% of
/// the target.
KappaDataset gen_uniform_kappa(int K, int M, int P, double target_kappa, std::uint64_t seed);

/// Independent Bernoulli(p0) observation of every entry. Values untouched.
ObservedDataset apply_mask(const ObservedDataset& data, const MaskSpec& spec);

struct WineDataset {
    ObservedDataset data; // 13 x (3 * M_per_class), standardized
    Partition truth;
    std::uint64_t checksum = 0;
    bool checksum_matches = false;
};

/// FNV-1a checksum of the bundled UCI Wine file.
inline constexpr std::uint64_t kWineChecksum = 0x99ad0c86e8319418ULL;

std::uint64_t fnv1a_checksum(std::istream& in);

/// Reads the UCI Wine table (class label first, 13 features, 178 rows),
/// z-scores every feature over all rows, then keeps per class the
/// M_per_class rows closest to the class mean in standardized space.
/// Retained rows keep their original order.
WineDataset wine_prepare(const std::filesystem::path& raw_csv, int M_per_class = 40);

/// 64-bit seed derived from a base seed and a stream of integers.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

} // namespace fusionclust
