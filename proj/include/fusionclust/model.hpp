#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace fusionclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature matrix with an observation mask. Features are rows and points
/// are columns, so column i is x_i and the true entries of mask.col(i)
/// select the rows kept by the sampling operator S_i.
///
/// Values at unobserved positions are carried along but never read by any
/// algorithm in this library.
class ObservedDataset {
public:
    ObservedDataset(Matrix values, MaskMatrix mask);

    /// Fully observed dataset.
    explicit ObservedDataset(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    const MaskMatrix& mask() const noexcept { return mask_; }

    Eigen::Index features() const noexcept { return values_.rows(); }
    Eigen::Index points() const noexcept { return values_.cols(); }

    bool observed(Eigen::Index feature, Eigen::Index point) const { return mask_(feature, point); }
    bool fully_observed() const { return mask_.all(); }
    Eigen::Index observed_count() const { return mask_.count(); }

    /// Same values with a different mask.
    ObservedDataset with_mask(MaskMatrix mask) const;

private:
    Matrix values_;
    MaskMatrix mask_;
};

/// Cluster labels, one per point, always a surjection onto {0..K-1}.
class Partition {
public:
    /// Validates that labels are non-negative and every label below the
    /// maximum is used.
    explicit Partition(std::vector<int> labels);

    /// Relabels arbitrary integer ids by order of first occurrence.
    static Partition canonical(std::span<const int> ids);

    const std::vector<int>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    int cluster_count() const noexcept { return clusters_; }
    int operator[](std::size_t i) const { return labels_[i]; }

    std::vector<int> cluster_sizes() const;

    /// Labels renumbered by first occurrence; equal for partitions that
    /// agree up to a label permutation.
    Partition canonicalized() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<int> labels_;
    int clusters_ = 0;
};

struct ClusterGeometry {
    double delta = 0.0;   // min inter-cluster l2 distance
    double epsilon = 0.0; // max intra-cluster l_inf distance
    double mu0 = 1.0;     // max coherence of inter-cluster differences
    double kappa = 0.0;   // epsilon * sqrt(P) / delta
    int P = 1;
};

struct GaussianNoise {
    double variance = 0.0;
};

/// Independent uniform noise on [-half_width, half_width] per feature.
struct UniformNoise {
    double half_width = 0.0;
};

using NoiseModel = std::variant<GaussianNoise, UniformNoise>;

/// Parameters of the additive cluster model z_k(m) = c_k + n_k(m).
struct SyntheticSpec {
    int K = 2;
    int M = 10;
    int P = 2;
    Matrix centers; // P x K, column k is c_k
    NoiseModel noise = GaussianNoise{};
    std::uint64_t seed = 0;

    void validate() const;
};

/// P * ||y||_inf^2 / ||y||_2^2, in [1, P] for nonzero y.
double coherence(const Eigen::Ref<const Vector>& y);

/// Measures delta, epsilon, mu0 and kappa for a fully observed labelled
/// dataset. A single-cluster dataset reports delta = +inf, kappa = 0 and
/// mu0 = 1.
ClusterGeometry estimate_geometry(const ObservedDataset& data, const Partition& truth);

} // namespace fusionclust
