#include "fusionclust/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace fusionclust {

ObservedDataset::ObservedDataset(Matrix values, MaskMatrix mask)
    : values_(std::move(values)), mask_(std::move(mask))
{
    if (values_.rows() < 1 || values_.cols() < 1) {
        throw std::invalid_argument("dataset needs at least one feature and one point");
    }
    if (mask_.rows() != values_.rows() || mask_.cols() != values_.cols()) {
        throw std::invalid_argument("mask shape does not match values");
    }
}

ObservedDataset::ObservedDataset(Matrix values)
    : ObservedDataset(values, MaskMatrix::Constant(values.rows(), values.cols(), true))
{
}

ObservedDataset ObservedDataset::with_mask(MaskMatrix mask) const
{
    return ObservedDataset(values_, std::move(mask));
}

Partition::Partition(std::vector<int> labels) : labels_(std::move(labels))
{
    if (labels_.empty()) {
        throw std::invalid_argument("partition must label at least one point");
    }
    const int max_label = *std::max_element(labels_.begin(), labels_.end());
    if (*std::min_element(labels_.begin(), labels_.end()) < 0) {
        throw std::invalid_argument("partition labels must be non-negative");
    }
    std::vector<bool> used(static_cast<std::size_t>(max_label) + 1, false);
    for (int l : labels_) used[static_cast<std::size_t>(l)] = true;
    if (std::find(used.begin(), used.end(), false) != used.end()) {
        throw std::invalid_argument("partition labels must cover 0..K-1");
    }
    clusters_ = max_label + 1;
}

Partition Partition::canonical(std::span<const int> ids)
{
    std::unordered_map<int, int> remap;
    std::vector<int> labels;
    labels.reserve(ids.size());
    for (int id : ids) {
        auto [it, inserted] = remap.try_emplace(id, static_cast<int>(remap.size()));
        labels.push_back(it->second);
    }
    return Partition(std::move(labels));
}

std::vector<int> Partition::cluster_sizes() const
{
    std::vector<int> sizes(static_cast<std::size_t>(clusters_), 0);
    for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

Partition Partition::canonicalized() const
{
    return canonical(labels_);
}

void SyntheticSpec::validate() const
{
    if (K < 1 || M < 1 || P < 1) {
        throw std::invalid_argument("synthetic spec needs K, M, P >= 1");
    }
    if (centers.rows() != P || centers.cols() != K) {
        throw std::invalid_argument("centers must be P x K");
    }
    const bool bad_noise = std::visit(
        [](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, GaussianNoise>) return !(n.variance >= 0.0);
            else return !(n.half_width >= 0.0);
        },
        noise);
    if (bad_noise) {
        throw std::invalid_argument("noise scale must be non-negative");
    }
}

double coherence(const Eigen::Ref<const Vector>& y)
{
    const double sq = y.squaredNorm();
    if (sq == 0.0) {
        throw std::domain_error("coherence undefined for zero vector");
    }
    const double inf = y.cwiseAbs().maxCoeff();
    return static_cast<double>(y.size()) * inf * inf / sq;
}

ClusterGeometry estimate_geometry(const ObservedDataset& data, const Partition& truth)
{
    if (!data.fully_observed()) {
        throw std::invalid_argument("geometry requires full observation");
    }
    if (truth.size() != static_cast<std::size_t>(data.points())) {
        throw std::invalid_argument("partition length does not match point count");
    }

    const Matrix& X = data.values();
    const Eigen::Index N = data.points();

    ClusterGeometry g;
    g.P = static_cast<int>(data.features());
    g.delta = std::numeric_limits<double>::infinity();
    g.epsilon = 0.0;
    g.mu0 = 1.0;

    Vector diff(X.rows());
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = i + 1; j < N; ++j) {
            diff = X.col(i) - X.col(j);
            if (truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)]) {
                g.epsilon = std::max(g.epsilon, diff.cwiseAbs().maxCoeff());
            } else {
                const double dist = diff.norm();
                g.delta = std::min(g.delta, dist);
                // coincident points in different clusters make the geometry meaningless
                assert(dist > 0.0);
                g.mu0 = std::max(g.mu0, coherence(diff));
            }
        }
    }

    g.kappa = std::isinf(g.delta) ? 0.0 : g.epsilon * std::sqrt(static_cast<double>(g.P)) / g.delta;
    return g;
}

} // namespace fusionclust
