#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fusionclust/model.hpp"

namespace fusionclust {

struct LabeledDataset {
    ObservedDataset data;
    std::optional<Partition> truth;
};

/// Dataset CSV: one point per row, P comma-separated fields. Missing
/// entries are an empty field or `NaN`. Lines starting with '#' are
/// comments. An optional header row names the columns; when its last name
/// is `label`, that column holds integer ground-truth labels.
LabeledDataset read_dataset_csv(std::istream& in);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

/// Writes the same format with a header row; missing entries are written
/// as empty fields. `comments` are emitted first as `# ` lines.
void write_dataset_csv(std::ostream& out, const ObservedDataset& data,
                       const std::optional<Partition>& truth = std::nullopt,
                       const std::vector<std::string>& comments = {});

/// Shortest round-trip decimal representation.
std::string format_double(double v);

} // namespace fusionclust
