#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/dataset.hpp"
#include "skewpbo/json_io.hpp"

namespace skewpbo {

/// On-disk dataset: {"points": [[...], ...], "duels": [[winner, loser], ...],
/// "labels": [true, false, ...]} with labels optional (true = valid).
struct DatasetFile {
  Eigen::MatrixXd points;
  std::vector<Duel> duels;
  std::optional<std::vector<bool>> labels;

  /// Validates as a preference dataset when there are no labels, as a mixed
  /// dataset otherwise.
  void validate() const;
  PreferenceDataset preferences() const { return PreferenceDataset{points, duels}; }
  /// Requires labels.
  MixedDataset mixed() const;
  /// build_duel_matrix or build_mixed_matrix depending on labels.
  DuelMatrix duel_matrix() const;
};

Json to_json(const DatasetFile& data);
/// Throws InvalidArgument on a malformed document, then validates.
DatasetFile dataset_from_json(const Json& j);
/// Throws IoError.
DatasetFile load_dataset(const std::filesystem::path& path);
void save_dataset(const DatasetFile& data, const std::filesystem::path& path);

}  // namespace skewpbo
