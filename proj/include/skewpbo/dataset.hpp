#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace skewpbo {

struct Duel {
  Eigen::Index winner = 0;
  Eigen::Index loser = 0;
  bool operator==(const Duel&) const = default;
};

/// Distinct input points (rows) and duels between them.
struct PreferenceDataset {
  Eigen::MatrixXd points;
  std::vector<Duel> duels;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  /// Throws IndexOutOfRange, SelfDuel or UnreferencedPoint.
  void validate() const;
};

/// Preference data plus a validity label for every point.
struct MixedDataset {
  PreferenceDataset preferences;
  std::vector<bool> valid;

  /// Also throws DimensionMismatch when labels do not cover every point and
  /// PreferenceOnInvalidPoint when a duel touches a non-valid point.
  void validate() const;
};

enum class DuelMatrixKind { Preference, Classification, Mixed };

/// Likelihood matrix W of Phi_m(W f(X)); columns follow the dataset points.
struct DuelMatrix {
  Eigen::MatrixXd w;
  DuelMatrixKind kind = DuelMatrixKind::Preference;

  Eigen::Index rows() const { return w.rows(); }
  Eigen::Index cols() const { return w.cols(); }
};

DuelMatrix build_duel_matrix(const PreferenceDataset& data);
/// Classification rows diag(2y - 1) stacked over the preference rows.
DuelMatrix build_mixed_matrix(const MixedDataset& data);

/// Accumulates observations in input space. Points equal in every coordinate
/// share one index; nearly equal points stay separate.
class DatasetBuilder {
 public:
  explicit DatasetBuilder(Eigen::Index dim);

  Eigen::Index dim() const { return dim_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(rows_.size()); }

  Eigen::Index add_point(const Eigen::VectorXd& x);
  std::optional<Eigen::Index> find(const Eigen::VectorXd& x) const;
  void add_duel(const Eigen::VectorXd& winner, const Eigen::VectorXd& loser);
  void add_label(const Eigen::VectorXd& x, bool valid);

  const std::vector<Duel>& duels() const { return duels_; }
  Eigen::MatrixXd points() const;
  /// Only the points that appear in duels, reindexed.
  PreferenceDataset preferences() const;
  /// Every point; a point that was never labeled counts as valid because it
  /// only entered through a duel.
  MixedDataset mixed() const;

 private:
  Eigen::Index dim_;
  std::vector<Eigen::VectorXd> rows_;
  std::vector<Duel> duels_;
  std::vector<std::optional<bool>> labels_;
};

}  // namespace skewpbo
