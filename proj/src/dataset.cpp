#include "skewpbo/dataset.hpp"

#include <algorithm>
#include <string>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

void check_duel(const Duel& d, Eigen::Index n) {
  if (d.winner < 0 || d.winner >= n || d.loser < 0 || d.loser >= n)
    throw Error(ErrorKind::IndexOutOfRange, "duel index outside the point list");
  if (d.winner == d.loser) throw Error(ErrorKind::SelfDuel, "duel compares a point with itself");
}

}  // namespace

void PreferenceDataset::validate() const {
  std::vector<bool> seen(static_cast<std::size_t>(size()), false);
  for (const Duel& d : duels) {
    check_duel(d, size());
    seen[static_cast<std::size_t>(d.winner)] = true;
    seen[static_cast<std::size_t>(d.loser)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw Error(ErrorKind::UnreferencedPoint, "point " + std::to_string(i) + " appears in no duel");
}

void MixedDataset::validate() const {
  const Eigen::Index n = preferences.size();
  if (static_cast<Eigen::Index>(valid.size()) != n)
    throw Error(ErrorKind::DimensionMismatch, "one validity label per point is required");
  for (const Duel& d : preferences.duels) {
    check_duel(d, n);
    if (!valid[static_cast<std::size_t>(d.winner)] || !valid[static_cast<std::size_t>(d.loser)])
      throw Error(ErrorKind::PreferenceOnInvalidPoint, "duel references a non-valid point");
  }
}

DuelMatrix build_duel_matrix(const PreferenceDataset& data) {
  data.validate();
  DuelMatrix out;
  out.kind = DuelMatrixKind::Preference;
  out.w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.duels.size()), data.size());
  for (std::size_t k = 0; k < data.duels.size(); ++k) {
    out.w(static_cast<Eigen::Index>(k), data.duels[k].winner) = 1.0;
    out.w(static_cast<Eigen::Index>(k), data.duels[k].loser) = -1.0;
  }
  return out;
}

DuelMatrix build_mixed_matrix(const MixedDataset& data) {
  data.validate();
  const Eigen::Index n = data.preferences.size();
  const auto m = static_cast<Eigen::Index>(data.preferences.duels.size());
  DuelMatrix out;
  out.kind = m == 0 ? DuelMatrixKind::Classification : DuelMatrixKind::Mixed;
  out.w = Eigen::MatrixXd::Zero(n + m, n);
  for (Eigen::Index i = 0; i < n; ++i) out.w(i, i) = data.valid[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    out.w(n + k, data.preferences.duels[static_cast<std::size_t>(k)].winner) = 1.0;
    out.w(n + k, data.preferences.duels[static_cast<std::size_t>(k)].loser) = -1.0;
  }
  return out;
}

DatasetBuilder::DatasetBuilder(Eigen::Index dim) : dim_(dim) {
  if (dim <= 0) throw Error(ErrorKind::InvalidArgument, "dataset dimension must be positive");
}

std::optional<Eigen::Index> DatasetBuilder::find(const Eigen::VectorXd& x) const {
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i] == x) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

Eigen::Index DatasetBuilder::add_point(const Eigen::VectorXd& x) {
  if (x.size() != dim_) throw Error(ErrorKind::DimensionMismatch, "point has the wrong dimension");
  if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "point has a non-finite coordinate");
  if (auto found = find(x)) return *found;
  rows_.push_back(x);
  labels_.emplace_back();
  return size() - 1;
}

void DatasetBuilder::add_duel(const Eigen::VectorXd& winner, const Eigen::VectorXd& loser) {
  const Eigen::Index w = add_point(winner);
  const Eigen::Index l = add_point(loser);
  if (w == l) throw Error(ErrorKind::SelfDuel, "duel compares a point with itself");
  duels_.push_back({w, l});
}

void DatasetBuilder::add_label(const Eigen::VectorXd& x, bool valid) {
  labels_[static_cast<std::size_t>(add_point(x))] = valid;
}

Eigen::MatrixXd DatasetBuilder::points() const {
  Eigen::MatrixXd out(size(), dim_);
  for (Eigen::Index i = 0; i < size(); ++i) out.row(i) = rows_[static_cast<std::size_t>(i)].transpose();
  return out;
}

PreferenceDataset DatasetBuilder::preferences() const {
  std::vector<Eigen::Index> remap(rows_.size(), -1);
  std::vector<Eigen::Index> order;
  for (const Duel& d : duels_)
    for (Eigen::Index i : {d.winner, d.loser})
      if (remap[static_cast<std::size_t>(i)] < 0) {
        remap[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(order.size());
        order.push_back(i);
      }
  std::sort(order.begin(), order.end());
  for (std::size_t k = 0; k < order.size(); ++k) remap[static_cast<std::size_t>(order[k])] = static_cast<Eigen::Index>(k);
  PreferenceDataset out;
  out.points.resize(static_cast<Eigen::Index>(order.size()), dim_);
  for (std::size_t k = 0; k < order.size(); ++k)
    out.points.row(static_cast<Eigen::Index>(k)) = rows_[static_cast<std::size_t>(order[k])].transpose();
  for (const Duel& d : duels_)
    out.duels.push_back({remap[static_cast<std::size_t>(d.winner)], remap[static_cast<std::size_t>(d.loser)]});
  return out;
}

MixedDataset DatasetBuilder::mixed() const {
  MixedDataset out;
  out.preferences.points = points();
  out.preferences.duels = duels_;
  out.valid.reserve(labels_.size());
  for (const auto& label : labels_) out.valid.push_back(label.value_or(true));
  return out;
}

}  // namespace skewpbo
