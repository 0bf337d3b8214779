#pragma once

#include <Eigen/Dense>

#include "skewpbo/gauss.hpp"

namespace skewpbo {

/// Axis-aligned search box.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  Eigen::VectorXd width() const { return upper - lower; }
  /// Throws InvalidConfig unless the box is finite with lower < upper everywhere.
  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
  /// n uniform points as rows.
  Eigen::MatrixXd uniform(Eigen::Index n, gauss::Rng& rng) const;
};

}  // namespace skewpbo
