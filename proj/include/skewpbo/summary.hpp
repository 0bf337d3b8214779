#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/surrogate.hpp"

namespace skewpbo {

struct SummaryRow {
  Eigen::VectorXd x;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double skewness = 0.0;
};

/// Monte Carlo summary of f(x) - f(reference) at each query row.
struct PosteriorSummary {
  std::vector<SummaryRow> rows;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double credible_level = 0.95;

  double max_abs_skewness() const;
};

/// Draws come from Surrogate::difference_samples with standard normals
/// generated from seed. Skewness is reported as 0 where the draws have no
/// spread (for instance at the reference itself).
PosteriorSummary summarize(const Surrogate& posterior, const Eigen::MatrixXd& query, const Eigen::VectorXd& reference,
                           std::size_t samples, std::uint64_t seed, double credible_level = 0.95);

}  // namespace skewpbo
