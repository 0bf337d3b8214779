#include "skewpbo/summary.hpp"

#include <algorithm>
#include <cmath>

#include "skewpbo/acquisition.hpp"
#include "skewpbo/error.hpp"
#include "skewpbo/skewgp.hpp"

namespace skewpbo {

double PosteriorSummary::max_abs_skewness() const {
  double out = 0.0;
  for (const auto& r : rows) out = std::max(out, std::abs(r.skewness));
  return out;
}

PosteriorSummary summarize(const Surrogate& posterior, const Eigen::MatrixXd& query, const Eigen::VectorXd& reference,
                           std::size_t samples, std::uint64_t seed, double credible_level) {
  PosteriorSummary out;
  out.samples = samples;
  out.seed = seed;
  out.credible_level = credible_level;
  if (query.rows() == 0) return out;
  gauss::Rng rng(seed);
  const Eigen::VectorXd normals = gauss::standard_normal(static_cast<Eigen::Index>(samples), 1, rng).col(0);
  const Eigen::MatrixXd draws = posterior.difference_samples(query, reference, normals);
  out.rows.reserve(static_cast<std::size_t>(query.rows()));
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    SummaryRow row;
    row.x = query.row(i).transpose();
    const Eigen::VectorXd d = draws.col(i);
    row.mean = d.mean();
    const Interval band = shortest_interval(d, credible_level);
    row.lower = band.lower;
    row.upper = band.upper;
    try {
      row.skewness = skewness_statistic(d);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroVariance) throw;
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace skewpbo
