#include "skewpbo/box.hpp"

#include <algorithm>
#include <random>

#include "skewpbo/error.hpp"

namespace skewpbo {

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw Error(ErrorKind::InvalidConfig, "bounds must be nonempty and of equal length");
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorKind::InvalidConfig, "bounds must be finite");
  if ((upper.array() <= lower.array()).any()) throw Error(ErrorKind::InvalidConfig, "bounds have zero or negative width");
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return x.size() == dim() && (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd Box::clamp(const Eigen::VectorXd& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

Eigen::MatrixXd Box::uniform(Eigen::Index n, gauss::Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(n, dim());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < dim(); ++j) out(i, j) = std::min(upper(j), lower(j) + (upper(j) - lower(j)) * u(rng));
  return out;
}

}  // namespace skewpbo
