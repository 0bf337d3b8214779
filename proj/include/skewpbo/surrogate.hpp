#pragma once

#include <Eigen/Dense>

namespace skewpbo {

/// Posterior over the latent preference function, as seen by the acquisition
/// functions.
class Surrogate {
 public:
  virtual ~Surrogate() = default;

  virtual Eigen::Index dim() const = 0;

  /// Draws of f(x) - f(reference) with one column per candidate row and one
  /// row per entry of normals. Row j uses normals(j) for the Gaussian part
  /// that is independent of the data, so a fixed normals vector makes the
  /// result a deterministic function of the candidates. first_draw selects
  /// where a model with a stored bank of draws starts reading it.
  virtual Eigen::MatrixXd difference_samples(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& reference,
                                             const Eigen::VectorXd& normals, Eigen::Index first_draw = 0) const = 0;

  virtual Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& points) const = 0;
};

}  // namespace skewpbo
