#pragma once

#include <Eigen/Dense>

namespace skewpbo {

/// Squared-exponential kernel with one lengthscale per input dimension:
/// k(x, y) = variance * exp(-0.5 * sum_i ((x_i - y_i) / l_i)^2).
class RbfArdKernel {
 public:
  /// Throws InvalidArgument unless every parameter is finite and positive.
  RbfArdKernel(Eigen::VectorXd lengthscales, double variance);

  /// Same lengthscale in every dimension.
  static RbfArdKernel isotropic(Eigen::Index dim, double lengthscale, double variance);

  Eigen::Index dim() const { return lengthscales_.size(); }
  const Eigen::VectorXd& lengthscales() const { return lengthscales_; }
  double variance() const { return variance_; }

  double operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// Points are rows.
  Eigen::MatrixXd gram(const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

 private:
  Eigen::VectorXd lengthscales_;
  double variance_;
};

}  // namespace skewpbo
