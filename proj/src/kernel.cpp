#include "skewpbo/kernel.hpp"

#include <cmath>

#include "skewpbo/error.hpp"

namespace skewpbo {

RbfArdKernel::RbfArdKernel(Eigen::VectorXd lengthscales, double variance)
    : lengthscales_(std::move(lengthscales)), variance_(variance) {
  if (lengthscales_.size() == 0) throw Error(ErrorKind::InvalidArgument, "kernel needs at least one lengthscale");
  if (!lengthscales_.allFinite() || (lengthscales_.array() <= 0.0).any())
    throw Error(ErrorKind::InvalidArgument, "kernel lengthscales must be positive");
  if (!std::isfinite(variance_) || variance_ <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "kernel variance must be positive");
}

RbfArdKernel RbfArdKernel::isotropic(Eigen::Index dim, double lengthscale, double variance) {
  return RbfArdKernel(Eigen::VectorXd::Constant(dim, lengthscale), variance);
}

double RbfArdKernel::operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != dim() || y.size() != dim()) throw Error(ErrorKind::DimensionMismatch, "kernel input dimension");
  return variance_ * std::exp(-0.5 * (x - y).cwiseQuotient(lengthscales_).squaredNorm());
}

Eigen::MatrixXd RbfArdKernel::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
  if ((a.rows() > 0 && a.cols() != dim()) || (b.rows() > 0 && b.cols() != dim()))
    throw Error(ErrorKind::DimensionMismatch, "kernel input dimension");
  const Eigen::VectorXd inv = lengthscales_.cwiseInverse();
  const Eigen::MatrixXd sa = a * inv.asDiagonal();
  const Eigen::MatrixXd sb = b * inv.asDiagonal();
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double d2 = 0.0;
      for (Eigen::Index k = 0; k < sa.cols(); ++k) {
        const double d = sa(i, k) - sb(j, k);
        d2 += d * d;
      }
      out(i, j) = variance_ * std::exp(-0.5 * d2);
    }
  return out;
}

Eigen::MatrixXd RbfArdKernel::gram(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd k = cross(points, points);
  k = 0.5 * (k + k.transpose());
  k.diagonal().setConstant(variance_);
  return k;
}

}  // namespace skewpbo
