#include <cmath>
#include <string>

#include "skewpbo/error.hpp"
#include "skewpbo/gauss.hpp"

namespace skewpbo::gauss {

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CholeskyFactor::solve_lower(const Eigen::MatrixXd& rhs) const {
  return lower_.triangularView<Eigen::Lower>().solve(rhs);
}

double CholeskyFactor::log_det() const { return 2.0 * lower_.diagonal().array().log().sum(); }

namespace {

bool try_factor(const Eigen::MatrixXd& a, Eigen::MatrixXd& lower) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  return lower.diagonal().allFinite() && (lower.diagonal().array() > 0.0).all();
}

}  // namespace

CholeskyFactor cholesky(const Eigen::MatrixXd& a, const JitterPolicy& jitter) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::DimensionMismatch, "cholesky of a non-square matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return CholeskyFactor(Eigen::MatrixXd(0, 0), 0.0);
  if (!a.allFinite()) throw Error(ErrorKind::NotPositiveDefinite, "matrix has non-finite entries");

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(ErrorKind::InvalidArgument, "cholesky input is not symmetric");

  Eigen::MatrixXd lower;
  if (try_factor(a, lower)) return CholeskyFactor(std::move(lower), 0.0);
  for (double eps = jitter.first; eps <= jitter.last * (1.0 + 1e-9); eps *= jitter.factor) {
    Eigen::MatrixXd shifted = a;
    shifted.diagonal().array() += eps;
    if (try_factor(shifted, lower)) return CholeskyFactor(std::move(lower), eps);
    if (jitter.factor <= 1.0) break;
  }
  throw Error(ErrorKind::NotPositiveDefinite,
              "factorization failed up to jitter " + std::to_string(jitter.last) + " (dim " +
                  std::to_string(n) + ")");
}

}  // namespace skewpbo::gauss

namespace skewpbo::gauss {

Eigen::MatrixXd psd_square_root(const Eigen::MatrixXd& c, double* min_eigenvalue) {
  if (c.rows() != c.cols()) throw Error(ErrorKind::DimensionMismatch, "psd_square_root of a non-square matrix");
  if (c.rows() == 0) {
    if (min_eigenvalue) *min_eigenvalue = 0.0;
    return Eigen::MatrixXd(0, 0);
  }
  const Eigen::MatrixXd sym = 0.5 * (c + c.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "eigendecomposition failed");
  if (min_eigenvalue) *min_eigenvalue = eig.eigenvalues().minCoeff();
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace skewpbo::gauss
