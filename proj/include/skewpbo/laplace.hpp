#pragma once

#include <vector>

#include <Eigen/Dense>

#include "skewpbo/dataset.hpp"
#include "skewpbo/gauss.hpp"
#include "skewpbo/kernel.hpp"
#include "skewpbo/surrogate.hpp"

namespace skewpbo {

struct LaplaceConfig {
  double tolerance = 1e-6;  // infinity norm of the log-posterior gradient
  std::size_t max_iterations = 100;
  std::size_t max_halvings = 40;
};

struct GaussianPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Gaussian approximation of the probit-likelihood posterior at its mode.
class LaplacePosterior final : public Surrogate {
 public:
  const Eigen::MatrixXd& points() const { return points_; }
  const DuelMatrix& duel_matrix() const { return duels_; }
  const RbfArdKernel& kernel() const { return kernel_; }
  const Eigen::VectorXd& mode() const { return mode_; }
  bool converged() const { return converged_; }
  std::size_t iterations() const { return iterations_; }
  double gradient_norm() const { return gradient_norm_; }
  /// Log posterior (up to a constant) after every accepted Newton step,
  /// starting with the value at f = 0.
  const std::vector<double>& objective_trace() const { return trace_; }

  Eigen::Index dim() const override { return points_.cols(); }
  Eigen::MatrixXd difference_samples(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& reference,
                                     const Eigen::VectorXd& normals, Eigen::Index first_draw = 0) const override;
  Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& points) const override;

 private:
  friend LaplacePosterior fit_laplace(const Eigen::MatrixXd&, const DuelMatrix&, const RbfArdKernel&,
                                      const LaplaceConfig&);
  friend GaussianPrediction laplace_predict(const LaplacePosterior&, const Eigen::MatrixXd&);
  friend double laplace_log_evidence(const LaplacePosterior&);
  LaplacePosterior(Eigen::MatrixXd points, DuelMatrix duels, RbfArdKernel kernel)
      : points_(std::move(points)), duels_(std::move(duels)), kernel_(std::move(kernel)) {}

  // L^{-1} S W k(X, x) for query rows, r x |query|.
  Eigen::MatrixXd whitened(const Eigen::MatrixXd& query_cross) const;

  Eigen::MatrixXd points_;
  DuelMatrix duels_;
  RbfArdKernel kernel_;
  Eigen::VectorXd mode_;
  Eigen::VectorXd alpha_;          // mode = K alpha
  Eigen::VectorXd sqrt_curvature_; // S = diag(sqrt of the negative likelihood Hessian in W f)
  gauss::CholeskyFactor b_factor_; // B = I + S W K W^T S
  double log_posterior_ = 0.0;
  bool converged_ = false;
  std::size_t iterations_ = 0;
  double gradient_norm_ = 0.0;
  std::vector<double> trace_;
};

/// Newton iterations with step halving. Never throws NoConvergence; check
/// converged() on the result.
LaplacePosterior fit_laplace(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                             const LaplaceConfig& config = {});

GaussianPrediction laplace_predict(const LaplacePosterior& post, const Eigen::MatrixXd& test);

/// Log of the Laplace approximation to p(D). Throws NoConvergence when the
/// fit did not converge.
double laplace_log_evidence(const LaplacePosterior& post);

}  // namespace skewpbo
