#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "skewpbo/dataset.hpp"
#include "skewpbo/gauss.hpp"
#include "skewpbo/kernel.hpp"
#include "skewpbo/sun.hpp"
#include "skewpbo/surrogate.hpp"

namespace skewpbo {

struct PosteriorConfig {
  std::size_t bank_size = 2000;
  gauss::LinEssConfig sampler;
  gauss::JitterPolicy jitter;
};

/// Exact posterior of a zero-mean GP under the probit likelihood Phi_m(W f(X)).
/// Holds a bank of truncated latent draws that every prediction reuses.
class SkewGpPosterior final : public Surrogate {
 public:
  const Eigen::MatrixXd& points() const { return points_; }
  const DuelMatrix& duel_matrix() const { return duels_; }
  const RbfArdKernel& kernel() const { return kernel_; }
  const gauss::CholeskyFactor& gram_factor() const { return gram_factor_; }
  /// Factor of W K W^T + I.
  const gauss::CholeskyFactor& latent_factor() const { return latent_factor_; }
  /// Truncated draws, one per row, all strictly positive.
  const Eigen::MatrixXd& latent_bank() const { return bank_; }
  std::size_t bank_size() const { return static_cast<std::size_t>(bank_.rows()); }

  /// Joint draws at the test rows, n x |test|. Draw j uses bank row j modulo
  /// the bank size together with fresh Gaussian noise from rng.
  Eigen::MatrixXd predict_samples(const Eigen::MatrixXd& test, std::size_t n, gauss::Rng& rng) const;

  Eigen::Index dim() const override { return points_.cols(); }
  Eigen::MatrixXd difference_samples(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& reference,
                                     const Eigen::VectorXd& normals, Eigen::Index first_draw = 0) const override;
  /// Monte Carlo mean over the bank.
  Eigen::VectorXd posterior_mean(const Eigen::MatrixXd& points) const override;

 private:
  friend SkewGpPosterior fit_posterior(const Eigen::MatrixXd&, const DuelMatrix&, const RbfArdKernel&, gauss::Rng&,
                                       const PosteriorConfig&);
  SkewGpPosterior(Eigen::MatrixXd points, DuelMatrix duels, RbfArdKernel kernel)
      : points_(std::move(points)), duels_(std::move(duels)), kernel_(std::move(kernel)) {}

  Eigen::MatrixXd points_;
  DuelMatrix duels_;
  RbfArdKernel kernel_;
  gauss::CholeskyFactor gram_factor_;
  gauss::CholeskyFactor latent_factor_;
  Eigen::MatrixXd bank_;
  // bank * (W K W^T + I)^{-1} W, so that bank-driven means at x are rows of coef_ k(X, x).
  Eigen::MatrixXd coef_;
  // W^T (W K W^T + I)^{-1} W
  Eigen::MatrixXd info_;
  Eigen::VectorXd mean_coef_;
};

SkewGpPosterior fit_posterior(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                              gauss::Rng& rng, const PosteriorConfig& config = {});

/// The posterior of f(X) at the training points as an explicit SUN.
SunParams posterior_sun(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel);

/// log Phi_m(0; W K W^T + I). Throws TooManyConstraints when m exceeds the cap.
double log_marginal_exact(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                          std::size_t max_constraints = 60);

struct PartitionBound {
  double value = 0.0;          // sum of block probabilities minus (blocks - 1)
  std::size_t blocks = 0;
};

/// Lower bound on Phi_m(upper; sigma) from a random partition of the
/// coordinates into ceil(m / block_size) blocks of near-equal size.
PartitionBound partitioned_cdf_bound(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma,
                                     std::size_t block_size, gauss::Rng& rng);

struct MarginalBound {
  double log_value = 0.0;       // log of the bound that was used
  double raw_bound = 0.0;       // bound at the requested block count
  std::size_t requested_blocks = 0;
  std::size_t blocks = 0;       // block count actually used
  std::uint64_t partition_seed = 0;
  bool fell_back = false;       // raw bound was not positive
};

/// Block lower bound on the log marginal likelihood. When the bound at the
/// requested block count is not positive, the block count is halved until
/// it is, ending at a single block (the full Phi_m).
MarginalBound log_marginal_lower_bound(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                       const RbfArdKernel& kernel, std::size_t block_size,
                                       std::uint64_t partition_seed);
MarginalBound log_marginal_lower_bound(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                       const RbfArdKernel& kernel, std::size_t block_size, gauss::Rng& rng);

/// Third central moment over variance^{3/2}. Throws TooFewSamples below two
/// samples and ZeroVariance for constant input.
double skewness_statistic(const Eigen::VectorXd& samples);

}  // namespace skewpbo
