#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace skewpbo::gauss {

using Rng = std::mt19937_64;

double std_normal_pdf(double x);
double std_normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_std_normal_cdf(double x);
/// phi(x) / Phi(x) without underflow for large negative x.
double normal_hazard_ratio(double x);
double std_normal_quantile(double p);

/// Geometric ladder of diagonal jitter tried when a bare factorization fails.
struct JitterPolicy {
  double first = 1e-10;
  double last = 1e-4;
  double factor = 10.0;
};

/// Lower-triangular factor L with L * L^T = A + jitter * I.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  CholeskyFactor(Eigen::MatrixXd lower, double jitter) : lower_(std::move(lower)), jitter_(jitter) {}

  const Eigen::MatrixXd& matrix_l() const { return lower_; }
  double jitter() const { return jitter_; }
  Eigen::Index dim() const { return lower_.rows(); }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// L^{-1} rhs
  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& rhs) const;
  double log_det() const;
  Eigen::MatrixXd reconstruct() const { return lower_ * lower_.transpose(); }

 private:
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

/// Throws NotPositiveDefinite once every rung of the jitter ladder has failed.
CholeskyFactor cholesky(const Eigen::MatrixXd& a, const JitterPolicy& jitter = {});

/// Symmetrizes c and returns B with B * B^T equal to c with negative
/// eigenvalues floored at zero. The most negative eigenvalue seen is written to
/// min_eigenvalue when given.
Eigen::MatrixXd psd_square_root(const Eigen::MatrixXd& c, double* min_eigenvalue = nullptr);

/// P(X1 <= b1, X2 <= b2) for a standard bivariate normal with correlation rho.
double bvn_cdf(double b1, double b2, double rho);

/// Phi_m(upper; sigma). Dimension 0 yields 1 and dimensions 1 and 2 are exact.
/// Dimension 3 integrates the conditional bivariate cdf numerically and falls
/// back to bivariate conditioning when the quadrature misses its tolerance.
/// Larger dimensions use bivariate conditioning with greedy pair ordering.
double mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma);
double log_mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma);
/// Bivariate conditioning for every dimension above 2.
double log_mvn_cdf_conditioning(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma);

struct QmcOptions {
  std::size_t points_per_shift = 4096;
  std::size_t shifts = 16;
  std::uint64_t seed = 0x5eed;
};

struct QmcEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Randomized-lattice separation-of-variables estimate of Phi_m. Slower than
/// mvn_cdf; kept as an independent evaluator for cross-checks.
QmcEstimate mvn_cdf_qmc(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma,
                        const QmcOptions& options = {});

struct LinEssConfig {
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  std::size_t max_start_retries = 1000;
};

/// Draws from N(0, gamma) restricted to {u : u > lower_bounds} with linear
/// elliptical slice sampling. Returns one draw per row.
Eigen::MatrixXd lin_ess_sample(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& lower_bounds,
                               std::size_t n_samples, Rng& rng, const LinEssConfig& config = {});
Eigen::MatrixXd lin_ess_sample(const CholeskyFactor& gamma_factor, const Eigen::VectorXd& lower_bounds,
                               std::size_t n_samples, Rng& rng, const LinEssConfig& config = {});

/// Standard normal matrix, filled row by row from rng.
Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace skewpbo::gauss
