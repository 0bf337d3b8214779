#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/gauss.hpp"

namespace skewpbo {

/// Unified skew-normal SUN_{p,s}(xi, Omega, Delta, gamma, Gamma).
///
/// The latent covariance Gamma may be any SPD matrix; it is not required to
/// have a unit diagonal. Instances are immutable.
class SunParams {
 public:
  /// Throws DimensionMismatch on inconsistent shapes, InvalidArgument when a
  /// diagonal entry of omega is below 1e-12 and NotPositiveDefinite when the
  /// joint matrix [[Gamma, Delta^T], [Delta, corr(Omega)]] is not SPD.
  SunParams(Eigen::VectorXd location, Eigen::MatrixXd scale, Eigen::MatrixXd skewness, Eigen::VectorXd latent_shift,
            Eigen::MatrixXd latent_cov);

  /// Plain multivariate normal N(location, scale), latent dimension 0.
  static SunParams gaussian(Eigen::VectorXd location, Eigen::MatrixXd scale);

  Eigen::Index dim() const { return location_.size(); }
  Eigen::Index latent_dim() const { return latent_shift_.size(); }

  const Eigen::VectorXd& location() const { return location_; }      // xi
  const Eigen::MatrixXd& scale() const { return scale_; }            // Omega
  const Eigen::MatrixXd& skewness() const { return skewness_; }      // Delta
  const Eigen::VectorXd& latent_shift() const { return latent_shift_; }  // gamma
  const Eigen::MatrixXd& latent_cov() const { return latent_cov_; }  // Gamma

  /// Square roots of diag(Omega).
  const Eigen::VectorXd& scale_sd() const { return scale_sd_; }
  /// Correlation matrix of Omega.
  const Eigen::MatrixXd& scale_corr() const { return scale_corr_; }

  const gauss::CholeskyFactor& scale_factor() const { return scale_factor_; }
  const gauss::CholeskyFactor& scale_corr_factor() const { return scale_corr_factor_; }
  const gauss::CholeskyFactor& latent_factor() const { return latent_factor_; }

 private:
  Eigen::VectorXd location_;
  Eigen::MatrixXd scale_;
  Eigen::MatrixXd skewness_;
  Eigen::VectorXd latent_shift_;
  Eigen::MatrixXd latent_cov_;
  Eigen::VectorXd scale_sd_;
  Eigen::MatrixXd scale_corr_;
  gauss::CholeskyFactor scale_factor_;
  gauss::CholeskyFactor scale_corr_factor_;
  gauss::CholeskyFactor latent_factor_;
  // corr(Omega)^{-1} Delta, Gamma - Delta^T corr(Omega)^{-1} Delta and
  // log Phi_s(gamma; Gamma), all needed by the density.
  Eigen::MatrixXd corr_solve_skew_;
  Eigen::MatrixXd cond_latent_cov_;
  double log_normalizer_ = 0.0;

  friend double sun_log_pdf(const SunParams&, const Eigen::VectorXd&);
};

double sun_log_pdf(const SunParams& params, const Eigen::VectorXd& z);

/// Marginal over the coordinates in keep, in the order given.
SunParams sun_marginalize(const SunParams& params, const std::vector<Eigen::Index>& keep);

/// Conditional of the remaining coordinates (in increasing index order) given
/// z[observed[i]] = values[i].
SunParams sun_condition(const SunParams& params, const std::vector<Eigen::Index>& observed,
                        const Eigen::VectorXd& values);

/// Draws via the additive representation, one sample per row.
Eigen::MatrixXd sun_sample(const SunParams& params, std::size_t n, gauss::Rng& rng,
                           const gauss::LinEssConfig& config = {});

}  // namespace skewpbo
