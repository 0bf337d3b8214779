#include "skewpbo/sun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

constexpr double kMinScaleDiagonal = 1e-12;

Eigen::MatrixXd take(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& rows,
                     const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = a.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

void check_index_set(const std::vector<Eigen::Index>& idx, Eigen::Index p, const char* what) {
  std::vector<Eigen::Index> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": repeated index");
  for (Eigen::Index i : idx)
    if (i < 0 || i >= p) throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": index out of range");
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

SunParams::SunParams(Eigen::VectorXd location, Eigen::MatrixXd scale, Eigen::MatrixXd skewness,
                     Eigen::VectorXd latent_shift, Eigen::MatrixXd latent_cov)
    : location_(std::move(location)),
      scale_(std::move(scale)),
      skewness_(std::move(skewness)),
      latent_shift_(std::move(latent_shift)),
      latent_cov_(std::move(latent_cov)) {
  const Eigen::Index p = location_.size();
  const Eigen::Index s = latent_shift_.size();
  if (p == 0) throw Error(ErrorKind::DimensionMismatch, "SunParams: empty location");
  if (scale_.rows() != p || scale_.cols() != p || skewness_.rows() != p || skewness_.cols() != s ||
      latent_cov_.rows() != s || latent_cov_.cols() != s)
    throw Error(ErrorKind::DimensionMismatch, "SunParams: inconsistent parameter shapes");
  if (!location_.allFinite() || !scale_.allFinite() || !skewness_.allFinite() || !latent_shift_.allFinite() ||
      !latent_cov_.allFinite())
    throw Error(ErrorKind::InvalidArgument, "SunParams: non-finite entry");
  if ((scale_.diagonal().array() < kMinScaleDiagonal).any())
    throw Error(ErrorKind::InvalidArgument, "SunParams: scale diagonal below 1e-12");

  scale_sd_ = scale_.diagonal().cwiseSqrt();
  const Eigen::VectorXd inv_sd = scale_sd_.cwiseInverse();
  scale_corr_ = inv_sd.asDiagonal() * scale_ * inv_sd.asDiagonal();
  scale_corr_.diagonal().setOnes();

  Eigen::MatrixXd joint(s + p, s + p);
  joint << latent_cov_, skewness_.transpose(), skewness_, scale_corr_;
  gauss::cholesky(joint, {.first = 1e-12, .last = 1e-10, .factor = 10.0});

  scale_factor_ = gauss::cholesky(scale_);
  scale_corr_factor_ = gauss::cholesky(scale_corr_);
  latent_factor_ = gauss::cholesky(latent_cov_);

  corr_solve_skew_ = scale_corr_factor_.solve(skewness_);
  cond_latent_cov_ = symmetrized(latent_cov_ - skewness_.transpose() * corr_solve_skew_);
  log_normalizer_ = gauss::log_mvn_cdf(latent_shift_, latent_cov_);
}

SunParams SunParams::gaussian(Eigen::VectorXd location, Eigen::MatrixXd scale) {
  const Eigen::Index p = location.size();
  return SunParams(std::move(location), std::move(scale), Eigen::MatrixXd(p, 0), Eigen::VectorXd(0),
                   Eigen::MatrixXd(0, 0));
}

double sun_log_pdf(const SunParams& params, const Eigen::VectorXd& z) {
  const Eigen::Index p = params.dim();
  if (z.size() != p) throw Error(ErrorKind::DimensionMismatch, "sun_log_pdf: point has wrong dimension");
  const Eigen::VectorXd diff = z - params.location();
  const Eigen::VectorXd white = params.scale_factor().solve_lower(diff);
  double out = -0.5 * white.squaredNorm() - 0.5 * params.scale_factor().log_det() -
               0.5 * static_cast<double>(p) * std::log(2.0 * std::numbers::pi);
  if (params.latent_dim() == 0) return out;
  const Eigen::VectorXd standardized = diff.cwiseQuotient(params.scale_sd());
  const Eigen::VectorXd upper = params.latent_shift() + params.corr_solve_skew_.transpose() * standardized;
  out += gauss::log_mvn_cdf(upper, params.cond_latent_cov_) - params.log_normalizer_;
  return out;
}

SunParams sun_marginalize(const SunParams& params, const std::vector<Eigen::Index>& keep) {
  if (keep.empty()) throw Error(ErrorKind::DimensionMismatch, "sun_marginalize: empty index set");
  check_index_set(keep, params.dim(), "sun_marginalize");
  return SunParams(take(params.location(), keep), take(params.scale(), keep, keep),
                   take_rows(params.skewness(), keep), params.latent_shift(), params.latent_cov());
}

SunParams sun_condition(const SunParams& params, const std::vector<Eigen::Index>& observed,
                        const Eigen::VectorXd& values) {
  const Eigen::Index p = params.dim();
  if (static_cast<Eigen::Index>(observed.size()) != values.size())
    throw Error(ErrorKind::DimensionMismatch, "sun_condition: values and indices differ in length");
  check_index_set(observed, p, "sun_condition");
  if (static_cast<Eigen::Index>(observed.size()) >= p)
    throw Error(ErrorKind::DimensionMismatch, "sun_condition: at least one coordinate must stay free");
  if (observed.empty()) return params;

  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < p; ++i)
    if (std::find(observed.begin(), observed.end(), i) == observed.end()) rest.push_back(i);

  const Eigen::MatrixXd& omega = params.scale();
  const auto obs_factor = gauss::cholesky(take(omega, observed, observed));
  const Eigen::MatrixXd omega_ro = take(omega, rest, observed);
  const Eigen::VectorXd diff = values - take(params.location(), observed);

  Eigen::VectorXd location = take(params.location(), rest) + omega_ro * obs_factor.solve(diff);
  Eigen::MatrixXd scale =
      symmetrized(take(omega, rest, rest) - omega_ro * obs_factor.solve(Eigen::MatrixXd(omega_ro.transpose())));

  const Eigen::MatrixXd& corr = params.scale_corr();
  const auto corr_obs_factor = gauss::cholesky(take(corr, observed, observed));
  const Eigen::MatrixXd skew_obs = take_rows(params.skewness(), observed);
  const Eigen::MatrixXd corr_solve_skew = corr_obs_factor.solve(skew_obs);
  const Eigen::VectorXd standardized = diff.cwiseQuotient(take(params.scale_sd(), observed));

  // Cross-covariance of the free coordinates with the latent block on the
  // original correlation scale, then rescaled to the conditional scale.
  const Eigen::MatrixXd cross =
      take_rows(params.skewness(), rest) - take(corr, rest, observed) * corr_solve_skew;
  const Eigen::VectorXd rescale =
      take(params.scale_sd(), rest).cwiseQuotient(scale.diagonal().cwiseMax(1e-300).cwiseSqrt());
  Eigen::MatrixXd skewness = rescale.asDiagonal() * cross;

  Eigen::VectorXd latent_shift =
      params.latent_shift() + corr_solve_skew.transpose() * standardized;
  Eigen::MatrixXd latent_cov = symmetrized(params.latent_cov() - skew_obs.transpose() * corr_solve_skew);

  return SunParams(std::move(location), std::move(scale), std::move(skewness), std::move(latent_shift),
                   std::move(latent_cov));
}

Eigen::MatrixXd sun_sample(const SunParams& params, std::size_t n, gauss::Rng& rng,
                           const gauss::LinEssConfig& config) {
  const Eigen::Index p = params.dim();
  const Eigen::Index s = params.latent_dim();
  const auto rows = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd latent_solve_skew_t = params.latent_factor().solve(Eigen::MatrixXd(params.skewness().transpose()));
  const Eigen::MatrixXd free_cov = params.scale_corr() - params.skewness() * latent_solve_skew_t;
  const Eigen::MatrixXd free_root = gauss::psd_square_root(free_cov);

  Eigen::MatrixXd out = gauss::standard_normal(rows, p, rng) * free_root.transpose();
  if (s > 0) {
    const Eigen::MatrixXd latent = gauss::lin_ess_sample(params.latent_factor(), -params.latent_shift(), n, rng, config);
    out.noalias() += latent * latent_solve_skew_t;
  }
  out = out * params.scale_sd().asDiagonal();
  out.rowwise() += params.location().transpose();
  return out;
}

}  // namespace skewpbo
