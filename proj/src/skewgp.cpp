#include "skewpbo/skewgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

void check_shapes(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel) {
  if (duels.cols() != points.rows())
    throw Error(ErrorKind::DimensionMismatch, "duel matrix columns must match the number of points");
  if (points.rows() > 0 && points.cols() != kernel.dim())
    throw Error(ErrorKind::DimensionMismatch, "points and kernel differ in dimension");
}

Eigen::MatrixXd latent_cov(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& w) {
  Eigen::MatrixXd g = w * gram * w.transpose();
  g = 0.5 * (g + g.transpose());
  g.diagonal().array() += 1.0;
  return g;
}

std::vector<std::vector<Eigen::Index>> random_blocks(Eigen::Index m, std::size_t blocks, gauss::Rng& rng) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Eigen::Index>> out(blocks);
  const std::size_t base = order.size() / blocks, extra = order.size() % blocks;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    out[b].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    std::sort(out[b].begin(), out[b].end());
    pos += len;
  }
  return out;
}

double block_bound(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma,
                   const std::vector<std::vector<Eigen::Index>>& blocks) {
  double total = 0.0;
  for (const auto& block : blocks) {
    const auto k = static_cast<Eigen::Index>(block.size());
    Eigen::VectorXd u(k);
    Eigen::MatrixXd s(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      u(i) = upper(block[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j) s(i, j) = sigma(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)]);
    }
    total += gauss::mvn_cdf(u, s);
  }
  return total - static_cast<double>(blocks.size() - 1);
}

std::size_t block_count(Eigen::Index m, std::size_t block_size) {
  if (block_size == 0) throw Error(ErrorKind::InvalidArgument, "block size must be at least 1");
  return (static_cast<std::size_t>(m) + block_size - 1) / block_size;
}

}  // namespace

SkewGpPosterior fit_posterior(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                              gauss::Rng& rng, const PosteriorConfig& config) {
  check_shapes(points, duels, kernel);
  SkewGpPosterior post(points, duels, kernel);
  const Eigen::MatrixXd gram = kernel.gram(points);
  post.gram_factor_ = gauss::cholesky(gram, config.jitter);
  const Eigen::MatrixXd& w = duels.w;
  post.latent_factor_ = gauss::cholesky(latent_cov(gram, w), config.jitter);
  post.bank_ = gauss::lin_ess_sample(post.latent_factor_, Eigen::VectorXd::Zero(w.rows()), config.bank_size, rng,
                                     config.sampler);
  const Eigen::MatrixXd solved = post.latent_factor_.solve(w);
  post.coef_ = post.bank_ * solved;
  post.info_ = w.transpose() * solved;
  post.info_ = 0.5 * (post.info_ + post.info_.transpose());
  post.mean_coef_ = post.coef_.rows() > 0 ? Eigen::VectorXd(post.coef_.colwise().mean().transpose())
                                          : Eigen::VectorXd::Zero(points.rows());
  return post;
}

Eigen::MatrixXd SkewGpPosterior::predict_samples(const Eigen::MatrixXd& test, std::size_t n, gauss::Rng& rng) const {
  if (test.cols() != dim() && test.rows() > 0) throw Error(ErrorKind::DimensionMismatch, "test points have the wrong dimension");
  const auto rows = static_cast<Eigen::Index>(n);
  const Eigen::Index t = test.rows();
  const Eigen::MatrixXd k_cross = kernel_.cross(test, points_);
  const Eigen::MatrixXd cov = kernel_.gram(test) - k_cross * info_ * k_cross.transpose();
  double min_eig = 0.0;
  const Eigen::MatrixXd root = gauss::psd_square_root(cov, &min_eig);
  if (min_eig < -1e-8 * kernel_.variance())
    log_warning("predictive covariance had eigenvalue " + std::to_string(min_eig) + ", clipped at 0");

  Eigen::MatrixXd out = gauss::standard_normal(rows, t, rng) * root.transpose();
  const Eigen::MatrixXd bank_mean = coef_ * k_cross.transpose();
  if (bank_mean.rows() > 0)
    for (Eigen::Index j = 0; j < rows; ++j) out.row(j) += bank_mean.row(j % bank_mean.rows());
  return out;
}

Eigen::MatrixXd SkewGpPosterior::difference_samples(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& reference,
                                                    const Eigen::VectorXd& normals, Eigen::Index first_draw) const {
  if (reference.size() != dim() || (candidates.rows() > 0 && candidates.cols() != dim()))
    throw Error(ErrorKind::DimensionMismatch, "difference_samples input dimension");
  const Eigen::Index s = normals.size();
  const Eigen::Index c = candidates.rows();
  const Eigen::MatrixXd ref_row = reference.transpose();
  Eigen::MatrixXd diff = kernel_.cross(candidates, points_);
  diff.rowwise() -= kernel_.cross(ref_row, points_).row(0);
  const Eigen::VectorXd k_cr = kernel_.cross(candidates, ref_row).col(0);

  Eigen::VectorXd sd(c);
  const Eigen::MatrixXd projected = diff * info_;
  for (Eigen::Index i = 0; i < c; ++i) {
    const double prior = 2.0 * kernel_.variance() - 2.0 * k_cr(i);
    sd(i) = std::sqrt(std::max(0.0, prior - projected.row(i).dot(diff.row(i))));
  }

  Eigen::MatrixXd out = normals * sd.transpose();
  const Eigen::Index bank = coef_.rows();
  if (bank > 0 && coef_.cols() > 0) {
    if (first_draw == 0 && s <= bank) {
      out.noalias() += coef_.topRows(s) * diff.transpose();
    } else {
      for (Eigen::Index j = 0; j < s; ++j) out.row(j) += coef_.row((first_draw + j) % bank) * diff.transpose();
    }
  }
  return out;
}

Eigen::VectorXd SkewGpPosterior::posterior_mean(const Eigen::MatrixXd& query) const {
  return kernel_.cross(query, points_) * mean_coef_;
}

SunParams posterior_sun(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel) {
  check_shapes(points, duels, kernel);
  const Eigen::Index n = points.rows();
  const Eigen::MatrixXd gram = kernel.gram(points);
  const Eigen::VectorXd sd = gram.diagonal().cwiseSqrt();
  // corr(K) D W^T = D^{-1} K W^T
  const Eigen::MatrixXd skew = sd.cwiseInverse().asDiagonal() * gram * duels.w.transpose();
  return SunParams(Eigen::VectorXd::Zero(n), gram, skew, Eigen::VectorXd::Zero(duels.rows()),
                   latent_cov(gram, duels.w));
}

double log_marginal_exact(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                          std::size_t max_constraints) {
  check_shapes(points, duels, kernel);
  if (static_cast<std::size_t>(duels.rows()) > max_constraints)
    throw Error(ErrorKind::TooManyConstraints,
                std::to_string(duels.rows()) + " constraints exceed the cap of " + std::to_string(max_constraints));
  if (duels.rows() == 0) return 0.0;
  return gauss::log_mvn_cdf(Eigen::VectorXd::Zero(duels.rows()), latent_cov(kernel.gram(points), duels.w));
}

PartitionBound partitioned_cdf_bound(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma,
                                     std::size_t block_size, gauss::Rng& rng) {
  if (sigma.rows() != upper.size() || sigma.cols() != upper.size())
    throw Error(ErrorKind::DimensionMismatch, "bound limits and covariance sizes differ");
  PartitionBound out;
  out.blocks = block_count(upper.size(), block_size);
  if (out.blocks == 0) {
    out.value = 1.0;
    return out;
  }
  out.value = block_bound(upper, sigma, random_blocks(upper.size(), out.blocks, rng));
  return out;
}

MarginalBound log_marginal_lower_bound(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                       const RbfArdKernel& kernel, std::size_t block_size,
                                       std::uint64_t partition_seed) {
  check_shapes(points, duels, kernel);
  MarginalBound out;
  out.partition_seed = partition_seed;
  const Eigen::Index m = duels.rows();
  out.requested_blocks = block_count(m, block_size);
  if (m == 0) {
    out.raw_bound = 1.0;
    return out;
  }
  const Eigen::MatrixXd sigma = latent_cov(kernel.gram(points), duels.w);
  const Eigen::VectorXd upper = Eigen::VectorXd::Zero(m);
  std::size_t blocks = out.requested_blocks;
  while (blocks > 1) {
    gauss::Rng rng(partition_seed);
    const double bound = block_bound(upper, sigma, random_blocks(m, blocks, rng));
    if (blocks == out.requested_blocks) out.raw_bound = bound;
    if (bound > 0.0) {
      out.blocks = blocks;
      out.log_value = std::log(bound);
      return out;
    }
    out.fell_back = true;
    blocks /= 2;
  }
  out.blocks = 1;
  out.log_value = gauss::log_mvn_cdf(upper, sigma);
  if (out.requested_blocks == 1) out.raw_bound = std::exp(out.log_value);
  return out;
}

MarginalBound log_marginal_lower_bound(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                       const RbfArdKernel& kernel, std::size_t block_size, gauss::Rng& rng) {
  return log_marginal_lower_bound(points, duels, kernel, block_size, rng());
}

double skewness_statistic(const Eigen::VectorXd& samples) {
  if (samples.size() < 2) throw Error(ErrorKind::TooFewSamples, "skewness needs at least two samples");
  const double mean = samples.mean();
  const Eigen::ArrayXd centred = samples.array() - mean;
  const double m2 = centred.square().mean();
  const double m3 = centred.cube().mean();
  if (!(m2 > 0.0) || m2 <= 1e-28 * mean * mean) throw Error(ErrorKind::ZeroVariance, "samples have zero variance");
  return m3 / std::pow(m2, 1.5);
}

}  // namespace skewpbo
