#include "skewpbo/laplace.hpp"

#include <cmath>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

struct LikelihoodTerms {
  double log_lik = 0.0;
  Eigen::VectorXd ratio;      // d/dz log Phi(z)
  Eigen::VectorXd curvature;  // -d2/dz2 log Phi(z)
};

LikelihoodTerms likelihood_terms(const Eigen::VectorXd& z) {
  LikelihoodTerms t;
  t.ratio.resize(z.size());
  t.curvature.resize(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    t.log_lik += gauss::log_std_normal_cdf(z(i));
    const double h = gauss::normal_hazard_ratio(z(i));
    t.ratio(i) = h;
    t.curvature(i) = std::max(h * (h + z(i)), 0.0);
  }
  return t;
}

}  // namespace

LaplacePosterior fit_laplace(const Eigen::MatrixXd& points, const DuelMatrix& duels, const RbfArdKernel& kernel,
                             const LaplaceConfig& config) {
  if (duels.cols() != points.rows())
    throw Error(ErrorKind::DimensionMismatch, "duel matrix columns must match the number of points");
  if (points.rows() > 0 && points.cols() != kernel.dim())
    throw Error(ErrorKind::DimensionMismatch, "points and kernel differ in dimension");
  LaplacePosterior post(points, duels, kernel);
  const Eigen::MatrixXd& w = duels.w;
  const Eigen::MatrixXd gram = kernel.gram(points);
  const Eigen::MatrixXd w_gram = w * gram;  // r x n
  const Eigen::Index n = points.rows(), r = w.rows();

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(r);
  LikelihoodTerms terms = likelihood_terms(z);
  double psi = terms.log_lik;
  post.trace_.push_back(psi);

  const auto gradient_norm = [&] {
    const Eigen::VectorXd g = w.transpose() * terms.ratio - alpha;
    return g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  };

  post.gradient_norm_ = gradient_norm();
  post.converged_ = post.gradient_norm_ < config.tolerance;
  while (!post.converged_ && post.iterations_ < config.max_iterations) {
    const Eigen::VectorXd s = terms.curvature.cwiseSqrt();
    Eigen::MatrixXd b = s.asDiagonal() * w_gram * w.transpose() * s.asDiagonal();
    b = 0.5 * (b + b.transpose());
    b.diagonal().array() += 1.0;
    const auto b_factor = gauss::cholesky(b);
    const Eigen::VectorXd rhs = w.transpose() * (terms.curvature.cwiseProduct(z) + terms.ratio);
    const Eigen::VectorXd target =
        rhs - w.transpose() * (s.asDiagonal() * b_factor.solve(Eigen::VectorXd(s.cwiseProduct(w_gram * rhs))));
    const Eigen::VectorXd step = target - alpha;

    bool improved = false;
    double t = 1.0;
    for (std::size_t h = 0; h <= config.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd trial_alpha = alpha + t * step;
      const Eigen::VectorXd trial_f = gram * trial_alpha;
      const Eigen::VectorXd trial_z = w * trial_f;
      LikelihoodTerms trial_terms = likelihood_terms(trial_z);
      const double trial_psi = -0.5 * trial_alpha.dot(trial_f) + trial_terms.log_lik;
      if (trial_psi >= psi) {
        alpha = trial_alpha;
        f = trial_f;
        z = trial_z;
        terms = std::move(trial_terms);
        psi = trial_psi;
        improved = true;
        break;
      }
    }
    ++post.iterations_;
    post.gradient_norm_ = gradient_norm();
    post.converged_ = post.gradient_norm_ < config.tolerance;
    if (!improved) break;
    post.trace_.push_back(psi);
  }

  post.alpha_ = alpha;
  post.mode_ = f;
  post.log_posterior_ = psi;
  post.sqrt_curvature_ = terms.curvature.cwiseSqrt();
  Eigen::MatrixXd b = post.sqrt_curvature_.asDiagonal() * w_gram * w.transpose() * post.sqrt_curvature_.asDiagonal();
  b = 0.5 * (b + b.transpose());
  b.diagonal().array() += 1.0;
  post.b_factor_ = gauss::cholesky(b);
  return post;
}

Eigen::MatrixXd LaplacePosterior::whitened(const Eigen::MatrixXd& query_cross) const {
  // query_cross is |query| x n
  const Eigen::MatrixXd projected = sqrt_curvature_.asDiagonal() * duels_.w * query_cross.transpose();
  return b_factor_.solve_lower(projected);
}

GaussianPrediction laplace_predict(const LaplacePosterior& post, const Eigen::MatrixXd& test) {
  if (test.rows() > 0 && test.cols() != post.dim())
    throw Error(ErrorKind::DimensionMismatch, "test points have the wrong dimension");
  const Eigen::MatrixXd k_cross = post.kernel_.cross(test, post.points_);
  const Eigen::MatrixXd v = post.whitened(k_cross);
  GaussianPrediction out;
  out.mean = k_cross * post.alpha_;
  out.cov = post.kernel_.gram(test) - v.transpose() * v;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

double laplace_log_evidence(const LaplacePosterior& post) {
  if (!post.converged_) throw Error(ErrorKind::NoConvergence, "Laplace mode search did not converge");
  return post.log_posterior_ - 0.5 * post.b_factor_.log_det();
}

Eigen::MatrixXd LaplacePosterior::difference_samples(const Eigen::MatrixXd& candidates, const Eigen::VectorXd& reference,
                                                     const Eigen::VectorXd& normals, Eigen::Index) const {
  if (reference.size() != dim() || (candidates.rows() > 0 && candidates.cols() != dim()))
    throw Error(ErrorKind::DimensionMismatch, "difference_samples input dimension");
  const Eigen::MatrixXd ref_row = reference.transpose();
  Eigen::MatrixXd diff = kernel_.cross(candidates, points_);
  diff.rowwise() -= kernel_.cross(ref_row, points_).row(0);
  const Eigen::VectorXd k_cr = kernel_.cross(candidates, ref_row).col(0);
  const Eigen::VectorXd mean = diff * alpha_;
  const Eigen::MatrixXd v = whitened(diff);
  Eigen::VectorXd sd(candidates.rows());
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    const double prior = 2.0 * kernel_.variance() - 2.0 * k_cr(i);
    sd(i) = std::sqrt(std::max(0.0, prior - v.col(i).squaredNorm()));
  }
  Eigen::MatrixXd out = normals * sd.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

Eigen::VectorXd LaplacePosterior::posterior_mean(const Eigen::MatrixXd& query) const {
  return kernel_.cross(query, points_) * alpha_;
}

}  // namespace skewpbo
