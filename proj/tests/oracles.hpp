#pragma once

// Independent reference computations used only by the test suites. Nothing in
// here calls into the sampling or conditioning code paths it is used to check.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Rng = std::mt19937_64;

inline double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2)); }
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Draws from N(0, sigma) truncated to {u > lower} by plain rejection.
inline Eigen::MatrixXd rejection_truncated(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& lower,
                                           std::size_t n, Rng& rng) {
  const Eigen::Index m = sigma.rows();
  const Eigen::MatrixXd l = sigma.llt().matrixL();
  std::normal_distribution<double> normal;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), m);
  Eigen::VectorXd z(m);
  std::size_t got = 0;
  while (got < n) {
    for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
    const Eigen::VectorXd u = l * z;
    if (((u - lower).array() > 0.0).all()) out.row(static_cast<Eigen::Index>(got++)) = u.transpose();
  }
  return out;
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

inline Moments moments(const Eigen::MatrixXd& rows) {
  Moments m;
  m.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centred = rows.rowwise() - m.mean.transpose();
  m.cov = centred.transpose() * centred / static_cast<double>(rows.rows() - 1);
  return m;
}

/// Standard error of the sample covariance entry (i, j) from the fourth moment.
inline double cov_std_error(const Eigen::MatrixXd& rows, Eigen::Index i, Eigen::Index j) {
  const Eigen::VectorXd a = rows.col(i).array() - rows.col(i).mean();
  const Eigen::VectorXd b = rows.col(j).array() - rows.col(j).mean();
  const Eigen::ArrayXd prod = a.array() * b.array();
  const double mu = prod.mean();
  const double var = (prod - mu).square().sum() / static_cast<double>(rows.rows() - 1);
  return std::sqrt(var / static_cast<double>(rows.rows()));
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

/// Multivariate normal log-density written out directly.
inline double mvn_log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd diff = x - mean;
  const Eigen::VectorXd w = llt.matrixL().solve(diff);
  const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return -0.5 * w.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi);
}

/// Sample skewness computed with long double accumulation.
inline double skewness(const Eigen::VectorXd& v) {
  long double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  long double m2 = 0, m3 = 0;
  for (double x : v) {
    const long double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= v.size();
  m3 /= v.size();
  return static_cast<double>(m3 / std::pow(m2, 1.5L));
}

}  // namespace oracle
