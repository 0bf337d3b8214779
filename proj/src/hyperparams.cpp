#include "skewpbo/hyperparams.hpp"

#include <cmath>
#include <limits>

#include "skewpbo/error.hpp"
#include "skewpbo/skewgp.hpp"

namespace skewpbo {

namespace {

double safe(double v) { return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity(); }

}  // namespace

Eigen::VectorXd input_range(const Eigen::MatrixXd& points) {
  Eigen::VectorXd out = Eigen::VectorXd::Ones(points.cols());
  if (points.rows() == 0) return out;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double span = points.col(j).maxCoeff() - points.col(j).minCoeff();
    if (span > 0.0) out(j) = span;
  }
  return out;
}

HyperparamResult anneal_kernel(const RbfArdKernel& initial, const KernelObjective& objective,
                               const Eigen::VectorXd& range, std::size_t budget, gauss::Rng& rng,
                               const AnnealingConfig& config) {
  if (budget == 0) throw Error(ErrorKind::InvalidArgument, "annealing budget must be at least 1");
  const Eigen::Index d = initial.dim();
  if (range.size() != d) throw Error(ErrorKind::DimensionMismatch, "input range has the wrong dimension");

  // State: log lengthscales followed by log variance.
  Eigen::VectorXd low(d + 1), high(d + 1), state(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    low(i) = std::log(config.lengthscale_low * range(i));
    high(i) = std::log(config.lengthscale_high * range(i));
    state(i) = std::log(initial.lengthscales()(i));
  }
  low(d) = std::log(config.variance_low);
  high(d) = std::log(config.variance_high);
  state(d) = std::log(initial.variance());
  const Eigen::VectorXd unclamped = state;
  state = state.cwiseMax(low).cwiseMin(high);

  const auto to_kernel = [d](const Eigen::VectorXd& s) {
    return RbfArdKernel(s.head(d).array().exp().matrix(), std::exp(s(d)));
  };

  const RbfArdKernel start = state == unclamped ? initial : to_kernel(state);
  HyperparamResult best{start, safe(objective(start)), 1};
  double current = best.objective;
  double temperature = config.initial_temperature;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double scale_step = config.step / std::sqrt(config.initial_temperature);

  for (std::size_t k = 1; k < budget; ++k) {
    Eigen::VectorXd proposal = state;
    for (Eigen::Index i = 0; i <= d; ++i) proposal(i) += scale_step * std::sqrt(temperature) * normal(rng);
    // Reflect back into the box.
    for (Eigen::Index i = 0; i <= d; ++i) {
      if (proposal(i) < low(i)) proposal(i) = std::min(high(i), 2.0 * low(i) - proposal(i));
      if (proposal(i) > high(i)) proposal(i) = std::max(low(i), 2.0 * high(i) - proposal(i));
    }
    const RbfArdKernel kernel = to_kernel(proposal);
    const double value = safe(objective(kernel));
    ++best.evaluations;
    const bool accept = value >= current || (std::isfinite(value) && unif(rng) < std::exp((value - current) / temperature));
    if (accept) {
      state = proposal;
      current = value;
    }
    if (value > best.objective) {
      best.kernel = kernel;
      best.objective = value;
    }
    temperature *= config.cooling;
  }
  return best;
}

HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                      const RbfArdKernel& initial, std::size_t budget, gauss::Rng& rng,
                                      const AnnealingConfig& config) {
  const std::uint64_t seed = rng();
  const auto objective = [&](const RbfArdKernel& kernel) {
    return log_marginal_lower_bound(points, duels, kernel, config.block_size, seed).log_value;
  };
  const Eigen::VectorXd range = config.input_range.value_or(input_range(points));
  return anneal_kernel(initial, objective, range, budget, rng, config);
}

}  // namespace skewpbo
