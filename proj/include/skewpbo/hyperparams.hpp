#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "skewpbo/dataset.hpp"
#include "skewpbo/gauss.hpp"
#include "skewpbo/kernel.hpp"

namespace skewpbo {

/// Search box and schedule for simulated annealing over log kernel parameters.
struct AnnealingConfig {
  double lengthscale_low = 1e-2;   // times the input range of each dimension
  double lengthscale_high = 1e2;
  double variance_low = 1e-3;
  double variance_high = 1e2;
  double initial_temperature = 1.0;
  double cooling = 0.9;            // geometric, applied after every proposal
  double step = 0.5;               // proposal sd in log space at the initial temperature
  std::size_t block_size = 30;     // for the SkewGP marginal-likelihood bound
  /// Input range per dimension; taken from the data points when absent.
  std::optional<Eigen::VectorXd> input_range;
};

struct HyperparamResult {
  RbfArdKernel kernel;
  double objective = 0.0;
  std::size_t evaluations = 0;
};

using KernelObjective = std::function<double(const RbfArdKernel&)>;

/// Maximizes objective with budget evaluations, the first at the initial
/// kernel (clamped into the box). Non-finite objective values are treated as
/// -infinity. Returns the best kernel seen.
HyperparamResult anneal_kernel(const RbfArdKernel& initial, const KernelObjective& objective,
                               const Eigen::VectorXd& input_range, std::size_t budget, gauss::Rng& rng,
                               const AnnealingConfig& config = {});

/// Annealing on the SkewGP marginal-likelihood lower bound. One partition
/// seed is drawn up front and shared by every evaluation.
HyperparamResult optimize_hyperparams(const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                      const RbfArdKernel& initial, std::size_t budget, gauss::Rng& rng,
                                      const AnnealingConfig& config = {});

/// max - min of each column, with zero spans replaced by one.
Eigen::VectorXd input_range(const Eigen::MatrixXd& points);

}  // namespace skewpbo
