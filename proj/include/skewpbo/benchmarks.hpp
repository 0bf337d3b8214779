#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/acquisition.hpp"
#include "skewpbo/box.hpp"

namespace skewpbo {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

/// Test problem in maximization form. Literature minimization problems keep
/// their original form in `literature` and are negated by `operator()`.
struct Benchmark {
  std::string name;
  Box bounds;
  ScalarField literature;
  bool minimize = false;
  Eigen::VectorXd optimum_location;
  double literature_optimum = 0.0;
  /// Valid inputs satisfy validity(x) <= 0. Empty when every input is valid.
  ScalarField validity;
  /// Subtracted from the maximization form; set by penalized_objective.
  ScalarField penalty;

  Eigen::Index dim() const { return bounds.dim(); }
  /// Maximization-form value including any penalty. Throws OutOfBounds.
  double operator()(const Eigen::VectorXd& x) const;
  /// Maximization-form value without the penalty.
  double objective(const Eigen::VectorXd& x) const;
  double optimum_value() const { return minimize ? 0.0 - literature_optimum : literature_optimum; }
  bool has_validity() const { return static_cast<bool>(validity); }
  bool valid(const Eigen::VectorXd& x) const { return !validity || validity(x) <= 0.0; }
};

std::vector<std::string> benchmark_names();
/// Throws UnknownBenchmark.
Benchmark builtin_benchmark(std::string_view name);

/// g(x) - weight * max(0, h(x))^2 in maximization form. Throws
/// InvalidArgument when the benchmark has no validity function or weight <= 0.
Benchmark penalized_objective(const Benchmark& bench, double weight);

enum class OracleMode { Preference, Mixed };

/// Noise-free duel between a candidate and the incumbent reference. Ties go
/// to the reference. In mixed mode an invalid candidate yields
/// CandidateNonValid. Throws OutOfBounds.
DuelOutcome answer_duel(const Benchmark& bench, const Eigen::VectorXd& candidate, const Eigen::VectorXd& reference,
                        OracleMode mode = OracleMode::Preference);

}  // namespace skewpbo
