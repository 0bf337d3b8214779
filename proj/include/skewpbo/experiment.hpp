#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/acquisition.hpp"
#include "skewpbo/benchmarks.hpp"
#include "skewpbo/dataset.hpp"
#include "skewpbo/json_io.hpp"
#include "skewpbo/kernel.hpp"
#include "skewpbo/summary.hpp"

namespace skewpbo {

enum class SurrogateKind { SkewGP, GPL };

std::string_view to_string(SurrogateKind kind) noexcept;
/// Throws InvalidConfig.
SurrogateKind parse_surrogate_kind(std::string_view name);

/// Deterministic stream splitting (splitmix64 of base and stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// {"kind", "credible_level", "k", "mc_samples", "candidates", "refine_evaluations", "seed"}.
Json to_json(const AcquisitionSpec& spec);
/// Missing fields keep their defaults; unknown fields throw InvalidConfig.
AcquisitionSpec acquisition_from_json(const Json& j);

struct ExperimentConfig {
  std::string benchmark = "cos1d";
  SurrogateKind surrogate = SurrogateKind::SkewGP;
  AcquisitionSpec acquisition;
  std::size_t initial_duels = 10;
  std::size_t budget = 100;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  bool mixed = false;
  bool penalty = false;
  double penalty_weight = 1e8;

  /// When false the kernel stays at the values below for the whole run.
  bool optimize_hyperparameters = true;
  /// Initial (or fixed) kernel; lengthscale defaults to 0.1 of each box side.
  std::optional<double> lengthscale;
  double variance = 1.0;
  std::size_t reoptimize_every = 5;
  std::size_t annealing_budget = 40;

  std::size_t bank_size = 2000;
  /// Posterior curves on a grid after the final duel of the first trial (1D only).
  bool curves = true;
  std::size_t curve_points = 200;
  /// Worker threads for independent trials; 0 uses the hardware count.
  std::size_t threads = 0;

  /// Throws InvalidConfig (and UnknownBenchmark).
  void validate() const;
  /// "plain", "mixed" or "penalty".
  std::string mode() const;
  /// Benchmark after applying the penalty setting.
  Benchmark oracle() const;
  RbfArdKernel initial_kernel(const Box& bounds) const;
};

Json to_json(const ExperimentConfig& config);
/// Missing fields keep their defaults; unknown fields throw InvalidConfig.
ExperimentConfig experiment_from_json(const Json& j);

/// A config file holds one experiment object, or {"experiments": [...]}
/// with optional "output_dir".
struct RunFile {
  std::vector<ExperimentConfig> experiments;
  std::string output_dir = "results";
};
RunFile run_file_from_json(const Json& j);
/// Throws IoError or InvalidConfig.
RunFile load_run_file(const std::string& path);

struct IterationRecord {
  std::size_t duels = 0;
  /// Empty for the initialization record.
  Eigen::VectorXd proposal;
  std::optional<DuelOutcome> outcome;
  Eigen::VectorXd reference;
  double objective = 0.0;      // oracle value at the reference, penalty included
  double raw_objective = 0.0;  // maximization form without penalty
  bool feasible = true;
  double wall_ms = 0.0;
};

struct TrialRecord {
  std::string benchmark;
  std::string mode;
  std::string surrogate;
  std::string acquisition;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double optimum = 0.0;
  std::vector<IterationRecord> iterations;
  Eigen::VectorXd lengthscales;
  double variance = 0.0;
  bool failed = false;
  std::string error;
  std::optional<PosteriorSummary> curve;

  /// raw_objective at the final reference when it is feasible, else NaN.
  double final_feasible_objective() const;
  /// optimum - final_feasible_objective (NaN when infeasible).
  double final_regret() const;
};

Json to_json(const TrialRecord& record);
TrialRecord trial_from_json(const Json& j);

/// One trial; never throws for fit or oracle failures, which mark the record failed.
TrialRecord run_trial(const ExperimentConfig& config, std::size_t trial);

using TrialCallback = std::function<void(const TrialRecord&)>;
/// All trials of one experiment in trial order. Results do not depend on the
/// thread count.
std::vector<TrialRecord> run_pbo(const ExperimentConfig& config, const TrialCallback& on_trial = {});

std::unique_ptr<Surrogate> fit_surrogate(SurrogateKind kind, const Eigen::MatrixXd& points, const DuelMatrix& duels,
                                         const RbfArdKernel& kernel, gauss::Rng& rng, std::size_t bank_size);

/// Annealing on the SkewGP lower bound or the Laplace evidence.
RbfArdKernel tune_kernel(SurrogateKind kind, const Eigen::MatrixXd& points, const DuelMatrix& duels,
                         const RbfArdKernel& start, const Box& bounds, std::size_t budget, gauss::Rng& rng);

}  // namespace skewpbo
