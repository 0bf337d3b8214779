#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "skewpbo/acquisition.hpp"
#include "skewpbo/box.hpp"
#include "skewpbo/dataset.hpp"
#include "skewpbo/experiment.hpp"
#include "skewpbo/json_io.hpp"
#include "skewpbo/kernel.hpp"
#include "skewpbo/summary.hpp"

namespace skewpbo {

struct SessionConfig {
  Box bounds;
  SurrogateKind surrogate = SurrogateKind::SkewGP;
  AcquisitionSpec acquisition;
  bool mixed = false;
  std::uint64_t seed = 0;
  bool optimize_hyperparameters = true;
  std::optional<double> lengthscale;
  double variance = 1.0;
  std::size_t reoptimize_every = 5;
  std::size_t annealing_budget = 40;
  std::size_t bank_size = 2000;
  std::size_t summary_samples = 2000;
  /// Display names per input dimension; empty or one per dimension.
  std::vector<std::string> dimension_labels;

  /// Throws InvalidConfig.
  void validate() const;
};

Json to_json(const SessionConfig& config);
/// Missing seed is drawn from std::random_device. Throws InvalidConfig.
SessionConfig session_config_from_json(const Json& j);

struct PendingDuel {
  Eigen::VectorXd candidate;
  Eigen::VectorXd reference;
  double value = 0.0;
  /// True for the cold-start pair of random points.
  bool initial = false;
};

Json to_json(const PendingDuel& duel);

struct AnswerResult {
  Eigen::VectorXd reference;
  std::size_t answers = 0;
  DuelOutcome outcome = DuelOutcome::ReferenceWins;
};

struct SessionSummary {
  PosteriorSummary table;
  Eigen::VectorXd reference;
  Eigen::VectorXd lengthscales;
  double variance = 0.0;
  std::uint64_t fit_seed = 0;
  std::size_t answers = 0;
  /// P(f(x) > 0) per row for mixed sessions.
  std::optional<Eigen::VectorXd> valid_probability;
};

Json to_json(const SessionSummary& summary);

/// One preference-optimization session rebuilt from its event log. Each
/// event is one JSON object: created, refit, proposal or answer.
class PreferenceSession {
 public:
  PreferenceSession(std::string id, SessionConfig config);

  const std::string& id() const { return id_; }
  const SessionConfig& config() const { return config_; }
  const std::vector<Json>& events() const { return events_; }
  const std::optional<Eigen::VectorXd>& reference() const { return reference_; }
  const std::optional<PendingDuel>& pending() const { return pending_; }
  const RbfArdKernel& kernel() const { return kernel_; }
  std::size_t answers() const { return answers_; }
  const DatasetBuilder& data() const { return data_; }

  /// Events that propose the next duel (a refit may come first). The session
  /// changes only when they are applied. Throws PendingProposalExists.
  std::vector<Json> propose() const;
  /// Throws NoPendingProposal or NonValidNotEnabled.
  Json answer_event(DuelOutcome outcome) const;
  /// Throws InvalidArgument before the first answer or on a dimension mismatch.
  SessionSummary summary(const Eigen::MatrixXd& query) const;
  Json snapshot() const;

  /// Throws InvalidArgument for malformed or out-of-order events.
  void apply(const Json& event);
  /// Rebuilds a session; the first event must be "created".
  static PreferenceSession replay(const std::vector<Json>& events, const std::string& id);

  /// Seed of the surrogate fit used for a given answer count.
  std::uint64_t fit_seed(std::size_t answers) const;

 private:
  void apply_answer(DuelOutcome outcome);
  std::pair<Eigen::MatrixXd, DuelMatrix> design() const;

  std::string id_;
  SessionConfig config_;
  std::vector<Json> events_;
  DatasetBuilder data_;
  std::optional<Eigen::VectorXd> reference_;
  std::optional<PendingDuel> pending_;
  RbfArdKernel kernel_;
  std::size_t answers_ = 0;
  std::optional<std::size_t> tuned_at_;
};

/// Owns every session and its append-only log file <data_dir>/<id>.jsonl.
/// One writer per session; different sessions proceed in parallel.
class SessionManager {
 public:
  /// Replays every log found in data_dir. Throws IoError.
  explicit SessionManager(std::filesystem::path data_dir);

  /// Returns the new id. Throws InvalidConfig.
  std::string create(const SessionConfig& config);
  PendingDuel next_duel(const std::string& id);
  AnswerResult answer(const std::string& id, DuelOutcome outcome);
  SessionSummary summary(const std::string& id, const Eigen::MatrixXd& query) const;
  Json snapshot(const std::string& id) const;
  std::vector<std::string> list() const;
  Box bounds(const std::string& id) const;

  /// Builds a session from an exported event list under a new id.
  std::string import_events(const std::vector<Json>& events);

  const std::filesystem::path& data_dir() const { return dir_; }

 private:
  struct Entry {
    std::mutex mutex;
    PreferenceSession session;
    explicit Entry(PreferenceSession s) : session(std::move(s)) {}
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  void append(const std::string& id, const std::vector<Json>& events) const;
  std::string fresh_id();

  std::filesystem::path dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

/// Grid over the box with points_per_dim values along each axis (row-major).
Eigen::MatrixXd box_grid(const Box& bounds, std::size_t points_per_dim);

}  // namespace skewpbo
