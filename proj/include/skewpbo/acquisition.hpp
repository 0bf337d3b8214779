#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "skewpbo/box.hpp"
#include "skewpbo/gauss.hpp"
#include "skewpbo/surrogate.hpp"

namespace skewpbo {

enum class AcquisitionKind { Ucb, Thompson, Eiig };

std::string_view to_string(AcquisitionKind kind) noexcept;
/// Accepts "UCB", "Thompson"/"TH", "EIIG" (case-insensitive); throws InvalidConfig.
AcquisitionKind parse_acquisition_kind(std::string_view name);

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::Ucb;
  double credible_level = 0.95;
  double tradeoff = 0.1;  // weight of log expected improvement probability in EIIG
  std::size_t mc_samples = 2000;
  std::size_t candidates = 5000;
  std::size_t refine_evaluations = 200;
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

struct DuelProposal {
  Eigen::VectorXd candidate;
  Eigen::VectorXd reference;
  double value = 0.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Shortest interval holding a credible_level fraction of the samples; the
/// leftmost one on ties. Throws TooFewSamples below 100 samples.
Interval shortest_interval(const Eigen::VectorXd& samples, double credible_level);

/// Upper end of the shortest interval holding a credible_level fraction of
/// the samples. Throws TooFewSamples below 100 samples.
double eval_ucb(const Eigen::VectorXd& diff_samples, double credible_level);

/// k log(pbar) - (h(pbar) - mean h(Phi(d))) with pbar = mean Phi(d), natural
/// logs and pbar clamped at 1e-12. Throws TooFewSamples below 100 samples.
double eval_eiig(const Eigen::VectorXd& diff_samples, double tradeoff);

/// One posterior draw of f(x) - f(x_r).
double eval_thompson(const Surrogate& posterior, const Eigen::VectorXd& x, const Eigen::VectorXd& reference,
                     gauss::Rng& rng);

/// Scores candidates (rows) with one set of random numbers drawn from
/// round_seed, so the scores are a deterministic function of the points.
class AcquisitionRound {
 public:
  AcquisitionRound(const Surrogate& posterior, const AcquisitionSpec& spec, Eigen::VectorXd reference,
                   std::uint64_t round_seed);

  Eigen::VectorXd operator()(const Eigen::MatrixXd& candidates) const;
  double operator()(const Eigen::VectorXd& candidate) const;

 private:
  const Surrogate& posterior_;
  AcquisitionSpec spec_;
  Eigen::VectorXd reference_;
  Eigen::VectorXd normals_;
  Eigen::Index first_draw_ = 0;
};

/// Best of spec.candidates uniform points drawn from round_seed, refined by a
/// bounded compass search. The returned value is never below the best random one.
DuelProposal optimize_acquisition(const Surrogate& posterior, const AcquisitionSpec& spec,
                                  const Eigen::VectorXd& reference, const Box& bounds, std::uint64_t round_seed);

enum class DuelOutcome { CandidateWins, ReferenceWins, CandidateNonValid };

std::string_view to_string(DuelOutcome outcome) noexcept;
/// Throws InvalidArgument.
DuelOutcome parse_duel_outcome(std::string_view name);

/// The candidate replaces the reference only when it wins.

Eigen::VectorXd update_reference(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate,
                                 DuelOutcome outcome);

}  // namespace skewpbo
