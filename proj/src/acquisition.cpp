#include "skewpbo/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

constexpr Eigen::Index kMinSamples = 100;
constexpr Eigen::Index kChunk = 512;
constexpr double kProbabilityFloor = 1e-12;

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

void require_samples(const Eigen::VectorXd& samples) {
  if (samples.size() < kMinSamples)
    throw Error(ErrorKind::TooFewSamples,
                "acquisition needs at least 100 samples, got " + std::to_string(samples.size()));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view to_string(AcquisitionKind kind) noexcept {
  switch (kind) {
    case AcquisitionKind::Ucb: return "UCB";
    case AcquisitionKind::Thompson: return "TH";
    case AcquisitionKind::Eiig: return "EIIG";
  }
  return "?";
}

AcquisitionKind parse_acquisition_kind(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "ucb") return AcquisitionKind::Ucb;
  if (s == "th" || s == "thompson") return AcquisitionKind::Thompson;
  if (s == "eiig") return AcquisitionKind::Eiig;
  throw Error(ErrorKind::InvalidConfig, "unknown acquisition '" + std::string(name) + "'");
}

std::string_view to_string(DuelOutcome outcome) noexcept {
  switch (outcome) {
    case DuelOutcome::CandidateWins: return "candidate";
    case DuelOutcome::ReferenceWins: return "reference";
    case DuelOutcome::CandidateNonValid: return "nonvalid";
  }
  return "?";
}

DuelOutcome parse_duel_outcome(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "candidate") return DuelOutcome::CandidateWins;
  if (s == "reference") return DuelOutcome::ReferenceWins;
  if (s == "nonvalid" || s == "non-valid") return DuelOutcome::CandidateNonValid;
  throw Error(ErrorKind::InvalidArgument, "unknown duel outcome '" + std::string(name) + "'");
}

void AcquisitionSpec::validate() const {
  if (!(credible_level > 0.0 && credible_level < 1.0))
    throw Error(ErrorKind::InvalidConfig, "credible level must lie in (0, 1)");
  if (!(tradeoff >= 0.0) || !std::isfinite(tradeoff)) throw Error(ErrorKind::InvalidConfig, "EIIG k must be >= 0");
  if (kind != AcquisitionKind::Thompson && mc_samples < static_cast<std::size_t>(kMinSamples))
    throw Error(ErrorKind::InvalidConfig, "mc_samples must be at least 100");
  if (candidates == 0) throw Error(ErrorKind::InvalidConfig, "candidate count must be positive");
}

Interval shortest_interval(const Eigen::VectorXd& samples, double credible_level) {
  require_samples(samples);
  if (!(credible_level > 0.0 && credible_level < 1.0))
    throw Error(ErrorKind::InvalidArgument, "credible level must lie in (0, 1)");
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const auto window = std::min(n, static_cast<std::size_t>(std::ceil(credible_level * static_cast<double>(n) - 1e-9)));
  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + window <= n; ++i) {
    const double width = sorted[i + window - 1] - sorted[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return Interval{sorted[best], sorted[best + window - 1]};
}

double eval_ucb(const Eigen::VectorXd& diff_samples, double credible_level) {
  return shortest_interval(diff_samples, credible_level).upper;
}

double eval_eiig(const Eigen::VectorXd& diff_samples, double tradeoff) {
  require_samples(diff_samples);
  const auto n = static_cast<double>(diff_samples.size());
  double p_sum = 0.0, q_sum = 0.0, entropy_sum = 0.0;
  for (double d : diff_samples) {
    const double p = gauss::std_normal_cdf(d);
    const double q = gauss::std_normal_cdf(-d);
    p_sum += p;
    q_sum += q;
    entropy_sum -= xlogx(p) + xlogx(q);
  }
  const double p_bar = p_sum / n, q_bar = q_sum / n;
  const double info_gain = -(xlogx(p_bar) + xlogx(q_bar)) - entropy_sum / n;
  return tradeoff * std::log(std::max(p_bar, kProbabilityFloor)) - info_gain;
}

double eval_thompson(const Surrogate& posterior, const Eigen::VectorXd& x, const Eigen::VectorXd& reference,
                     gauss::Rng& rng) {
  std::uniform_int_distribution<Eigen::Index> pick(0, std::numeric_limits<std::int32_t>::max());
  const Eigen::Index first_draw = pick(rng);
  std::normal_distribution<double> normal;
  const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, normal(rng));
  return posterior.difference_samples(x.transpose(), reference, z, first_draw)(0, 0);
}

AcquisitionRound::AcquisitionRound(const Surrogate& posterior, const AcquisitionSpec& spec,
                                   Eigen::VectorXd reference, std::uint64_t round_seed)
    : posterior_(posterior), spec_(spec), reference_(std::move(reference)) {
  spec_.validate();
  if (reference_.size() != posterior_.dim())
    throw Error(ErrorKind::DimensionMismatch, "reference point has the wrong dimension");
  gauss::Rng rng(round_seed);
  if (spec_.kind == AcquisitionKind::Thompson) {
    std::uniform_int_distribution<Eigen::Index> pick(0, std::numeric_limits<std::int32_t>::max());
    first_draw_ = pick(rng);
    normals_ = gauss::standard_normal(1, 1, rng).col(0);
  } else {
    normals_ = gauss::standard_normal(static_cast<Eigen::Index>(spec_.mc_samples), 1, rng).col(0);
  }
}

Eigen::VectorXd AcquisitionRound::operator()(const Eigen::MatrixXd& candidates) const {
  Eigen::VectorXd out(candidates.rows());
  for (Eigen::Index start = 0; start < candidates.rows(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, candidates.rows() - start);
    const Eigen::MatrixXd draws =
        posterior_.difference_samples(candidates.middleRows(start, len), reference_, normals_, first_draw_);
    for (Eigen::Index c = 0; c < len; ++c) {
      switch (spec_.kind) {
        case AcquisitionKind::Ucb: out(start + c) = eval_ucb(draws.col(c), spec_.credible_level); break;
        case AcquisitionKind::Thompson: out(start + c) = draws(0, c); break;
        case AcquisitionKind::Eiig: out(start + c) = eval_eiig(draws.col(c), spec_.tradeoff); break;
      }
    }
  }
  return out;
}

double AcquisitionRound::operator()(const Eigen::VectorXd& candidate) const {
  return (*this)(Eigen::MatrixXd(candidate.transpose()))(0);
}

DuelProposal optimize_acquisition(const Surrogate& posterior, const AcquisitionSpec& spec,
                                  const Eigen::VectorXd& reference, const Box& bounds, std::uint64_t round_seed) {
  bounds.validate();
  if (bounds.dim() != posterior.dim()) throw Error(ErrorKind::DimensionMismatch, "bounds have the wrong dimension");
  const AcquisitionRound acquisition(posterior, spec, reference, round_seed);
  gauss::Rng rng(round_seed ^ 0x9e3779b97f4a7c15ULL);
  const Eigen::MatrixXd candidates = bounds.uniform(static_cast<Eigen::Index>(spec.candidates), rng);
  const Eigen::VectorXd scores = acquisition(candidates);

  Eigen::Index best_index = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores(i) > scores(best_index) || (std::isnan(scores(best_index)) && !std::isnan(scores(i)))) best_index = i;
  Eigen::VectorXd best = candidates.row(best_index).transpose();
  double best_value = scores(best_index);

  // Compass search: poll +-step along each axis, move to the best improving
  // poll point, halve the step when none improves.
  const Eigen::Index d = bounds.dim();
  Eigen::VectorXd step = 0.05 * bounds.width();
  const Eigen::VectorXd min_step = 1e-6 * bounds.width();
  std::size_t used = 0;
  while (used + static_cast<std::size_t>(2 * d) <= spec.refine_evaluations && (step.array() > min_step.array()).any()) {
    Eigen::MatrixXd poll(2 * d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      Eigen::VectorXd up = best, down = best;
      up(i) += step(i);
      down(i) -= step(i);
      poll.row(2 * i) = bounds.clamp(up).transpose();
      poll.row(2 * i + 1) = bounds.clamp(down).transpose();
    }
    const Eigen::VectorXd values = acquisition(poll);
    used += static_cast<std::size_t>(2 * d);
    Eigen::Index arg = 0;
    values.maxCoeff(&arg);
    if (std::isfinite(values(arg)) && values(arg) > best_value) {
      best_value = values(arg);
      best = poll.row(arg).transpose();
    } else {
      step *= 0.5;
    }
  }
  return DuelProposal{best, reference, best_value};
}

Eigen::VectorXd update_reference(const Eigen::VectorXd& reference, const Eigen::VectorXd& candidate,
                                 DuelOutcome outcome) {
  return outcome == DuelOutcome::CandidateWins ? candidate : reference;
}

}  // namespace skewpbo
