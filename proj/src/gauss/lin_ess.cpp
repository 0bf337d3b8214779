#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "skewpbo/error.hpp"
#include "skewpbo/gauss.hpp"

namespace skewpbo::gauss {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool strictly_feasible(const Eigen::VectorXd& x, const Eigen::VectorXd& lower) {
  return ((x - lower).array() > 0.0).all();
}

// Mode of N(0, gamma) on the box {u >= lower} by projected Gauss-Seidel on the
// precision matrix, nudged into the interior.
Eigen::VectorXd box_mode_start(const CholeskyFactor& factor, const Eigen::VectorXd& lower) {
  const Eigen::Index m = lower.size();
  const Eigen::MatrixXd precision = factor.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m)));
  Eigen::VectorXd u = lower.cwiseMax(0.0);
  for (int sweep = 0; sweep < 200; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double off = precision.row(i).dot(u) - precision(i, i) * u(i);
      const double next = std::max(lower(i), -off / precision(i, i));
      moved = std::max(moved, std::abs(next - u(i)));
      u(i) = next;
    }
    if (moved < 1e-12) break;
  }
  const Eigen::VectorXd margin = 1e-6 * (1.0 + lower.array().abs()).matrix();
  return u.cwiseMax(lower + margin);
}

Eigen::VectorXd find_start(const CholeskyFactor& factor, const Eigen::VectorXd& lower, Rng& rng,
                           const LinEssConfig& config) {
  const Eigen::Index m = lower.size();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  if (strictly_feasible(x, lower)) return x;
  x = box_mode_start(factor, lower);
  if (strictly_feasible(x, lower)) return x;
  for (std::size_t attempt = 0; attempt < config.max_start_retries; ++attempt) {
    x = factor.matrix_l() * standard_normal(m, 1, rng);
    if (strictly_feasible(x, lower)) return x;
  }
  throw Error(ErrorKind::InfeasibleStart, "no strictly feasible starting point for lin-ess");
}

// Slice of the ellipse x cos(t) + nu sin(t) that stays inside the box, as a
// sorted union of angle intervals in (0, 2pi). Each constraint removes one
// closed gap that never contains t = 0 because x itself is feasible.
std::vector<std::pair<double, double>> feasible_arcs(const Eigen::VectorXd& x, const Eigen::VectorXd& nu,
                                                     const Eigen::VectorXd& lower) {
  std::vector<std::pair<double, double>> gaps;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = std::hypot(x(i), nu(i));
    if (r == 0.0 || lower(i) <= -r) continue;
    const double alpha = std::acos(std::clamp(lower(i) / r, -1.0, 1.0));
    const double phi = std::atan2(nu(i), x(i));
    double start = phi + alpha;
    double end = phi - alpha + kTwoPi;
    start = std::clamp(start, 0.0, kTwoPi);
    end = std::clamp(end, 0.0, kTwoPi);
    if (end > start) gaps.emplace_back(start, end);
  }
  std::sort(gaps.begin(), gaps.end());
  std::vector<std::pair<double, double>> arcs;
  double cursor = 0.0;
  for (const auto& [s, e] : gaps) {
    if (s > cursor) arcs.emplace_back(cursor, s);
    cursor = std::max(cursor, e);
  }
  if (cursor < kTwoPi) arcs.emplace_back(cursor, kTwoPi);
  return arcs;
}

}  // namespace

Eigen::MatrixXd lin_ess_sample(const Eigen::MatrixXd& gamma, const Eigen::VectorXd& lower_bounds,
                               std::size_t n_samples, Rng& rng, const LinEssConfig& config) {
  return lin_ess_sample(cholesky(gamma), lower_bounds, n_samples, rng, config);
}

Eigen::MatrixXd lin_ess_sample(const CholeskyFactor& gamma_factor, const Eigen::VectorXd& lower_bounds,
                               std::size_t n_samples, Rng& rng, const LinEssConfig& config) {
  const Eigen::Index m = gamma_factor.dim();
  if (lower_bounds.size() != m) throw Error(ErrorKind::DimensionMismatch, "lin_ess: bounds size differs from covariance");
  if (!lower_bounds.allFinite()) throw Error(ErrorKind::InvalidArgument, "lin_ess: truncation bounds must be finite");
  if (config.thinning == 0) throw Error(ErrorKind::InvalidArgument, "lin_ess: thinning must be positive");

  const auto n = static_cast<Eigen::Index>(n_samples);
  Eigen::MatrixXd out(n, m);
  if (m == 0 || n == 0) return out;

  const Eigen::MatrixXd& l = gamma_factor.matrix_l();
  Eigen::VectorXd x = find_start(gamma_factor, lower_bounds, rng, config);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m), nu(m), proposal(m);

  auto step = [&] {
    for (Eigen::Index i = 0; i < m; ++i) z(i) = normal(rng);
    nu.noalias() = l.triangularView<Eigen::Lower>() * z;
    const auto arcs = feasible_arcs(x, nu, lower_bounds);
    double total = 0.0;
    for (const auto& [s, e] : arcs) total += e - s;
    // Rounding can put the proposal a hair outside a boundary; redraw the angle.
    for (int attempt = 0; attempt < 64 && total > 0.0; ++attempt) {
      double u = unif(rng) * total;
      double theta = arcs.back().second;
      for (const auto& [s, e] : arcs) {
        if (u <= e - s) {
          theta = s + u;
          break;
        }
        u -= e - s;
      }
      proposal = x * std::cos(theta) + nu * std::sin(theta);
      if (strictly_feasible(proposal, lower_bounds)) {
        x = proposal;
        return;
      }
    }
  };

  for (std::size_t i = 0; i < config.burn_in; ++i) step();
  for (Eigen::Index s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < config.thinning; ++t) step();
    out.row(s) = x.transpose();
  }
  return out;
}

}  // namespace skewpbo::gauss
