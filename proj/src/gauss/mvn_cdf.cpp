#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "skewpbo/error.hpp"
#include "skewpbo/gauss.hpp"

namespace skewpbo::gauss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Rule {
  std::span<const double> nodes;    // positive abscissae on [-1, 1]
  std::span<const double> weights;
};

template <unsigned N>
Rule legendre_rule() {
  using Q = boost::math::quadrature::gauss<double, N>;
  static const auto nodes = Q::abscissa();
  static const auto weights = Q::weights();
  return {std::span<const double>(nodes.data(), nodes.size()),
          std::span<const double>(weights.data(), weights.size())};
}

// Upper-orthant probability P(X > dh, Y > dk), Drezner-Wesolowsky / Genz.
double bvn_upper(double dh, double dk, double r) {
  if (dh == kInf || dk == kInf) return 0.0;
  if (dh == -kInf) return dk == -kInf ? 1.0 : std_normal_cdf(-dk);
  if (dk == -kInf) return std_normal_cdf(-dh);
  if (r == 0.0) return std_normal_cdf(-dh) * std_normal_cdf(-dk);

  const double ar = std::abs(r);
  const Rule rule = ar < 0.3 ? legendre_rule<6>() : ar < 0.75 ? legendre_rule<12>() : legendre_rule<20>();

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      for (double s : {1.0 - rule.nodes[i], 1.0 + rule.nodes[i]}) {
        const double sn = std::sin(asr * s);
        bvn += rule.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return std::clamp(bvn * asr / kTwoPi + std_normal_cdf(-h) * std_normal_cdf(-k), 0.0, 1.0);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = 1.0 - r * r;
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 80.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      const double sp = std::sqrt(kTwoPi) * std_normal_cdf(-b / a);
      bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
    }
    a *= 0.5;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      for (double s : {1.0 - rule.nodes[i], 1.0 + rule.nodes[i]}) {
        const double xs = (a * s) * (a * s);
        asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          sum += rule.weights[i] * std::exp(asr) * (sp - ep);
        }
      }
    }
    bvn = (a * sum - bvn) / kTwoPi;
  }
  if (r > 0.0) {
    bvn += std_normal_cdf(-std::max(h, k));
  } else if (h >= k) {
    bvn = -bvn;
  } else {
    const double l = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h) : std_normal_cdf(-h) - std_normal_cdf(-k);
    bvn = l - bvn;
  }
  return std::clamp(bvn, 0.0, 1.0);
}

struct TruncatedMoments {
  Eigen::Vector2d mean;
  Eigen::Matrix2d cov;
};

// First two moments of a standard bivariate normal truncated to X < h, Y < k,
// via the lower-truncation formulas applied to (-X, -Y).
TruncatedMoments truncated_bvn_moments(double h, double k, double rho, double prob) {
  TruncatedMoments out;
  if (prob < 1e-250) {
    // Deep tail: treat the coordinates as independent truncated normals.
    const double lh = normal_hazard_ratio(h), lk = normal_hazard_ratio(k);
    out.mean << -lh, -lk;
    out.cov << 1.0 - lh * (lh + h), 0.0, 0.0, 1.0 - lk * (lk + k);
    return out;
  }
  const double a = -h, b = -k;
  const double s = std::sqrt(std::max(1.0 - rho * rho, 1e-300));
  const double pa = a == -kInf ? 0.0 : std_normal_pdf(a);
  const double pb = b == -kInf ? 0.0 : std_normal_pdf(b);
  const double qa = a == -kInf ? 1.0 : std_normal_cdf(-(b - rho * a) / s);  // Q((b - rho a)/s)
  const double qb = b == -kInf ? 1.0 : std_normal_cdf(-(a - rho * b) / s);
  const double apa = a == -kInf ? 0.0 : a * pa;
  const double bpb = b == -kInf ? 0.0 : b * pb;
  const double joint = (a == -kInf || b == -kInf) ? 0.0 : pa * std_normal_pdf((b - rho * a) / s);
  const double m10 = pa * qa + rho * pb * qb;
  const double m01 = pb * qb + rho * pa * qa;
  const double m20 = prob + apa * qa + rho * rho * bpb * qb + rho * s * joint;
  const double m02 = prob + bpb * qb + rho * rho * apa * qa + rho * s * joint;
  const double m11 = rho * prob + rho * apa * qa + rho * bpb * qb + s * joint;
  out.mean << -m10 / prob, -m01 / prob;
  const double ex = m10 / prob, ey = m01 / prob;
  out.cov << m20 / prob - ex * ex, m11 / prob - ex * ey, m11 / prob - ex * ey, m02 / prob - ey * ey;
  out.cov(0, 0) = std::max(out.cov(0, 0), 0.0);
  out.cov(1, 1) = std::max(out.cov(1, 1), 0.0);
  return out;
}

void check_inputs(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != upper.size())
    throw Error(ErrorKind::DimensionMismatch, "mvn_cdf: limits and covariance sizes differ");
  if (upper.hasNaN()) throw Error(ErrorKind::InvalidArgument, "mvn_cdf: NaN limit");
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    if (!(sigma(i, i) > 0.0)) throw Error(ErrorKind::NotPositiveDefinite, "mvn_cdf: non-positive variance");
}

struct Candidate {
  std::size_t a = 0;
  std::size_t b = 0;
  double prob = 2.0;
};

// Trivariate orthant probability as a one-dimensional integral over the first
// variable in probability scale, u = Phi(x), of the conditional bivariate cdf.
// Returns a negative value when the quadrature does not reach its tolerance.
double trivariate_cdf(const std::array<double, 3>& h, const Eigen::Matrix3d& r) {
  std::size_t pivot = 0;
  double least = kInf;
  for (std::size_t i = 0; i < 3; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
      if (j != i) worst = std::max(worst, std::abs(r(i, j)));
    if (worst < least) {
      least = worst;
      pivot = i;
    }
  }
  const std::size_t a = (pivot + 1) % 3, b = (pivot + 2) % 3;
  const double ra = std::clamp(r(pivot, a), -1.0 + 1e-12, 1.0 - 1e-12);
  const double rb = std::clamp(r(pivot, b), -1.0 + 1e-12, 1.0 - 1e-12);
  const double sa = std::sqrt(1.0 - ra * ra), sb = std::sqrt(1.0 - rb * rb);
  const double rho = std::clamp((r(a, b) - ra * rb) / (sa * sb), -1.0, 1.0);
  const double top = std_normal_cdf(h[pivot]);
  if (!(top > 0.0)) return 0.0;

  const auto integrand = [&](double u) {
    if (!(u > 0.0)) return 0.0;
    const double x = std_normal_quantile(std::min(u, top));
    return bvn_cdf((h[a] - ra * x) / sa, (h[b] - rb * x) / sb, rho);
  };
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double error = 0.0, l1 = 0.0;
  const double value = rule.integrate(integrand, 0.0, top, 1e-11, &error, &l1);
  if (!(value > 0.0) || !(error <= 1e-8 * l1)) return -1.0;
  return std::min(value, 1.0);
}

}  // namespace

double bvn_cdf(double b1, double b2, double rho) {
  rho = std::clamp(rho, -1.0, 1.0);
  return bvn_upper(-b1, -b2, rho);
}

namespace {

double log_mvn_cdf_impl(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, bool trivariate_quadrature) {
  check_inputs(upper, sigma);
  const Eigen::Index m = upper.size();
  if ((upper.array() == -kInf).any()) return -kInf;

  // Variables with an infinite upper limit marginalize out.
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i)
    if (upper(i) != kInf) active.push_back(i);
  if (active.empty()) return 0.0;
  if (active.size() == 1) {
    const Eigen::Index i = active[0];
    return log_std_normal_cdf(upper(i) / std::sqrt(sigma(i, i)));
  }
  if (active.size() == 2) {
    const Eigen::Index i = active[0], j = active[1];
    const double si = std::sqrt(sigma(i, i)), sj = std::sqrt(sigma(j, j));
    const double p = bvn_cdf(upper(i) / si, upper(j) / sj, sigma(i, j) / (si * sj));
    return p > 0.0 ? std::log(p) : -kInf;
  }
  if (active.size() == 3 && trivariate_quadrature) {
    std::array<double, 3> h{};
    Eigen::Matrix3d r;
    for (std::size_t x = 0; x < 3; ++x) {
      const double sx = std::sqrt(sigma(active[x], active[x]));
      h[x] = upper(active[x]) / sx;
      for (std::size_t y = 0; y < 3; ++y)
        r(x, y) = sigma(active[x], active[y]) / (sx * std::sqrt(sigma(active[y], active[y])));
    }
    const double p = trivariate_cdf(h, r);
    if (p > 1e-290) return std::log(p);
  }

  // Bivariate conditioning: repeatedly pick the least likely pair, truncate it
  // and moment-match the remaining variables to a Gaussian given that event.
  const std::size_t n = active.size();
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd limit(n);
  Eigen::VectorXd floor_var(n);
  for (std::size_t i = 0; i < n; ++i) {
    limit(i) = upper(active[i]);
    for (std::size_t j = 0; j < n; ++j) cov(i, j) = sigma(active[i], active[j]);
    floor_var(i) = 1e-14 * cov(i, i);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  std::vector<std::size_t> rest(n);
  for (std::size_t i = 0; i < n; ++i) rest[i] = i;

  auto sd = [&](std::size_t i) { return std::sqrt(std::max(cov(i, i), floor_var(i))); };
  auto std_limit = [&](std::size_t i) { return (limit(i) - mean(i)) / sd(i); };
  auto corr = [&](std::size_t i, std::size_t j) {
    return std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0 + 1e-12, 1.0 - 1e-12);
  };

  double log_p = 0.0;
  while (rest.size() >= 2) {
    Candidate best;
    if (rest.size() <= 20) {
      for (std::size_t x = 0; x < rest.size(); ++x)
        for (std::size_t y = x + 1; y < rest.size(); ++y) {
          const double p = bvn_cdf(std_limit(rest[x]), std_limit(rest[y]), corr(rest[x], rest[y]));
          if (p < best.prob) best = {x, y, p};
        }
    } else {
      std::size_t first = 0;
      double lowest = kInf;
      for (std::size_t x = 0; x < rest.size(); ++x) {
        const double z = std_limit(rest[x]);
        if (z < lowest) {
          lowest = z;
          first = x;
        }
      }
      for (std::size_t y = 0; y < rest.size(); ++y) {
        if (y == first) continue;
        const double p = bvn_cdf(std_limit(rest[first]), std_limit(rest[y]), corr(rest[first], rest[y]));
        if (p < best.prob) best = {std::min(first, y), std::max(first, y), p};
      }
    }
    if (!(best.prob > 0.0)) return -kInf;
    log_p += std::log(best.prob);

    const std::size_t i = rest[best.a];
    const std::size_t j = rest[best.b];
    const double si = sd(i), sj = sd(j);
    const auto tm = truncated_bvn_moments(std_limit(i), std_limit(j), corr(i, j), best.prob);
    const Eigen::Vector2d scale(si, sj);
    const Eigen::Vector2d shift = scale.cwiseProduct(tm.mean);  // truncated mean minus current mean
    const Eigen::Matrix2d truncated_cov = scale.asDiagonal() * tm.cov * scale.asDiagonal();

    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best.b));
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best.a));
    if (rest.empty()) break;

    Eigen::Matrix2d pp;
    pp << cov(i, i), cov(i, j), cov(j, i), cov(j, j);
    pp.diagonal().array() = pp.diagonal().array().max(Eigen::Array2d(floor_var(i), floor_var(j)));
    Eigen::Matrix2d pp_inv;
    const double det = pp(0, 0) * pp(1, 1) - pp(0, 1) * pp(1, 0);
    if (det > 1e-14 * pp(0, 0) * pp(1, 1)) {
      pp_inv = pp.inverse();
    } else {
      // Nearly collinear pair: condition on the first variable only.
      pp_inv.setZero();
      pp_inv(0, 0) = 1.0 / pp(0, 0);
    }
    const std::size_t r = rest.size();
    Eigen::MatrixXd cross(r, 2);
    for (std::size_t x = 0; x < r; ++x) {
      cross(x, 0) = cov(rest[x], i);
      cross(x, 1) = cov(rest[x], j);
    }
    const Eigen::MatrixXd gain = cross * pp_inv;
    const Eigen::VectorXd delta_mean = gain * shift;
    const Eigen::MatrixXd delta_cov = gain * (pp - truncated_cov) * gain.transpose();
    for (std::size_t x = 0; x < r; ++x) {
      mean(rest[x]) += delta_mean(x);
      for (std::size_t y = 0; y < r; ++y) cov(rest[x], rest[y]) -= delta_cov(x, y);
    }
  }
  if (rest.size() == 1) log_p += log_std_normal_cdf(std_limit(rest[0]));
  return log_p;
}

}  // namespace

double log_mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma) {
  return log_mvn_cdf_impl(upper, sigma, true);
}

double log_mvn_cdf_conditioning(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma) {
  return log_mvn_cdf_impl(upper, sigma, false);
}

double mvn_cdf(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma) {
  return std::clamp(std::exp(log_mvn_cdf(upper, sigma)), 0.0, 1.0);
}

QmcEstimate mvn_cdf_qmc(const Eigen::VectorXd& upper, const Eigen::MatrixXd& sigma, const QmcOptions& options) {
  check_inputs(upper, sigma);
  const Eigen::Index m = upper.size();
  if (m == 0) return {1.0, 0.0};
  if ((upper.array() == -kInf).any()) return {0.0, 0.0};
  if (options.shifts < 2 || options.points_per_shift == 0)
    throw Error(ErrorKind::InvalidArgument, "mvn_cdf_qmc needs at least two shifts");

  const Eigen::MatrixXd l = cholesky(sigma).matrix_l();

  // Richtmyer lattice generators from square roots of primes.
  static constexpr std::array<int, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                                   41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
  const Eigen::Index dims = m - 1;
  if (dims > static_cast<Eigen::Index>(kPrimes.size()))
    throw Error(ErrorKind::InvalidArgument, "mvn_cdf_qmc supports at most 25 dimensions");
  Eigen::VectorXd gen(dims);
  for (Eigen::Index j = 0; j < dims; ++j) {
    const double s = std::sqrt(static_cast<double>(kPrimes[static_cast<std::size_t>(j)]));
    gen(j) = s - std::floor(s);
  }

  Rng rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> estimates;
  estimates.reserve(options.shifts);
  Eigen::VectorXd shift(dims), y(m);
  for (std::size_t s = 0; s < options.shifts; ++s) {
    for (Eigen::Index j = 0; j < dims; ++j) shift(j) = unif(rng);
    double acc = 0.0;
    for (std::size_t i = 1; i <= options.points_per_shift; ++i) {
      double f = 1.0;
      double e = std_normal_cdf(upper(0) / l(0, 0));
      f *= e;
      for (Eigen::Index k = 1; k < m && f > 0.0; ++k) {
        double w = static_cast<double>(i) * gen(k - 1) + shift(k - 1);
        w -= std::floor(w);
        w = std::abs(2.0 * w - 1.0);  // baker's transform
        const double u = std::clamp(w * e, 1e-300, 1.0 - 1e-16);
        y(k - 1) = std_normal_quantile(u);
        const double centre = l.row(k).head(k).dot(y.head(k));
        e = upper(k) == kInf ? 1.0 : std_normal_cdf((upper(k) - centre) / l(k, k));
        f *= e;
      }
      acc += f;
    }
    estimates.push_back(acc / static_cast<double>(options.points_per_shift));
  }
  double mean = 0.0;
  for (double v : estimates) mean += v;
  mean /= static_cast<double>(estimates.size());
  double var = 0.0;
  for (double v : estimates) var += (v - mean) * (v - mean);
  var /= static_cast<double>(estimates.size() - 1);
  return {std::clamp(mean, 0.0, 1.0), std::sqrt(var / static_cast<double>(estimates.size()))};
}

}  // namespace skewpbo::gauss
