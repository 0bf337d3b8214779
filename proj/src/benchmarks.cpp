#include "skewpbo/benchmarks.hpp"

#include <cmath>
#include <numbers>

#include "skewpbo/error.hpp"

namespace skewpbo {

namespace {

using std::numbers::pi;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Box cube(Eigen::Index d, double lo, double hi) {
  return Box{Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi)};
}

double cos_gauss(const Eigen::VectorXd& x) { return std::cos(5.0 * x(0)) + std::exp(-0.5 * x(0) * x(0)); }

double forrester(const Eigen::VectorXd& x) {
  const double t = 6.0 * x(0) - 2.0;
  return t * t * std::sin(12.0 * x(0) - 4.0);
}

double six_hump_camel(const Eigen::VectorXd& x) {
  const double a = x(0), b = x(1);
  return (4.0 - 2.1 * a * a + a * a * a * a / 3.0) * a * a + a * b + (-4.0 + 4.0 * b * b) * b * b;
}

double goldstein_price(const Eigen::VectorXd& x) {
  const double a = x(0), b = x(1);
  const double s = a + b + 1.0, t = 2.0 * a - 3.0 * b;
  return (1.0 + s * s * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b)) *
         (30.0 + t * t * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b));
}

double levy(const Eigen::VectorXd& x) {
  const Eigen::ArrayXd w = 1.0 + (x.array() - 1.0) / 4.0;
  const Eigen::Index d = w.size();
  double out = std::pow(std::sin(pi * w(0)), 2);
  for (Eigen::Index i = 0; i + 1 < d; ++i)
    out += (w(i) - 1.0) * (w(i) - 1.0) * (1.0 + 10.0 * std::pow(std::sin(pi * w(i) + 1.0), 2));
  out += (w(d - 1) - 1.0) * (w(d - 1) - 1.0) * (1.0 + std::pow(std::sin(2.0 * pi * w(d - 1)), 2));
  return out;
}

double rosenbrock(const Eigen::VectorXd& x) {
  double out = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    out += 100.0 * std::pow(x(i + 1) - x(i) * x(i), 2) + std::pow(x(i) - 1.0, 2);
  return out;
}

double hartmann6(const Eigen::VectorXd& x) {
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double a[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                 {0.05, 10, 17, 0.1, 8, 14},
                                 {3, 3.5, 1.7, 10, 17, 8},
                                 {17, 8, 0.05, 10, 0.1, 14}};
  static const double p[4][6] = {{1312, 1696, 5569, 124, 8283, 5886},
                                 {2329, 4135, 8307, 3736, 1004, 9991},
                                 {2348, 1451, 3522, 2883, 3047, 6650},
                                 {4047, 8828, 8732, 5743, 1091, 381}};
  double out = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) inner += a[i][j] * std::pow(x(j) - 1e-4 * p[i][j], 2);
    out -= alpha[i] * std::exp(-inner);
  }
  return out;
}

double sasena(const Eigen::VectorXd& x) {
  const double a = x(0), b = x(1);
  return 2.0 + 0.01 * std::pow(b - a * a, 2) + (1.0 - a) * (1.0 - a) + 2.0 * (2.0 - b) * (2.0 - b) +
         7.0 * std::sin(0.5 * a) * std::sin(0.7 * a * b);
}

double sasena_validity(const Eigen::VectorXd& x) { return -std::sin(x(0) - x(1) - pi / 8.0); }

}  // namespace

double Benchmark::objective(const Eigen::VectorXd& x) const {
  if (!bounds.contains(x)) throw Error(ErrorKind::OutOfBounds, name + ": point outside the search box");
  const double v = literature(x);
  return minimize ? -v : v;
}

double Benchmark::operator()(const Eigen::VectorXd& x) const {
  const double v = objective(x);
  return penalty ? v - penalty(x) : v;
}

std::vector<std::string> benchmark_names() {
  return {"cos1d", "mixed1d", "forrester", "camel", "goldstein", "levy", "rosenbrock5", "hartmann6", "sasena"};
}

Benchmark builtin_benchmark(std::string_view name) {
  Benchmark b;
  b.name = std::string(name);
  if (name == "cos1d" || name == "mixed1d") {
    b.bounds = cube(1, -3.0, 3.0);
    b.literature = cos_gauss;
    b.optimum_location = vec({0.0});
    b.literature_optimum = 2.0;
    if (name == "mixed1d") b.validity = [](const Eigen::VectorXd& x) { return -0.2 - x(0); };
  } else if (name == "forrester") {
    b.bounds = cube(1, 0.0, 1.0);
    b.literature = forrester;
    b.minimize = true;
    b.optimum_location = vec({0.757249});
    b.literature_optimum = -6.020740055735769;
  } else if (name == "camel") {
    b.bounds = Box{vec({-3.0, -2.0}), vec({3.0, 2.0})};
    b.literature = six_hump_camel;
    b.minimize = true;
    b.optimum_location = vec({0.0898420131003, -0.712656403020});
    b.literature_optimum = -1.031628453489877;
  } else if (name == "goldstein") {
    b.bounds = cube(2, -2.0, 2.0);
    b.literature = goldstein_price;
    b.minimize = true;
    b.optimum_location = vec({0.0, -1.0});
    b.literature_optimum = 3.0;
  } else if (name == "levy") {
    b.bounds = cube(2, -10.0, 10.0);
    b.literature = levy;
    b.minimize = true;
    b.optimum_location = vec({1.0, 1.0});
    b.literature_optimum = 0.0;
  } else if (name == "rosenbrock5") {
    b.bounds = cube(5, -5.0, 10.0);
    b.literature = rosenbrock;
    b.minimize = true;
    b.optimum_location = Eigen::VectorXd::Ones(5);
    b.literature_optimum = 0.0;
  } else if (name == "hartmann6") {
    b.bounds = cube(6, 0.0, 1.0);
    b.literature = hartmann6;
    b.minimize = true;
    b.optimum_location = vec({0.20168952, 0.15001069, 0.47687398, 0.27533243, 0.31165162, 0.65730054});
    b.literature_optimum = -3.322368011415515;
  } else if (name == "sasena") {
    b.bounds = cube(2, 0.0, 5.0);
    b.literature = sasena;
    b.minimize = true;
    b.optimum_location = vec({2.7450, 2.3523});
    b.literature_optimum = -1.1743;
    b.validity = sasena_validity;
  } else {
    throw Error(ErrorKind::UnknownBenchmark, "no benchmark named '" + std::string(name) + "'");
  }
  return b;
}

Benchmark penalized_objective(const Benchmark& bench, double weight) {
  if (!bench.validity) throw Error(ErrorKind::InvalidArgument, bench.name + " has no validity function to penalize");
  if (!(weight > 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty weight must be positive");
  Benchmark out = bench;
  out.penalty = [h = bench.validity, weight](const Eigen::VectorXd& x) {
    const double excess = std::max(0.0, h(x));
    return weight * excess * excess;
  };
  return out;
}

DuelOutcome answer_duel(const Benchmark& bench, const Eigen::VectorXd& candidate, const Eigen::VectorXd& reference,
                        OracleMode mode) {
  const double gc = bench(candidate);
  const double gr = bench(reference);
  if (mode == OracleMode::Mixed && !bench.valid(candidate)) return DuelOutcome::CandidateNonValid;
  return gc > gr ? DuelOutcome::CandidateWins : DuelOutcome::ReferenceWins;
}

}  // namespace skewpbo
