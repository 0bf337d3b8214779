#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "skewpbo/error.hpp"
#include "skewpbo/gauss.hpp"

using namespace skewpbo;
using namespace skewpbo::gauss;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, Rng& rng, double ridge = 0.1) {
  const Eigen::MatrixXd g = standard_normal(n, n, rng);
  Eigen::MatrixXd a = g * g.transpose() / static_cast<double>(n);
  a.diagonal().array() += ridge;
  return a;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected skewpbo::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("std_normal_pdf closed form") {
  CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(std_normal_pdf(1.0) == doctest::Approx(0.2419707245).epsilon(1e-10));
  CHECK(std_normal_pdf(-1.0) == std_normal_pdf(1.0));
  CHECK(std_normal_pdf(10.0) < 1e-21);
}

TEST_CASE("std_normal_cdf against erf reference") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(40.0) - 1.0) <= 1e-15);
  // 0.841344746068543 from quadrature of the pdf
  CHECK(std::abs(std_normal_cdf(1.0) - 0.841344746068543) < 1e-12);
  double prev = 0.0;
  for (double x = -12.0; x <= 12.0; x += 0.01) {
    const double p = std_normal_cdf(x);
    CHECK(std::abs(p - oracle::normal_cdf(x)) <= 1e-10);
    CHECK(std::abs(p + std_normal_cdf(-x) - 1.0) <= 1e-12);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("log cdf and hazard ratio stay finite in the tail") {
  CHECK(log_std_normal_cdf(0.0) == doctest::Approx(std::log(0.5)));
  CHECK(std::isfinite(log_std_normal_cdf(-50.0)));
  CHECK(log_std_normal_cdf(-50.0) == doctest::Approx(-1254.8313611).epsilon(1e-9));
  CHECK(normal_hazard_ratio(-40.0) == doctest::Approx(40.0).epsilon(1e-3));
  CHECK(normal_hazard_ratio(0.0) == doctest::Approx(2.0 * 0.3989422804014327));
  for (double x = -35.0; x < -29.0; x += 0.5)
    CHECK(log_std_normal_cdf(x) == doctest::Approx(std::log(0.5 * std::erfc(-x / std::numbers::sqrt2))).epsilon(1e-10));
}

TEST_CASE("cholesky examples") {
  const auto id = cholesky(Eigen::MatrixXd::Identity(3, 3));
  CHECK(id.matrix_l().isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(id.jitter() == 0.0);

  Eigen::MatrixXd a(2, 2);
  a << 4, 2, 2, 3;
  const auto f = cholesky(a);
  CHECK(f.matrix_l()(0, 0) == doctest::Approx(2.0));
  CHECK(f.matrix_l()(1, 0) == doctest::Approx(1.0));
  CHECK(f.matrix_l()(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(f.matrix_l()(0, 1) == 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK(kind_of([&] { cholesky(bad); }) == ErrorKind::NotPositiveDefinite);
}

TEST_CASE("cholesky uses the jitter ladder on a singular Gram matrix") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
  const auto f = cholesky(a);
  CHECK(f.jitter() > 0.0);
  CHECK(f.jitter() <= 1e-4);
  Eigen::MatrixXd expected = a;
  expected.diagonal().array() += f.jitter();
  CHECK((f.reconstruct() - expected).norm() < 1e-10);
}

TEST_CASE("cholesky reconstruction on random SPD matrices") {
  Rng rng(11);
  for (Eigen::Index n : {1, 2, 5, 17, 60, 200}) {
    const Eigen::MatrixXd a = random_spd(n, rng);
    const auto f = cholesky(a);
    CHECK(f.jitter() == 0.0);
    CHECK((f.reconstruct() - a).norm() / a.norm() <= 1e-8);
  }
}

TEST_CASE("mvn_cdf examples") {
  CHECK(mvn_cdf(Eigen::VectorXd(0), Eigen::MatrixXd(0, 0)) == 1.0);
  CHECK(mvn_cdf(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)) == doctest::Approx(0.5));
  CHECK(mvn_cdf(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)) == doctest::Approx(0.25).epsilon(1e-14));
  Eigen::MatrixXd rho(2, 2);
  rho << 1, 0.5, 0.5, 1;
  // 1/4 + asin(0.5)/(2 pi) = 1/3, confirmed by 2D quadrature
  CHECK(std::abs(mvn_cdf(Eigen::VectorXd::Zero(2), rho) - 1.0 / 3.0) < 1e-14);
  CHECK(kind_of([] { mvn_cdf(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3)); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("bvn_cdf agrees with direct quadrature across correlations") {
  for (double r : {-0.99, -0.95, -0.6, -0.2, 0.1, 0.5, 0.8, 0.93, 0.999}) {
    for (auto [b1, b2] : {std::pair{0.3, -0.7}, std::pair{-1.5, 1.2}, std::pair{2.0, 2.5}}) {
      // P = int_{-inf}^{b1} phi(x) Phi((b2 - r x)/sqrt(1-r^2)) dx
      const double s = std::sqrt(1 - r * r);
      const double ref = oracle::simpson(
          [&](double x) { return oracle::normal_pdf(x) * oracle::normal_cdf((b2 - r * x) / s); }, -12.0, b1, 20000);
      CHECK(std::abs(bvn_cdf(b1, b2, r) - ref) < 1e-10);
    }
  }
}

TEST_CASE("mvn_cdf factorizes on diagonal covariance") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5), var(0.3, 3.0);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index m = 3 + rep % 6;
    Eigen::VectorXd b(m), d(m);
    double product = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i) = u(rng);
      d(i) = var(rng);
      product *= oracle::normal_cdf(b(i) / std::sqrt(d(i)));
    }
    CHECK(std::abs(mvn_cdf(b, d.asDiagonal().toDenseMatrix()) - product) < 1e-8);
  }
}

TEST_CASE("mvn_cdf is monotone in each limit") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index m = 3 + rep % 4;
    const Eigen::MatrixXd s = random_spd(m, rng, 0.3);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) b(i) = u(rng);
    const double base = mvn_cdf(b, s);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd raised = b;
      raised(i) += 0.25;
      CHECK(mvn_cdf(raised, s) >= base - 1e-12);
    }
  }
}

TEST_CASE("mvn_cdf handles infinite limits and large dimension") {
  Eigen::VectorXd b(3);
  b << 0.0, std::numeric_limits<double>::infinity(), 0.0;
  CHECK(mvn_cdf(b, Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(0.25));
  b(1) = -std::numeric_limits<double>::infinity();
  CHECK(mvn_cdf(b, Eigen::MatrixXd::Identity(3, 3)) == 0.0);

  Rng rng(9);
  const Eigen::MatrixXd s = random_spd(60, rng, 1.0);
  const double lp = log_mvn_cdf(Eigen::VectorXd::Zero(60), s);
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
}

TEST_CASE("bivariate conditioning against the QMC evaluator") {
  Rng rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.5);
  double worst = 0.0;
  for (int rep = 0; rep < 12; ++rep) {
    const Eigen::Index m = 3 + rep % 4;
    const Eigen::MatrixXd s = random_spd(m, rng, 0.5);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) b(i) = u(rng);
    const auto q = mvn_cdf_qmc(b, s, {.points_per_shift = 8192, .shifts = 16, .seed = 7});
    CHECK(q.std_error < 1e-4);
    worst = std::max(worst, std::abs(std::exp(log_mvn_cdf_conditioning(b, s)) - q.value));
  }
  MESSAGE("worst |bivariate conditioning - QMC| = " << worst);
  CHECK(worst < 1e-3);
}

TEST_CASE("trivariate quadrature against the QMC evaluator") {
  Rng rng(23);
  std::uniform_real_distribution<double> u(-2.5, 1.5);
  for (int rep = 0; rep < 12; ++rep) {
    const Eigen::MatrixXd s = random_spd(3, rng, rep % 2 ? 0.05 : 0.5);
    Eigen::VectorXd b(3);
    for (Eigen::Index i = 0; i < 3; ++i) b(i) = u(rng);
    const auto q = mvn_cdf_qmc(b, s, {.points_per_shift = 16384, .shifts = 16, .seed = 9});
    CHECK(std::abs(mvn_cdf(b, s) - q.value) < 4 * q.std_error + 1e-9);
  }
  // Independent coordinates factorize exactly.
  const Eigen::Vector3d b(-0.3, 0.4, -1.7);
  const double product = oracle::normal_cdf(-0.3) * oracle::normal_cdf(0.4) * oracle::normal_cdf(-1.7);
  CHECK(std::abs(mvn_cdf(b, Eigen::Matrix3d::Identity()) - product) < 1e-12);
  CHECK(std::abs(log_mvn_cdf(Eigen::Vector3d::Constant(-9.0), Eigen::Matrix3d::Identity()) -
                 3 * std::log(0.5 * std::erfc(9.0 / std::numbers::sqrt2))) < 1e-8);
}

TEST_CASE("lin_ess examples") {
  Rng rng(1);
  const Eigen::MatrixXd id1 = Eigen::MatrixXd::Identity(1, 1);

  SUBCASE("effectively untruncated") {
    const auto s = lin_ess_sample(id1, Eigen::VectorXd::Constant(1, -40.0), 20000, rng);
    const double se = 1.0 / std::sqrt(20000.0);
    CHECK(std::abs(s.mean()) < 3 * se * 1.5);
  }
  SUBCASE("half normal") {
    const std::size_t n = 40000;
    const auto s = lin_ess_sample(id1, Eigen::VectorXd::Zero(1), n, rng);
    CHECK((s.array() > 0.0).all());
    Rng ref_rng(2);
    const auto ref = oracle::rejection_truncated(id1, Eigen::VectorXd::Zero(1), n, ref_rng);
    const double sd = std::sqrt(1.0 - 2.0 / std::numbers::pi);
    const double se = sd * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::abs(s.mean() - ref.mean()) < 3 * se * 1.5);
    CHECK(std::abs(s.mean() - std::sqrt(2.0 / std::numbers::pi)) < 3 * se);
  }
}

TEST_CASE("lin_ess zero constraint violations with shifted bounds") {
  Rng rng(4);
  const Eigen::MatrixXd s = random_spd(8, rng, 0.5);
  Eigen::VectorXd lower(8);
  lower << 0.5, -0.2, 1.0, 0.0, -1.0, 0.3, 0.1, 0.0;
  const auto draws = lin_ess_sample(s, lower, 5000, rng, {.burn_in = 50, .thinning = 2});
  CHECK(draws.rows() == 5000);
  for (Eigen::Index i = 0; i < draws.rows(); ++i) CHECK(((draws.row(i).transpose() - lower).array() > 0.0).all());
}

TEST_CASE("lin_ess rejects malformed truncation") {
  Rng rng(4);
  CHECK(kind_of([&] {
          lin_ess_sample(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(3), 10, rng);
        }) == ErrorKind::DimensionMismatch);
  Eigen::VectorXd inf_bound(1);
  inf_bound << std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { lin_ess_sample(Eigen::MatrixXd::Identity(1, 1), inf_bound, 10, rng); }) ==
        ErrorKind::InvalidArgument);
  CHECK(lin_ess_sample(Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), 5, rng).cols() == 0);
}
