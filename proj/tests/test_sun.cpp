#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "skewpbo/error.hpp"
#include "skewpbo/json_io.hpp"
#include "skewpbo/sun.hpp"

using namespace skewpbo;

namespace {

// Random valid SUN: a random SPD joint matrix is rescaled so that its lower
// block is a correlation matrix, then split into Gamma, Delta and corr(Omega).
SunParams random_sun(Eigen::Index p, Eigen::Index s, gauss::Rng& rng, double latent_shift_scale = 0.7) {
  const Eigen::Index k = p + s;
  const Eigen::MatrixXd g = gauss::standard_normal(k, k, rng);
  Eigen::MatrixXd joint = g * g.transpose() / static_cast<double>(k);
  joint.diagonal().array() += 0.3;
  Eigen::VectorXd scaling = Eigen::VectorXd::Ones(k);
  for (Eigen::Index i = s; i < k; ++i) scaling(i) = 1.0 / std::sqrt(joint(i, i));
  joint = scaling.asDiagonal() * joint * scaling.asDiagonal();

  std::uniform_real_distribution<double> u(-1.0, 1.0), sd(0.5, 2.0);
  Eigen::VectorXd omega_sd(p), xi(p), gamma(s);
  for (Eigen::Index i = 0; i < p; ++i) {
    omega_sd(i) = sd(rng);
    xi(i) = u(rng);
  }
  for (Eigen::Index i = 0; i < s; ++i) gamma(i) = latent_shift_scale * u(rng);
  const Eigen::MatrixXd omega = omega_sd.asDiagonal() * joint.bottomRightCorner(p, p) * omega_sd.asDiagonal();
  return SunParams(xi, omega, joint.bottomLeftCorner(p, s), gamma, joint.topLeftCorner(s, s));
}

double pdf(const SunParams& params, double z) { return std::exp(sun_log_pdf(params, Eigen::VectorXd::Constant(1, z))); }

double pdf(const SunParams& params, double z1, double z2) {
  Eigen::VectorXd z(2);
  z << z1, z2;
  return std::exp(sun_log_pdf(params, z));
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

TEST_CASE("zero skewness reduces to the Gaussian density") {
  gauss::Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    const SunParams base = random_sun(3, 2, rng);
    const SunParams params(base.location(), base.scale(), Eigen::MatrixXd::Zero(3, 2), base.latent_shift(),
                           base.latent_cov());
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd z = gauss::standard_normal(3, 1, rng) * 1.5;
      CHECK(std::abs(sun_log_pdf(params, z) - oracle::mvn_log_density(z, base.location(), base.scale())) < 1e-9);
    }
  }
  const auto g = SunParams::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
  CHECK(sun_log_pdf(g, Eigen::VectorXd::Zero(1)) == doctest::Approx(std::log(oracle::normal_pdf(0.0))));
}

TEST_CASE("skew-normal at the origin") {
  for (double delta : {-0.9, -0.3, 0.2, 0.8}) {
    const SunParams params(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1),
                           Eigen::MatrixXd::Constant(1, 1, delta), Eigen::VectorXd::Zero(1),
                           Eigen::MatrixXd::Identity(1, 1));
    CHECK(sun_log_pdf(params, Eigen::VectorXd::Zero(1)) == doctest::Approx(std::log(oracle::normal_pdf(0.0))).epsilon(1e-12));
  }
}

TEST_CASE("one dimensional densities integrate to one") {
  gauss::Rng rng(8);
  for (int rep = 0; rep < 6; ++rep) {
    const SunParams params = random_sun(1, 1 + rep % 3, rng);
    const double mass = oracle::simpson([&](double z) { return pdf(params, z); }, params.location()(0) - 12.0 * params.scale_sd()(0),
                                        params.location()(0) + 12.0 * params.scale_sd()(0), 4000);
    CHECK(std::abs(mass - 1.0) < 1e-4);
  }
}

TEST_CASE("two dimensional densities integrate to one") {
  gauss::Rng rng(12);
  for (int rep = 0; rep < 3; ++rep) {
    const SunParams params = random_sun(2, 1 + rep, rng);
    const double half1 = 9.0 * params.scale_sd()(0), half2 = 9.0 * params.scale_sd()(1);
    const double mass = oracle::simpson(
        [&](double a) {
          return oracle::simpson([&](double b) { return pdf(params, a, b); }, params.location()(1) - half2,
                                 params.location()(1) + half2, 300);
        },
        params.location()(0) - half1, params.location()(0) + half1, 300);
    CHECK(std::abs(mass - 1.0) < 1e-4);
  }
}

TEST_CASE("construction rejects invalid parameters") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  CHECK(kind_of([&] {
          SunParams(Eigen::VectorXd::Zero(1), one, Eigen::MatrixXd::Constant(1, 1, 1.2), Eigen::VectorXd::Zero(1), one);
        }) == ErrorKind::NotPositiveDefinite);
  CHECK(kind_of([&] {
          SunParams(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1e-13), Eigen::MatrixXd::Zero(1, 1),
                    Eigen::VectorXd::Zero(1), one);
        }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] {
          SunParams(Eigen::VectorXd::Zero(2), one, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), one);
        }) == ErrorKind::DimensionMismatch);
  const SunParams ok(Eigen::VectorXd::Zero(1), one, Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), one);
  CHECK(kind_of([&] { sun_log_pdf(ok, Eigen::VectorXd::Zero(2)); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("marginalization") {
  gauss::Rng rng(15);

  SUBCASE("keeping every index is the identity") {
    const SunParams params = random_sun(3, 2, rng);
    const SunParams same = sun_marginalize(params, {0, 1, 2});
    CHECK(same.location() == params.location());
    CHECK(same.scale() == params.scale());
    CHECK(same.skewness() == params.skewness());
    CHECK(same.latent_shift() == params.latent_shift());
    CHECK(same.latent_cov() == params.latent_cov());
  }

  SUBCASE("marginal density matches quadrature of the joint") {
    for (int rep = 0; rep < 3; ++rep) {
      const SunParams joint = random_sun(2, 2, rng);
      const SunParams marginal = sun_marginalize(joint, {0});
      const double c = joint.location()(1), half = 10.0 * joint.scale_sd()(1);
      for (double t : {-1.5, -0.5, 0.0, 0.7, 1.8}) {
        const double z1 = joint.location()(0) + t * joint.scale_sd()(0);
        const double ref = oracle::simpson([&](double b) { return pdf(joint, z1, b); }, c - half, c + half, 2000);
        CHECK(std::abs(pdf(marginal, z1) - ref) < 1e-4);
      }
    }
  }

  SUBCASE("zero skewness gives the Gaussian marginal") {
    const SunParams base = random_sun(3, 1, rng);
    const SunParams params(base.location(), base.scale(), Eigen::MatrixXd::Zero(3, 1), base.latent_shift(),
                           base.latent_cov());
    const SunParams m = sun_marginalize(params, {2, 0});
    Eigen::VectorXd mean(2);
    mean << base.location()(2), base.location()(0);
    Eigen::MatrixXd cov(2, 2);
    cov << base.scale()(2, 2), base.scale()(2, 0), base.scale()(0, 2), base.scale()(0, 0);
    const Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(2, -0.4, 0.9);
    CHECK(std::abs(sun_log_pdf(m, z) - oracle::mvn_log_density(z, mean, cov)) < 1e-9);
  }

  CHECK(kind_of([&] { sun_marginalize(random_sun(2, 1, rng), {}); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { sun_marginalize(random_sun(2, 1, rng), {2}); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("conditioning") {
  gauss::Rng rng(16);

  SUBCASE("zero skewness gives Gaussian conditioning") {
    const SunParams base = random_sun(3, 2, rng);
    const SunParams params(base.location(), base.scale(), Eigen::MatrixXd::Zero(3, 2), base.latent_shift(),
                           base.latent_cov());
    Eigen::VectorXd z1(1);
    z1 << 0.8;
    const SunParams cond = sun_condition(params, {1}, z1);
    const Eigen::MatrixXd& om = base.scale();
    Eigen::Vector2d expected_mean;
    expected_mean << base.location()(0) + om(0, 1) / om(1, 1) * (0.8 - base.location()(1)),
        base.location()(2) + om(2, 1) / om(1, 1) * (0.8 - base.location()(1));
    CHECK((cond.location() - expected_mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(cond.scale()(0, 1) - (om(0, 2) - om(0, 1) * om(1, 2) / om(1, 1))) < 1e-9);
  }

  SUBCASE("conditioning at the location leaves the latent shift unchanged") {
    const SunParams params = random_sun(3, 2, rng);
    const SunParams cond = sun_condition(params, {0, 2}, Eigen::Vector2d(params.location()(0), params.location()(2)));
    CHECK((cond.latent_shift() - params.latent_shift()).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("conditional density is the joint over the quadrature marginal") {
    for (int rep = 0; rep < 3; ++rep) {
      const SunParams joint = random_sun(2, 1 + rep, rng);
      const double z1 = joint.location()(0) + 0.6 * joint.scale_sd()(0) * (rep - 1);
      const SunParams cond = sun_condition(joint, {0}, Eigen::VectorXd::Constant(1, z1));
      const double c = joint.location()(1), half = 10.0 * joint.scale_sd()(1);
      const double marginal = oracle::simpson([&](double b) { return pdf(joint, z1, b); }, c - half, c + half, 2000);
      for (double t : {-2.0, -0.8, 0.0, 0.4, 1.5}) {
        const double z2 = c + t * joint.scale_sd()(1);
        CHECK(std::abs(pdf(cond, z2) - pdf(joint, z1, z2) / marginal) < 1e-4);
      }
    }
  }

  SUBCASE("marginal of conditional equals conditional of marginal") {
    for (int rep = 0; rep < 3; ++rep) {
      const SunParams params = random_sun(3, 2, rng);
      const Eigen::VectorXd obs = Eigen::VectorXd::Constant(1, params.location()(0) + 0.3);
      const SunParams a = sun_marginalize(sun_condition(params, {0}, obs), {0});
      const SunParams b = sun_condition(sun_marginalize(params, {0, 1}), {0}, obs);
      for (double z = -3.0; z <= 3.0; z += 0.25) CHECK(std::abs(pdf(a, z) - pdf(b, z)) < 1e-4);
    }
  }

  const SunParams params = random_sun(2, 1, rng);
  CHECK(kind_of([&] { sun_condition(params, {0, 1}, Eigen::Vector2d::Zero()); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { sun_condition(params, {0}, Eigen::Vector2d::Zero()); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("zero skewness samples are Gaussian") {
  gauss::Rng rng(31);
  const SunParams base = random_sun(2, 2, rng);
  const SunParams params(base.location(), base.scale(), Eigen::MatrixXd::Zero(2, 2), base.latent_shift(),
                         base.latent_cov());
  const Eigen::MatrixXd draws = sun_sample(params, 50000, rng);
  const auto m = oracle::moments(draws);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double se = std::sqrt(base.scale()(i, i) / 50000.0);
    CHECK(std::abs(m.mean(i) - base.location()(i)) < 4 * se);
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(std::abs(m.cov(i, j) - base.scale()(i, j)) < 4 * oracle::cov_std_error(draws, i, j));
  }
}

TEST_CASE("sample histogram agrees with the density") {
  gauss::Rng rng(33);
  for (int rep = 0; rep < 3; ++rep) {
    const SunParams params = random_sun(1, 1 + rep, rng);
    const std::size_t n = 50000;
    const Eigen::MatrixXd draws = sun_sample(params, n, rng);

    // Equal-width bins over the bulk plus two tail bins; expected counts from
    // quadrature of the density.
    const double lo = params.location()(0) - 3.5 * params.scale_sd()(0);
    const double hi = params.location()(0) + 3.5 * params.scale_sd()(0);
    const int bins = 30;
    const double width = (hi - lo) / bins;
    std::vector<double> observed(bins + 2, 0.0), expected(bins + 2, 0.0);
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      const double z = draws(i, 0);
      const int b = z < lo ? 0 : z >= hi ? bins + 1 : 1 + std::min(bins - 1, static_cast<int>((z - lo) / width));
      observed[static_cast<std::size_t>(b)] += 1.0;
    }
    const auto f = [&](double z) { return pdf(params, z); };
    double inner = 0.0;
    for (int b = 0; b < bins; ++b) {
      expected[static_cast<std::size_t>(b + 1)] = oracle::simpson(f, lo + b * width, lo + (b + 1) * width, 40);
      inner += expected[static_cast<std::size_t>(b + 1)];
    }
    expected[0] = oracle::simpson(f, lo - 12.0 * params.scale_sd()(0), lo, 400);
    expected[bins + 1] = 1.0 - inner - expected[0];

    double stat = 0.0;
    int used = 0;
    for (std::size_t b = 0; b < expected.size(); ++b) {
      const double e = expected[b] * static_cast<double>(n);
      if (e < 5.0) continue;
      stat += (observed[b] - e) * (observed[b] - e) / e;
      ++used;
    }
    const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(used - 1), stat));
    MESSAGE("chi-square " << stat << " on " << used - 1 << " dof, p = " << p_value);
    CHECK(p_value > 0.01);
  }
}

TEST_CASE("positive skewness under positive Delta and zero shift") {
  gauss::Rng rng(35);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Identity(1, 1);
  const SunParams params(Eigen::VectorXd::Zero(1), one, Eigen::MatrixXd::Constant(1, 1, 0.9), Eigen::VectorXd::Zero(1),
                         one);
  const Eigen::MatrixXd draws = sun_sample(params, 50000, rng);
  CHECK(oracle::skewness(draws.col(0)) > 0.0);
}

TEST_CASE("SunParams JSON round trip is exact") {
  gauss::Rng rng(40);
  for (Eigen::Index s : {0, 1, 3}) {
    const SunParams params = s == 0 ? SunParams::gaussian(Eigen::Vector2d(0.1, 1.0 / 3.0), Eigen::Matrix2d::Identity() * 0.7)
                                    : random_sun(3, s, rng);
    const std::string text = to_json(params).dump();
    const SunParams back = sun_from_json(Json::parse(text));
    CHECK(back.location() == params.location());
    CHECK(back.scale() == params.scale());
    CHECK(back.skewness() == params.skewness());
    CHECK(back.latent_shift() == params.latent_shift());
    CHECK(back.latent_cov() == params.latent_cov());
    CHECK(back.latent_dim() == s);
  }
  CHECK(kind_of([] { sun_from_json(Json::parse(R"({"xi": [0]})")); }) == ErrorKind::InvalidArgument);
}
