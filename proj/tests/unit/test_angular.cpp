#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles.hpp"
#include "lmcot/angular.hpp"
#include "lmcot/errors.hpp"

using namespace lmcot;
using doctest::Approx;

TEST_CASE("l2_normalize") {
  Eigen::VectorXd v(2);
  v << 3, 4;
  const Eigen::VectorXd u = l2_normalize(v);
  CHECK(u(0) == Approx(0.6).epsilon(1e-15));
  CHECK(u(1) == Approx(0.8).epsilon(1e-15));

  v << 0, 1;
  CHECK(l2_normalize(v) == v);

  v << 0.1, 0.995;
  CHECK(l2_normalize(v)(1) == Approx(0.995 / std::hypot(0.1, 0.995)));
  CHECK(std::abs(l2_normalize(v).norm() - 1.0) < 1e-12);

  v << 0, 0;
  CHECK_THROWS_AS(l2_normalize(v), ZeroVectorError);
  v << 1e-9, 0;
  CHECK_THROWS_AS(l2_normalize(v, 1e-7), ZeroVectorError);
  v << NAN, 1;
  CHECK_THROWS_AS(l2_normalize(v), InputError);
}

TEST_CASE("angles from the worked-example features") {
  Eigen::MatrixXd x(2, 2);
  x << 0.1, 0.995, 0.2, 0.9798;
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  const Eigen::MatrixXd theta = angles_from_features(x, w);
  CHECK(theta(0, 0) == Approx(0.0999).epsilon(2e-3));
  CHECK(theta(0, 1) == Approx(1.4706).epsilon(1e-4));
  CHECK(theta(1, 0) == Approx(0.2007).epsilon(1e-3));
  CHECK(theta(1, 1) == Approx(1.3694).epsilon(1e-4));

  SUBCASE("self angle is clamped, not zero") {
    const Eigen::MatrixXd self = angles_from_features(w, w);
    CHECK(self(0, 0) == Approx(std::acos(1.0 - 1e-7)).epsilon(1e-12));
    CHECK(self(0, 0) > 0.0);
  }
  SUBCASE("scale invariance") {
    for (double c : {1e-3, 0.5, 7.0, 1e4}) CHECK((angles_from_features(c * x, w) - theta).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("non-finite input") {
    Eigen::MatrixXd bad = x;
    bad(0, 0) = INFINITY;
    CHECK_THROWS_AS(angles_from_features(bad, w), InputError);
  }
}

TEST_CASE("cot_via_theta") {
  const CotPair quarter = cot_via_theta(std::numbers::pi / 4, 0.0);
  CHECK(quarter.cot_theta == Approx(1.0).epsilon(1e-12));
  CHECK(quarter.cot_theta_m == Approx(1.0).epsilon(1e-12));
  CHECK(cot_via_theta(0.15, 0.0).cot_theta == Approx(static_cast<double>(oracle::cot(0.15L))).epsilon(1e-12));
  CHECK(cot_via_theta(0.15, 0.0).cot_theta == Approx(6.617).epsilon(1e-3));
  CHECK(cot_via_theta(1.42, 0.0).cot_theta == Approx(0.1520).epsilon(1e-3));

  SUBCASE("floor keeps the sign for obtuse angles") {
    CHECK(cot_via_theta(2.5, 0.0).cot_theta == Approx(static_cast<double>(oracle::cot(2.5L))).epsilon(1e-12));
    CHECK(cot_via_theta(0.0, 0.1).cot_theta == Approx(1e7));
  }
  SUBCASE("singular target") {
    CHECK_THROWS_AS(cot_via_theta(std::numbers::pi - 0.05, 0.05), SingularityError);
    CHECK_THROWS_AS(cot_via_theta(0.0, 0.0), SingularityError);
  }
}

TEST_CASE("cot_via_identity") {
  const CotPair right = cot_via_identity(0.0, 0.0);
  CHECK(std::abs(right.cot_theta) < 1e-15);
  CHECK(std::abs(right.cot_theta_m) < 1e-15);
  CHECK(cot_via_identity(std::cos(0.2), 0.05).cot_theta_m == Approx(static_cast<double>(oracle::cot(0.25L))).epsilon(1e-10));
  CHECK(cot_via_identity(std::cos(0.2), 0.05).cot_theta_m == Approx(3.916).epsilon(1e-3));
  CHECK(cot_via_identity(0.995, 0.05).cot_theta_m == Approx(static_cast<double>(oracle::cot(std::acos(0.995L) + 0.05L))).epsilon(1e-9));
  CHECK(cot_via_identity(0.995, 0.05).cot_theta_m == Approx(6.6148).epsilon(1e-4));
  CHECK_THROWS_AS(cot_via_identity(1.5, 0.0), InputError);
  CHECK_THROWS_AS(cot_via_identity(std::cos(std::numbers::pi - 0.05), 0.05), SingularityError);
}

TEST_CASE("cot paths agree on a grid") {
  for (double m : {0.0, 0.05, 0.5}) {
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double theta = 0.01 + (std::numbers::pi - 0.07) * k / 1999.0;
      const CotPair a = cot_via_theta(theta, m);
      const CotPair b = cot_via_identity(std::cos(theta), m);
      worst = std::max({worst, std::abs(a.cot_theta - b.cot_theta), std::abs(a.cot_theta_m - b.cot_theta_m)});
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("cot shape properties") {
  double prev = INFINITY;
  for (int k = 1; k < 1000; ++k) {
    const double theta = std::numbers::pi * k / 1000.0;
    const double c = cot_via_theta(theta, 0.0).cot_theta;
    CHECK(c < prev);
    prev = c;
    if (theta >= std::numbers::pi / 4 && theta <= 3 * std::numbers::pi / 4) CHECK(std::abs(c - std::cos(theta)) <= 0.30);
    if (theta <= 0.2) CHECK(c >= 4.0 * std::cos(theta));
  }
}

TEST_CASE("cot_other and cot_shifted slopes") {
  for (CotPath path : {CotPath::angle, CotPath::identity}) {
    for (double theta : {0.3, 1.0, 2.0, 2.8}) {
      const double h = 1e-6;
      const CotValue v = cot_other(path, theta, 1e-7);
      const double fd = (cot_other(path, theta + h, 1e-7).value - cot_other(path, theta - h, 1e-7).value) / (2 * h);
      CHECK(v.slope == Approx(fd).epsilon(1e-6));
      const CotValue s = cot_shifted(path, theta, 0.2, 1e-7);
      const double fds = (cot_shifted(path, theta + h, 0.2, 1e-7).value - cot_shifted(path, theta - h, 0.2, 1e-7).value) / (2 * h);
      CHECK(s.slope == Approx(fds).epsilon(1e-6));
    }
  }
  CHECK_NOTHROW(cot_other(CotPath::angle, 0.0, 1e-7));
  CHECK_NOTHROW(cot_other(CotPath::identity, 0.0, 1e-7));
}

TEST_CASE("elastic_sample") {
  Rng a(7);
  CHECK(elastic_sample(0.5, 0.0, a) == 0.5);

  Rng r1(42);
  Rng r2(42);
  CHECK(elastic_sample(0.5, 0.05, r1) == elastic_sample(0.5, 0.05, r2));

  SUBCASE("stream position does not depend on sigma") {
    Rng s1(3);
    Rng s2(3);
    elastic_sample(0.5, 0.0, s1);
    elastic_sample(0.5, 0.3, s2);
    CHECK(s1() == s2());
  }
  SUBCASE("law of large numbers") {
    Rng rng(11);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double v = elastic_sample(0.5, 0.1, rng);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - 0.5) < 0.002);
    CHECK(std::sqrt(sq / n - mean * mean) == Approx(0.1).epsilon(0.02));
  }
}

TEST_CASE("config and batch validation") {
  LossConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.eps = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.s = -1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.sigma2 = -0.1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.alpha = 0;
  cfg.beta = 0;
  CHECK_THROWS_AS(cfg.validate_dual(), InputError);

  AngularBatch b{Eigen::MatrixXd::Constant(2, 3, 1.0), {0, 3}};
  CHECK_THROWS_AS(b.validate(), InputError);
  b.labels = {0, 2};
  CHECK_NOTHROW(b.validate());
  b.theta(1, 1) = std::numbers::pi;
  CHECK_THROWS_AS(b.validate(), InputError);
}
