#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../oracles.hpp"
#include "lmcot/errors.hpp"
#include "lmcot/losses.hpp"

using namespace lmcot;
using doctest::Approx;
using oracle::Real;

namespace {

AngularBatch rounded_example() {
  AngularBatch b;
  b.theta.resize(2, 2);
  b.theta << 0.1, 1.47, 0.2, 1.37;
  b.labels = {0, 1};
  return b;
}

AngularBatch random_batch(Rng& rng, int rows, int cols, double lo = 0.2, double hi = 2.2) {
  std::uniform_real_distribution<double> u(lo, hi);
  AngularBatch b;
  b.theta.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) b.theta(i, j) = u(rng);
  std::uniform_int_distribution<int> lab(0, cols - 1);
  for (int i = 0; i < rows; ++i) b.labels.push_back(lab(rng));
  return b;
}

LossConfig base_ten(double s, double m) {
  LossConfig c;
  c.s = s;
  c.m = m;
  c.log_base = LogBase::ten;
  return c;
}

bool bit_equal(const LossOutput& a, const LossOutput& b) {
  return a.value == b.value && a.grad == b.grad && a.per_sample == b.per_sample;
}

}  // namespace

TEST_CASE("softmax_loss") {
  Eigen::MatrixXd logits(2, 2);
  logits << 0.995, 0.1, 0.9798, 0.2;
  const std::vector<int> labels{0, 1};
  CHECK(softmax_loss(logits, labels, LogBase::ten).value == Approx(0.3257).epsilon(1e-4));

  Eigen::MatrixXd one(1, 2);
  one << 10, -10;
  const std::vector<int> y0{0};
  CHECK(softmax_loss(one, y0).value == Approx(std::log1p(std::exp(-20.0))).epsilon(1e-9));

  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 7, 2.5);
  const std::vector<int> y3{0, 3, 6};
  CHECK(softmax_loss(flat, y3).value == Approx(std::log(7.0)).epsilon(1e-14));

  SUBCASE("large logits stay finite") {
    Eigen::MatrixXd big(1, 3);
    big << 1000, 999, -1000;
    const LossOutput out = softmax_loss(big, y0);
    CHECK(std::isfinite(out.value));
    CHECK(out.value == Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
  }
}

TEST_CASE("worked-example values in base 10") {
  const AngularBatch b = rounded_example();
  const LossOutput sphere = sphereface_loss(b, base_ten(2, 1.1));
  const LossOutput cos = cosface_loss(b, base_ten(2, 0.05));
  const LossOutput arc = arcface_loss(b, base_ten(2, 0.05));
  const LossOutput cot = lmcot_loss(b, base_ten(2, 0.05));
  CHECK(sphere.value == Approx(0.4638).epsilon(1e-3));
  CHECK(cos.value == Approx(0.4353).epsilon(1e-3));
  CHECK(arc.value == Approx(0.4322).epsilon(1e-3));
  CHECK(cot.value == Approx(2.0765).epsilon(1e-3));
  CHECK(sphere.per_sample(0) / 2 == Approx(0.0336).epsilon(1e-2));
  CHECK(sphere.per_sample(1) / 2 == Approx(0.4302).epsilon(1e-3));
  CHECK(cot.per_sample(0) / 2 < 1e-5);
  CHECK(cot.per_sample(1) / 2 == Approx(2.0765).epsilon(1e-3));

  SUBCASE("separation behaviour against ArcFace") {
    CHECK(cot.per_sample(0) / 2 < 1e-5);
    CHECK(arc.per_sample(0) / 2 > 0.03);
    CHECK(cot.per_sample(1) > 5.0 * arc.per_sample(1));
  }
}

TEST_CASE("angular losses match the direct formula") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const AngularBatch b = random_batch(rng, 3, 4);
    std::uniform_real_distribution<double> u(0.0, 0.3);
    LossConfig c;
    c.s = 1.0 + 3.0 * u(rng);
    c.m = u(rng);
    c.m1 = 0.9 + u(rng);
    c.m2 = u(rng);
    c.m3 = u(rng);
    c.log_base = trial % 2 ? LogBase::ten : LogBase::natural;
    const bool ten = c.log_base == LogBase::ten;
    const Real s = c.s;
    const auto cosg = [s](Real t) { return s * std::cos(t); };
    const auto cotg = [s](Real t) { return s * oracle::cot(t); };
    auto check = [&](const LossOutput& got, const std::function<Real(std::size_t, Real)>& f,
                     const std::function<Real(Real)>& g) {
      const auto ref = oracle::angular_per_sample(b.theta, b.labels, f, g, ten);
      CHECK(got.value == Approx(static_cast<double>(oracle::mean(ref))).epsilon(1e-12));
      for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(got.per_sample(static_cast<Eigen::Index>(i)) == Approx(static_cast<double>(ref[i])).epsilon(1e-12));
    };
    check(norm_softmax_loss(b, c), [&](std::size_t, Real t) { return cosg(t); }, cosg);
    check(sphereface_loss(b, c), [&](std::size_t, Real t) { return s * std::cos(c.m * t); },
          cosg);
    check(cosface_loss(b, c), [&](std::size_t, Real t) { return s * (std::cos(t) - c.m); }, cosg);
    check(arcface_loss(b, c), [&](std::size_t, Real t) { return s * std::cos(t + c.m); }, cosg);
    check(lmcot_loss(b, c), [&](std::size_t, Real t) { return s * oracle::cot(t + c.m); }, cotg);
    check(combined_margin_cos_loss(b, c),
          [&](std::size_t, Real t) { return s * (std::cos(c.m1 * t + c.m2) - c.m3); }, cosg);
    check(combined_margin_cot_loss(b, c),
          [&](std::size_t, Real t) { return s * (oracle::cot(c.m1 * t + c.m2) - c.m3); }, cotg);
  }
}

TEST_CASE("specialization identities are exact") {
  Rng rng(9);
  const AngularBatch b = random_batch(rng, 4, 5);
  LossConfig base;
  base.s = 3.0;
  base.m = 0.2;

  LossConfig c = base;
  c.m1 = 1, c.m2 = 0, c.m3 = 0;
  CHECK(bit_equal(combined_margin_cos_loss(b, c), norm_softmax_loss(b, base)));
  c.m2 = base.m;
  CHECK(bit_equal(combined_margin_cos_loss(b, c), arcface_loss(b, base)));
  c.m2 = 0, c.m3 = base.m;
  CHECK(bit_equal(combined_margin_cos_loss(b, c), cosface_loss(b, base)));
  LossConfig sphere = base;
  sphere.m = 1.2;
  c.m1 = 1.2, c.m3 = 0;
  CHECK(bit_equal(combined_margin_cos_loss(b, c), sphereface_loss(b, sphere)));

  c = base;
  c.m1 = 1, c.m2 = base.m, c.m3 = 0;
  CHECK(bit_equal(combined_margin_cot_loss(b, c), lmcot_loss(b, base)));

  SUBCASE("zero-margin parents") {
    LossConfig z = base;
    z.m = 0;
    CHECK(bit_equal(arcface_loss(b, z), norm_softmax_loss(b, z)));
    CHECK(bit_equal(cosface_loss(b, z), norm_softmax_loss(b, z)));
    z.m = 1;
    CHECK(bit_equal(sphereface_loss(b, z), norm_softmax_loss(b, z)));
  }

  SUBCASE("sigma zero reproduces the parents") {
    LossConfig e = base;
    e.sigma1 = e.sigma2 = e.sigma3 = 0;
    Rng r(1);
    CHECK(bit_equal(elastic_arc_loss(b, e, r), arcface_loss(b, e)));
    CHECK(bit_equal(elastic_cos_loss(b, e, r), cosface_loss(b, e)));
    CHECK(bit_equal(elastic_cot_loss(b, e, r), lmcot_loss(b, e)));
    LossConfig g = e;
    g.m1 = 1.05, g.m2 = 0.1, g.m3 = 0.2;
    CHECK(bit_equal(generalized_lmcot_loss(b, g, r), combined_margin_cot_loss(b, g)));
    g.m1 = 1, g.m2 = e.m, g.m3 = 0;
    CHECK(bit_equal(generalized_lmcot_loss(b, g, r), lmcot_loss(b, e)));
    g.alpha = 1, g.beta = 0;
    g.m1 = 1.05, g.m2 = 0.1, g.m3 = 0.2;
    CHECK(dual_cot_cos_loss(b, g, r).value == combined_margin_cot_loss(b, g).value);
  }
}

TEST_CASE("dual cot+cos loss against the direct formula") {
  Rng rng(21);
  const AngularBatch b = random_batch(rng, 3, 4);
  LossConfig c;
  c.s = 2.5;
  c.m1 = 1.05, c.m2 = 0.1, c.m3 = 0.15;
  c.alpha = 0.7, c.beta = 0.4;
  Rng r(0);
  const LossOutput got = dual_cot_cos_loss(b, c, r);

  Real total = 0;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const auto y = static_cast<Eigen::Index>(b.labels[static_cast<std::size_t>(i)]);
    Real sum_other = 0;
    for (Eigen::Index j = 0; j < b.classes(); ++j)
      if (j != y) sum_other += std::exp(c.s * oracle::cot(static_cast<Real>(b.theta(i, j))));
    const Real t = b.theta(i, y);
    const Real e_cot = std::exp(c.s * (oracle::cot(c.m1 * t + c.m2) - c.m3));
    const Real e_cos = std::exp(c.s * (std::cos(c.m1 * t + c.m2) - c.m3));
    total += -c.alpha * std::log(e_cot / (e_cot + sum_other)) - c.beta * std::log(e_cos / (e_cos + sum_other));
  }
  CHECK(got.value == Approx(static_cast<double>(total / b.size())).epsilon(1e-12));

  SUBCASE("equal weights average the branches") {
    LossConfig half = c;
    half.alpha = half.beta = 0.5;
    LossConfig cot_only = c;
    cot_only.alpha = 1, cot_only.beta = 0;
    LossConfig cos_only = c;
    cos_only.alpha = 0, cos_only.beta = 1;
    Rng r1(0), r2(0), r3(0);
    const double avg = 0.5 * (dual_cot_cos_loss(b, cot_only, r2).value + dual_cot_cos_loss(b, cos_only, r3).value);
    CHECK(dual_cot_cos_loss(b, half, r1).value == Approx(avg).epsilon(1e-14));
  }
}

TEST_CASE("elastic losses: determinism and quadrature mean") {
  AngularBatch b;
  b.theta.resize(1, 3);
  b.theta << 0.6, 1.3, 1.9;
  b.labels = {0};
  LossConfig c;
  c.s = 4.0;
  c.m = 0.3;
  c.sigma1 = 0.1;

  Rng r1(42), r2(42);
  CHECK(elastic_arc_loss(b, c, r1).value == elastic_arc_loss(b, c, r2).value);

  auto at_margin = [&](double m) {
    LossConfig fixed = c;
    fixed.m = m;
    return arcface_loss(b, fixed).value;
  };
  const double expected = oracle::gaussian_expectation(at_margin, c.m, c.sigma1);

  const int n = 10000;
  double sum = 0.0;
  double sq = 0.0;
  for (int seed = 0; seed < n; ++seed) {
    Rng r(static_cast<std::uint64_t>(seed));
    const double v = elastic_arc_loss(b, c, r).value;
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double stderr_ = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - expected) < 3.0 * stderr_);

  SUBCASE("quadrature rule sanity") {
    CHECK(oracle::gaussian_expectation([](double x) { return x * x; }, 1.0, 0.5) == Approx(1.25).epsilon(1e-12));
    CHECK(oracle::gaussian_expectation([](double x) { return std::cos(x); }, 0.0, 1.0) == Approx(std::exp(-0.5)).epsilon(1e-12));
  }
}

TEST_CASE("margin monotonicity") {
  const AngularBatch b = rounded_example();
  double prev_arc = -1, prev_cos = -1, prev_cot = -1;
  for (int k = 0; k <= 50; ++k) {
    LossConfig c;
    c.s = 2;
    c.m = 0.5 * k / 50.0;
    const double arc = arcface_loss(b, c).value;
    const double cos = cosface_loss(b, c).value;
    const double cot = lmcot_loss(b, c).value;
    CHECK(arc >= prev_arc);
    CHECK(cos > prev_cos);
    CHECK(cot >= prev_cot);
    prev_arc = arc, prev_cos = cos, prev_cot = cot;
  }
}

TEST_CASE("structural properties") {
  Rng rng(13);
  const AngularBatch b = random_batch(rng, 3, 4);
  LossConfig c;
  c.m = 0.1;

  SUBCASE("log base conversion") {
    LossConfig ten = c;
    ten.log_base = LogBase::ten;
    Rng r1(1), r2(1);
    for (AngularLoss kind : all_angular_losses()) {
      LossConfig n = c;
      LossConfig t = ten;
      if (kind == AngularLoss::sphereface) n.m = t.m = 1.2;
      CHECK(angular_loss(kind, b, n, r1).value ==
            Approx(std::log(10.0) * angular_loss(kind, b, t, r2).value).epsilon(1e-12));
    }
  }
  SUBCASE("duplicated batch keeps the mean") {
    AngularBatch twice;
    twice.theta.resize(2 * b.size(), b.classes());
    twice.theta << b.theta, b.theta;
    twice.labels = b.labels;
    twice.labels.insert(twice.labels.end(), b.labels.begin(), b.labels.end());
    CHECK(arcface_loss(twice, c).value == Approx(arcface_loss(b, c).value).epsilon(1e-14));
  }
  SUBCASE("scale zero gives log n") {
    LossConfig z = c;
    z.s = 0;
    CHECK(norm_softmax_loss(b, z).value == Approx(std::log(4.0)).epsilon(1e-14));
  }
  SUBCASE("perfect separation") {
    AngularBatch sep{Eigen::MatrixXd::Constant(1, 3, std::numbers::pi / 2), {1}};
    sep.theta(0, 1) = 1e-6;
    LossConfig big = c;
    big.s = 64;
    CHECK(norm_softmax_loss(sep, big).value < 1e-20);
  }
  SUBCASE("lmcot at right angles gives log n") {
    AngularBatch right{Eigen::MatrixXd::Constant(2, 5, std::numbers::pi / 2), {0, 4}};
    LossConfig z = c;
    z.m = 0;
    CHECK(lmcot_loss(right, z).value == Approx(std::log(5.0)).epsilon(1e-12));
  }
  SUBCASE("cot paths agree inside the loss") {
    LossConfig a = c;
    LossConfig i = c;
    i.cot_path = CotPath::identity;
    CHECK(lmcot_loss(b, a).value == Approx(lmcot_loss(b, i).value).epsilon(1e-9));
  }
  SUBCASE("value is the mean of per_sample and gradients are finite") {
    Rng r(2);
    for (AngularLoss kind : all_angular_losses()) {
      LossConfig k = c;
      if (kind == AngularLoss::sphereface) k.m = 1.2;
      const LossOutput out = angular_loss(kind, b, k, r);
      CHECK(out.value == Approx(out.per_sample.mean()).epsilon(1e-14));
      CHECK(out.grad.allFinite());
      CHECK(out.value >= 0.0);
    }
  }
  SUBCASE("invalid batches are rejected") {
    AngularBatch bad = b;
    bad.labels[0] = 7;
    CHECK_THROWS_AS(arcface_loss(bad, c), InputError);
  }
  SUBCASE("singular target is reported") {
    AngularBatch pole{Eigen::MatrixXd::Constant(1, 2, 1.0), {0}};
    pole.theta(0, 0) = std::numbers::pi - 0.1;
    LossConfig k = c;
    k.m = 0.1;
    CHECK_THROWS_AS(lmcot_loss(pole, k), SingularityError);
  }
}

TEST_CASE("double_loss") {
  auto v = [](std::initializer_list<double> xs) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) out(i++) = x;
    return out;
  };
  CHECK(double_loss({v({0}), v({1})}).value == 0.0);
  CHECK(double_loss({v({0.5}), v({0.5})}).value == 1.0);
  const DoubleLossOutput d = double_loss({v({0.2, 0.4}), v({0.7, 0.9})});
  CHECK(d.value == Approx(0.5).epsilon(1e-15));
  CHECK(d.grad_low(0) == 0.5);
  CHECK(d.grad_high(1) == -0.5);
  CHECK_THROWS_AS(double_loss({Eigen::VectorXd(), v({1})}), InputError);

  Rng rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd lo(3), hi(4);
    for (auto& x : lo) x = u(rng);
    for (auto& x : hi) x = u(rng);
    const double val = double_loss({lo, hi}).value;
    CHECK(val >= 0.0);
    CHECK(val <= 2.0);
  }
}

TEST_CASE("margin_sigmoid_ce") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const std::vector<int> one{1};
  const std::vector<int> nil{0};
  CHECK(margin_sigmoid_ce(zero, one, 2.0).value == Approx(std::log1p(std::exp(-1.0))).epsilon(1e-14));
  CHECK(margin_sigmoid_ce(zero, one, 2.0).value == Approx(0.3133).epsilon(1e-3));
  CHECK(margin_sigmoid_ce(zero, nil, 2.0).value == margin_sigmoid_ce(zero, one, 2.0).value);
  CHECK(margin_sigmoid_ce(zero, one, 2.0, true).value == Approx(std::log1p(std::exp(1.0))).epsilon(1e-14));

  Eigen::VectorXd scores(4);
  scores << -3, -0.5, 0.2, 5;
  const std::vector<int> labels{0, 1, 0, 1};
  double bce = 0;
  for (int i = 0; i < 4; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-scores(i)));
    bce += -(labels[static_cast<std::size_t>(i)] ? std::log(p) : std::log(1 - p));
  }
  CHECK(margin_sigmoid_ce(scores, labels, 0.0).value == Approx(bce / 4).epsilon(1e-13));

  Eigen::VectorXd huge(2);
  huge << 800, -800;
  const std::vector<int> wrong{0, 1};
  CHECK(margin_sigmoid_ce(huge, wrong, 0.0).value == Approx(800.0).epsilon(1e-12));
}

TEST_CASE("loss names round-trip") {
  for (AngularLoss kind : all_angular_losses()) CHECK(parse_angular_loss(to_string(kind)) == kind);
  CHECK_THROWS_AS(parse_angular_loss("focal"), InputError);
  CHECK(all_angular_losses().size() == 12);
}
