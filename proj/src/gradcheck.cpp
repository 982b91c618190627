#include "lmcot/gradcheck.hpp"

#include <functional>
#include <limits>
#include <sstream>

#include "lmcot/errors.hpp"
#include "lmcot/losses.hpp"

namespace lmcot {

namespace {

/// A scalar function of a matrix input with its analytic gradient.
struct Probe {
  Eigen::MatrixXd point;
  std::function<double(const Eigen::MatrixXd&)> value;
  Eigen::MatrixXd analytic;
  std::string description;
};

Eigen::MatrixXd central_difference(const Probe& probe, double h) {
  Eigen::MatrixXd numeric(probe.point.rows(), probe.point.cols());
  Eigen::MatrixXd x = probe.point;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double saved = x(i, j);
      x(i, j) = saved + h;
      const double up = probe.value(x);
      x(i, j) = saved - h;
      const double down = probe.value(x);
      x(i, j) = saved;
      numeric(i, j) = (up - down) / (2.0 * h);
    }
  return numeric;
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::vector<int> random_labels(Rng& rng, int rows, int classes) {
  std::vector<int> labels(static_cast<std::size_t>(rows));
  for (auto& y : labels) y = uniform_int(rng, 0, classes - 1);
  return labels;
}

LossConfig random_config(Rng& rng, AngularLoss kind) {
  LossConfig cfg;
  cfg.s = uniform(rng, 0.5, 4.0);
  cfg.m = kind == AngularLoss::sphereface ? uniform(rng, 1.0, 1.4) : uniform(rng, 0.0, 0.4);
  cfg.m1 = uniform(rng, 0.9, 1.15);
  cfg.m2 = uniform(rng, 0.0, 0.3);
  cfg.m3 = uniform(rng, 0.0, 0.3);
  cfg.sigma1 = uniform(rng, 0.0, 0.05);
  cfg.sigma2 = uniform(rng, 0.0, 0.05);
  cfg.sigma3 = uniform(rng, 0.0, 0.05);
  cfg.alpha = uniform(rng, 0.0, 1.0);
  cfg.beta = uniform(rng, 0.05, 1.0);
  cfg.log_base = uniform_int(rng, 0, 1) == 0 ? LogBase::natural : LogBase::ten;
  cfg.cot_path = uniform_int(rng, 0, 1) == 0 ? CotPath::angle : CotPath::identity;
  return cfg;
}

std::string describe(const LossConfig& c, Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream out;
  out.precision(6);
  out << "N=" << rows << " n=" << cols << " s=" << c.s << " m=" << c.m << " m1=" << c.m1
      << " m2=" << c.m2 << " m3=" << c.m3 << " sigma=(" << c.sigma1 << "," << c.sigma2 << ","
      << c.sigma3 << ") alpha=" << c.alpha << " beta=" << c.beta
      << " log_base=" << (c.log_base == LogBase::ten ? "ten" : "natural")
      << " cot_path=" << (c.cot_path == CotPath::identity ? "identity" : "angle");
  return out.str();
}

Probe angular_probe(AngularLoss kind, Rng& rng) {
  const int rows = uniform_int(rng, 1, 4);
  const int cols = uniform_int(rng, 2, 5);
  // Angles in [0.2, 2.2] keep m1 theta + m2 well inside (0, pi) for the
  // margin ranges drawn above.
  Eigen::MatrixXd theta(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) theta(i, j) = uniform(rng, 0.2, 2.2);
  const std::vector<int> labels = random_labels(rng, rows, cols);
  const LossConfig cfg = random_config(rng, kind);
  const std::uint64_t margin_seed = rng();

  auto value = [kind, labels, cfg, margin_seed](const Eigen::MatrixXd& x) {
    Rng margins(margin_seed);
    return angular_loss(kind, {x, labels}, cfg, margins).value;
  };
  Rng margins(margin_seed);
  Eigen::MatrixXd analytic = angular_loss(kind, {theta, labels}, cfg, margins).grad;
  return {theta, value, std::move(analytic), describe(cfg, rows, cols)};
}

Probe softmax_probe(Rng& rng) {
  const int rows = uniform_int(rng, 1, 4);
  const int cols = uniform_int(rng, 2, 5);
  Eigen::MatrixXd logits(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) logits(i, j) = uniform(rng, -3.0, 3.0);
  const std::vector<int> labels = random_labels(rng, rows, cols);
  const LogBase base = uniform_int(rng, 0, 1) == 0 ? LogBase::natural : LogBase::ten;
  auto value = [labels, base](const Eigen::MatrixXd& x) { return softmax_loss(x, labels, base).value; };
  Eigen::MatrixXd analytic = softmax_loss(logits, labels, base).grad;
  std::ostringstream desc;
  desc << "N=" << rows << " n=" << cols;
  return {logits, value, std::move(analytic), desc.str()};
}

Probe margin_ce_probe(Rng& rng) {
  const int rows = uniform_int(rng, 1, 6);
  Eigen::MatrixXd scores(rows, 1);
  for (Eigen::Index i = 0; i < rows; ++i) scores(i, 0) = uniform(rng, -4.0, 4.0);
  const std::vector<int> labels = random_labels(rng, rows, 2);
  const double m = uniform(rng, 0.0, 2.0);
  auto value = [labels, m](const Eigen::MatrixXd& x) {
    return margin_sigmoid_ce(x.col(0), labels, m).value;
  };
  Eigen::MatrixXd analytic = margin_sigmoid_ce(scores.col(0), labels, m).grad;
  std::ostringstream desc;
  desc << "N=" << rows << " m=" << m;
  return {scores, value, std::move(analytic), desc.str()};
}

Probe double_probe(Rng& rng) {
  const int n_low = uniform_int(rng, 1, 5);
  const int n_high = uniform_int(rng, 1, 5);
  // One column holding the low scores followed by the high scores.
  Eigen::MatrixXd scores(n_low + n_high, 1);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) scores(i, 0) = uniform(rng, 0.0, 1.0);
  auto split = [n_low, n_high](const Eigen::MatrixXd& x) {
    return ScorePair{x.col(0).head(n_low), x.col(0).tail(n_high)};
  };
  auto value = [split](const Eigen::MatrixXd& x) { return double_loss(split(x)).value; };
  const DoubleLossOutput out = double_loss(split(scores));
  Eigen::MatrixXd analytic(n_low + n_high, 1);
  analytic.col(0) << out.grad_low, out.grad_high;
  std::ostringstream desc;
  desc << "low=" << n_low << " high=" << n_high;
  return {scores, value, std::move(analytic), desc.str()};
}

}  // namespace

double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  if (!analytic.allFinite() || !numeric.allFinite()) return std::numeric_limits<double>::infinity();
  const double scale = std::max(analytic.norm(), numeric.norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).norm() / scale;
}

GradcheckReport gradcheck(std::string_view loss, int trials, double h, std::uint64_t seed) {
  if (trials < 1) throw InputError("gradcheck needs at least one trial");
  if (!(h > 0.0)) throw InputError("finite-difference step must be > 0");

  std::function<Probe(Rng&)> make_probe;
  if (loss == "softmax") {
    make_probe = softmax_probe;
  } else if (loss == "margin-ce") {
    make_probe = margin_ce_probe;
  } else if (loss == "double") {
    make_probe = double_probe;
  } else {
    const AngularLoss kind = parse_angular_loss(loss);
    make_probe = [kind](Rng& rng) { return angular_probe(kind, rng); };
  }

  GradcheckReport report;
  report.loss = std::string(loss);
  report.trials = trials;
  report.h = h;
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Probe probe = make_probe(rng);
    double err = 0.0;
    std::string note;
    try {
      err = relative_error(probe.analytic, central_difference(probe, h));
    } catch (const Error& e) {
      // A step that leaves the loss domain cannot confirm the gradient.
      err = std::numeric_limits<double>::infinity();
      note = std::string(" (difference step failed: ") + e.what() + ")";
    }
    if (report.worst_trial < 0 || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_trial = t;
      report.worst_config = probe.description + note;
    }
  }
  return report;
}

std::vector<std::string> gradcheck_targets() {
  std::vector<std::string> names{"softmax", "double", "margin-ce"};
  for (auto kind : all_angular_losses()) names.emplace_back(to_string(kind));
  return names;
}

}  // namespace lmcot
