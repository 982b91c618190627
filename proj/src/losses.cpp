#include "lmcot/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lmcot/errors.hpp"

namespace lmcot {

namespace {

double log_scale(LogBase base) { return base == LogBase::ten ? std::numbers::ln10 : 1.0; }

/// A logit together with its derivative with respect to the angle it came from.
struct Logit {
  double value;
  double slope;
};

double logsumexp(const Eigen::VectorXd& z) {
  const double top = z.maxCoeff();
  return top + std::log((z.array() - top).exp().sum());
}

/// Shared softmax-over-angles evaluation. target(i, theta) and other(theta)
/// return Logit values.
template <class Target, class Other>
LossOutput softmax_over_angles(const AngularBatch& batch, LogBase base, Target&& target,
                               Other&& other) {
  batch.validate();
  const Eigen::Index rows = batch.size();
  const Eigen::Index cols = batch.classes();
  const double lb = log_scale(base);
  const double grad_scale = 1.0 / (static_cast<double>(rows) * lb);

  LossOutput out;
  out.grad.resize(rows, cols);
  out.per_sample.resize(rows);
  Eigen::VectorXd z(cols);
  Eigen::VectorXd slope(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto y = static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Logit l = j == y ? target(i, batch.theta(i, j)) : other(batch.theta(i, j));
      z[j] = l.value;
      slope[j] = l.slope;
    }
    const double lse = logsumexp(z);
    out.per_sample[i] = (lse - z[y]) / lb;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double p = std::exp(z[j] - lse);
      out.grad(i, j) = (p - (j == y ? 1.0 : 0.0)) * grad_scale * slope[j];
    }
  }
  out.value = out.per_sample.sum() / static_cast<double>(rows);
  return out;
}

Logit cos_logit(double s, double theta) { return {s * std::cos(theta), -s * std::sin(theta)}; }

Logit cot_logit(double s, const LossConfig& cfg, double theta) {
  const CotValue c = cot_other(cfg.cot_path, theta, cfg.eps);
  return {s * c.value, s * c.slope};
}

struct Margins {
  double m1;
  double m2;
  double m3;
};

std::vector<Margins> sample_margins(Eigen::Index rows, const LossConfig& cfg, Rng& rng) {
  std::vector<Margins> out(static_cast<std::size_t>(rows));
  for (auto& mg : out) {
    mg.m1 = elastic_sample(cfg.m1, cfg.sigma1, rng);
    mg.m2 = elastic_sample(cfg.m2, cfg.sigma2, rng);
    mg.m3 = elastic_sample(cfg.m3, cfg.sigma3, rng);
  }
  return out;
}

std::vector<double> sample_single_margin(Eigen::Index rows, const LossConfig& cfg, Rng& rng) {
  std::vector<double> out(static_cast<std::size_t>(rows));
  for (auto& m : out) m = elastic_sample(cfg.m, cfg.sigma1, rng);
  return out;
}

Logit arc_target(double s, double theta, double m) {
  return {s * std::cos(theta + m), -s * std::sin(theta + m)};
}

Logit cosface_target(double s, double theta, double m) {
  return {s * (std::cos(theta) - m), -s * std::sin(theta)};
}

Logit lmcot_target(const LossConfig& cfg, double theta, double m) {
  const CotValue c = cot_shifted(cfg.cot_path, theta, m, cfg.eps);
  return {cfg.s * c.value, cfg.s * c.slope};
}

Logit combined_cos_target(double s, double theta, const Margins& mg) {
  const double u = mg.m1 * theta + mg.m2;
  return {s * (std::cos(u) - mg.m3), -s * mg.m1 * std::sin(u)};
}

Logit combined_cot_target(const LossConfig& cfg, double theta, const Margins& mg) {
  const CotValue c = cot_shifted(cfg.cot_path, mg.m1 * theta, mg.m2, cfg.eps);
  return {cfg.s * (c.value - mg.m3), cfg.s * mg.m1 * c.slope};
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

LossOutput softmax_loss(const Eigen::MatrixXd& logits, std::span<const int> labels,
                        LogBase base) {
  const Eigen::Index rows = logits.rows();
  const Eigen::Index cols = logits.cols();
  if (rows == 0 || cols == 0) throw InputError("empty logits");
  if (static_cast<Eigen::Index>(labels.size()) != rows)
    throw InputError("label count does not match batch size");
  if (!logits.allFinite()) throw InputError("non-finite logits");
  const double lb = log_scale(base);

  LossOutput out;
  out.grad.resize(rows, cols);
  out.per_sample.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= cols) throw InputError("label out of range");
    const Eigen::VectorXd z = logits.row(i).transpose();
    const double lse = logsumexp(z);
    out.per_sample[i] = (lse - z[y]) / lb;
    for (Eigen::Index j = 0; j < cols; ++j)
      out.grad(i, j) = (std::exp(z[j] - lse) - (j == y ? 1.0 : 0.0)) /
                       (static_cast<double>(rows) * lb);
  }
  out.value = out.per_sample.sum() / static_cast<double>(rows);
  return out;
}

LossOutput norm_softmax_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const double s = cfg.s;
  return softmax_over_angles(
      batch, cfg.log_base, [s](Eigen::Index, double t) { return cos_logit(s, t); },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput sphereface_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const double s = cfg.s;
  const double m = cfg.m;
  return softmax_over_angles(
      batch, cfg.log_base,
      [s, m](Eigen::Index, double t) {
        return Logit{s * std::cos(m * t), -s * m * std::sin(m * t)};
      },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput cosface_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const double s = cfg.s;
  const double m = cfg.m;
  return softmax_over_angles(
      batch, cfg.log_base, [s, m](Eigen::Index, double t) { return cosface_target(s, t, m); },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput arcface_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const double s = cfg.s;
  const double m = cfg.m;
  return softmax_over_angles(
      batch, cfg.log_base, [s, m](Eigen::Index, double t) { return arc_target(s, t, m); },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput elastic_arc_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng) {
  cfg.validate();
  batch.validate();
  const auto margins = sample_single_margin(batch.size(), cfg, rng);
  const double s = cfg.s;
  return softmax_over_angles(
      batch, cfg.log_base,
      [&](Eigen::Index i, double t) { return arc_target(s, t, margins[static_cast<std::size_t>(i)]); },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput elastic_cos_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng) {
  cfg.validate();
  batch.validate();
  const auto margins = sample_single_margin(batch.size(), cfg, rng);
  const double s = cfg.s;
  return softmax_over_angles(
      batch, cfg.log_base,
      [&](Eigen::Index i, double t) {
        return cosface_target(s, t, margins[static_cast<std::size_t>(i)]);
      },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput lmcot_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  return softmax_over_angles(
      batch, cfg.log_base, [&](Eigen::Index, double t) { return lmcot_target(cfg, t, cfg.m); },
      [&](double t) { return cot_logit(cfg.s, cfg, t); });
}

LossOutput combined_margin_cos_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const Margins mg{cfg.m1, cfg.m2, cfg.m3};
  const double s = cfg.s;
  return softmax_over_angles(
      batch, cfg.log_base,
      [s, mg](Eigen::Index, double t) { return combined_cos_target(s, t, mg); },
      [s](double t) { return cos_logit(s, t); });
}

LossOutput combined_margin_cot_loss(const AngularBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  const Margins mg{cfg.m1, cfg.m2, cfg.m3};
  return softmax_over_angles(
      batch, cfg.log_base,
      [&](Eigen::Index, double t) { return combined_cot_target(cfg, t, mg); },
      [&](double t) { return cot_logit(cfg.s, cfg, t); });
}

LossOutput elastic_cot_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng) {
  cfg.validate();
  batch.validate();
  const auto margins = sample_single_margin(batch.size(), cfg, rng);
  return softmax_over_angles(
      batch, cfg.log_base,
      [&](Eigen::Index i, double t) {
        return lmcot_target(cfg, t, margins[static_cast<std::size_t>(i)]);
      },
      [&](double t) { return cot_logit(cfg.s, cfg, t); });
}

LossOutput generalized_lmcot_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng) {
  cfg.validate();
  batch.validate();
  const auto margins = sample_margins(batch.size(), cfg, rng);
  return softmax_over_angles(
      batch, cfg.log_base,
      [&](Eigen::Index i, double t) {
        return combined_cot_target(cfg, t, margins[static_cast<std::size_t>(i)]);
      },
      [&](double t) { return cot_logit(cfg.s, cfg, t); });
}

LossOutput dual_cot_cos_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng) {
  cfg.validate_dual();
  batch.validate();
  const auto margins = sample_margins(batch.size(), cfg, rng);
  const Eigen::Index rows = batch.size();
  const Eigen::Index cols = batch.classes();
  const double lb = log_scale(cfg.log_base);
  const double grad_scale = 1.0 / (static_cast<double>(rows) * lb);

  LossOutput out;
  out.grad.resize(rows, cols);
  out.per_sample.resize(rows);
  // Column y of each vector holds the branch's target logit; the other
  // columns hold the shared cot logits.
  Eigen::VectorXd z_cot(cols);
  Eigen::VectorXd z_cos(cols);
  Eigen::VectorXd slope(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto y = static_cast<Eigen::Index>(batch.labels[static_cast<std::size_t>(i)]);
    const Margins& mg = margins[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j == y) continue;
      const Logit g = cot_logit(cfg.s, cfg, batch.theta(i, j));
      z_cot[j] = z_cos[j] = g.value;
      slope[j] = g.slope;
    }
    const double t = batch.theta(i, y);
    const Logit f_cot = combined_cot_target(cfg, t, mg);
    const Logit f_cos = combined_cos_target(cfg.s, t, mg);
    z_cot[y] = f_cot.value;
    z_cos[y] = f_cos.value;

    const double lse_cot = logsumexp(z_cot);
    const double lse_cos = logsumexp(z_cos);
    out.per_sample[i] =
        (cfg.alpha * (lse_cot - f_cot.value) + cfg.beta * (lse_cos - f_cos.value)) / lb;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double p_cot = std::exp(z_cot[j] - lse_cot);
      const double p_cos = std::exp(z_cos[j] - lse_cos);
      if (j == y) {
        out.grad(i, j) = (cfg.alpha * (p_cot - 1.0) * f_cot.slope +
                          cfg.beta * (p_cos - 1.0) * f_cos.slope) *
                         grad_scale;
      } else {
        out.grad(i, j) = (cfg.alpha * p_cot + cfg.beta * p_cos) * slope[j] * grad_scale;
      }
    }
  }
  out.value = out.per_sample.sum() / static_cast<double>(rows);
  return out;
}

DoubleLossOutput double_loss(const ScorePair& pair) {
  const auto n_low = pair.low_scores.size();
  const auto n_high = pair.high_scores.size();
  if (n_low == 0 || n_high == 0) throw InputError("double loss needs both score branches");
  if (!pair.low_scores.allFinite() || !pair.high_scores.allFinite())
    throw InputError("non-finite scores");
  DoubleLossOutput out;
  out.value = pair.low_scores.mean() - pair.high_scores.mean() + 1.0;
  out.grad_low = Eigen::VectorXd::Constant(n_low, 1.0 / static_cast<double>(n_low));
  out.grad_high = Eigen::VectorXd::Constant(n_high, -1.0 / static_cast<double>(n_high));
  return out;
}

LossOutput margin_sigmoid_ce(const Eigen::VectorXd& scores, std::span<const int> labels,
                             double m, bool negate_margin) {
  const Eigen::Index rows = scores.size();
  if (rows == 0) throw InputError("empty score vector");
  if (static_cast<Eigen::Index>(labels.size()) != rows)
    throw InputError("label count does not match score count");
  if (!scores.allFinite()) throw InputError("non-finite scores");
  const double margin = negate_margin ? -m : m;

  LossOutput out;
  out.grad.resize(rows, 1);
  out.per_sample.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y != 0 && y != 1) throw InputError("binary labels must be 0 or 1");
    const double z = scores[i] + (y - 0.5) * margin;
    // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
    out.per_sample[i] = y == 1 ? softplus(-z) : softplus(z);
    out.grad(i, 0) = (sigmoid(z) - y) / static_cast<double>(rows);
  }
  out.value = out.per_sample.sum() / static_cast<double>(rows);
  return out;
}

LossOutput angular_loss(AngularLoss kind, const AngularBatch& batch, const LossConfig& cfg,
                        Rng& rng) {
  switch (kind) {
    case AngularLoss::norm_softmax: return norm_softmax_loss(batch, cfg);
    case AngularLoss::sphereface: return sphereface_loss(batch, cfg);
    case AngularLoss::cosface: return cosface_loss(batch, cfg);
    case AngularLoss::arcface: return arcface_loss(batch, cfg);
    case AngularLoss::elastic_arc: return elastic_arc_loss(batch, cfg, rng);
    case AngularLoss::elastic_cos: return elastic_cos_loss(batch, cfg, rng);
    case AngularLoss::lmcot: return lmcot_loss(batch, cfg);
    case AngularLoss::combined_cos: return combined_margin_cos_loss(batch, cfg);
    case AngularLoss::combined_cot: return combined_margin_cot_loss(batch, cfg);
    case AngularLoss::elastic_cot: return elastic_cot_loss(batch, cfg, rng);
    case AngularLoss::generalized_lmcot: return generalized_lmcot_loss(batch, cfg, rng);
    case AngularLoss::dual_cot_cos: return dual_cot_cos_loss(batch, cfg, rng);
  }
  throw InputError("unknown loss kind");
}

bool uses_rng(AngularLoss kind) {
  switch (kind) {
    case AngularLoss::elastic_arc:
    case AngularLoss::elastic_cos:
    case AngularLoss::elastic_cot:
    case AngularLoss::generalized_lmcot:
    case AngularLoss::dual_cot_cos:
      return true;
    default:
      return false;
  }
}

namespace {

struct NamedLoss {
  AngularLoss kind;
  std::string_view name;
};

constexpr std::array<NamedLoss, 12> kLossNames{{
    {AngularLoss::norm_softmax, "norm-softmax"},
    {AngularLoss::sphereface, "sphereface"},
    {AngularLoss::cosface, "cosface"},
    {AngularLoss::arcface, "arcface"},
    {AngularLoss::elastic_arc, "elastic-arc"},
    {AngularLoss::elastic_cos, "elastic-cos"},
    {AngularLoss::lmcot, "lmcot"},
    {AngularLoss::combined_cos, "combined-cos"},
    {AngularLoss::combined_cot, "combined-cot"},
    {AngularLoss::elastic_cot, "elastic-cot"},
    {AngularLoss::generalized_lmcot, "generalized-lmcot"},
    {AngularLoss::dual_cot_cos, "dual-cot-cos"},
}};

}  // namespace

std::string_view to_string(AngularLoss kind) {
  for (const auto& entry : kLossNames)
    if (entry.kind == kind) return entry.name;
  return "unknown";
}

AngularLoss parse_angular_loss(std::string_view name) {
  for (const auto& entry : kLossNames)
    if (entry.name == name) return entry.kind;
  throw InputError("unknown loss '" + std::string(name) + "'");
}

const std::vector<AngularLoss>& all_angular_losses() {
  static const std::vector<AngularLoss> kinds = [] {
    std::vector<AngularLoss> out;
    for (const auto& entry : kLossNames) out.push_back(entry.kind);
    return out;
  }();
  return kinds;
}

}  // namespace lmcot
