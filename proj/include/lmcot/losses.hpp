#pragma once

// The angular large-margin loss family (Softmax through the cotangent forms),
// plus the two binary-score losses used for live/spoof training.
//
// Every angular loss evaluates, per sample i with target class y,
//
//   per_sample_i = -log_b( e^{f(theta_yi)} / (e^{f(theta_yi)} + sum_{j != y} e^{g(theta_ji)}) )
//
// and value = mean(per_sample). Gradients are taken with respect to the
// angles; chaining into features and weights is done by the trainer.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lmcot/angular.hpp"

namespace lmcot {

struct LossOutput {
  double value = 0.0;
  /// dL/d(input): angles (N x n) for angular losses, logits for softmax_loss,
  /// raw scores (N x 1) for margin_sigmoid_ce.
  Eigen::MatrixXd grad;
  Eigen::VectorXd per_sample;
};

/// Classifier outputs for the label-0 batch and the label-1 batch.
struct ScorePair {
  Eigen::VectorXd low_scores;
  Eigen::VectorXd high_scores;
};

struct DoubleLossOutput {
  double value = 0.0;
  Eigen::VectorXd grad_low;
  Eigen::VectorXd grad_high;
};

enum class AngularLoss {
  norm_softmax,
  sphereface,
  cosface,
  arcface,
  elastic_arc,
  elastic_cos,
  lmcot,
  combined_cos,
  combined_cot,
  elastic_cot,
  generalized_lmcot,
  dual_cot_cos,
};

/// Plain softmax cross-entropy on raw logits (N x n).
LossOutput softmax_loss(const Eigen::MatrixXd& logits, std::span<const int> labels,
                        LogBase base = LogBase::natural);

LossOutput norm_softmax_loss(const AngularBatch& batch, const LossConfig& cfg);
/// Multiplicative margin: f = s cos(m theta).
LossOutput sphereface_loss(const AngularBatch& batch, const LossConfig& cfg);
/// Additive cosine margin: f = s (cos theta - m).
LossOutput cosface_loss(const AngularBatch& batch, const LossConfig& cfg);
/// Additive angular margin: f = s cos(theta + m).
LossOutput arcface_loss(const AngularBatch& batch, const LossConfig& cfg);

// Elastic variants draw one margin per sample from N(m, sigma1^2).
LossOutput elastic_arc_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng);
LossOutput elastic_cos_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng);

/// Large margin cotangent loss: f = s cot(theta + m), g = s cot theta.
LossOutput lmcot_loss(const AngularBatch& batch, const LossConfig& cfg);

/// f = s (cos(m1 theta + m2) - m3), g = s cos theta.
LossOutput combined_margin_cos_loss(const AngularBatch& batch, const LossConfig& cfg);
/// f = s (cot(m1 theta + m2) - m3), g = s cot theta.
LossOutput combined_margin_cot_loss(const AngularBatch& batch, const LossConfig& cfg);

/// LMCot with the margin drawn per sample from N(m, sigma1^2).
LossOutput elastic_cot_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng);

/// Combined cot margin with three independent elastic margins
/// E(m1, sigma1), E(m2, sigma2), E(m3, sigma3), drawn in that order per sample.
LossOutput generalized_lmcot_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng);

/// alpha * L_cot + beta * L_cos. Both branches use the same sampled margins
/// and the same cot-based non-target sum I = sum_{j != y} e^{s cot theta_j}.
LossOutput dual_cot_cos_loss(const AngularBatch& batch, const LossConfig& cfg, Rng& rng);

/// mean(low) - mean(high) + 1. Throws InputError if either branch is empty.
DoubleLossOutput double_loss(const ScorePair& pair);

/// Binary cross-entropy of sigmoid(score + (label - 0.5) m). With
/// negate_margin the shift is applied with -m, which penalizes the true class
/// instead of easing it.
LossOutput margin_sigmoid_ce(const Eigen::VectorXd& scores, std::span<const int> labels,
                             double m, bool negate_margin = false);

/// Dispatch by kind. rng is only consumed by the elastic kinds.
LossOutput angular_loss(AngularLoss kind, const AngularBatch& batch, const LossConfig& cfg,
                        Rng& rng);

bool uses_rng(AngularLoss kind);
std::string_view to_string(AngularLoss kind);
/// Throws InputError for unknown names.
AngularLoss parse_angular_loss(std::string_view name);
const std::vector<AngularLoss>& all_angular_losses();

}  // namespace lmcot
