#pragma once

// A small perceptron embedding network with hand-written backpropagation,
// an l2-normalized class-weight head, plain SGD, synthetic datasets and the
// training loop used for the toy experiments.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmcot/angular.hpp"
#include "lmcot/losses.hpp"

namespace lmcot {

enum class Activation { relu, identity };

/// y = act(x W^T + b); weight is out x in.
struct Dense {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
  Activation act = Activation::relu;
};

/// Perceptron trunk followed by row normalization and a bias-free cosine
/// head. `head` rows are kept unit-norm by sgd_step; forward normalizes them
/// again regardless. Score models (binary tasks) have an empty head and a
/// single trunk output.
struct MlpModel {
  std::vector<Dense> layers;
  Eigen::MatrixXd head;
  std::uint64_t seed = 0;

  Eigen::Index input_dim() const { return layers.front().weight.cols(); }
  Eigen::Index embed_dim() const { return layers.back().weight.rows(); }
  Eigen::Index classes() const { return head.rows(); }
};

struct MlpShape {
  Eigen::Index input_dim = 16;
  std::vector<Eigen::Index> hidden{64, 64};
  Eigen::Index embed_dim = 32;
  /// 0 builds a score model without a head.
  Eigen::Index classes = 10;
};

/// He-initialized relu layers, a linear output layer and unit head rows.
MlpModel make_mlp(const MlpShape& shape, std::uint64_t seed);

/// Activations kept for the backward pass.
struct TrunkPass {
  std::vector<Eigen::MatrixXd> inputs;  ///< input of every layer
  std::vector<Eigen::MatrixXd> pre;     ///< pre-activation of every layer
  Eigen::MatrixXd output;
};

struct ForwardPass {
  TrunkPass trunk;
  Eigen::VectorXd embed_norms;
  Eigen::MatrixXd embeddings;  ///< unit rows, N x embed_dim
  Eigen::VectorXd head_norms;
  Eigen::MatrixXd unit_head;
  Eigen::MatrixXd cosines;  ///< clamped to [-1 + eps, 1 - eps]
  Eigen::MatrixXd angles;   ///< N x classes
  double eps = 1e-7;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd head;
};

TrunkPass trunk_forward(const MlpModel& model, const Eigen::MatrixXd& inputs);
Gradients trunk_backward(const MlpModel& model, const TrunkPass& pass,
                         const Eigen::MatrixXd& grad_output);

ForwardPass forward(const MlpModel& model, const Eigen::MatrixXd& inputs, double eps = 1e-7);

/// Chain rule from dL/dtheta through arccos (with the clamp), both
/// normalizations and the trunk.
Gradients backward(const MlpModel& model, const ForwardPass& pass,
                   const Eigen::MatrixXd& grad_angles);

/// Gradients of the same shape as the model, all zero.
Gradients zero_gradients(const MlpModel& model);
void accumulate(Gradients& into, const Gradients& from);

/// theta <- theta - lr g, then head rows re-normalized.
MlpModel sgd_step(MlpModel model, const Gradients& grads, double lr);

enum class SynthTask { embedding, binary_live_spoof, binary_eye_state };

struct SynthSpec {
  int n_classes = 10;
  int dim = 16;
  int per_class = 50;
  double intra_spread = 0.1;
  std::uint64_t seed = 0;
  SynthTask task = SynthTask::embedding;

  void validate() const;
};

struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
};

/// Embedding task: n_classes unit prototypes drawn uniformly on the sphere,
/// samples = prototype + N(0, spread^2 I). Binary tasks: label 0 around one
/// prototype, label 1 around one (eye state) or two (live/spoof) others.
/// Samples are grouped by class.
Dataset synth_dataset(const SynthSpec& spec);

enum class TrainRegime {
  angular,           ///< embedding task with an angular loss
  margin_ce,         ///< binary task, margin sigmoid cross-entropy only
  margin_ce_double,  ///< binary task, margin sigmoid CE + double loss
};

struct TrainConfig {
  SynthSpec data;
  TrainRegime regime = TrainRegime::angular;
  AngularLoss loss = AngularLoss::lmcot;
  LossConfig loss_cfg;
  int steps = 500;
  double lr = 0.05;
  int batch_size = 32;
  std::vector<Eigen::Index> hidden{64, 64};
  Eigen::Index embed_dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  TrainConfig config;
  std::vector<double> loss_curve;
  std::vector<double> step_ms;
  /// "eer" for the embedding regime, "auc" for the binary regimes.
  std::string metric;
  double metric_initial = 0.0;
  double metric_final = 0.0;
  /// Loss over the whole training split before the first and after the last step.
  double train_loss_initial = 0.0;
  double train_loss_final = 0.0;
  double wall_ms = 0.0;
  MlpModel model;
};

/// Deterministic under config.seed (timings aside). The data split is
/// alternating: even samples of each class train, odd samples are held out.
/// Throws TrainingError on a non-finite loss or gradient.
TrainReport train_loop(const TrainConfig& config);

/// EER of all held-out pairs scored by cosine similarity of embeddings.
double embedding_eer(const Eigen::MatrixXd& unit_embeddings, const std::vector<int>& labels);

std::string config_echo(const TrainConfig& config);
std::string_view to_string(TrainRegime regime);
std::string_view to_string(SynthTask task);
SynthTask parse_synth_task(std::string_view name);

/// Line records: a header, the config echo, one "step=" line per step and a
/// "final" line. Per-step wall times are written only when include_timing
/// is set so that default reports are byte-reproducible.
void write_report(std::ostream& out, const TrainReport& report, bool include_timing);

void save_model(std::ostream& out, const MlpModel& model);
/// Throws IoError on malformed input.
MlpModel load_model(std::istream& in);

/// Decimal text that parses back to the identical double.
std::string format_double(double value);

}  // namespace lmcot
