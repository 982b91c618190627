#include "lmcot/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "lmcot/errors.hpp"
#include "lmcot/metrics.hpp"

namespace lmcot {

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Eigen::MatrixXd out(rows, cols);
  // Row-major fill order so the stream layout does not depend on Eigen storage.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
  return out;
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& pre, Activation act) {
  if (act == Activation::identity) return pre;
  return pre.cwiseMax(0.0);
}

void require_finite(double value, const char* what, int step) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at step " << step;
    throw TrainingError(msg.str());
  }
}

void require_finite(const Gradients& g, int step) {
  bool ok = g.head.allFinite();
  for (const auto& w : g.weight) ok = ok && w.allFinite();
  for (const auto& b : g.bias) ok = ok && b.allFinite();
  if (!ok) require_finite(std::nan(""), "gradient", step);
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), source.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& source, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(source[i]);
  return out;
}

std::vector<std::size_t> draw_indices(const std::vector<std::size_t>& pool, int count, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(count));
  for (auto& i : out) i = pool[pick(rng)];
  return out;
}

struct Split {
  Dataset train;
  Dataset held_out;
};

Split alternate_split(const Dataset& all) {
  std::vector<std::size_t> even;
  std::vector<std::size_t> odd;
  std::vector<int> seen_per_label;
  for (std::size_t i = 0; i < all.labels.size(); ++i) {
    const auto label = static_cast<std::size_t>(all.labels[i]);
    if (label >= seen_per_label.size()) seen_per_label.resize(label + 1, 0);
    (seen_per_label[label]++ % 2 == 0 ? even : odd).push_back(i);
  }
  return {{gather_rows(all.features, even), gather_labels(all.labels, even)},
          {gather_rows(all.features, odd), gather_labels(all.labels, odd)}};
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

double binary_auc(const MlpModel& model, const Dataset& data) {
  const Eigen::VectorXd scores = sigmoid(Eigen::VectorXd(trunk_forward(model, data.features).output.col(0)));
  ScoredPairs pairs;
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    (data.labels[i] == 1 ? pairs.genuine : pairs.impostor)
        .push_back(scores[static_cast<Eigen::Index>(i)]);
  return auc(pairs);
}

double angular_dataset_loss(const MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
  Rng eval_rng(cfg.seed);
  const ForwardPass pass = forward(model, data.features, cfg.loss_cfg.eps);
  return angular_loss(cfg.loss, {pass.angles, data.labels}, cfg.loss_cfg, eval_rng).value;
}

double binary_dataset_loss(const MlpModel& model, const Dataset& data, const TrainConfig& cfg) {
  const Eigen::VectorXd raw = trunk_forward(model, data.features).output.col(0);
  double total = margin_sigmoid_ce(raw, data.labels, cfg.loss_cfg.m).value;
  if (cfg.regime == TrainRegime::margin_ce_double) {
    ScorePair pair;
    std::vector<double> low;
    std::vector<double> high;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
      (data.labels[i] == 1 ? high : low).push_back(sigmoid(raw[static_cast<Eigen::Index>(i)]));
    pair.low_scores = Eigen::Map<Eigen::VectorXd>(low.data(), static_cast<Eigen::Index>(low.size()));
    pair.high_scores =
        Eigen::Map<Eigen::VectorXd>(high.data(), static_cast<Eigen::Index>(high.size()));
    total += double_loss(pair).value;
  }
  return total;
}

/// One optimization step of the binary regimes on the four-input batch:
/// mixed inputs with their labels, a label-0 batch and a label-1 batch.
double binary_step(MlpModel& model, const Dataset& train, const std::vector<std::size_t>& all_idx,
                   const std::vector<std::size_t>& low_idx,
                   const std::vector<std::size_t>& high_idx, const TrainConfig& cfg, Rng& rng,
                   int step) {
  const auto mixed = draw_indices(all_idx, cfg.batch_size, rng);
  const int half = std::max(1, cfg.batch_size / 2);
  const auto low = draw_indices(low_idx, half, rng);
  const auto high = draw_indices(high_idx, half, rng);

  const Eigen::MatrixXd mixed_x = gather_rows(train.features, mixed);
  const TrunkPass mixed_pass = trunk_forward(model, mixed_x);
  const LossOutput ce =
      margin_sigmoid_ce(mixed_pass.output.col(0), gather_labels(train.labels, mixed), cfg.loss_cfg.m);
  double total = ce.value;
  Gradients grads = trunk_backward(model, mixed_pass, ce.grad);

  if (cfg.regime == TrainRegime::margin_ce_double) {
    const TrunkPass low_pass = trunk_forward(model, gather_rows(train.features, low));
    const TrunkPass high_pass = trunk_forward(model, gather_rows(train.features, high));
    const Eigen::VectorXd low_scores = sigmoid(Eigen::VectorXd(low_pass.output.col(0)));
    const Eigen::VectorXd high_scores = sigmoid(Eigen::VectorXd(high_pass.output.col(0)));
    const DoubleLossOutput dbl = double_loss({low_scores, high_scores});
    total += dbl.value;
    const Eigen::VectorXd d_low =
        dbl.grad_low.array() * low_scores.array() * (1.0 - low_scores.array());
    const Eigen::VectorXd d_high =
        dbl.grad_high.array() * high_scores.array() * (1.0 - high_scores.array());
    accumulate(grads, trunk_backward(model, low_pass, d_low));
    accumulate(grads, trunk_backward(model, high_pass, d_high));
  }
  require_finite(total, "loss", step);
  require_finite(grads, step);
  model = sgd_step(std::move(model), grads, cfg.lr);
  return total;
}

double angular_step(MlpModel& model, const Dataset& train, const std::vector<std::size_t>& all_idx,
                    const TrainConfig& cfg, Rng& rng, int step) {
  const auto batch_idx = draw_indices(all_idx, cfg.batch_size, rng);
  const ForwardPass pass = forward(model, gather_rows(train.features, batch_idx), cfg.loss_cfg.eps);
  const LossOutput loss =
      angular_loss(cfg.loss, {pass.angles, gather_labels(train.labels, batch_idx)}, cfg.loss_cfg, rng);
  require_finite(loss.value, "loss", step);
  const Gradients grads = backward(model, pass, loss.grad);
  require_finite(grads, step);
  model = sgd_step(std::move(model), grads, cfg.lr);
  return loss.value;
}

}  // namespace

MlpModel make_mlp(const MlpShape& shape, std::uint64_t seed) {
  if (shape.input_dim < 1 || shape.embed_dim < 1 || shape.classes < 0)
    throw InputError("invalid network shape");
  Rng rng(seed);
  MlpModel model;
  model.seed = seed;
  Eigen::Index fan_in = shape.input_dim;
  for (Eigen::Index width : shape.hidden) {
    if (width < 1) throw InputError("hidden width must be >= 1");
    model.layers.push_back({gaussian_matrix(width, fan_in, std::sqrt(2.0 / static_cast<double>(fan_in)), rng),
                            Eigen::VectorXd::Zero(width), Activation::relu});
    fan_in = width;
  }
  model.layers.push_back(
      {gaussian_matrix(shape.embed_dim, fan_in, std::sqrt(1.0 / static_cast<double>(fan_in)), rng),
       Eigen::VectorXd::Zero(shape.embed_dim), Activation::identity});
  if (shape.classes > 0)
    model.head = normalize_rows(gaussian_matrix(shape.classes, shape.embed_dim, 1.0, rng));
  return model;
}

TrunkPass trunk_forward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != model.input_dim())
    throw InputError("input dimension " + std::to_string(inputs.cols()) + " does not match model input " +
                     std::to_string(model.input_dim()));
  TrunkPass pass;
  Eigen::MatrixXd current = inputs;
  for (const auto& layer : model.layers) {
    Eigen::MatrixXd pre = current * layer.weight.transpose();
    pre.rowwise() += layer.bias.transpose();
    pass.inputs.push_back(std::move(current));
    current = activate(pre, layer.act);
    pass.pre.push_back(std::move(pre));
  }
  pass.output = std::move(current);
  return pass;
}

Gradients trunk_backward(const MlpModel& model, const TrunkPass& pass,
                         const Eigen::MatrixXd& grad_output) {
  const std::size_t depth = model.layers.size();
  Gradients g;
  g.weight.resize(depth);
  g.bias.resize(depth);
  g.head = Eigen::MatrixXd::Zero(model.head.rows(), model.head.cols());
  Eigen::MatrixXd upstream = grad_output;
  for (std::size_t l = depth; l-- > 0;) {
    const Dense& layer = model.layers[l];
    Eigen::MatrixXd grad_pre = upstream;
    if (layer.act == Activation::relu)
      grad_pre = grad_pre.cwiseProduct((pass.pre[l].array() > 0.0).cast<double>().matrix());
    g.weight[l] = grad_pre.transpose() * pass.inputs[l];
    g.bias[l] = grad_pre.colwise().sum().transpose();
    if (l > 0) upstream = grad_pre * layer.weight;
  }
  return g;
}

ForwardPass forward(const MlpModel& model, const Eigen::MatrixXd& inputs, double eps) {
  if (model.head.rows() == 0) throw InputError("model has no class head");
  ForwardPass pass;
  pass.eps = eps;
  pass.trunk = trunk_forward(model, inputs);
  pass.embed_norms = pass.trunk.output.rowwise().norm();
  if ((pass.embed_norms.array() < eps).any()) throw ZeroVectorError("embedding norm below eps");
  pass.embeddings = pass.trunk.output.array().colwise() / pass.embed_norms.array();
  pass.head_norms = model.head.rowwise().norm();
  if ((pass.head_norms.array() < eps).any()) throw ZeroVectorError("class weight norm below eps");
  pass.unit_head = model.head.array().colwise() / pass.head_norms.array();
  pass.cosines = (pass.embeddings * pass.unit_head.transpose())
                     .unaryExpr([eps](double c) { return std::clamp(c, -1.0 + eps, 1.0 - eps); });
  pass.angles = pass.cosines.array().acos();
  return pass;
}

Gradients backward(const MlpModel& model, const ForwardPass& pass,
                   const Eigen::MatrixXd& grad_angles) {
  if (grad_angles.rows() != pass.angles.rows() || grad_angles.cols() != pass.angles.cols())
    throw InputError("angle gradient shape mismatch");
  const Eigen::MatrixXd grad_cos =
      grad_angles.array() * (-1.0 / (1.0 - pass.cosines.array().square()).sqrt());
  const Eigen::MatrixXd grad_unit_embed = grad_cos * pass.unit_head;
  const Eigen::MatrixXd grad_unit_head = grad_cos.transpose() * pass.embeddings;

  // d(v / |v|) applied to g: (g - u (u . g)) / |v|
  const Eigen::VectorXd embed_proj = (grad_unit_embed.cwiseProduct(pass.embeddings)).rowwise().sum();
  const Eigen::MatrixXd grad_raw =
      ((grad_unit_embed - pass.embeddings.cwiseProduct(embed_proj.replicate(1, pass.embeddings.cols())))
           .array()
           .colwise() /
       pass.embed_norms.array())
          .matrix();
  const Eigen::VectorXd head_proj = (grad_unit_head.cwiseProduct(pass.unit_head)).rowwise().sum();

  Gradients g = trunk_backward(model, pass.trunk, grad_raw);
  g.head = ((grad_unit_head - pass.unit_head.cwiseProduct(head_proj.replicate(1, pass.unit_head.cols())))
                .array()
                .colwise() /
            pass.head_norms.array())
               .matrix();
  return g;
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  for (const auto& layer : model.layers) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  g.head = Eigen::MatrixXd::Zero(model.head.rows(), model.head.cols());
  return g;
}

void accumulate(Gradients& into, const Gradients& from) {
  for (std::size_t l = 0; l < into.weight.size(); ++l) {
    into.weight[l] += from.weight[l];
    into.bias[l] += from.bias[l];
  }
  into.head += from.head;
}

MlpModel sgd_step(MlpModel model, const Gradients& grads, double lr) {
  if (grads.weight.size() != model.layers.size()) throw InputError("gradient depth mismatch");
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].weight -= lr * grads.weight[l];
    model.layers[l].bias -= lr * grads.bias[l];
  }
  if (model.head.size() > 0) {
    model.head -= lr * grads.head;
    model.head = normalize_rows(model.head);
  }
  return model;
}

void SynthSpec::validate() const {
  if (dim < 1) throw InputError("dim must be >= 1");
  if (per_class < 2) throw InputError("per_class must be >= 2");
  if (!(intra_spread >= 0.0)) throw InputError("intra_spread must be >= 0");
  if (task == SynthTask::embedding && n_classes < 2) throw InputError("need at least 2 classes");
}

Dataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::vector<Eigen::MatrixXd> prototypes_per_label;
  switch (spec.task) {
    case SynthTask::embedding:
      for (int c = 0; c < spec.n_classes; ++c)
        prototypes_per_label.push_back(normalize_rows(gaussian_matrix(1, spec.dim, 1.0, rng)));
      break;
    case SynthTask::binary_live_spoof:
      prototypes_per_label.push_back(normalize_rows(gaussian_matrix(1, spec.dim, 1.0, rng)));
      prototypes_per_label.push_back(normalize_rows(gaussian_matrix(2, spec.dim, 1.0, rng)));
      break;
    case SynthTask::binary_eye_state:
      prototypes_per_label.push_back(normalize_rows(gaussian_matrix(1, spec.dim, 1.0, rng)));
      prototypes_per_label.push_back(normalize_rows(gaussian_matrix(1, spec.dim, 1.0, rng)));
      break;
  }

  const auto labels_count = static_cast<int>(prototypes_per_label.size());
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(labels_count) * spec.per_class, spec.dim);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::Index row = 0;
  for (int label = 0; label < labels_count; ++label) {
    const Eigen::MatrixXd& protos = prototypes_per_label[static_cast<std::size_t>(label)];
    for (int k = 0; k < spec.per_class; ++k, ++row) {
      // Multi-prototype labels alternate between their modes.
      const Eigen::Index mode = k % protos.rows();
      for (Eigen::Index d = 0; d < spec.dim; ++d)
        out.features(row, d) = protos(mode, d) + spec.intra_spread * noise(rng);
      out.labels.push_back(label);
    }
  }
  return out;
}

void TrainConfig::validate() const {
  data.validate();
  loss_cfg.validate();
  if (steps < 1) throw InputError("steps must be >= 1");
  if (!(lr >= 0.0)) throw InputError("learning rate must be >= 0");
  if (batch_size < 1) throw InputError("batch size must be >= 1");
  if (embed_dim < 1) throw InputError("embedding dimension must be >= 1");
  const bool binary = data.task != SynthTask::embedding;
  if (binary != (regime != TrainRegime::angular))
    throw InputError("binary tasks need a binary regime and the embedding task an angular one");
  if (loss == AngularLoss::dual_cot_cos) loss_cfg.validate_dual();
}

double embedding_eer(const Eigen::MatrixXd& unit_embeddings, const std::vector<int>& labels) {
  const Eigen::MatrixXd sims = unit_embeddings * unit_embeddings.transpose();
  ScoredPairs pairs;
  for (Eigen::Index i = 0; i < sims.rows(); ++i)
    for (Eigen::Index j = i + 1; j < sims.cols(); ++j)
      (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? pairs.genuine
                                                                                   : pairs.impostor)
          .push_back(sims(i, j));
  return eer(pairs).eer;
}

TrainReport train_loop(const TrainConfig& config) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  SynthSpec data_spec = config.data;
  data_spec.per_class *= 2;
  const Split split = alternate_split(synth_dataset(data_spec));
  const bool binary = config.regime != TrainRegime::angular;

  MlpShape shape;
  shape.input_dim = config.data.dim;
  shape.hidden = config.hidden;
  shape.embed_dim = binary ? 1 : config.embed_dim;
  shape.classes = binary ? 0 : config.data.n_classes;

  TrainReport report;
  report.config = config;
  report.model = make_mlp(shape, config.seed);
  report.metric = binary ? "auc" : "eer";

  auto held_out_metric = [&](const MlpModel& model) {
    if (binary) return binary_auc(model, split.held_out);
    return embedding_eer(forward(model, split.held_out.features, config.loss_cfg.eps).embeddings,
                         split.held_out.labels);
  };
  auto train_loss = [&](const MlpModel& model) {
    return binary ? binary_dataset_loss(model, split.train, config)
                  : angular_dataset_loss(model, split.train, config);
  };

  report.metric_initial = held_out_metric(report.model);
  report.train_loss_initial = train_loss(report.model);

  std::vector<std::size_t> all_idx;
  std::vector<std::size_t> low_idx;
  std::vector<std::size_t> high_idx;
  for (std::size_t i = 0; i < split.train.labels.size(); ++i) {
    all_idx.push_back(i);
    (split.train.labels[i] == 1 ? high_idx : low_idx).push_back(i);
  }

  // Stream for minibatch draws and elastic margins; offset from the
  // initialization stream so the two are not correlated.
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  report.loss_curve.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    const auto step_start = Clock::now();
    const double loss = binary ? binary_step(report.model, split.train, all_idx, low_idx, high_idx,
                                             config, rng, step)
                               : angular_step(report.model, split.train, all_idx, config, rng, step);
    report.loss_curve.push_back(loss);
    report.step_ms.push_back(
        std::chrono::duration<double, std::milli>(Clock::now() - step_start).count());
  }

  report.metric_final = held_out_metric(report.model);
  report.train_loss_final = train_loss(report.model);
  report.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return report;
}

std::string format_double(double value) {
  // Shortest representation that parses back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string_view to_string(TrainRegime regime) {
  switch (regime) {
    case TrainRegime::angular: return "angular";
    case TrainRegime::margin_ce: return "margin-ce";
    case TrainRegime::margin_ce_double: return "double+margin-ce";
  }
  return "unknown";
}

std::string_view to_string(SynthTask task) {
  switch (task) {
    case SynthTask::embedding: return "embedding";
    case SynthTask::binary_live_spoof: return "live-spoof";
    case SynthTask::binary_eye_state: return "eye-state";
  }
  return "unknown";
}

SynthTask parse_synth_task(std::string_view name) {
  for (auto task : {SynthTask::embedding, SynthTask::binary_live_spoof, SynthTask::binary_eye_state})
    if (to_string(task) == name) return task;
  throw InputError("unknown task '" + std::string(name) + "'");
}

std::string config_echo(const TrainConfig& c) {
  std::ostringstream out;
  out << "regime=" << to_string(c.regime);
  if (c.regime == TrainRegime::angular) out << " loss=" << to_string(c.loss);
  out << " task=" << to_string(c.data.task) << " classes=" << c.data.n_classes
      << " dim=" << c.data.dim << " per_class=" << c.data.per_class
      << " spread=" << format_double(c.data.intra_spread) << " steps=" << c.steps
      << " lr=" << format_double(c.lr) << " batch=" << c.batch_size << " hidden=";
  for (std::size_t i = 0; i < c.hidden.size(); ++i) out << (i ? "," : "") << c.hidden[i];
  const LossConfig& l = c.loss_cfg;
  out << " embed_dim=" << c.embed_dim << " seed=" << c.seed << " s=" << format_double(l.s)
      << " m=" << format_double(l.m) << " m1=" << format_double(l.m1)
      << " m2=" << format_double(l.m2) << " m3=" << format_double(l.m3)
      << " sigma1=" << format_double(l.sigma1) << " sigma2=" << format_double(l.sigma2)
      << " sigma3=" << format_double(l.sigma3) << " alpha=" << format_double(l.alpha)
      << " beta=" << format_double(l.beta) << " eps=" << format_double(l.eps)
      << " log_base=" << (l.log_base == LogBase::ten ? "ten" : "natural")
      << " cot_path=" << (l.cot_path == CotPath::identity ? "identity" : "angle");
  return out.str();
}

void write_report(std::ostream& out, const TrainReport& report, bool include_timing) {
  out << "# lmcot-train-report v1\n";
  out << "config " << config_echo(report.config) << '\n';
  for (std::size_t i = 0; i < report.loss_curve.size(); ++i) {
    out << "step=" << i << " loss=" << format_double(report.loss_curve[i]);
    if (include_timing) out << " wall_ms=" << format_double(report.step_ms[i]);
    out << '\n';
  }
  out << "final metric=" << report.metric << " initial=" << format_double(report.metric_initial)
      << " final=" << format_double(report.metric_final)
      << " train_loss_initial=" << format_double(report.train_loss_initial)
      << " train_loss_final=" << format_double(report.train_loss_final) << '\n';
  if (include_timing) out << "wall_ms_total=" << format_double(report.wall_ms) << '\n';
}

void save_model(std::ostream& out, const MlpModel& model) {
  auto write_matrix = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        out << (i == 0 && j == 0 ? "" : " ") << format_double(m(i, j));
    out << '\n';
  };
  out << "lmcot-model v1\n";
  out << "seed " << model.seed << '\n';
  out << "layers " << model.layers.size() << '\n';
  for (const auto& layer : model.layers) {
    out << "layer " << layer.weight.rows() << ' ' << layer.weight.cols() << ' '
        << (layer.act == Activation::relu ? "relu" : "identity") << '\n';
    write_matrix(layer.weight);
    write_matrix(layer.bias.transpose());
  }
  out << "head " << model.head.rows() << ' ' << model.head.cols() << '\n';
  if (model.head.size() > 0) write_matrix(model.head);
}

MlpModel load_model(std::istream& in) {
  auto expect = [&in](const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw IoError("model file: expected '" + word + "'");
  };
  auto read_matrix = [&in](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        std::string token;
        if (!(in >> token)) throw IoError("model file: truncated matrix");
        try {
          std::size_t used = 0;
          m(i, j) = std::stod(token, &used);
          if (used != token.size()) throw IoError("model file: bad number '" + token + "'");
        } catch (const std::logic_error&) {
          throw IoError("model file: bad number '" + token + "'");
        }
      }
    return m;
  };

  expect("lmcot-model");
  expect("v1");
  MlpModel model;
  std::size_t depth = 0;
  expect("seed");
  if (!(in >> model.seed)) throw IoError("model file: bad seed");
  expect("layers");
  if (!(in >> depth) || depth == 0 || depth > 64) throw IoError("model file: bad layer count");
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::string act;
    expect("layer");
    if (!(in >> rows >> cols >> act) || rows < 1 || cols < 1 || (act != "relu" && act != "identity"))
      throw IoError("model file: bad layer header");
    if (l > 0 && cols != model.layers.back().weight.rows())
      throw IoError("model file: layer widths do not chain");
    Dense layer;
    layer.weight = read_matrix(rows, cols);
    layer.bias = read_matrix(1, rows).row(0).transpose();
    layer.act = act == "relu" ? Activation::relu : Activation::identity;
    model.layers.push_back(std::move(layer));
  }
  Eigen::Index head_rows = 0;
  Eigen::Index head_cols = 0;
  expect("head");
  if (!(in >> head_rows >> head_cols) || head_rows < 0 ||
      (head_rows > 0 && head_cols != model.embed_dim()))
    throw IoError("model file: bad head header");
  model.head = head_rows > 0 ? read_matrix(head_rows, head_cols) : Eigen::MatrixXd(0, head_cols);
  return model;
}

}  // namespace lmcot
