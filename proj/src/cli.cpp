#include "lmcot/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "lmcot/errors.hpp"
#include "lmcot/gradcheck.hpp"
#include "lmcot/image.hpp"

namespace lmcot {

namespace fs = std::filesystem;

WorkedExample worked_example() {
  WorkedExample ex;
  ex.features.resize(2, 2);
  ex.features << 0.1, 0.995, 0.2, 0.9798;
  ex.class_weights.resize(2, 2);
  ex.class_weights << 0.0, 1.0, 1.0, 0.0;
  ex.labels = {0, 1};
  ex.rounded.theta.resize(2, 2);
  ex.rounded.theta << 0.1, 1.47, 0.2, 1.37;
  ex.rounded.labels = ex.labels;
  return ex;
}

std::vector<ExampleCheck> check_examples(double tolerance, std::optional<double> margin_override) {
  const WorkedExample ex = worked_example();
  LossConfig cfg;
  cfg.s = 2.0;
  cfg.log_base = LogBase::ten;

  struct Case {
    const char* name;
    double expected;
    std::function<LossOutput(const LossConfig&)> eval;
    double margin;
  };
  const std::vector<Case> cases{
      {"softmax", 0.3257,
       [&](const LossConfig& c) {
         return softmax_loss(ex.features * ex.class_weights.transpose(), ex.labels, c.log_base);
       },
       0.0},
      {"sphereface", 0.4638, [&](const LossConfig& c) { return sphereface_loss(ex.rounded, c); }, 1.1},
      {"cosface", 0.4353, [&](const LossConfig& c) { return cosface_loss(ex.rounded, c); }, 0.05},
      {"arcface", 0.4322, [&](const LossConfig& c) { return arcface_loss(ex.rounded, c); }, 0.05},
      {"lmcot", 2.0765, [&](const LossConfig& c) { return lmcot_loss(ex.rounded, c); }, 0.05},
  };

  std::vector<ExampleCheck> rows;
  for (const Case& c : cases) {
    LossConfig run = cfg;
    run.m = margin_override.value_or(c.margin);
    const LossOutput out = c.eval(run);
    ExampleCheck row{c.name, c.expected, out.value, {}, false};
    for (Eigen::Index i = 0; i < out.per_sample.size(); ++i)
      row.terms.push_back(out.per_sample(i) / static_cast<double>(out.per_sample.size()));
    row.pass = std::abs(out.value - c.expected) <= tolerance;
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::VectorXd toy_embed(const MlpModel& model, const GrayImage& face) {
  const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(model.input_dim()))));
  if (side < 1 || static_cast<Eigen::Index>(side) * side != model.input_dim())
    throw InputError("embedder input dimension must be a perfect square");
  const GrayImage small = resize_bilinear(face, side, side);
  Eigen::MatrixXd row(1, model.input_dim());
  for (Eigen::Index j = 0; j < row.cols(); ++j)
    row(0, j) = small.pixels[static_cast<std::size_t>(j)] / 255.0 - 0.5;
  return trunk_forward(model, row).output.row(0).transpose();
}

MlpModel default_embedder(std::uint64_t seed) {
  MlpShape shape;
  shape.input_dim = 256;
  shape.hidden = {64};
  shape.embed_dim = 32;
  shape.classes = 0;
  return make_mlp(shape, seed);
}

std::vector<DetectionBox> whole_frame_detector(const GrayImage& frame) {
  if (frame.width < 1 || frame.height < 1) return {};
  DetectionBox box;
  box.x2 = frame.width;
  box.y2 = frame.height;
  box.confidence = 1.0;
  box.landmarks = canonical_landmarks(box);
  return {box};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<double> to_number(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size() && std::isfinite(v)) return v;
  } catch (const std::logic_error&) {
  }
  return std::nullopt;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

/// Reads non-blank CSV rows of `width` numeric fields, skipping one
/// non-numeric header row at the top.
std::vector<std::vector<double>> numeric_rows(std::istream& in, std::size_t width, const char* what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto fields = split_csv(line);
    std::vector<double> values;
    for (const auto& f : fields)
      if (auto v = to_number(f)) values.push_back(*v);
    if (fields.size() != width || values.size() != width) {
      if (rows.empty() && line_no == 1) continue;
      throw IoError(std::string(what) + " line " + std::to_string(line_no) + ": expected " +
                    std::to_string(width) + " numeric fields");
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

}  // namespace

ScoredPairs parse_score_file(std::istream& in) {
  ScoredPairs pairs;
  for (const auto& row : numeric_rows(in, 2, "score file")) {
    if (row[0] == 1.0)
      pairs.genuine.push_back(row[1]);
    else if (row[0] == 0.0)
      pairs.impostor.push_back(row[1]);
    else
      throw IoError("score file: labels must be 0 or 1");
  }
  return pairs;
}

RetrievalData parse_ranked_file(std::istream& in) {
  struct Entry {
    double rank;
    bool correct;
    double confidence;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Entry>> by_query;
  std::string line;
  std::size_t line_no = 0;
  bool saw_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto f = split_csv(line);
    const auto rank = f.size() == 4 ? to_number(f[1]) : std::nullopt;
    const auto correct = f.size() == 4 ? to_number(f[2]) : std::nullopt;
    const auto confidence = f.size() == 4 ? to_number(f[3]) : std::nullopt;
    if (!rank || !correct || !confidence || f[0].empty()) {
      if (!saw_row && line_no == 1) continue;
      throw IoError("ranked file line " + std::to_string(line_no) +
                    ": expected query,rank,correct,confidence");
    }
    const double flag = correct.value_or(-1.0);
    if (flag != 0.0 && flag != 1.0) throw IoError("ranked file: correct must be 0 or 1");
    saw_row = true;
    if (!by_query.count(f[0])) order.push_back(f[0]);
    by_query[f[0]].push_back({rank.value_or(0.0), flag == 1.0, confidence.value_or(0.0)});
  }

  RetrievalData data;
  for (const std::string& q : order) {
    auto entries = by_query[q];
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.rank < b.rank; });
    RankedQuery rq;
    for (const Entry& e : entries) {
      rq.relevant.push_back(e.correct);
      if (e.correct) ++rq.num_relevant;
    }
    data.queries.push_back(std::move(rq));
    data.top_predictions.push_back({entries.front().confidence, entries.front().correct});
  }
  return data;
}

namespace {

/// Files written to temporaries and renamed into place only on commit;
/// anything uncommitted is removed on destruction.
class StagedFiles {
 public:
  StagedFiles() = default;
  StagedFiles(const StagedFiles&) = delete;
  StagedFiles& operator=(const StagedFiles&) = delete;
  ~StagedFiles() {
    std::error_code ignored;
    for (const auto& [tmp, final_path] : staged_) fs::remove(tmp, ignored);
  }

  void write(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::path tmp = path;
    tmp += ".tmp";
    staged_.emplace_back(tmp, path);
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
  }

  void commit() {
    for (const auto& [tmp, final_path] : staged_) {
      std::error_code ec;
      fs::rename(tmp, final_path, ec);
      if (ec) throw IoError("cannot move " + tmp.string() + " to " + final_path.string());
    }
    staged_.clear();
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> staged_;
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

enum class Format { text, record };

void add_format_option(CLI::App* cmd, Format& format) {
  const std::map<std::string, Format> names{{"text", Format::text}, {"record", Format::record}};
  cmd->add_option("--format", format, "Output style: text table or key=value records")
      ->transform(CLI::CheckedTransformer(names, CLI::ignore_case));
}

// Loss hyperparameters shared by train and gradcheck-style commands.
struct LossFlags {
  LossConfig cfg;
  std::string log_base = "natural";
  std::string cot_path = "angle";

  void attach(CLI::App* cmd) {
    cmd->add_option("--s", cfg.s, "Scale s")->capture_default_str();
    cmd->add_option("--m", cfg.m, "Margin m")->capture_default_str();
    cmd->add_option("--m1", cfg.m1, "Multiplicative margin m1")->capture_default_str();
    cmd->add_option("--m2", cfg.m2, "Additive angular margin m2")->capture_default_str();
    cmd->add_option("--m3", cfg.m3, "Additive logit margin m3")->capture_default_str();
    cmd->add_option("--sigma1", cfg.sigma1, "Elastic spread of m (or m1)")->capture_default_str();
    cmd->add_option("--sigma2", cfg.sigma2, "Elastic spread of m2")->capture_default_str();
    cmd->add_option("--sigma3", cfg.sigma3, "Elastic spread of m3")->capture_default_str();
    cmd->add_option("--alpha", cfg.alpha, "Weight of the cot branch")->capture_default_str();
    cmd->add_option("--beta", cfg.beta, "Weight of the cos branch")->capture_default_str();
    cmd->add_option("--eps", cfg.eps, "Numerical floor")->capture_default_str();
    cmd->add_option("--log-base", log_base, "natural or ten")
        ->check(CLI::IsMember({"natural", "ten"}))
        ->capture_default_str();
    cmd->add_option("--cot-path", cot_path, "angle or identity")
        ->check(CLI::IsMember({"angle", "identity"}))
        ->capture_default_str();
  }

  LossConfig resolve() const {
    LossConfig out = cfg;
    out.log_base = log_base == "ten" ? LogBase::ten : LogBase::natural;
    out.cot_path = cot_path == "identity" ? CotPath::identity : CotPath::angle;
    out.validate();
    return out;
  }
};

int cmd_check_examples(std::optional<double> margin, Format format, std::ostream& out) {
  const auto rows = check_examples(1e-3, margin);
  bool all = true;
  if (format == Format::text)
    out << std::left << std::setw(12) << "loss" << std::setw(10) << "expected" << std::setw(12)
        << "computed" << std::setw(12) << "diff" << std::setw(20) << "terms" << "status\n";
  for (const auto& r : rows) {
    all = all && r.pass;
    std::string terms;
    for (std::size_t i = 0; i < r.terms.size(); ++i) terms += (i ? "/" : "") + fixed(r.terms[i]);
    if (format == Format::text) {
      out << std::left << std::setw(12) << r.loss << std::setw(10) << fixed(r.expected, 4)
          << std::setw(12) << fixed(r.computed) << std::setw(12) << fixed(r.computed - r.expected)
          << std::setw(20) << terms << (r.pass ? "PASS" : "FAIL") << '\n';
    } else {
      out << "loss=" << r.loss << " expected=" << fixed(r.expected, 4)
          << " computed=" << fixed(r.computed) << " diff=" << fixed(r.computed - r.expected)
          << " terms=" << terms << " status=" << (r.pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return all ? kOk : kCheckFailed;
}

int cmd_gradcheck(const std::string& loss, int trials, double h, std::uint64_t seed, Format format,
                  std::ostream& out) {
  std::vector<std::string> targets;
  if (loss == "all") {
    targets = gradcheck_targets();
  } else {
    const auto known = gradcheck_targets();
    if (std::find(known.begin(), known.end(), loss) == known.end())
      throw InputError("unknown loss '" + loss + "'");
    targets = {loss};
  }
  constexpr double kTolerance = 1e-4;
  bool all = true;
  for (const auto& name : targets) {
    const GradcheckReport r = gradcheck(name, trials, h, seed);
    const bool pass = r.max_rel_error <= kTolerance;
    all = all && pass;
    std::ostringstream err;
    err << std::scientific << std::setprecision(3) << r.max_rel_error;
    if (format == Format::text) {
      out << std::left << std::setw(18) << name << " trials=" << r.trials << " max_rel_error="
          << err.str() << ' ' << (pass ? "PASS" : "FAIL") << '\n';
      if (!pass) out << "  worst trial " << r.worst_trial << ": " << r.worst_config << '\n';
    } else {
      out << "loss=" << name << " trials=" << r.trials << " h=" << format_double(h)
          << " max_rel_error=" << err.str() << " worst_trial=" << r.worst_trial
          << " status=" << (pass ? "PASS" : "FAIL") << '\n';
    }
  }
  return all ? kOk : kCheckFailed;
}

struct TrainFlags {
  TrainConfig cfg;
  LossFlags loss;
  std::string loss_name = "lmcot";
  std::string task;
  std::string out_dir;
  bool timing = false;
};

int cmd_train(TrainFlags& flags, std::ostream& out) {
  TrainConfig cfg = flags.cfg;
  cfg.loss_cfg = flags.loss.resolve();
  if (flags.loss_name == "margin-ce" || flags.loss_name == "double+margin-ce") {
    cfg.regime = flags.loss_name == "margin-ce" ? TrainRegime::margin_ce : TrainRegime::margin_ce_double;
    cfg.data.task = flags.task.empty() ? SynthTask::binary_live_spoof : parse_synth_task(flags.task);
  } else {
    cfg.regime = TrainRegime::angular;
    cfg.loss = parse_angular_loss(flags.loss_name);
    cfg.data.task = flags.task.empty() ? SynthTask::embedding : parse_synth_task(flags.task);
  }
  cfg.validate();

  const TrainReport report = train_loop(cfg);
  if (!flags.out_dir.empty()) {
    const fs::path dir(flags.out_dir);
    ensure_directory(dir);
    StagedFiles files;
    files.write(dir / "report.txt", [&](std::ostream& o) { write_report(o, report, flags.timing); });
    files.write(dir / "model.txt", [&](std::ostream& o) { save_model(o, report.model); });
    files.commit();
  }
  out << "config " << config_echo(cfg) << '\n';
  out << "loss first=" << fixed(report.loss_curve.front()) << " last=" << fixed(report.loss_curve.back())
      << '\n';
  out << report.metric << " initial=" << fixed(report.metric_initial)
      << " final=" << fixed(report.metric_final) << '\n';
  return kOk;
}

std::vector<double> sweep_grid(const ScoredPairs& pairs) {
  std::vector<double> grid(pairs.genuine);
  grid.insert(grid.end(), pairs.impostor.begin(), pairs.impostor.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (!grid.empty()) grid.push_back(std::nextafter(grid.back(), HUGE_VAL));
  return grid;
}

int cmd_eval(const std::string& scores_path, const std::string& out_dir, std::size_t bins,
             Format format, std::ostream& out) {
  auto in = open_input(scores_path);
  const ScoredPairs pairs = parse_score_file(in);
  if (pairs.genuine.empty() || pairs.impostor.empty())
    throw IoError("score file needs at least one genuine and one impostor score");
  if (bins < 1) throw InputError("--bins must be >= 1");

  const EerResult e = eer(pairs);
  const double area = auc(pairs);
  if (!out_dir.empty()) {
    std::vector<double> all(pairs.genuine);
    all.insert(all.end(), pairs.impostor.begin(), pairs.impostor.end());
    const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
    const HistogramRange range{*lo, *hi > *lo ? *hi : *lo + 1.0};
    const fs::path dir(out_dir);
    ensure_directory(dir);
    StagedFiles files;
    files.write(dir / "sweep.csv",
                [&](std::ostream& o) { write_sweep_csv(o, far_frr_sweep(pairs, sweep_grid(pairs))); });
    files.write(dir / "histogram.csv", [&](std::ostream& o) {
      write_histogram_csv(o, range, histogram(pairs.genuine, bins, range),
                          histogram(pairs.impostor, bins, range));
    });
    files.commit();
  }
  if (format == Format::text) {
    out << "genuine   " << pairs.genuine.size() << "\nimpostor  " << pairs.impostor.size() << '\n'
        << "EER       " << fixed(e.eer) << " (threshold " << fixed(e.threshold) << ")\n"
        << "AUC       " << fixed(area) << '\n';
  } else {
    out << "genuine=" << pairs.genuine.size() << " impostor=" << pairs.impostor.size()
        << " eer=" << format_double(e.eer) << " threshold=" << format_double(e.threshold)
        << " auc=" << format_double(area) << '\n';
  }
  return kOk;
}

int cmd_retrieval_eval(const std::string& path, std::optional<std::size_t> gap_queries,
                       Format format, std::ostream& out) {
  auto in = open_input(path);
  const RetrievalData data = parse_ranked_file(in);
  if (data.queries.empty()) throw IoError("ranked file holds no predictions");
  const double map = map_at_100(data.queries);
  const double g = gap(data.top_predictions, gap_queries.value_or(data.queries.size()));
  if (format == Format::text)
    out << "queries   " << data.queries.size() << "\nmAP@100   " << fixed(map) << "\nGAP       "
        << fixed(g) << '\n';
  else
    out << "queries=" << data.queries.size() << " map_at_100=" << format_double(map)
        << " gap=" << format_double(g) << '\n';
  return kOk;
}

struct FaceFlags {
  std::string gallery;
  std::string model;
  std::uint64_t seed = 0;
};

MlpModel embedder_model(const FaceFlags& flags) {
  if (flags.model.empty()) return default_embedder(flags.seed);
  auto in = open_input(flags.model);
  return load_model(in);
}

Gallery open_gallery(const std::string& path, bool must_exist) {
  if (!must_exist && !fs::exists(path)) return Gallery();
  return Gallery::load(fs::path(path));
}

int cmd_enroll(const FaceFlags& flags, const std::string& name, const std::vector<std::string>& images,
               std::ostream& out) {
  const MlpModel model = embedder_model(flags);
  Gallery gallery = open_gallery(flags.gallery, false);
  std::vector<GrayImage> frames;
  for (const auto& path : images) frames.push_back(read_pgm(path));

  std::int64_t clock = gallery.last_timestamp();
  std::size_t stored = 0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const GrayImage& frame = frames[k];
    const auto face = largest_box(min_face_filter(whole_frame_detector(frame), frame.width));
    if (!face) {
      out << images[k] << ": rejected-no-face\n";
      continue;
    }
    const AlignedFace aligned = align(frame, *face);
    const Eigen::VectorXd embedding = toy_embed(model, aligned.face);
    const SharpnessResult sharp = aligned.face.width >= 3 && aligned.face.height >= 3
                                      ? sharpness_gate(aligned.face)
                                      : SharpnessResult{false, 0};
    const EnrollStatus status = gallery.enroll(name, embedding, sharp.pass, clock + 1);
    out << images[k] << ": " << to_string(status);
    switch (status) {
      case EnrollStatus::stored:
        ++clock;
        ++stored;
        out << " (" << gallery.find(name)->embeddings.size() << " of " << Gallery::kMaxPerIdentity << ")";
        break;
      case EnrollStatus::rejected_blurry:
        out << " (edge pixels " << sharp.edge_count << ")";
        break;
      case EnrollStatus::rejected_capacity:
        out << " (identity already holds " << Gallery::kMaxPerIdentity << " images)";
        break;
    }
    out << '\n';
  }
  if (stored > 0) {
    StagedFiles files;
    files.write(flags.gallery, [&](std::ostream& o) { gallery.save(o); });
    files.commit();
  }
  return stored > 0 ? kOk : kCheckFailed;
}

struct AuthFlags {
  std::string frame;
  AuthThresholds thresholds;
  double spoof_score = 0.0;
  double left_eye_open = 1.0;
  double right_eye_open = 1.0;
};

int cmd_auth(const FaceFlags& flags, const AuthFlags& auth, std::ostream& out, std::ostream& err) {
  const MlpModel model = embedder_model(flags);
  if (!fs::exists(flags.gallery)) err << "note: gallery " << flags.gallery << " not found, treating it as empty\n";
  const Gallery gallery = open_gallery(flags.gallery, false);
  const GrayImage frame = read_pgm(auth.frame);

  // Eye crops arrive left first; the stand-in classifier answers in that order.
  int eye_calls = 0;
  AuthModels models;
  models.detector = whole_frame_detector;
  models.spoof = [&](const GrayImage&) { return auth.spoof_score; };
  models.embedder = [&](const GrayImage& face) { return toy_embed(model, face); };
  models.eye_open = [&](const GrayImage&) {
    return eye_calls++ % 2 == 0 ? auth.left_eye_open : auth.right_eye_open;
  };
  const AuthOutcome outcome = authenticate(frame, gallery, models, auth.thresholds);
  out << describe(outcome) << '\n';
  return std::holds_alternative<Accepted>(outcome) ? kOk : kCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Angular margin losses, toy training, verification metrics and face pipeline tools",
               "lmcot"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lmcot 0.1.0");
  std::function<int()> action;

  // check-examples
  Format check_format = Format::text;
  std::optional<double> check_margin;
  auto* check = app.add_subcommand("check-examples", "Evaluate the five worked loss examples");
  check->add_option("--m", check_margin, "Use this margin for every margin-based loss");
  add_format_option(check, check_format);
  check->callback([&] { action = [&] { return cmd_check_examples(check_margin, check_format, out); }; });

  // gradcheck
  std::string gc_loss = "all";
  int gc_trials = 100;
  double gc_h = 1e-5;
  std::uint64_t gc_seed = 0;
  Format gc_format = Format::text;
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gc->add_option("--loss", gc_loss, "Loss name or 'all'")->capture_default_str();
  gc->add_option("--trials", gc_trials, "Random configurations per loss")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gc->add_option("--step", gc_h, "Finite-difference step")->check(CLI::PositiveNumber)->capture_default_str();
  gc->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  add_format_option(gc, gc_format);
  gc->callback([&] { action = [&] { return cmd_gradcheck(gc_loss, gc_trials, gc_h, gc_seed, gc_format, out); }; });

  // train
  TrainFlags tf;
  auto* train = app.add_subcommand("train", "Train the toy network on synthetic data");
  train->add_option("--loss", tf.loss_name, "Angular loss name, margin-ce or double+margin-ce")
      ->capture_default_str();
  train->add_option("--task", tf.task, "embedding, live-spoof or eye-state");
  train->add_option("--steps", tf.cfg.steps, "SGD steps")->capture_default_str();
  train->add_option("--lr", tf.cfg.lr, "Learning rate")->capture_default_str();
  train->add_option("--batch", tf.cfg.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--seed", tf.cfg.seed, "Seed for initialization and batches")->capture_default_str();
  train->add_option("--data-seed", tf.cfg.data.seed, "Seed of the synthetic dataset")->capture_default_str();
  train->add_option("--classes", tf.cfg.data.n_classes, "Classes of the embedding task")->capture_default_str();
  train->add_option("--dim", tf.cfg.data.dim, "Input dimension")->capture_default_str();
  train->add_option("--per-class", tf.cfg.data.per_class, "Training samples per class")->capture_default_str();
  train->add_option("--spread", tf.cfg.data.intra_spread, "Within-class noise")->capture_default_str();
  train->add_option("--hidden", tf.cfg.hidden, "Hidden layer widths")->delimiter(',')->capture_default_str();
  train->add_option("--embed-dim", tf.cfg.embed_dim, "Embedding dimension")->capture_default_str();
  train->add_option("--out", tf.out_dir, "Directory for report.txt and model.txt");
  train->add_flag("--timing", tf.timing, "Record wall-clock times in the report");
  tf.loss.attach(train);
  train->callback([&] { action = [&] { return cmd_train(tf, out); }; });

  // eval
  std::string ev_scores;
  std::string ev_out;
  std::size_t ev_bins = 20;
  Format ev_format = Format::text;
  auto* ev = app.add_subcommand("eval", "EER, AUC, FAR/FRR sweep and histograms of a score file");
  ev->add_option("scores", ev_scores, "File of label,score lines")->required();
  ev->add_option("--out", ev_out, "Directory for sweep.csv and histogram.csv");
  ev->add_option("--bins", ev_bins, "Histogram bins")->capture_default_str();
  add_format_option(ev, ev_format);
  ev->callback([&] { action = [&] { return cmd_eval(ev_scores, ev_out, ev_bins, ev_format, out); }; });

  // retrieval-eval
  std::string rt_path;
  std::optional<std::size_t> rt_queries;
  Format rt_format = Format::text;
  auto* rt = app.add_subcommand("retrieval-eval", "mAP@100 and GAP of ranked predictions");
  rt->add_option("ranked", rt_path, "File of query,rank,correct,confidence lines")->required();
  rt->add_option("--gap-queries", rt_queries, "In-gallery query count for GAP (default: all queries)");
  add_format_option(rt, rt_format);
  rt->callback([&] { action = [&] { return cmd_retrieval_eval(rt_path, rt_queries, rt_format, out); }; });

  // enroll / auth
  FaceFlags face;
  std::string en_name;
  std::vector<std::string> en_images;
  auto* en = app.add_subcommand("enroll", "Add face images of one identity to a gallery");
  en->add_option("--gallery", face.gallery, "Gallery file (created if missing)")->required();
  en->add_option("--name", en_name, "Identity name")->required();
  en->add_option("images", en_images, "PGM images")->required();
  en->add_option("--model", face.model, "Embedder weights saved by train");
  en->add_option("--seed", face.seed, "Seed of the default embedder")->capture_default_str();
  en->callback([&] { action = [&] { return cmd_enroll(face, en_name, en_images, out); }; });

  AuthFlags af;
  auto* au = app.add_subcommand("auth", "Authenticate one frame against a gallery");
  au->add_option("--gallery", face.gallery, "Gallery file")->required();
  au->add_option("frame", af.frame, "PGM frame")->required();
  au->add_option("--model", face.model, "Embedder weights saved by train");
  au->add_option("--seed", face.seed, "Seed of the default embedder")->capture_default_str();
  au->add_option("--threshold", af.thresholds.similarity, "Similarity threshold")->capture_default_str();
  au->add_option("--spoof-threshold", af.thresholds.spoof, "Scores at or above this are fake")
      ->capture_default_str();
  au->add_option("--spoof-score", af.spoof_score, "Score reported by the stand-in spoof model")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  au->add_option("--left-eye-open", af.left_eye_open, "Open probability of the left eye")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  au->add_option("--right-eye-open", af.right_eye_open, "Open probability of the right eye")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  au->callback([&] { action = [&] { return cmd_auth(face, af, out, err); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action ? action() : kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace lmcot
