#pragma once

// Command-line front end. Every subcommand is reachable in-process through
// run_cli so that tests can drive it without spawning processes.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lmcot/auth.hpp"
#include "lmcot/losses.hpp"
#include "lmcot/metrics.hpp"
#include "lmcot/train.hpp"

namespace lmcot {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

/// The two-sample, two-class worked example: features x0 = [0.1, 0.995] and
/// x1 = [0.2, 0.9798], class weights w0 = [0, 1] and w1 = [1, 0], labels
/// {0, 1}. `rounded` holds the angles to two decimals, which is the batch the
/// reference loss values were computed from.
struct WorkedExample {
  Eigen::MatrixXd features;
  Eigen::MatrixXd class_weights;
  std::vector<int> labels;
  AngularBatch rounded;
};

WorkedExample worked_example();

struct ExampleCheck {
  std::string loss;
  double expected;
  double computed;
  /// Contributions of each sample to the mean, i.e. per_sample / N.
  std::vector<double> terms;
  bool pass;
};

/// Softmax on the raw logits plus SphereFace (m = 1.1), CosFace, ArcFace
/// and LMCot (m = 0.05), all with s = 2 and base-10 logs. margin_override
/// replaces every margin, which is how a tampered run is produced.
std::vector<ExampleCheck> check_examples(double tolerance = 1e-3,
                                         std::optional<double> margin_override = std::nullopt);

/// A deterministic stand-in embedder: the face is resized to k x k with
/// k * k = model.input_dim(), scaled to [-0.5, 0.5] and passed through the
/// trunk. Throws InputError when input_dim is not a perfect square.
Eigen::VectorXd toy_embed(const MlpModel& model, const GrayImage& face);

/// The default embedder network: 256 inputs (16 x 16), one hidden layer of
/// 64 units and 32 outputs.
MlpModel default_embedder(std::uint64_t seed);

/// Detector used by the file-based enroll/auth commands: the whole frame as
/// one box with the canonical landmark layout.
std::vector<DetectionBox> whole_frame_detector(const GrayImage& frame);

/// Parses "label,score" lines (label 1 genuine, 0 impostor). A non-numeric
/// first line is treated as a header. Throws IoError.
ScoredPairs parse_score_file(std::istream& in);

struct RetrievalData {
  std::vector<RankedQuery> queries;
  /// Top-ranked prediction of every query, in order of first appearance.
  std::vector<Prediction> top_predictions;
};

/// Parses "query,rank,correct,confidence" lines. Each query's relevant count
/// is the number of correct predictions listed for it. Throws IoError.
RetrievalData parse_ranked_file(std::istream& in);

/// Entry point; args excludes the program name. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmcot
