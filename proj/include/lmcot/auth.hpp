#pragma once

// The authentication decision chain: detection, face-size check, alignment,
// anti-spoofing, matching and the eye-state check.

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "lmcot/align.hpp"
#include "lmcot/detect.hpp"
#include "lmcot/gallery.hpp"

namespace lmcot {

struct NoFace {};
struct InvalidFace {
  double spoof_score;
};
struct Stranger {
  double best_similarity;
};
struct EyesClosed {
  std::string identity;
};
struct Accepted {
  std::string identity;
  double similarity;
};

using AuthOutcome = std::variant<NoFace, InvalidFace, Stranger, EyesClosed, Accepted>;

/// One line such as "Accepted identity=alice similarity=0.93".
std::string describe(const AuthOutcome& outcome);

struct AuthThresholds {
  /// A score at or above this marks the frame as fake.
  double spoof = 0.65;
  double similarity = 0.5;
  /// Eye-open probability at or above this counts as open.
  double eye_open = 0.5;
};

/// True when the frame counts as live, i.e. score < threshold.
bool spoof_gate(double score, double threshold = 0.65);

struct AuthModels {
  std::function<std::vector<DetectionBox>(const GrayImage&)> detector;
  /// Live/spoof score of the full frame; higher means more likely fake.
  std::function<double(const GrayImage&)> spoof;
  /// Embedding of the aligned face crop.
  std::function<Eigen::VectorXd(const GrayImage&)> embedder;
  /// Probability that an eye crop shows an open eye.
  std::function<double(const GrayImage&)> eye_open;
};

/// Runs the stages in order and returns the outcome of the first one that
/// fails. Only the largest detected face is considered. The embedder is never
/// called for a frame judged fake, and EyesClosed requires both eyes closed.
AuthOutcome authenticate(const GrayImage& frame, const Gallery& gallery, const AuthModels& models,
                         const AuthThresholds& thresholds = {});

}  // namespace lmcot
