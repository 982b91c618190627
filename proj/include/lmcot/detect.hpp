#pragma once

// Cascade face-detection plumbing: image pyramid, sliding-window proposals,
// box regression, greedy NMS and the minimum-face filter. The per-window
// scoring network is supplied by the caller.

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lmcot/image.hpp"

namespace lmcot {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Left eye, right eye, nose, left mouth corner, right mouth corner.
using Landmarks = std::array<Point, 5>;

struct DetectionBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  double confidence = 0.0;
  std::optional<Landmarks> landmarks;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  /// Throws InputError unless x1 < x2, y1 < y2 and confidence is in [0, 1].
  void validate() const;
};

/// Intersection over union; 0 when the union is empty.
double iou(const DetectionBox& a, const DetectionBox& b);

/// Greedy suppression: boxes are visited by descending confidence (lower
/// index first on ties); a box is kept unless its IoU with an already kept
/// box is >= iou_threshold. Output is in visiting order.
std::vector<DetectionBox> nms(const std::vector<DetectionBox>& boxes, double iou_threshold);

struct PyramidLevel {
  GrayImage image;
  double scale;
};

/// Scales 12 / min_face, times scale_factor per level, while
/// min(w, h) * scale >= 12. Throws InputError unless 0 < scale_factor < 1
/// and min_face > 0.
std::vector<PyramidLevel> image_pyramid(const GrayImage& image, int min_face,
                                        double scale_factor = 0.709);

enum class Stage { proposal, refine, output };

/// What a stage network says about one window.
struct StageScore {
  double confidence = 0.0;
  /// Box corrections (dx1, dy1, dx2, dy2) in units of the window width/height.
  std::array<double, 4> offsets{};
  /// Landmarks in window-relative coordinates, each in [0, 1].
  std::optional<Landmarks> landmarks;
};

/// A pluggable face classifier. `window` is the resampled patch (12, 24 or 48
/// pixels square depending on the stage) and `where` is the patch's extent in
/// frame coordinates.
class FaceScorer {
 public:
  virtual ~FaceScorer() = default;
  virtual StageScore score(Stage stage, const GrayImage& window, const DetectionBox& where) = 0;
};

struct DetectConfig {
  int min_face = 48;
  double scale_factor = 0.709;
  int stride = 2;
  std::array<double, 3> confidence{0.6, 0.7, 0.7};
  std::array<double, 3> nms_iou{0.7, 0.7, 0.7};
};

/// Three-stage cascade: pyramid scan at 12 px, rescoring of the survivors at
/// 24 px and then at 48 px with landmarks. Each stage drops boxes below its
/// confidence threshold, applies the regression offsets and runs NMS.
/// Boxes are returned in frame coordinates.
std::vector<DetectionBox> detect(const GrayImage& image, FaceScorer& scorer,
                                 const DetectConfig& cfg = {});

/// Keeps boxes whose width is at least frame_width / 5.
std::vector<DetectionBox> min_face_filter(const std::vector<DetectionBox>& boxes,
                                          int frame_width);

/// The box with the largest area, or nullopt for an empty list. The first of
/// equal-area boxes wins.
std::optional<DetectionBox> largest_box(const std::vector<DetectionBox>& boxes);

/// Default landmark layout for a box that carries none.
Landmarks canonical_landmarks(const DetectionBox& box);

/// "x1,y1,x2,y2,confidence" followed by ten landmark columns (empty when absent).
void write_detections_csv(std::ostream& out, const std::vector<DetectionBox>& boxes);

}  // namespace lmcot
