#include "lmcot/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "lmcot/errors.hpp"
#include "lmcot/train.hpp"

namespace lmcot {

void DetectionBox::validate() const {
  if (!(x1 < x2 && y1 < y2)) throw InputError("degenerate detection box");
  if (!(confidence >= 0.0 && confidence <= 1.0)) throw InputError("confidence outside [0, 1]");
}

double iou(const DetectionBox& a, const DetectionBox& b) {
  const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = w * h;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<DetectionBox> nms(const std::vector<DetectionBox>& boxes, double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].confidence > boxes[b].confidence;
  });
  std::vector<DetectionBox> kept;
  for (std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const DetectionBox& k) {
      return iou(k, boxes[i]) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(boxes[i]);
  }
  return kept;
}

std::vector<PyramidLevel> image_pyramid(const GrayImage& image, int min_face,
                                        double scale_factor) {
  if (!(scale_factor > 0.0 && scale_factor < 1.0))
    throw InputError("pyramid scale factor must lie in (0, 1)");
  if (min_face <= 0) throw InputError("min_face must be positive");
  std::vector<PyramidLevel> levels;
  const double min_side = std::min(image.width, image.height);
  for (double s = 12.0 / min_face; min_side * s >= 12.0; s *= scale_factor) {
    const int w = std::max(1, static_cast<int>(std::lround(image.width * s)));
    const int h = std::max(1, static_cast<int>(std::lround(image.height * s)));
    levels.push_back({resize_bilinear(image, w, h), s});
  }
  return levels;
}

namespace {

constexpr std::array<int, 3> kWindow{12, 24, 48};

DetectionBox regress(const DetectionBox& where, const StageScore& score) {
  const double w = where.width();
  const double h = where.height();
  DetectionBox out;
  out.x1 = where.x1 + score.offsets[0] * w;
  out.y1 = where.y1 + score.offsets[1] * h;
  out.x2 = where.x2 + score.offsets[2] * w;
  out.y2 = where.y2 + score.offsets[3] * h;
  out.confidence = std::clamp(score.confidence, 0.0, 1.0);
  if (score.landmarks) {
    Landmarks marks = *score.landmarks;
    for (Point& p : marks) {
      p.x = where.x1 + std::clamp(p.x, 0.0, 1.0) * w;
      p.y = where.y1 + std::clamp(p.y, 0.0, 1.0) * h;
    }
    out.landmarks = marks;
  }
  return out;
}

/// Landmarks are reported relative to the window the scorer saw; after
/// regression they are clamped into the final box.
void clamp_landmarks(DetectionBox& box) {
  if (!box.landmarks) return;
  for (Point& p : *box.landmarks) {
    p.x = std::clamp(p.x, box.x1, box.x2);
    p.y = std::clamp(p.y, box.y1, box.y2);
  }
}

bool usable(const DetectionBox& b) {
  return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
         std::isfinite(b.y2) && b.x1 < b.x2 && b.y1 < b.y2;
}

GrayImage window_patch(const GrayImage& image, const DetectionBox& where, int size) {
  GrayImage patch(size, size);
  const double sx = where.width() / size;
  const double sy = where.height() / size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      patch.at(x, y) = image.sample(where.x1 + (x + 0.5) * sx - 0.5, where.y1 + (y + 0.5) * sy - 0.5);
  return patch;
}

std::vector<DetectionBox> rescore(const GrayImage& image, FaceScorer& scorer, Stage stage,
                                  const std::vector<DetectionBox>& boxes, const DetectConfig& cfg) {
  const auto k = static_cast<std::size_t>(stage);
  std::vector<DetectionBox> passed;
  for (const DetectionBox& where : boxes) {
    const StageScore score = scorer.score(stage, window_patch(image, where, kWindow[k]), where);
    if (score.confidence < cfg.confidence[k]) continue;
    DetectionBox box = regress(where, score);
    if (!usable(box)) continue;
    clamp_landmarks(box);
    passed.push_back(box);
  }
  return nms(passed, cfg.nms_iou[k]);
}

}  // namespace

std::vector<DetectionBox> detect(const GrayImage& image, FaceScorer& scorer,
                                 const DetectConfig& cfg) {
  if (cfg.stride <= 0) throw InputError("detector stride must be positive");
  std::vector<DetectionBox> proposals;
  for (const PyramidLevel& level : image_pyramid(image, cfg.min_face, cfg.scale_factor)) {
    const int win = kWindow[0];
    for (int y = 0; y + win <= level.image.height; y += cfg.stride)
      for (int x = 0; x + win <= level.image.width; x += cfg.stride) {
        DetectionBox where;
        where.x1 = x / level.scale;
        where.y1 = y / level.scale;
        where.x2 = (x + win) / level.scale;
        where.y2 = (y + win) / level.scale;
        const StageScore score = scorer.score(Stage::proposal, crop(level.image, x, y, win, win), where);
        if (score.confidence < cfg.confidence[0]) continue;
        DetectionBox box = regress(where, score);
        box.landmarks.reset();
        if (usable(box)) proposals.push_back(box);
      }
  }
  std::vector<DetectionBox> boxes = nms(proposals, cfg.nms_iou[0]);
  boxes = rescore(image, scorer, Stage::refine, boxes, cfg);
  boxes = rescore(image, scorer, Stage::output, boxes, cfg);
  return boxes;
}

std::vector<DetectionBox> min_face_filter(const std::vector<DetectionBox>& boxes,
                                          int frame_width) {
  std::vector<DetectionBox> kept;
  // Compare w * 5 >= W so that a box exactly W / 5 wide is kept without
  // rounding trouble.
  std::copy_if(boxes.begin(), boxes.end(), std::back_inserter(kept), [frame_width](const DetectionBox& b) {
    return b.width() * 5.0 >= static_cast<double>(frame_width);
  });
  return kept;
}

std::optional<DetectionBox> largest_box(const std::vector<DetectionBox>& boxes) {
  if (boxes.empty()) return std::nullopt;
  const auto it = std::max_element(boxes.begin(), boxes.end(), [](const DetectionBox& a, const DetectionBox& b) {
    return a.area() < b.area();
  });
  return *it;
}

Landmarks canonical_landmarks(const DetectionBox& box) {
  const auto at = [&box](double fx, double fy) {
    return Point{box.x1 + fx * box.width(), box.y1 + fy * box.height()};
  };
  return {at(0.3, 0.4), at(0.7, 0.4), at(0.5, 0.6), at(0.35, 0.8), at(0.65, 0.8)};
}

void write_detections_csv(std::ostream& out, const std::vector<DetectionBox>& boxes) {
  out << "x1,y1,x2,y2,confidence";
  for (const char* name : {"left_eye", "right_eye", "nose", "mouth_left", "mouth_right"})
    out << ',' << name << "_x," << name << "_y";
  out << '\n';
  for (const DetectionBox& b : boxes) {
    out << format_double(b.x1) << ',' << format_double(b.y1) << ',' << format_double(b.x2) << ','
        << format_double(b.y2) << ',' << format_double(b.confidence);
    for (std::size_t i = 0; i < 5; ++i) {
      if (b.landmarks)
        out << ',' << format_double((*b.landmarks)[i].x) << ',' << format_double((*b.landmarks)[i].y);
      else
        out << ",,";
    }
    out << '\n';
  }
}

}  // namespace lmcot
