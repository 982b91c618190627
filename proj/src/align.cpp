#include "lmcot/align.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmcot/errors.hpp"

namespace lmcot {

double eye_angle(const Point& left_eye, const Point& right_eye) {
  const double dx = right_eye.x - left_eye.x;
  const double dy = right_eye.y - left_eye.y;
  if (dx == 0.0) {
    if (dy == 0.0) return 0.0;
    return std::copysign(std::numbers::pi / 2.0, dy);
  }
  return std::atan(dy / dx);
}

AlignedFace align(const GrayImage& image, const DetectionBox& box) {
  if (!(box.x1 < box.x2 && box.y1 < box.y2)) throw InputError("degenerate face box");
  const Landmarks marks = box.landmarks.value_or(canonical_landmarks(box));
  const double phi = eye_angle(marks[0], marks[1]);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const Point mid{(marks[0].x + marks[1].x) / 2.0, (marks[0].y + marks[1].y) / 2.0};

  const int w = std::max(1, static_cast<int>(std::lround(box.width())));
  const int h = std::max(1, static_cast<int>(std::lround(box.height())));
  AlignedFace out{GrayImage(w, h), {}, phi};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double px = box.x1 + x - mid.x;
      const double py = box.y1 + y - mid.y;
      out.face.at(x, y) = image.sample(mid.x + c * px - s * py, mid.y + s * px + c * py);
    }
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const double px = marks[i].x - mid.x;
    const double py = marks[i].y - mid.y;
    out.landmarks[i] = {mid.x + c * px + s * py - box.x1, mid.y - s * px + c * py - box.y1};
  }
  return out;
}

namespace {

GrayImage eye_crop(const GrayImage& face, const Point& eye, int cw, int ch) {
  const int x0 = std::clamp(static_cast<int>(std::lround(eye.x - cw / 2.0)), 0, face.width - cw);
  const int y0 = std::clamp(static_cast<int>(std::lround(eye.y - ch / 2.0)), 0, face.height - ch);
  return crop(face, x0, y0, cw, ch);
}

}  // namespace

std::pair<GrayImage, GrayImage> eye_crops(const GrayImage& face, const Landmarks& landmarks) {
  const int cw = face.width / 6;
  const int ch = face.height / 10;
  if (cw < 1 || ch < 1) throw InputError("face too small for eye crops");
  return {eye_crop(face, landmarks[0], cw, ch), eye_crop(face, landmarks[1], cw, ch)};
}

}  // namespace lmcot
