#pragma once

// Rotation that levels the eyes, and the fixed-ratio eye crops.

#include <utility>

#include "lmcot/detect.hpp"

namespace lmcot {

struct AlignedFace {
  GrayImage face;       ///< the box region after rotation, box-sized
  Landmarks landmarks;  ///< in face-crop coordinates
  double angle;         ///< radians removed by the rotation
};

/// arctan(dy / dx) of the eye segment; +-pi/2 for vertically stacked eyes.
double eye_angle(const Point& left_eye, const Point& right_eye);

/// Rotates the frame by -eye_angle about the eye midpoint (bilinear, edges
/// clamped) and crops the box. Boxes without landmarks use
/// canonical_landmarks. Throws InputError for an invalid box.
AlignedFace align(const GrayImage& image, const DetectionBox& box);

/// Two crops of floor(W / 6) x floor(H / 10) centred on the eye landmarks and
/// shifted inside the image when they would cross its border. Throws
/// InputError if the face is too small for a one-pixel crop.
std::pair<GrayImage, GrayImage> eye_crops(const GrayImage& face, const Landmarks& landmarks);

}  // namespace lmcot
