#pragma once

// Grayscale frames, PGM ingestion, resampling and the Laplacian sharpness
// gate used during enrollment.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "lmcot/angular.hpp"

namespace lmcot {

/// Row-major grayscale image with 8-bit-range intensities stored as doubles.
/// Laplacian response maps reuse the type and may hold signed values.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0);

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Bilinear sample at continuous pixel coordinates; out-of-range
  /// coordinates are clamped to the border.
  double sample(double x, double y) const;

  /// Throws InputError unless width * height == |pixels| and every value is in [0, 255].
  void validate() const;
};

/// ITU-R 601 luminance of interleaved 8-bit RGB.
GrayImage luminance_from_rgb(std::span<const std::uint8_t> rgb, int width, int height);

/// Reads binary PGM (P5) or PPM (P6, converted to luminance) with maxval <= 255.
/// Throws IoError.
GrayImage read_pgm(const std::filesystem::path& path);
/// Writes 8-bit P5 with values rounded and clamped to [0, 255].
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Bilinear resize with pixel-centre alignment.
GrayImage resize_bilinear(const GrayImage& image, int width, int height);

/// Axis-aligned crop; reads outside the image take the nearest border pixel.
GrayImage crop(const GrayImage& image, int x0, int y0, int width, int height);

/// Valid-region 3x3 convolution with [[0,1,0],[1,-4,1],[0,1,0]]; the result is
/// (w - 2) x (h - 2). Throws InputError for images smaller than 3 x 3.
GrayImage laplacian(const GrayImage& image);

struct SharpnessResult {
  bool pass;
  std::size_t edge_count;
};

/// Counts pixels with |laplacian| >= pixel_threshold; passes when the count
/// reaches count_threshold.
SharpnessResult sharpness_gate(const GrayImage& image, double pixel_threshold,
                               std::size_t count_threshold);

/// The default gate: pixel threshold 30, count threshold 0.5% of the pixels.
SharpnessResult sharpness_gate(const GrayImage& image);

/// Uniformly placed out_size x out_size window copied from the image.
/// Throws InputError if the window does not fit.
GrayImage random_resized_crop(const GrayImage& image, int out_size, Rng& rng);

}  // namespace lmcot
