#include "lmcot/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "lmcot/errors.hpp"

namespace lmcot {

GrayImage::GrayImage(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InputError("negative image size");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

double GrayImage::sample(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
  const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

void GrayImage::validate() const {
  if (width < 0 || height < 0 ||
      pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw InputError("image size does not match pixel count");
  for (double p : pixels)
    if (!(p >= 0.0 && p <= 255.0)) throw InputError("pixel value outside [0, 255]");
}

GrayImage luminance_from_rgb(std::span<const std::uint8_t> rgb, int width, int height) {
  GrayImage out(width, height);
  if (rgb.size() != out.pixels.size() * 3) throw InputError("RGB buffer size mismatch");
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = 0.299 * rgb[3 * i] + 0.587 * rgb[3 * i + 1] + 0.114 * rgb[3 * i + 2];
  return out;
}

namespace {

/// Next header token, skipping whitespace and '#' comments.
std::string header_token(std::istream& in) {
  std::string token;
  while (true) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
  const std::string token = header_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used == token.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw IoError(path.string() + ": malformed PNM header");
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string magic = header_token(in);
  if (magic != "P5" && magic != "P6") throw IoError(path.string() + ": not a binary PGM/PPM file");
  const int width = header_int(in, path);
  const int height = header_int(in, path);
  const int maxval = header_int(in, path);
  if (width <= 0 || height <= 0 || width > 1 << 15 || height > 1 << 15)
    throw IoError(path.string() + ": unsupported image size");
  if (maxval <= 0 || maxval > 255) throw IoError(path.string() + ": only 8-bit images are supported");

  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError(path.string() + ": truncated pixel data");

  const double rescale = 255.0 / maxval;
  GrayImage out;
  if (channels == 3) {
    out = luminance_from_rgb(raw, width, height);
  } else {
    out = GrayImage(width, height);
    std::transform(raw.begin(), raw.end(), out.pixels.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
  }
  if (maxval != 255)
    for (double& p : out.pixels) p = std::min(255.0, p * rescale);
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<char> raw(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), raw.begin(), [](double v) {
    return static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
  });
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

GrayImage resize_bilinear(const GrayImage& image, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("resize target must be positive");
  if (image.width <= 0 || image.height <= 0) throw InputError("cannot resize an empty image");
  GrayImage out(width, height);
  const double sx = static_cast<double>(image.width) / width;
  const double sy = static_cast<double>(image.height) / height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(x, y) = image.sample((x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
  return out;
}

GrayImage crop(const GrayImage& image, int x0, int y0, int width, int height) {
  if (width <= 0 || height <= 0) throw InputError("crop size must be positive");
  if (image.width <= 0 || image.height <= 0) throw InputError("cannot crop an empty image");
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      out.at(x, y) = image.at(std::clamp(x0 + x, 0, image.width - 1),
                              std::clamp(y0 + y, 0, image.height - 1));
  return out;
}

GrayImage laplacian(const GrayImage& image) {
  if (image.width < 3 || image.height < 3) throw InputError("laplacian needs at least 3 x 3 pixels");
  GrayImage out(image.width - 2, image.height - 2);
  for (int y = 1; y + 1 < image.height; ++y)
    for (int x = 1; x + 1 < image.width; ++x)
      out.at(x - 1, y - 1) = image.at(x, y - 1) + image.at(x - 1, y) - 4.0 * image.at(x, y) +
                             image.at(x + 1, y) + image.at(x, y + 1);
  return out;
}

SharpnessResult sharpness_gate(const GrayImage& image, double pixel_threshold,
                               std::size_t count_threshold) {
  const GrayImage response = laplacian(image);
  const auto count = static_cast<std::size_t>(
      std::count_if(response.pixels.begin(), response.pixels.end(),
                    [pixel_threshold](double r) { return std::abs(r) >= pixel_threshold; }));
  return {count >= count_threshold, count};
}

SharpnessResult sharpness_gate(const GrayImage& image) {
  const auto pixels = static_cast<double>(image.pixels.size());
  const auto count_threshold = static_cast<std::size_t>(std::max(1.0, std::ceil(0.005 * pixels)));
  return sharpness_gate(image, 30.0, count_threshold);
}

GrayImage random_resized_crop(const GrayImage& image, int out_size, Rng& rng) {
  if (out_size <= 0 || out_size > image.width || out_size > image.height)
    throw InputError("crop window does not fit inside the image");
  std::uniform_int_distribution<int> pick_x(0, image.width - out_size);
  std::uniform_int_distribution<int> pick_y(0, image.height - out_size);
  const int x0 = pick_x(rng);
  const int y0 = pick_y(rng);
  return crop(image, x0, y0, out_size, out_size);
}

}  // namespace lmcot
