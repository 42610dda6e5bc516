#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "valet/errors.hpp"

namespace valet {

/// Dense row-major single-channel image.
template <typename T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw DimensionError("negative image size");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  bool in_bounds(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }

  T& at(int col, int row) { return data_[index(col, row)]; }
  const T& at(int col, int row) const { return data_[index(col, row)]; }

  std::span<T> row(int r) { return {data_.data() + index(0, r), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int r) const {
    return {data_.data() + index(0, r), static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Image<std::uint8_t>;
using ResponseMap = Image<std::int32_t>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(Rgb, Rgb) = default;
};
using RgbImage = Image<Rgb>;

/// Pixel-space rectangle [col0, col0 + width) x [row0, row0 + height).
struct PixelRect {
  int col0 = 0;
  int row0 = 0;
  int width = 0;
  int height = 0;

  int col1() const { return col0 + width; }
  int row1() const { return row0 + height; }
  bool contains(double col, double row) const {
    return col >= col0 && row >= row0 && col < col1() && row < row1();
  }
  bool inside(int image_width, int image_height) const {
    return col0 >= 0 && row0 >= 0 && width > 0 && height > 0 && col1() <= image_width &&
           row1() <= image_height;
  }
};

/// Converts an intensity in [0, 1] to an 8-bit level (round half up, clamped).
std::uint8_t to_level(double intensity);

/// Bilinear sample at continuous coordinates where pixel (c, r) covers
/// [c, c+1) x [r, r+1) and its center sits at (c + 0.5, r + 0.5). Neighbours
/// outside the image are clamped to the border. `fetch(col, row)` supplies
/// pixel values, so lazily evaluated sources share the exact arithmetic.
template <typename Fetch>
std::uint8_t sample_bilinear_with(int width, int height, Fetch&& fetch, double u, double v) {
  const double x = u - 0.5;
  const double y = v - 0.5;
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double ax = x - fx;
  const double ay = y - fy;
  const int ix = static_cast<int>(fx);
  const int iy = static_cast<int>(fy);
  const int x0 = std::clamp(ix, 0, width - 1);
  const int x1 = std::clamp(ix + 1, 0, width - 1);
  const int y0 = std::clamp(iy, 0, height - 1);
  const int y1 = std::clamp(iy + 1, 0, height - 1);
  const double top = (1.0 - ax) * fetch(x0, y0) + ax * fetch(x1, y0);
  const double bottom = (1.0 - ax) * fetch(x0, y1) + ax * fetch(x1, y1);
  const double value = (1.0 - ay) * top + ay * bottom;
  return static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
}

inline std::uint8_t sample_bilinear(const GrayImage& img, double u, double v) {
  return sample_bilinear_with(
      img.width(), img.height(), [&img](int c, int r) -> double { return img.at(c, r); }, u, v);
}

/// Precomputed bilinear sample: top-left source pixel, 7-bit fractional
/// weights (0..128) and the neighbour steps left after border clamping.
struct BilinearTap {
  std::int16_t x0 = 0;
  std::int16_t y0 = 0;
  std::uint8_t wx = 0;
  std::uint8_t wy = 0;
  std::uint8_t steps = 0;   ///< bit 0: x neighbour exists, bit 1: y neighbour exists
  std::int8_t source = -1;  ///< caller-defined source index; -1 means no sample

  bool valid() const { return source >= 0; }
  int step_x() const { return steps & 1; }
  int step_y() const { return (steps >> 1) & 1; }
  friend bool operator==(const BilinearTap&, const BilinearTap&) = default;
};

inline constexpr int kTapOne = 128;

/// Tap for continuous coordinate (u, v) with pixel centres at +0.5.
inline BilinearTap make_bilinear_tap(int width, int height, double u, double v, int source = 0) {
  const double x = u - 0.5;
  const double y = v - 0.5;
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const int ix = static_cast<int>(fx);
  const int iy = static_cast<int>(fy);
  const int x0 = std::clamp(ix, 0, width - 1);
  const int x1 = std::clamp(ix + 1, 0, width - 1);
  const int y0 = std::clamp(iy, 0, height - 1);
  const int y1 = std::clamp(iy + 1, 0, height - 1);
  BilinearTap t;
  t.x0 = static_cast<std::int16_t>(x0);
  t.y0 = static_cast<std::int16_t>(y0);
  t.wx = static_cast<std::uint8_t>((x - fx) * kTapOne + 0.5);
  t.wy = static_cast<std::uint8_t>((y - fy) * kTapOne + 0.5);
  t.steps = static_cast<std::uint8_t>((x1 - x0) | ((y1 - y0) << 1));
  t.source = static_cast<std::int8_t>(source);
  return t;
}

inline std::uint8_t blend_tap(std::uint32_t p00, std::uint32_t p01, std::uint32_t p10,
                              std::uint32_t p11, const BilinearTap& t) {
  const std::uint32_t wx = t.wx;
  const std::uint32_t wy = t.wy;
  const std::uint32_t top = p00 * (kTapOne - wx) + p01 * wx;
  const std::uint32_t bottom = p10 * (kTapOne - wx) + p11 * wx;
  return static_cast<std::uint8_t>((top * (kTapOne - wy) + bottom * wy + 8192u) >> 14);
}

template <typename Fetch>
std::uint8_t sample_tap_with(Fetch&& fetch, const BilinearTap& t) {
  const int x1 = t.x0 + t.step_x();
  const int y1 = t.y0 + t.step_y();
  return blend_tap(fetch(t.x0, t.y0), fetch(x1, t.y0), fetch(t.x0, y1), fetch(x1, y1), t);
}

inline std::uint8_t sample_tap(const GrayImage& img, const BilinearTap& t) {
  const std::uint8_t* p = img.pixels().data() + static_cast<std::ptrdiff_t>(t.y0) * img.width() + t.x0;
  const std::ptrdiff_t dx = t.step_x();
  const std::ptrdiff_t dy = t.step_y() * static_cast<std::ptrdiff_t>(img.width());
  return blend_tap(p[0], p[dx], p[dy], p[dy + dx], t);
}

/// Copies `rect` out of `img`.
GrayImage crop(const GrayImage& img, const PixelRect& rect);
GrayImage transpose(const GrayImage& img);
GrayImage mirror_horizontal(const GrayImage& img);

void write_pgm(const GrayImage& img, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);
std::string encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const std::string& bytes);

void write_ppm(const RgbImage& img, const std::filesystem::path& path);
RgbImage to_rgb(const GrayImage& img);

}  // namespace valet
