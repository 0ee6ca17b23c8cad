#pragma once

// Image containers and the pixel kernels every other module builds on.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "boltrot/error.hpp"

namespace boltrot {

/// Row-major single-channel raster. Used directly for gradient fields and
/// filter responses, which are not confined to [0, 1].
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  /// Edge-replicating access.
  const T& clamped(int x, int y) const noexcept;

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  T* row(int y) noexcept { return data_.data() + static_cast<std::size_t>(y) * width_; }
  const T* row(int y) const noexcept { return data_.data() + static_cast<std::size_t>(y) * width_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Field = Raster<double>;
using BinaryImage = Raster<std::uint8_t>;

/// Luminance raster with values in [0, 1].
class GrayImage : public Raster<double> {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0) : Raster<double>(width, height, fill) {}

  /// Adopts a field, clamping every value into [0, 1].
  static GrayImage from_field(const Field& field);
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Raster<Rgb>;

/// Hue in degrees [0, 360), saturation and lightness in [0, 1].
struct Hsl {
  double h = 0.0;
  double s = 0.0;
  double l = 0.0;
};

using HslImage = Raster<Hsl>;

struct Gradient {
  Field gx;
  Field gy;
};

/// Level 0 is full resolution; each further level halves both dimensions.
struct Pyramid {
  std::vector<GrayImage> levels;

  int level_count() const noexcept { return static_cast<int>(levels.size()); }
  const GrayImage& base() const { return levels.front(); }
};

GrayImage to_grayscale(const RgbImage& img);

/// Normalized Gaussian taps for offsets -radius..radius.
std::vector<double> gaussian_kernel(double sigma, int radius);

/// Separable convolution with edge replication.
Field convolve_separable(const Field& img, std::span<const double> kernel);

/// Truncated (radius ceil(3 sigma)) Gaussian blur with edge replication.
GrayImage gaussian_blur(const GrayImage& img, double sigma);
Field gaussian_blur(const Field& img, double sigma);

/// Central differences inside, one-sided differences on the border.
Gradient gradient(const Field& img);

Pyramid build_pyramid(const GrayImage& img, int levels);

/// Bilinear interpolation; nullopt when (x, y) falls outside the pixel grid.
std::optional<double> sample_bilinear(const Field& img, double x, double y);

/// Bilinear interpolation with edge replication (never fails).
double sample_bilinear_clamped(const Field& img, double x, double y) noexcept;

Hsl rgb_to_hsl(Rgb px);
Rgb hsl_to_rgb(const Hsl& px);
HslImage rgb_to_hsl(const RgbImage& img);
RgbImage hsl_to_rgb(const HslImage& img);

/// out = clamp(img + amount * (img - blur(img, sigma)), 0, 1)
GrayImage unsharp_sharpen(const GrayImage& img, double sigma, double amount);

/// Crops [x, x+w) x [y, y+h) with edge replication for parts outside the image.
template <typename T>
Raster<T> crop(const Raster<T>& img, int x, int y, int w, int h);

// ---------------------------------------------------------------------------

template <typename T>
Raster<T>::Raster(int width, int height, T fill)
    : width_(width), height_(height) {
  if (width < 1 || height < 1) throw InvalidParameter("raster dimensions must be at least 1x1");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

template <typename T>
const T& Raster<T>::clamped(int x, int y) const noexcept {
  x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
  y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
  return (*this)(x, y);
}

template <typename T>
Raster<T> crop(const Raster<T>& img, int x, int y, int w, int h) {
  Raster<T> out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out(c, r) = img.clamped(x + c, y + r);
  return out;
}

}  // namespace boltrot
