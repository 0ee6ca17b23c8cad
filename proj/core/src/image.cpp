#include "boltrot/image.hpp"

#include <algorithm>
#include <cmath>

namespace boltrot {

GrayImage GrayImage::from_field(const Field& field) {
  GrayImage out(field.width(), field.height());
  auto src = field.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0, 1.0);
  return out;
}

GrayImage to_grayscale(const RgbImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double luma = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
    dst[i] = std::clamp(luma / 255.0, 0.0, 1.0);
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw InvalidParameter("gaussian sigma must be positive");
  if (radius < 0) throw InvalidParameter("gaussian radius must be non-negative");
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

Field convolve_separable(const Field& img, std::span<const double> kernel) {
  const int w = img.width();
  const int h = img.height();
  const int r = static_cast<int>(kernel.size() / 2);
  Field tmp(w, h);
  for (int y = 0; y < h; ++y) {
    const double* src = img.row(y);
    double* dst = tmp.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      if (x >= r && x + r < w) {
        for (int k = -r; k <= r; ++k) acc += kernel[k + r] * src[x + k];
      } else {
        for (int k = -r; k <= r; ++k) acc += kernel[k + r] * src[std::clamp(x + k, 0, w - 1)];
      }
      dst[x] = acc;
    }
  }
  Field out(w, h);
  for (int y = 0; y < h; ++y) {
    double* dst = out.row(y);
    for (int k = -r; k <= r; ++k) {
      const double* src = tmp.row(std::clamp(y + k, 0, h - 1));
      const double wk = kernel[k + r];
      for (int x = 0; x < w; ++x) dst[x] += wk * src[x];
    }
  }
  return out;
}

Field gaussian_blur(const Field& img, double sigma) {
  if (!(sigma > 0.0)) throw InvalidParameter("gaussian_blur: sigma must be positive");
  const auto kernel = gaussian_kernel(sigma, static_cast<int>(std::ceil(3.0 * sigma)));
  return convolve_separable(img, kernel);
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  return GrayImage::from_field(gaussian_blur(static_cast<const Field&>(img), sigma));
}

Gradient gradient(const Field& img) {
  const int w = img.width();
  const int h = img.height();
  if (w < 3 || h < 3) throw InvalidParameter("gradient: image must be at least 3x3");
  Gradient g{Field(w, h), Field(w, h)};
  for (int y = 0; y < h; ++y) {
    const double* row = img.row(y);
    double* gx = g.gx.row(y);
    gx[0] = row[1] - row[0];
    for (int x = 1; x < w - 1; ++x) gx[x] = 0.5 * (row[x + 1] - row[x - 1]);
    gx[w - 1] = row[w - 1] - row[w - 2];
  }
  for (int y = 0; y < h; ++y) {
    double* gy = g.gy.row(y);
    const double* up = img.row(y == 0 ? 0 : y - 1);
    const double* down = img.row(y == h - 1 ? h - 1 : y + 1);
    const double scale = (y == 0 || y == h - 1) ? 1.0 : 0.5;
    for (int x = 0; x < w; ++x) gy[x] = scale * (down[x] - up[x]);
  }
  return g;
}

Pyramid build_pyramid(const GrayImage& img, int levels) {
  if (levels < 1) throw InvalidParameter("build_pyramid: level count must be >= 1");
  int w = img.width();
  int h = img.height();
  for (int i = 1; i < levels; ++i) {
    w /= 2;
    h /= 2;
  }
  if (w < 8 || h < 8) throw InvalidParameter("build_pyramid: coarsest level would be smaller than 8x8");

  Pyramid pyr;
  pyr.levels.reserve(levels);
  pyr.levels.push_back(img);
  static const auto kernel = gaussian_kernel(1.0, 3);
  for (int i = 1; i < levels; ++i) {
    const GrayImage& prev = pyr.levels.back();
    const Field blurred = convolve_separable(prev, kernel);
    GrayImage next(prev.width() / 2, prev.height() / 2);
    for (int y = 0; y < next.height(); ++y)
      for (int x = 0; x < next.width(); ++x) next(x, y) = std::clamp(blurred(2 * x, 2 * y), 0.0, 1.0);
    pyr.levels.push_back(std::move(next));
  }
  return pyr;
}

double sample_bilinear_clamped(const Field& img, double x, double y) noexcept {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 1);
  const int y0 = std::min(static_cast<int>(y), h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = img(x0, y0) + fx * (img(x1, y0) - img(x0, y0));
  const double bottom = img(x0, y1) + fx * (img(x1, y1) - img(x0, y1));
  return top + fy * (bottom - top);
}

std::optional<double> sample_bilinear(const Field& img, double x, double y) {
  if (!(x >= 0.0 && y >= 0.0 && x <= img.width() - 1 && y <= img.height() - 1)) return std::nullopt;
  return sample_bilinear_clamped(img, x, y);
}

Hsl rgb_to_hsl(Rgb px) {
  const double r = px.r / 255.0;
  const double g = px.g / 255.0;
  const double b = px.b / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  Hsl out;
  out.l = 0.5 * (mx + mn);
  const double delta = mx - mn;
  if (delta <= 0.0) return out;
  out.s = delta / (1.0 - std::abs(2.0 * out.l - 1.0));
  out.s = std::clamp(out.s, 0.0, 1.0);
  double hue;
  if (mx == r)
    hue = std::fmod((g - b) / delta, 6.0);
  else if (mx == g)
    hue = (b - r) / delta + 2.0;
  else
    hue = (r - g) / delta + 4.0;
  hue *= 60.0;
  if (hue < 0.0) hue += 360.0;
  out.h = hue;
  return out;
}

Rgb hsl_to_rgb(const Hsl& px) {
  const double l = std::clamp(px.l, 0.0, 1.0);
  const double s = std::clamp(px.s, 0.0, 1.0);
  const double c = (1.0 - std::abs(2.0 * l - 1.0)) * s;
  double hp = std::fmod(px.h, 360.0);
  if (hp < 0.0) hp += 360.0;
  hp /= 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = l - 0.5 * c;
  auto to8 = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

HslImage rgb_to_hsl(const RgbImage& img) {
  HslImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = rgb_to_hsl(src[i]);
  return out;
}

RgbImage hsl_to_rgb(const HslImage& img) {
  RgbImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = hsl_to_rgb(src[i]);
  return out;
}

GrayImage unsharp_sharpen(const GrayImage& img, double sigma, double amount) {
  if (!(sigma > 0.0)) throw InvalidParameter("unsharp_sharpen: sigma must be positive");
  if (!(amount >= 0.0)) throw InvalidParameter("unsharp_sharpen: amount must be non-negative");
  const Field blurred = gaussian_blur(static_cast<const Field&>(img), sigma);
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto blr = blurred.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = std::clamp(src[i] + amount * (src[i] - blr[i]), 0.0, 1.0);
  return out;
}

}  // namespace boltrot
