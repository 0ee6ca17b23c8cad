#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "boltrot/geometry.hpp"
#include "boltrot/image.hpp"

namespace fixtures {

/// Smooth random texture in [0, 1]: blurred uniform noise, contrast-stretched.
inline boltrot::GrayImage texture(int w, int h, unsigned seed, double sigma = 1.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  boltrot::GrayImage noise(w, h);
  for (double& v : noise.pixels()) v = u(rng);
  boltrot::GrayImage smooth = boltrot::gaussian_blur(noise, sigma);
  double lo = 1.0, hi = 0.0;
  for (double v : smooth.pixels()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double& v : smooth.pixels()) v = (v - lo) / (hi - lo);
  return smooth;
}

/// out(x, y) = img(x - dx, y - dy): content moves by (+dx, +dy). Edges replicate.
inline boltrot::GrayImage shift(const boltrot::GrayImage& img, int dx, int dy) {
  boltrot::GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x, y) = img.clamped(x - dx, y - dy);
  return out;
}

/// Reference rigid map written out longhand, independent of the library.
inline boltrot::Point2 rigid(double theta, double tx, double ty, boltrot::Point2 p) {
  return {p.x * std::cos(theta) - p.y * std::sin(theta) + tx, p.x * std::sin(theta) + p.y * std::cos(theta) + ty};
}

}  // namespace fixtures
