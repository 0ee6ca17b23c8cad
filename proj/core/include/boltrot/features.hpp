#pragma once

// Shi-Tomasi (minimum eigenvalue) corner detection restricted to ROIs.

#include <vector>

#include "boltrot/image.hpp"

namespace boltrot {

/// Axis-aligned box in pixel units; (x, y) is the top-left pixel.
struct Roi {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double confidence = 1.0;

  double center_x() const noexcept { return x + 0.5 * (w - 1); }
  double center_y() const noexcept { return y + 0.5 * (h - 1); }
  bool inside(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= width && y + h <= height;
  }
  friend bool operator==(const Roi&, const Roi&) = default;
};

constexpr int kMinRoiSide = 8;

double iou(const Roi& a, const Roi& b) noexcept;

struct FeaturePoint {
  double x = 0.0;
  double y = 0.0;
  double quality = 0.0;
};

struct CornerParams {
  double min_quality = 0.2;
  int filter_dim = 5;
  int max_points = 200;
};

/// Smaller eigenvalue of the Gaussian-weighted structure tensor, clamped at 0.
/// The weighting window is filter_dim x filter_dim with sigma (filter_dim - 1) / 4.
Field min_eig_response(const Field& img, int filter_dim);

/// Local maxima of the response inside `roi`, above min_quality x (ROI max),
/// refined to subpixel precision and sorted by descending quality.
std::vector<FeaturePoint> detect_corners(const GrayImage& img, const Roi& roi, const CornerParams& params = {});

}  // namespace boltrot
