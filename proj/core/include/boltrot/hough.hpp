#pragma once

// Edge maps (Canny, Prewitt, Laplacian of Gaussian) and the rho-theta Hough
// line transform used as the edge-based baseline.

#include <string>
#include <string_view>
#include <vector>

#include "boltrot/image.hpp"

namespace boltrot {

enum class EdgeMethod { Canny, Prewitt, Log };

std::string_view to_string(EdgeMethod m) noexcept;
EdgeMethod edge_method_from_string(std::string_view s);

/// Thresholds are fractions of the image's maximum response.
struct EdgeThresholds {
  double canny_low = 0.1;
  double canny_high = 0.8;
  double prewitt = 0.05;
  double log = 0.004;
};

/// Edge pixels are 1, everything else 0.
BinaryImage edge_map(const GrayImage& img, EdgeMethod method, const EdgeThresholds& t = {});

struct Line {
  double rho = 0.0;       ///< px, signed distance from the origin
  double theta_deg = 0.0;  ///< [0, 180); rho = x cos(theta) + y sin(theta)
  int votes = 0;
};

/// 1 px x 1 degree accumulator, 3x3 non-max suppression, strongest first.
std::vector<Line> hough_lines(const BinaryImage& edges, int n_peaks);

/// `rho,theta_deg,votes`
std::string lines_csv(const std::vector<Line>& lines);

}  // namespace boltrot
