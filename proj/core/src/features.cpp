#include "boltrot/features.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace boltrot {

double iou(const Roi& a, const Roi& b) noexcept {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.x + a.w, b.x + b.w);
  const int y1 = std::min(a.y + a.h, b.y + b.h);
  if (x1 <= x0 || y1 <= y0) return 0.0;
  const double inter = static_cast<double>(x1 - x0) * (y1 - y0);
  const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Field min_eig_response(const Field& img, int filter_dim) {
  if (filter_dim < 3 || filter_dim % 2 == 0)
    throw InvalidParameter("min_eig_response: filter dimension must be odd and >= 3");
  const Gradient g = gradient(img);
  const int w = img.width();
  const int h = img.height();
  Field sxx(w, h), syy(w, h), sxy(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double gx = g.gx.pixels()[i];
    const double gy = g.gy.pixels()[i];
    sxx.pixels()[i] = gx * gx;
    syy.pixels()[i] = gy * gy;
    sxy.pixels()[i] = gx * gy;
  }
  const auto kernel = gaussian_kernel((filter_dim - 1) / 4.0, filter_dim / 2);
  sxx = convolve_separable(sxx, kernel);
  syy = convolve_separable(syy, kernel);
  sxy = convolve_separable(sxy, kernel);

  Field resp(w, h);
  for (std::size_t i = 0; i < resp.size(); ++i) {
    const double a = sxx.pixels()[i];
    const double c = syy.pixels()[i];
    const double b = sxy.pixels()[i];
    const double half_diff = 0.5 * (a - c);
    const double lambda = 0.5 * (a + c) - std::sqrt(half_diff * half_diff + b * b);
    resp.pixels()[i] = std::max(lambda, 0.0);
  }
  return resp;
}

namespace {

// Vertex of the parabola through three samples, clamped to half a pixel.
double parabola_offset(double l, double c, double r) {
  const double denom = l - 2.0 * c + r;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (l - r) / denom, -0.5, 0.5);
}

std::pair<double, double> quadratic_peak(const Field& r, int x, int y) {
  return {parabola_offset(r(x - 1, y), r(x, y), r(x + 1, y)), parabola_offset(r(x, y - 1), r(x, y), r(x, y + 1))};
}

}  // namespace

std::vector<FeaturePoint> detect_corners(const GrayImage& img, const Roi& roi, const CornerParams& params) {
  if (!roi.inside(img.width(), img.height())) throw InvalidParameter("detect_corners: ROI outside image");
  if (!(params.min_quality > 0.0 && params.min_quality < 1.0))
    throw InvalidParameter("detect_corners: min_quality must lie in (0, 1)");
  if (params.max_points < 1) throw InvalidParameter("detect_corners: max_points must be >= 1");

  // Crop with enough margin that responses on ROI +/- 1 equal the full-frame ones.
  const int margin = params.filter_dim / 2 + 3;
  const int cx0 = std::max(0, roi.x - margin);
  const int cy0 = std::max(0, roi.y - margin);
  const int cx1 = std::min(img.width(), roi.x + roi.w + margin);
  const int cy1 = std::min(img.height(), roi.y + roi.h + margin);
  const int cw = cx1 - cx0;
  const int ch = cy1 - cy0;
  if (cw < 3 || ch < 3) return {};
  const Field resp = min_eig_response(crop(static_cast<const Field&>(img), cx0, cy0, cw, ch), params.filter_dim);

  const int rx0 = roi.x - cx0;
  const int ry0 = roi.y - cy0;
  double max_resp = 0.0;
  for (int y = ry0; y < ry0 + roi.h; ++y)
    for (int x = rx0; x < rx0 + roi.w; ++x) max_resp = std::max(max_resp, resp(x, y));
  if (!(max_resp > 0.0)) return {};
  const double threshold = params.min_quality * max_resp;

  std::vector<std::tuple<double, int, int>> peaks;
  for (int y = ry0; y < ry0 + roi.h; ++y) {
    for (int x = rx0; x < rx0 + roi.w; ++x) {
      const double v = resp(x, y);
      if (v < threshold || v <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= cw || ny >= ch) continue;
          const double n = resp(nx, ny);
          // strict against earlier neighbours in raster order, non-strict against later ones
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (earlier ? n >= v : n > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.emplace_back(v, y, x);
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  if (peaks.size() > static_cast<std::size_t>(params.max_points)) peaks.resize(params.max_points);

  std::vector<FeaturePoint> out;
  out.reserve(peaks.size());
  for (const auto& [v, y, x] : peaks) {
    double ox = 0.0, oy = 0.0;
    if (x > 0 && y > 0 && x < cw - 1 && y < ch - 1) std::tie(ox, oy) = quadratic_peak(resp, x, y);
    const double px = std::clamp(cx0 + x + ox, static_cast<double>(roi.x), static_cast<double>(roi.x + roi.w - 1));
    const double py = std::clamp(cy0 + y + oy, static_cast<double>(roi.y), static_cast<double>(roi.y + roi.h - 1));
    out.push_back({px, py, v});
  }
  return out;
}

}  // namespace boltrot
