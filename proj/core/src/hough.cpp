#include "boltrot/hough.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "boltrot/csv.hpp"
#include "boltrot/error.hpp"

namespace boltrot {

namespace {

constexpr double kFlat = 1e-12;

double field_max(const Field& f) {
  double m = 0.0;
  for (double v : f.pixels()) m = std::max(m, v);
  return m;
}

/// 3x3 correlation with edge replication.
Field correlate3(const Field& img, const double (&k)[3][3]) {
  Field out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) s += k[dy + 1][dx + 1] * img.clamped(x + dx, y + dy);
      out(x, y) = s;
    }
  return out;
}

BinaryImage canny(const GrayImage& img, double low, double high) {
  const Field smooth = gaussian_blur(static_cast<const Field&>(img), 1.4);
  static constexpr double sx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr double sy[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  const Field gx = correlate3(smooth, sx);
  const Field gy = correlate3(smooth, sy);
  const int w = img.width(), h = img.height();
  Field mag(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mag(x, y) = std::hypot(gx(x, y), gy(x, y));
  const double mmax = field_max(mag);
  BinaryImage out(w, h);
  if (mmax <= kFlat) return out;

  // Non-max suppression along the quantized gradient direction. Ties go to the
  // pixel on the negative side so a symmetric ridge stays one pixel wide.
  Field thin(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (m <= kFlat * mmax) continue;
      double ang = std::atan2(gy(x, y), gx(x, y)) * 180.0 / std::numbers::pi;
      if (ang < 0) ang += 180.0;
      int dx, dy;
      if (ang < 22.5 || ang >= 157.5) {
        dx = 1, dy = 0;
      } else if (ang < 67.5) {
        dx = 1, dy = 1;
      } else if (ang < 112.5) {
        dx = 0, dy = 1;
      } else {
        dx = -1, dy = 1;
      }
      const double before = mag.clamped(x - dx, y - dy);
      const double after = mag.clamped(x + dx, y + dy);
      if (m > before && m >= after) thin(x, y) = m / mmax;
    }

  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (thin(x, y) >= high && !out(x, y)) {
        out(x, y) = 1;
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int ny = cy - 1; ny <= cy + 1; ++ny)
            for (int nx = cx - 1; nx <= cx + 1; ++nx) {
              if (!out.contains(nx, ny) || out(nx, ny) || thin(nx, ny) < low || thin(nx, ny) == 0.0) continue;
              out(nx, ny) = 1;
              stack.emplace_back(nx, ny);
            }
        }
      }
  return out;
}

BinaryImage prewitt(const GrayImage& img, double t) {
  static constexpr double px[3][3] = {{-1, 0, 1}, {-1, 0, 1}, {-1, 0, 1}};
  static constexpr double py[3][3] = {{-1, -1, -1}, {0, 0, 0}, {1, 1, 1}};
  const Field gx = correlate3(img, px);
  const Field gy = correlate3(img, py);
  Field mag(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) mag(x, y) = std::hypot(gx(x, y), gy(x, y));
  const double mmax = field_max(mag);
  BinaryImage out(img.width(), img.height());
  if (mmax <= kFlat) return out;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out(x, y) = mag(x, y) >= t * mmax ? 1 : 0;
  return out;
}

BinaryImage laplacian_of_gaussian(const GrayImage& img, double t) {
  const Field smooth = gaussian_blur(static_cast<const Field&>(img), 2.0);
  static constexpr double lap[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  const Field L = correlate3(smooth, lap);
  const int w = img.width(), h = img.height();
  // Zero crossing between p and its right or lower neighbour; the slope is the
  // response difference across the crossing and is marked on the pixel of
  // smaller magnitude.
  Field slope(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double a = L(x, y);
      const int nb[2][2] = {{x + 1, y}, {x, y + 1}};
      for (const auto& n : nb) {
        if (!L.contains(n[0], n[1])) continue;
        const double b = L(n[0], n[1]);
        if (!((a > 0 && b < 0) || (a < 0 && b > 0))) continue;
        const double s = std::abs(a - b);
        if (std::abs(a) <= std::abs(b)) {
          slope(x, y) = std::max(slope(x, y), s);
        } else {
          slope(n[0], n[1]) = std::max(slope(n[0], n[1]), s);
        }
      }
    }
  const double smax = field_max(slope);
  BinaryImage out(w, h);
  if (smax <= kFlat) return out;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = slope(x, y) > 0.0 && slope(x, y) >= t * smax ? 1 : 0;
  return out;
}

void check_fraction(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw InvalidParameter(std::string("edge_map: ") + name + " must lie in (0, 1)");
}

}  // namespace

std::string_view to_string(EdgeMethod m) noexcept {
  switch (m) {
    case EdgeMethod::Canny: return "canny";
    case EdgeMethod::Prewitt: return "prewitt";
    case EdgeMethod::Log: return "log";
  }
  return "canny";
}

EdgeMethod edge_method_from_string(std::string_view s) {
  if (s == "canny") return EdgeMethod::Canny;
  if (s == "prewitt") return EdgeMethod::Prewitt;
  if (s == "log") return EdgeMethod::Log;
  throw InvalidParameter("unknown edge method '" + std::string(s) + "'");
}

BinaryImage edge_map(const GrayImage& img, EdgeMethod method, const EdgeThresholds& t) {
  switch (method) {
    case EdgeMethod::Canny:
      check_fraction(t.canny_low, "canny low threshold");
      check_fraction(t.canny_high, "canny high threshold");
      if (!(t.canny_low < t.canny_high)) throw InvalidParameter("edge_map: canny low must be below high");
      return canny(img, t.canny_low, t.canny_high);
    case EdgeMethod::Prewitt:
      check_fraction(t.prewitt, "prewitt threshold");
      return prewitt(img, t.prewitt);
    case EdgeMethod::Log:
      check_fraction(t.log, "log threshold");
      return laplacian_of_gaussian(img, t.log);
  }
  throw InvalidParameter("edge_map: unknown method");
}

std::vector<Line> hough_lines(const BinaryImage& edges, int n_peaks) {
  if (n_peaks < 1) throw InvalidParameter("hough_lines: n_peaks must be >= 1");
  const int w = edges.width(), h = edges.height();
  const int dmax = static_cast<int>(std::ceil(std::hypot(w, h)));
  const int nrho = 2 * dmax + 1;
  constexpr int kTheta = 180;
  double cs[kTheta], sn[kTheta];
  for (int t = 0; t < kTheta; ++t) {
    cs[t] = std::cos(t * std::numbers::pi / 180.0);
    sn[t] = std::sin(t * std::numbers::pi / 180.0);
  }
  std::vector<int> acc(static_cast<std::size_t>(nrho) * kTheta, 0);
  auto cell = [&](int r, int t) -> int& { return acc[static_cast<std::size_t>(t) * nrho + r]; };
  bool any = false;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!edges(x, y)) continue;
      any = true;
      for (int t = 0; t < kTheta; ++t) ++cell(static_cast<int>(std::lround(x * cs[t] + y * sn[t])) + dmax, t);
    }
  if (!any) return {};

  // theta wraps: the neighbour of 179 degrees is 0 degrees with rho negated.
  auto at = [&](int r, int t) -> int {
    if (t < 0) {
      t += kTheta;
      r = 2 * dmax - r;
    } else if (t >= kTheta) {
      t -= kTheta;
      r = 2 * dmax - r;
    }
    if (r < 0 || r >= nrho) return 0;
    return cell(r, t);
  };
  std::vector<Line> peaks;
  for (int t = 0; t < kTheta; ++t)
    for (int r = 0; r < nrho; ++r) {
      const int v = cell(r, t);
      if (v == 0) continue;
      bool keep = true;
      for (int dt = -1; dt <= 1 && keep; ++dt)
        for (int dr = -1; dr <= 1 && keep; ++dr) {
          if (!dt && !dr) continue;
          const int n = at(r + dr, t + dt);
          const bool earlier = dt < 0 || (dt == 0 && dr < 0);
          if (n > v || (earlier && n == v)) keep = false;
        }
      if (keep) peaks.push_back({static_cast<double>(r - dmax), static_cast<double>(t), v});
    }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Line& a, const Line& b) { return a.votes > b.votes; });
  if (static_cast<int>(peaks.size()) > n_peaks) peaks.resize(n_peaks);
  return peaks;
}

std::string lines_csv(const std::vector<Line>& lines) {
  std::string out = "rho,theta_deg,votes\n";
  for (const Line& l : lines) out += csv::fmt(l.rho) + ',' + csv::fmt(l.theta_deg) + ',' + std::to_string(l.votes) + '\n';
  return out;
}

}  // namespace boltrot
