#include "boltrot/klt.hpp"

#include <cmath>
#include <limits>

namespace boltrot {

void TrackerConfig::validate() const {
  if (np < 1) throw InvalidParameter("tracker: np must be >= 1");
  if (!(be > 0.0)) throw InvalidParameter("tracker: be must be positive");
  if (bs < 3 || bs % 2 == 0) throw InvalidParameter("tracker: bs must be odd and >= 3");
  if (ni < 1) throw InvalidParameter("tracker: ni must be >= 1");
  if (!(eps > 0.0)) throw InvalidParameter("tracker: eps must be positive");
}

std::string_view to_string(LossReason r) noexcept {
  switch (r) {
    case LossReason::None: return "tracked";
    case LossReason::OutOfBounds: return "out_of_bounds";
    case LossReason::Singular: return "singular";
    case LossReason::NoConvergence: return "no_convergence";
    case LossReason::FbError: return "fb_error";
  }
  return "unknown";
}

TrackingFrame prepare_frame(Pyramid pyramid) {
  TrackingFrame f;
  f.gradients.reserve(pyramid.levels.size());
  for (const auto& level : pyramid.levels) f.gradients.push_back(gradient(level));
  f.pyramid = std::move(pyramid);
  return f;
}

TrackingFrame prepare_frame(const GrayImage& img, int np) { return prepare_frame(build_pyramid(img, np)); }

namespace {

constexpr double kSingularEig = 1e-6;
constexpr double kMaxFinalUpdate = 1.0;

// Samples a (2*half+1)^2 window centred on (cx, cy). Every tap shares the same
// fractional offset, so the bilinear weights are computed once.
void sample_window(const Field& img, double cx, double cy, int half, double* out) {
  const double fx0 = std::floor(cx);
  const double fy0 = std::floor(cy);
  const double ax = cx - fx0;
  const double ay = cy - fy0;
  const int x0 = static_cast<int>(fx0) - half;
  const int y0 = static_cast<int>(fy0) - half;
  const int n = 2 * half + 1;
  const double w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
  if (x0 >= 0 && y0 >= 0 && x0 + n < img.width() && y0 + n < img.height()) {
    for (int j = 0; j < n; ++j) {
      const double* r0 = img.row(y0 + j) + x0;
      const double* r1 = img.row(y0 + j + 1) + x0;
      for (int i = 0; i < n; ++i) *out++ = w00 * r0[i] + w10 * r0[i + 1] + w01 * r1[i] + w11 * r1[i + 1];
    }
    return;
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) *out++ = sample_bilinear_clamped(img, cx + i - half, cy + j - half);
}

bool window_inside(const TrackingFrame& f, double x, double y, int half) {
  return std::isfinite(x) && std::isfinite(y) && x - half >= 0.0 && y - half >= 0.0 &&
         x + half <= f.width() - 1 && y + half <= f.height() - 1;
}

}  // namespace

TrackOutcome track_point(const TrackingFrame& prev, const TrackingFrame& next, double x, double y,
                         const TrackerConfig& cfg) {
  const int levels = cfg.np;
  if (prev.pyramid.level_count() != levels || next.pyramid.level_count() != levels)
    throw InvalidParameter("track_point: pyramid level count does not match tracker np");

  const int half = cfg.bs / 2;
  const int n = cfg.bs * cfg.bs;
  TrackOutcome out;
  out.new_x = x;
  out.new_y = y;
  if (!window_inside(prev, x, y, half)) {
    out.reason = LossReason::OutOfBounds;
    return out;
  }

  std::vector<double> tmpl(n), gxw(n), gyw(n), cur(n);
  double gx_guess = 0.0, gy_guess = 0.0;
  for (int level = levels - 1; level >= 0; --level) {
    const double scale = std::ldexp(1.0, -level);
    const double ux = x * scale;
    const double uy = y * scale;
    const GrayImage& ip = prev.pyramid.levels[level];
    const GrayImage& in = next.pyramid.levels[level];
    sample_window(ip, ux, uy, half, tmpl.data());
    sample_window(prev.gradients[level].gx, ux, uy, half, gxw.data());
    sample_window(prev.gradients[level].gy, ux, uy, half, gyw.data());

    double gxx = 0, gxy = 0, gyy = 0;
    for (int k = 0; k < n; ++k) {
      gxx += gxw[k] * gxw[k];
      gxy += gxw[k] * gyw[k];
      gyy += gyw[k] * gyw[k];
    }
    const double half_tr = 0.5 * (gxx + gyy);
    const double min_eig = half_tr - std::sqrt(0.25 * (gxx - gyy) * (gxx - gyy) + gxy * gxy);
    const double det = gxx * gyy - gxy * gxy;
    if (!(min_eig >= kSingularEig) || !(det > 0.0)) {
      if (level == 0) {
        out.reason = LossReason::Singular;
        return out;
      }
      gx_guess *= 2.0;
      gy_guess *= 2.0;
      continue;
    }

    double dx = 0.0, dy = 0.0;
    double last_step = 0.0;
    for (int it = 0; it < cfg.ni; ++it) {
      sample_window(in, ux + gx_guess + dx, uy + gy_guess + dy, half, cur.data());
      double bx = 0.0, by = 0.0;
      for (int k = 0; k < n; ++k) {
        const double diff = tmpl[k] - cur[k];
        bx += diff * gxw[k];
        by += diff * gyw[k];
      }
      const double sx = (gyy * bx - gxy * by) / det;
      const double sy = (gxx * by - gxy * bx) / det;
      dx += sx;
      dy += sy;
      last_step = std::hypot(sx, sy);
      if (!std::isfinite(last_step) || last_step < cfg.eps) break;
    }
    if (level == 0) {
      out.new_x = x + gx_guess + dx;
      out.new_y = y + gy_guess + dy;
      if (!window_inside(next, out.new_x, out.new_y, half)) {
        out.reason = LossReason::OutOfBounds;
        return out;
      }
      if (!(last_step <= kMaxFinalUpdate)) {
        out.reason = LossReason::NoConvergence;
        return out;
      }
    } else {
      gx_guess = 2.0 * (gx_guess + dx);
      gy_guess = 2.0 * (gy_guess + dy);
    }
  }
  return out;
}

double forward_backward_check(const TrackingFrame& prev, const TrackingFrame& next, const FeaturePoint& point,
                              TrackOutcome& forward, const TrackerConfig& cfg) {
  if (!forward.tracked()) return std::numeric_limits<double>::infinity();
  const TrackOutcome back = track_point(next, prev, forward.new_x, forward.new_y, cfg);
  double fb = std::numeric_limits<double>::infinity();
  if (back.tracked()) fb = std::hypot(back.new_x - point.x, back.new_y - point.y);
  forward.fb_error = fb;
  if (!(fb <= cfg.be)) forward.reason = LossReason::FbError;
  return fb;
}

std::vector<TrackOutcome> track_points(const TrackingFrame& prev, const TrackingFrame& next,
                                       std::span<const FeaturePoint> points, const TrackerConfig& cfg) {
  cfg.validate();
  if (prev.pyramid.level_count() != cfg.np || next.pyramid.level_count() != cfg.np)
    throw InvalidParameter("track_points: pyramid level count does not match tracker np");
  std::vector<TrackOutcome> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    TrackOutcome o = track_point(prev, next, p.x, p.y, cfg);
    forward_backward_check(prev, next, p, o, cfg);
    out.push_back(o);
  }
  return out;
}

std::vector<TrackOutcome> track_points(const Pyramid& prev, const Pyramid& next,
                                       std::span<const FeaturePoint> points, const TrackerConfig& cfg) {
  return track_points(prepare_frame(prev), prepare_frame(next), points, cfg);
}

}  // namespace boltrot
