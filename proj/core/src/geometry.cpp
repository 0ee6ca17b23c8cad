#include "boltrot/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "boltrot/error.hpp"

namespace boltrot {

double wrap_angle(double theta) noexcept {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (theta > -std::numbers::pi && theta <= std::numbers::pi) return theta;
  double w = std::fmod(theta + std::numbers::pi, two_pi);
  if (w <= 0.0) w += two_pi;
  return w - std::numbers::pi;
}

Point2 RigidTransform::apply(Point2 p) const noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {p.x * c - p.y * s + tx, p.x * s + p.y * c + ty};
}

Matrix3 RigidTransform::matrix() const noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {{{c, s, 0.0}, {-s, c, 0.0}, {tx, ty, 1.0}}};
}

RigidTransform RigidTransform::inverse() const noexcept {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // p = R^T (q - t)
  return {wrap_angle(-theta), -(tx * c + ty * s), -(-tx * s + ty * c)};
}

RigidTransform RigidTransform::compose(const RigidTransform& then) const noexcept {
  const Point2 t = then.apply({tx, ty});
  return {wrap_angle(theta + then.theta), t.x, t.y};
}

RigidTransform RigidTransform::from_matrix(const Matrix3& m) noexcept {
  return {extract_angle(m), m[2][0], m[2][1]};
}

Point2 apply(const Matrix3& m, Point2 p) noexcept {
  return {p.x * m[0][0] + p.y * m[1][0] + m[2][0], p.x * m[0][1] + p.y * m[1][1] + m[2][1]};
}

void MsacConfig::validate() const {
  if (!(inlier_threshold > 0.0)) throw InvalidParameter("msac: inlier threshold must be positive");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidParameter("msac: confidence must lie in (0, 1)");
  if (max_trials < 1) throw InvalidParameter("msac: max_trials must be >= 1");
}

std::size_t MsacResult::inlier_count() const noexcept {
  return static_cast<std::size_t>(std::count(inliers.begin(), inliers.end(), true));
}

RigidTransform fit_rigid_lsq(std::span<const Point2> src, std::span<const Point2> dst) {
  if (src.size() != dst.size()) throw DegenerateInput("fit_rigid_lsq: point lists differ in length");
  const std::size_t n = src.size();
  if (n < 2) throw DegenerateInput("fit_rigid_lsq: need at least 2 correspondences");
  double sx = 0, sy = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += src[i].x;
    sy += src[i].y;
    dx += dst[i].x;
    dy += dst[i].y;
  }
  sx /= n;
  sy /= n;
  dx /= n;
  dy /= n;
  double cross = 0, dot = 0, spread = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = src[i].x - sx, ay = src[i].y - sy;
    const double bx = dst[i].x - dx, by = dst[i].y - dy;
    cross += ax * by - ay * bx;
    dot += ax * bx + ay * by;
    spread += ax * ax + ay * ay;
  }
  if (!(spread > 1e-18)) throw DegenerateInput("fit_rigid_lsq: source points are coincident");
  RigidTransform t;
  t.theta = wrap_angle(std::atan2(cross, dot));
  const double c = std::cos(t.theta);
  const double s = std::sin(t.theta);
  t.tx = dx - (sx * c - sy * s);
  t.ty = dy - (sx * s + sy * c);
  return t;
}

RigidTransform fit_rigid_lsq(const Correspondences& c) { return fit_rigid_lsq(c.src, c.dst); }

namespace {

double squared_residual(const RigidTransform& t, Point2 s, Point2 d) noexcept {
  const Point2 p = t.apply(s);
  const double ex = p.x - d.x;
  const double ey = p.y - d.y;
  return ex * ex + ey * ey;
}

}  // namespace

MsacResult fit_rigid_msac(const Correspondences& c, const MsacConfig& cfg) {
  cfg.validate();
  const std::size_t n = c.size();
  if (c.dst.size() != n) throw DegenerateInput("fit_rigid_msac: point lists differ in length");
  if (n < 2) throw EstimationFailure("fit_rigid_msac: need at least 2 correspondences");

  const double thr2 = cfg.inlier_threshold * cfg.inlier_threshold;
  std::mt19937_64 rng(cfg.seed);
  auto draw = [&](std::size_t bound) { return static_cast<std::size_t>(rng() % bound); };

  RigidTransform best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_support = 0;
  bool have_model = false;
  long required = cfg.max_trials;
  int trials = 0;
  for (; trials < required && trials < cfg.max_trials; ++trials) {
    const std::size_t i = draw(n);
    std::size_t j = draw(n - 1);
    if (j >= i) ++j;
    const Point2 s2[2] = {c.src[i], c.src[j]};
    const Point2 d2[2] = {c.dst[i], c.dst[j]};
    RigidTransform model;
    try {
      model = fit_rigid_lsq(s2, d2);
    } catch (const DegenerateInput&) {
      continue;
    }
    double cost = 0.0;
    std::size_t support = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r2 = squared_residual(model, c.src[k], c.dst[k]);
      if (r2 < thr2) {
        cost += r2;
        ++support;
      } else {
        cost += thr2;
      }
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = model;
      best_support = support;
      have_model = true;
      const double w = static_cast<double>(support) / static_cast<double>(n);
      const double p_all = w * w;
      if (p_all >= 1.0) {
        required = trials + 1;
      } else if (p_all > 0.0) {
        const double k = std::log(1.0 - cfg.confidence) / std::log(1.0 - p_all);
        required = static_cast<long>(std::min<double>(std::ceil(k), cfg.max_trials));
      }
    }
  }
  if (!have_model || best_support < 2) throw EstimationFailure("fit_rigid_msac: no model with >= 2 inliers");

  MsacResult result;
  result.trials = trials;
  result.inliers.assign(n, false);
  std::vector<Point2> src, dst;
  for (std::size_t k = 0; k < n; ++k) {
    if (squared_residual(best, c.src[k], c.dst[k]) < thr2) {
      result.inliers[k] = true;
      src.push_back(c.src[k]);
      dst.push_back(c.dst[k]);
    }
  }
  try {
    result.transform = fit_rigid_lsq(src, dst);
  } catch (const DegenerateInput&) {
    throw EstimationFailure("fit_rigid_msac: consensus set is degenerate");
  }
  return result;
}

Matrix3 transform_about_point(const RigidTransform& t, double a, double b) noexcept {
  const Matrix3 m = t.matrix();
  const Matrix3 shift = {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-a, -b, 1.0}}};
  Matrix3 out{};
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k < 3; ++k) out[r][col] += shift[r][k] * m[k][col];
  out[2][0] += a;
  out[2][1] += b;
  return out;
}

double extract_angle(const Matrix3& m) noexcept { return std::atan2(m[0][1], m[0][0]); }

double extract_angle(const RigidTransform& t) noexcept { return extract_angle(t.matrix()); }

Accumulated accumulate(std::span<const double> increments) noexcept {
  Accumulated acc;
  for (double d : increments) {
    acc.total += d;
    if (std::abs(d) >= std::numbers::pi / 3.0) acc.interval_violation = true;
  }
  return acc;
}

}  // namespace boltrot
