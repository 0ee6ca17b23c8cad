#pragma once

// Rigid 2-D motion between point sets: closed-form least squares, MSAC,
// re-centring about an arbitrary point and angle accumulation.
//
// Matrices follow the row-vector convention [x' y' 1] = [x y 1] * T with
//
//       |  cos t   sin t   0 |
//   T = | -sin t   cos t   0 |
//       |  tx      ty      1 |
//
// so x' = x cos t - y sin t + tx and y' = x sin t + y cos t + ty. With image
// axes (x right, y down) a positive angle turns clockwise on screen.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace boltrot {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct RigidTransform {
  double theta = 0.0;  ///< radians, normalized into (-pi, pi]
  double tx = 0.0;
  double ty = 0.0;

  Point2 apply(Point2 p) const noexcept;
  Matrix3 matrix() const noexcept;
  RigidTransform inverse() const noexcept;
  /// `then` applied after *this.
  RigidTransform compose(const RigidTransform& then) const noexcept;

  static RigidTransform from_matrix(const Matrix3& m) noexcept;
};

double wrap_angle(double theta) noexcept;

/// Applies a row-vector homogeneous matrix to a point.
Point2 apply(const Matrix3& m, Point2 p) noexcept;

struct Correspondences {
  std::vector<Point2> src;
  std::vector<Point2> dst;

  std::size_t size() const noexcept { return src.size(); }
};

struct MsacConfig {
  double inlier_threshold = 1.5;  ///< px
  double confidence = 0.99;
  int max_trials = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MsacResult {
  RigidTransform transform;
  std::vector<bool> inliers;
  int trials = 0;

  std::size_t inlier_count() const noexcept;
};

/// Scale-free Procrustes fit. Throws DegenerateInput for < 2 points or coincident sources.
RigidTransform fit_rigid_lsq(const Correspondences& c);
RigidTransform fit_rigid_lsq(std::span<const Point2> src, std::span<const Point2> dst);

/// Seeded MSAC over 2-point minimal samples, refined by least squares on the
/// best consensus set. Throws EstimationFailure when no model has >= 2 inliers.
MsacResult fit_rigid_msac(const Correspondences& c, const MsacConfig& cfg);

/// T* = [[1,0,0],[0,1,0],[-a,-b,1]] * T + [[0,0,0],[0,0,0],[a,b,0]]:
/// rotation by theta about (a, b) followed by (tx, ty).
Matrix3 transform_about_point(const RigidTransform& t, double a, double b) noexcept;

/// atan2(T[0][1], T[0][0]) in zero-based indices.
double extract_angle(const Matrix3& m) noexcept;
double extract_angle(const RigidTransform& t) noexcept;

struct Accumulated {
  double total = 0.0;
  bool interval_violation = false;  ///< some |increment| >= pi/3
};

/// Plain sum with no modular wrap.
Accumulated accumulate(std::span<const double> increments) noexcept;

}  // namespace boltrot
