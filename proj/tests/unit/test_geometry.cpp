#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "boltrot/error.hpp"
#include "boltrot/geometry.hpp"
#include "fixtures.hpp"

using namespace boltrot;

namespace {

Correspondences synthesize(double theta, double tx, double ty, int n, unsigned seed, double spread = 50.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  Correspondences c;
  for (int i = 0; i < n; ++i) {
    const Point2 p{u(rng) + 100.0, u(rng) + 80.0};
    c.src.push_back(p);
    c.dst.push_back(fixtures::rigid(theta, tx, ty, p));
  }
  return c;
}

double sse(const Correspondences& c, double theta) {
  // residual after the best translation for a fixed angle
  const double cs = std::cos(theta), sn = std::sin(theta);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    mx += c.dst[i].x - (c.src[i].x * cs - c.src[i].y * sn);
    my += c.dst[i].y - (c.src[i].x * sn + c.src[i].y * cs);
  }
  mx /= c.size();
  my /= c.size();
  double s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double ex = c.src[i].x * cs - c.src[i].y * sn + mx - c.dst[i].x;
    const double ey = c.src[i].x * sn + c.src[i].y * cs + my - c.dst[i].y;
    s += ex * ex + ey * ey;
  }
  return s;
}

}  // namespace

TEST(RigidTransform, MatrixLayoutRowVector) {
  const RigidTransform t{0.3, 2.0, -1.0};
  const Matrix3 m = t.matrix();
  EXPECT_DOUBLE_EQ(m[0][0], std::cos(0.3));
  EXPECT_DOUBLE_EQ(m[0][1], std::sin(0.3));
  EXPECT_DOUBLE_EQ(m[1][0], -std::sin(0.3));
  EXPECT_DOUBLE_EQ(m[2][0], 2.0);
  EXPECT_DOUBLE_EQ(m[2][2], 1.0);
  const Point2 p{3.0, 4.0};
  const Point2 a = apply(m, p), b = t.apply(p), c = fixtures::rigid(0.3, 2.0, -1.0, p);
  EXPECT_NEAR(a.x, c.x, 1e-12);
  EXPECT_NEAR(a.y, c.y, 1e-12);
  EXPECT_NEAR(b.x, c.x, 1e-12);
  EXPECT_NEAR(b.y, c.y, 1e-12);
}

TEST(RigidTransform, InverseAndCompose) {
  const RigidTransform t{1.1, 5.0, -3.0}, u{-0.4, 1.0, 2.0};
  const Point2 p{7.0, -2.0};
  const Point2 back = t.inverse().apply(t.apply(p));
  EXPECT_NEAR(back.x, p.x, 1e-12);
  EXPECT_NEAR(back.y, p.y, 1e-12);
  const Point2 seq = u.apply(t.apply(p)), comp = t.compose(u).apply(p);
  EXPECT_NEAR(seq.x, comp.x, 1e-12);
  EXPECT_NEAR(seq.y, comp.y, 1e-12);
}

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_angle(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
  EXPECT_DOUBLE_EQ(wrap_angle(0.25), 0.25);
}

TEST(FitRigidLsq, IdentityWhenSrcEqualsDst) {
  Correspondences c = synthesize(0, 0, 0, 10, 1);
  c.dst = c.src;
  const RigidTransform t = fit_rigid_lsq(c);
  EXPECT_NEAR(t.theta, 0.0, 1e-15);
  EXPECT_NEAR(t.tx, 0.0, 1e-12);
  EXPECT_NEAR(t.ty, 0.0, 1e-12);
}

TEST(FitRigidLsq, QuarterTurnAboutOrigin) {
  Correspondences c;
  c.src = {{1, 0}, {0, 2}};
  c.dst = {{0, 1}, {-2, 0}};
  const RigidTransform t = fit_rigid_lsq(c);
  EXPECT_NEAR(t.theta, std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(t.tx, 0.0, 1e-12);
  EXPECT_NEAR(t.ty, 0.0, 1e-12);
}

TEST(FitRigidLsq, RecoversKnownTransform) {
  const Correspondences c = synthesize(0.3, 2.0, -1.0, 50, 2);
  const RigidTransform t = fit_rigid_lsq(c);
  EXPECT_NEAR(t.theta, 0.3, 1e-9);
  EXPECT_NEAR(t.tx, 2.0, 1e-9);
  EXPECT_NEAR(t.ty, -1.0, 1e-9);
}

TEST(FitRigidLsq, DegenerateInputs) {
  Correspondences one;
  one.src = {{1, 1}};
  one.dst = {{2, 2}};
  EXPECT_THROW(fit_rigid_lsq(one), DegenerateInput);
  Correspondences same;
  same.src = {{3, 3}, {3, 3}, {3, 3}};
  same.dst = {{1, 1}, {2, 2}, {3, 3}};
  EXPECT_THROW(fit_rigid_lsq(same), DegenerateInput);
}

TEST(FitRigidLsq, ResidualIsGlobalMinimum) {
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0.0, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    Correspondences c = synthesize(0.1 * trial - 1.0, trial, -trial, 30, 100 + trial);
    for (auto& p : c.dst) p = {p.x + noise(rng), p.y + noise(rng)};
    const double theta = fit_rigid_lsq(c).theta;
    const double at = sse(c, theta);
    EXPECT_LT(at, sse(c, theta + 1e-3));
    EXPECT_LT(at, sse(c, theta - 1e-3));
  }
}

TEST(FitRigidLsq, CompositionConsistency) {
  const Correspondences ab = synthesize(0.35, 1.0, 2.0, 20, 4);
  Correspondences bc;
  bc.src = ab.dst;
  for (const auto& p : ab.dst) bc.dst.push_back(fixtures::rigid(-0.15, -3.0, 0.5, p));
  Correspondences ac;
  ac.src = ab.src;
  ac.dst = bc.dst;
  EXPECT_NEAR(extract_angle(fit_rigid_lsq(ab)) + extract_angle(fit_rigid_lsq(bc)), extract_angle(fit_rigid_lsq(ac)),
              1e-6);
}

TEST(FitRigidMsac, OutlierFreeEqualsLsq) {
  const Correspondences c = synthesize(-0.7, 4.0, 9.0, 40, 5);
  const MsacResult r = fit_rigid_msac(c, MsacConfig{});
  const RigidTransform l = fit_rigid_lsq(c);
  EXPECT_NEAR(r.transform.theta, l.theta, 1e-9);
  EXPECT_NEAR(r.transform.tx, l.tx, 1e-9);
  EXPECT_NEAR(r.transform.ty, l.ty, 1e-9);
  EXPECT_EQ(r.inlier_count(), c.size());
}

TEST(FitRigidMsac, RecoversThroughThirtyPercentOutliers) {
  int good = 0;
  for (unsigned trial = 0; trial < 100; ++trial) {
    Correspondences c = synthesize(0.2, 3.0, -2.0, 100, 1000 + trial);
    std::mt19937 rng(trial);
    std::uniform_real_distribution<double> u(0.0, 200.0);
    for (int i = 0; i < 30; ++i) c.dst[i] = {u(rng), u(rng)};
    MsacConfig cfg;
    cfg.seed = trial;
    if (std::abs(fit_rigid_msac(c, cfg).transform.theta - 0.2) < 1e-3) ++good;
  }
  EXPECT_GE(good, 99);
}

TEST(FitRigidMsac, DeterministicForSeed) {
  Correspondences c = synthesize(0.5, 0, 0, 60, 6);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 150.0);
  for (int i = 0; i < 20; ++i) c.dst[i * 3] = {u(rng), u(rng)};
  MsacConfig cfg;
  cfg.seed = 42;
  const MsacResult a = fit_rigid_msac(c, cfg), b = fit_rigid_msac(c, cfg);
  EXPECT_EQ(a.transform.theta, b.transform.theta);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.trials, b.trials);
}

TEST(FitRigidMsac, InlierMaskTranslationInvariant) {
  Correspondences c = synthesize(0.25, 1, 1, 80, 7);
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(0.0, 150.0);
  for (int i = 0; i < 25; ++i) c.dst[i * 3] = {u(rng), u(rng)};
  Correspondences moved = c;
  for (auto& p : moved.src) p = {p.x + 64.0, p.y - 32.0};
  for (auto& p : moved.dst) p = {p.x + 64.0, p.y - 32.0};
  MsacConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(fit_rigid_msac(c, cfg).inliers, fit_rigid_msac(moved, cfg).inliers);
}

TEST(FitRigidMsac, FailureModes) {
  Correspondences one;
  one.src = {{1, 1}};
  one.dst = {{2, 2}};
  EXPECT_THROW(fit_rigid_msac(one, MsacConfig{}), EstimationFailure);
  MsacConfig bad;
  bad.confidence = 1.0;
  EXPECT_THROW(fit_rigid_msac(synthesize(0, 0, 0, 5, 1), bad), InvalidParameter);
}

TEST(TransformAboutPoint, ZeroOffsetIsPlainMatrix) {
  const RigidTransform t{0.7, 3.0, 4.0};
  const Matrix3 a = transform_about_point(t, 0, 0), m = t.matrix();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(a[r][c], m[r][c], 1e-15);
}

TEST(TransformAboutPoint, PureTranslationUnchanged) {
  const RigidTransform t{0.0, -5.0, 2.5};
  const Matrix3 a = transform_about_point(t, 13.0, -7.0);
  const Point2 p = apply(a, {4.0, 9.0});
  EXPECT_NEAR(p.x, -1.0, 1e-12);
  EXPECT_NEAR(p.y, 11.5, 1e-12);
}

TEST(TransformAboutPoint, FirstRowsSharedAndCentreFixed) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0), ang(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const RigidTransform t{ang(rng), 0.0, 0.0};
    const double a = u(rng), b = u(rng);
    const Matrix3 m = transform_about_point(t, a, b), base = t.matrix();
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(m[r][c], base[r][c]);
    const Point2 q = apply(m, {a, b});
    EXPECT_NEAR(q.x, a, 1e-12);
    EXPECT_NEAR(q.y, b, 1e-12);
  }
  const Point2 q = apply(transform_about_point(RigidTransform{0.4, 0, 0}, 10, 20), {10, 20});
  EXPECT_NEAR(q.x, 10.0, 1e-12);
  EXPECT_NEAR(q.y, 20.0, 1e-12);
}

TEST(ExtractAngle, RoundTrips) {
  EXPECT_EQ(extract_angle(RigidTransform{}), 0.0);
  EXPECT_NEAR(extract_angle(RigidTransform{0.3, 1, 2}), 0.3, 1e-12);
  const double near_pi = std::numbers::pi - 1e-9;
  EXPECT_NEAR(extract_angle(RigidTransform{near_pi, 0, 0}), near_pi, 1e-12);
  EXPECT_GT(extract_angle(RigidTransform{near_pi, 0, 0}), 0.0);
}

TEST(Accumulate, PlainSum) {
  EXPECT_EQ(accumulate({}).total, 0.0);
  const std::vector<double> tenth(10, 0.1);
  EXPECT_NEAR(accumulate(tenth).total, 1.0, 1e-12);
  const std::vector<double> mixed{0.2, -0.05, 0.2};
  EXPECT_NEAR(accumulate(mixed).total, 0.35, 1e-12);
  EXPECT_FALSE(accumulate(mixed).interval_violation);
  const std::vector<double> many(200, 0.1);
  EXPECT_NEAR(accumulate(many).total, 20.0, 1e-9);
}

TEST(Accumulate, LargeIncrementFlagged) {
  const std::vector<double> inc{0.1, std::numbers::pi / 3, 0.1};
  const Accumulated a = accumulate(inc);
  EXPECT_TRUE(a.interval_violation);
  EXPECT_NEAR(a.total, 0.2 + std::numbers::pi / 3, 1e-12);
  const std::vector<double> neg{-1.1};
  EXPECT_TRUE(accumulate(neg).interval_violation);
}
