#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "boltrot/features.hpp"
#include "boltrot/klt.hpp"
#include "fixtures.hpp"

using namespace boltrot;

namespace {

std::vector<FeaturePoint> grid_points(int lo, int hi, int step) {
  std::vector<FeaturePoint> pts;
  for (int y = lo; y <= hi; y += step)
    for (int x = lo; x <= hi; x += step) pts.push_back({static_cast<double>(x) + 0.3, static_cast<double>(y) + 0.6, 1.0});
  return pts;
}

}  // namespace

TEST(TrackerConfig, Validation) {
  TrackerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.bs = 4;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = {};
  c.np = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = {};
  c.be = 0.0;
  EXPECT_THROW(c.validate(), InvalidParameter);
  c = {};
  c.ni = 0;
  EXPECT_THROW(c.validate(), InvalidParameter);
}

TEST(Klt, IdenticalFramesZeroMotion) {
  const GrayImage img = fixtures::texture(64, 64, 31);
  const TrackerConfig cfg;
  const TrackingFrame f = prepare_frame(img, cfg.np);
  const auto pts = grid_points(10, 50, 8);
  const auto out = track_points(f, f, pts, cfg);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ASSERT_TRUE(out[i].tracked()) << to_string(out[i].reason);
    EXPECT_NEAR(out[i].new_x, pts[i].x, cfg.eps);
    EXPECT_NEAR(out[i].new_y, pts[i].y, cfg.eps);
    EXPECT_NEAR(out[i].fb_error, 0.0, cfg.eps);
  }
}

TEST(Klt, IntegerTranslationRecovered) {
  const GrayImage img = fixtures::texture(96, 96, 32);
  const GrayImage moved = fixtures::shift(img, 3, -2);
  const TrackerConfig cfg;
  const auto pts = grid_points(16, 76, 6);
  const auto out = track_points(prepare_frame(img, cfg.np), prepare_frame(moved, cfg.np), pts, cfg);
  int good = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!out[i].tracked()) continue;
    EXPECT_LT(out[i].fb_error, 0.1);
    if (std::hypot(out[i].new_x - pts[i].x - 3, out[i].new_y - pts[i].y + 2) < 0.1) ++good;
  }
  EXPECT_GE(good, static_cast<int>(0.9 * pts.size()));
}

TEST(Klt, ForwardBackwardTimeReversal) {
  const GrayImage img = fixtures::texture(96, 96, 33);
  const GrayImage moved = fixtures::shift(img, -2, 3);
  const TrackerConfig cfg;
  const TrackingFrame a = prepare_frame(img, cfg.np), b = prepare_frame(moved, cfg.np);
  const auto pts = grid_points(16, 76, 10);
  const auto fwd = track_points(a, b, pts, cfg);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!fwd[i].tracked()) continue;
    const TrackOutcome back = track_point(b, a, fwd[i].new_x, fwd[i].new_y, cfg);
    ASSERT_TRUE(back.tracked());
    const double fdx = fwd[i].new_x - pts[i].x, fdy = fwd[i].new_y - pts[i].y;
    const double bdx = back.new_x - fwd[i].new_x, bdy = back.new_y - fwd[i].new_y;
    EXPECT_LT(std::hypot(fdx + bdx, fdy + bdy), 0.2);
  }
}

TEST(Klt, WindowLeavingFrameIsOutOfBounds) {
  const GrayImage img = fixtures::texture(64, 64, 34);
  const TrackerConfig cfg;
  const TrackingFrame f = prepare_frame(img, cfg.np);
  const TrackOutcome o = track_point(f, f, 1.0, 30.0, cfg);
  EXPECT_EQ(o.reason, LossReason::OutOfBounds);

  // Motion carries a point near the right border out of the frame.
  const GrayImage moved = fixtures::shift(img, 3, 0);
  const TrackOutcome m = track_point(f, prepare_frame(moved, cfg.np), 59.5, 30.0, cfg);
  EXPECT_EQ(m.reason, LossReason::OutOfBounds);
}

TEST(Klt, FlatPatchIsSingular) {
  GrayImage img(64, 64, 0.5);
  const TrackerConfig cfg;
  const TrackingFrame f = prepare_frame(img, cfg.np);
  EXPECT_EQ(track_point(f, f, 32.0, 32.0, cfg).reason, LossReason::Singular);
}

TEST(Klt, LevelCountMismatchRejected) {
  const GrayImage img = fixtures::texture(64, 64, 35);
  TrackerConfig cfg;
  const TrackingFrame f = prepare_frame(img, 2);
  const std::vector<FeaturePoint> pts{{30, 30, 1}};
  EXPECT_THROW(track_points(f, f, pts, cfg), InvalidParameter);
}

TEST(Klt, CorruptedLandingRejectedByFbCheck) {
  const GrayImage img = fixtures::texture(96, 96, 36);
  GrayImage corrupted = fixtures::shift(img, 2, 1);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int y = 30; y < 66; ++y)
    for (int x = 30; x < 66; ++x) corrupted(x, y) = u(rng);
  TrackerConfig cfg;
  cfg.be = 2.0;
  const TrackingFrame a = prepare_frame(img, cfg.np), b = prepare_frame(corrupted, cfg.np);
  int rejected = 0, total = 0;
  for (int y = 40; y <= 56; y += 4)
    for (int x = 40; x <= 56; x += 4) {
      FeaturePoint p{x + 0.0, y + 0.0, 1.0};
      TrackOutcome o = track_point(a, b, p.x, p.y, cfg);
      ++total;
      if (!o.tracked()) {
        ++rejected;
        continue;
      }
      const double fb = forward_backward_check(a, b, p, o, cfg);
      if (!o.tracked()) {
        ++rejected;
        EXPECT_TRUE(!(fb <= 2.0));
      }
    }
  EXPECT_GE(rejected, total * 8 / 10);
}

TEST(Klt, BrightnessStepNeverSilentlyDrifts) {
  const GrayImage img = fixtures::texture(96, 96, 37);
  GrayImage bright = fixtures::shift(img, 1, 1);
  for (double& v : bright.pixels()) v = std::min(1.0, 1.5 * v);
  const TrackerConfig cfg;
  const auto pts = grid_points(16, 76, 6);
  const auto out = track_points(prepare_frame(img, cfg.np), prepare_frame(bright, cfg.np), pts, cfg);
  for (const auto& o : out)
    if (o.tracked()) EXPECT_LE(o.fb_error, cfg.be);
}

TEST(Klt, PyramidRecoversMotionBeyondWindow) {
  const GrayImage img = fixtures::texture(128, 128, 38, 2.5);
  const GrayImage moved = fixtures::shift(img, 7, -6);
  const auto pts = grid_points(30, 94, 8);
  TrackerConfig one;
  one.np = 1;
  TrackerConfig three;
  three.np = 3;
  const auto o1 = track_points(prepare_frame(img, 1), prepare_frame(moved, 1), pts, one);
  const auto o3 = track_points(prepare_frame(img, 3), prepare_frame(moved, 3), pts, three);
  int good1 = 0, good3 = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto ok = [&](const TrackOutcome& o) {
      return o.tracked() && std::hypot(o.new_x - pts[i].x - 7, o.new_y - pts[i].y + 6) < 0.1;
    };
    good1 += ok(o1[i]);
    good3 += ok(o3[i]);
    if (o1[i].tracked()) EXPECT_LE(o1[i].fb_error, one.be);
  }
  EXPECT_GE(good3, static_cast<int>(0.9 * pts.size()));
  EXPECT_LT(good1, good3);
}
