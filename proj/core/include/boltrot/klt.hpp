#pragma once

// Pyramidal Kanade-Lucas-Tomasi point tracking with forward-backward rejection.

#include <span>
#include <string_view>
#include <vector>

#include "boltrot/features.hpp"
#include "boltrot/image.hpp"

namespace boltrot {

/// The four studied tracker knobs plus the convergence threshold.
struct TrackerConfig {
  int np = 3;         ///< pyramid levels
  double be = 6.0;    ///< forward-backward error threshold, px
  int bs = 5;         ///< search block (window) size, odd px
  int ni = 30;        ///< max iterations per level
  double eps = 0.03;  ///< update-norm convergence threshold, px

  void validate() const;
};

enum class LossReason { None, OutOfBounds, Singular, NoConvergence, FbError };

std::string_view to_string(LossReason r) noexcept;

struct TrackOutcome {
  LossReason reason = LossReason::None;
  double new_x = 0.0;
  double new_y = 0.0;
  double fb_error = 0.0;

  bool tracked() const noexcept { return reason == LossReason::None; }
};

/// A pyramid together with per-level gradients, computed once per frame and
/// shared by the forward and backward passes.
struct TrackingFrame {
  Pyramid pyramid;
  std::vector<Gradient> gradients;

  int width() const { return pyramid.base().width(); }
  int height() const { return pyramid.base().height(); }
};

TrackingFrame prepare_frame(const GrayImage& img, int np);
TrackingFrame prepare_frame(Pyramid pyramid);

/// One-directional coarse-to-fine LK for a single point; fb_error is left 0.
TrackOutcome track_point(const TrackingFrame& prev, const TrackingFrame& next, double x, double y,
                         const TrackerConfig& cfg);

/// Re-tracks the forward landing point back into `prev`; marks the outcome
/// Lost(FbError) when the round trip misses by more than cfg.be or fails.
/// Returns the forward-backward distance (infinity when the backward pass is lost).
double forward_backward_check(const TrackingFrame& prev, const TrackingFrame& next, const FeaturePoint& point,
                              TrackOutcome& forward, const TrackerConfig& cfg);

/// Forward track plus forward-backward check for every point.
std::vector<TrackOutcome> track_points(const TrackingFrame& prev, const TrackingFrame& next,
                                       std::span<const FeaturePoint> points, const TrackerConfig& cfg);

std::vector<TrackOutcome> track_points(const Pyramid& prev, const Pyramid& next,
                                       std::span<const FeaturePoint> points, const TrackerConfig& cfg);

}  // namespace boltrot
