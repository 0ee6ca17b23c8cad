#pragma once

// Detect-track orchestration: seed feature points inside detected ROIs, track
// them frame to frame, fit the per-interval rigid rotation, accumulate it per
// bolt, and re-detect when a bolt's live point count collapses.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boltrot/detection.hpp"
#include "boltrot/features.hpp"
#include "boltrot/geometry.hpp"
#include "boltrot/klt.hpp"

namespace boltrot {

struct PipelineConfig {
  TrackerConfig tracker;
  MsacConfig msac;
  CornerParams corners;
  int redetect_min_fp = 7;
  /// When set, the loss threshold becomes max(redetect_min_fp, fraction x initial count).
  std::optional<double> redetect_fraction;
  double associate_iou = 0.3;
  std::optional<int> periodic_redetect_every;
  /// With re-detection disabled a lost track is terminated on the spot (plain KLT).
  bool redetect_enabled = true;
  int terminate_after_failures = 30;

  void validate() const;
};

enum class TrackStatus { Active, AwaitingRedetect, Terminated };
enum class EventKind { None, Redetect, Lost, Spawn, Terminate };

std::string_view to_string(TrackStatus s) noexcept;
std::string_view to_string(EventKind e) noexcept;
EventKind event_from_string(std::string_view s);

struct TrackEvent {
  int frame = 0;
  EventKind kind = EventKind::None;
};

struct BoltTrack {
  int id = 0;
  Roi roi;
  double box_angle = 0.0;  ///< orientation of the visualization box, radians
  std::vector<FeaturePoint> points;
  int initial_fp_count = 0;
  double phi = 0.0;
  TrackStatus status = TrackStatus::Active;
  std::vector<TrackEvent> events;
  int failed_redetects = 0;

  int loss_threshold(const PipelineConfig& cfg) const;
};

struct HistoryRow {
  int frame = 0;
  double time_s = 0.0;
  int bolt_id = 0;
  double inc_rad = 0.0;
  double cum_rad = 0.0;
  int n_fps = 0;
  EventKind event = EventKind::None;
};

struct RotationHistory {
  std::vector<HistoryRow> rows;

  /// `frame,time_s,bolt_id,inc_rad,cum_rad,n_fps,event`; ccw_positive negates the angle columns.
  std::string to_csv(bool ccw_positive = false) const;
  /// Whitespace-separated columns, one blank-line separated block per bolt.
  std::string to_gnuplot(bool ccw_positive = false) const;
  static RotationHistory from_csv(const std::string& text);

  /// Final cumulative angle per bolt id (last row wins).
  std::vector<std::pair<int, double>> final_angles() const;
};

struct BoltSummary {
  int bolt_id = 0;
  double final_phi = 0.0;
  TrackStatus status = TrackStatus::Active;
  int redetects = 0;
  int losses = 0;
  int spawns = 0;
  int terminations = 0;
  double mean_fps = 0.0;
  int rows = 0;
  int last_frame = 0;
  std::optional<int> first_loss_frame;
};

struct RunResult {
  RotationHistory history;
  std::vector<BoltSummary> summary;
  std::vector<BoltTrack> tracks;
  int frames = 0;

  std::string summary_json(bool ccw_positive = false) const;
};

/// Random-access frame provider; frame(k) throws IoError when k is unreadable.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int size() const = 0;
  virtual double fps() const = 0;
  virtual GrayImage frame(int k) const = 0;
};

class InMemoryFrames final : public FrameSource {
 public:
  InMemoryFrames(std::vector<GrayImage> frames, double fps) : frames_(std::move(frames)), fps_(fps) {}
  int size() const override { return static_cast<int>(frames_.size()); }
  double fps() const override { return fps_; }
  GrayImage frame(int k) const override { return frames_.at(k); }

 private:
  std::vector<GrayImage> frames_;
  double fps_;
};

/// Reads the manifest's frame files lazily.
class ManifestFrames final : public FrameSource {
 public:
  explicit ManifestFrames(Manifest manifest) : manifest_(std::move(manifest)) {}
  int size() const override { return static_cast<int>(manifest_.frames.size()); }
  double fps() const override { return manifest_.fps; }
  GrayImage frame(int k) const override;

 private:
  Manifest manifest_;
};

/// Thrown by run() when a frame cannot be read.
class FrameReadError : public IoError {
 public:
  FrameReadError(int index, const IoError& cause)
      : IoError("frame " + std::to_string(index) + ": " + cause.what(), cause.path()), index_(index) {}
  int index() const noexcept { return index_; }

 private:
  int index_;
};

struct StepRecord {
  int bolt_id = 0;
  double increment = 0.0;
  EventKind event = EventKind::None;
};

/// One track per detected ROI, seeded with Shi-Tomasi points.
std::vector<BoltTrack> init_tracks(const GrayImage& first_frame, const Detector& detector, const PipelineConfig& cfg);

/// Advances every live track from `prev` to `next` (frame_index is next's index)
/// and returns one record per track that was live during the step.
std::vector<StepRecord> step(std::vector<BoltTrack>& tracks, const TrackingFrame& prev, const TrackingFrame& next,
                             const Detector& detector, const PipelineConfig& cfg, int frame_index);

RunResult run(const FrameSource& frames, const Detector& detector, const PipelineConfig& cfg);

}  // namespace boltrot
