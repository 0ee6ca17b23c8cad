#pragma once

// Synthetic rotating-bolt scenes with exact per-frame ground truth.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "boltrot/detection.hpp"
#include "boltrot/image.hpp"

namespace boltrot {

/// (time, value) knot of a piecewise profile.
struct Knot {
  double t = 0.0;
  double value = 0.0;
};

struct BoltSpec {
  double cx = 0.0;
  double cy = 0.0;
  double circumradius = 20.0;  ///< hexagon vertex distance, px
  std::uint64_t texture_seed = 1;
  bool textured = true;
  /// Piecewise-linear rotation in radians; constant beyond the end knots.
  std::vector<Knot> angle_profile{{0.0, 0.0}};

  double washer_radius() const noexcept { return 1.5 * circumradius; }
};

struct ClutterRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  double level = 0.5;
};

struct SceneConfig {
  int width = 128;
  int height = 128;
  double fps = 30.0;
  double duration = 1.0;  ///< seconds; frame k is sampled at t = k / fps
  std::vector<BoltSpec> bolts;
  /// Piecewise-constant global luminance multiplier: each knot holds until the next.
  std::vector<Knot> lighting{{0.0, 1.0}};
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 7;
  double background = 0.18;
  std::vector<ClutterRect> clutter;
  int supersample = 4;

  double washer_level = 0.45;
  double hex_level = 0.78;
  double speckle_cell = 4.5;  ///< speckle grid pitch in bolt-local px

  void validate() const;
  int frame_count() const;
  double frame_time(int k) const noexcept { return k / fps; }
  double lighting_at(double t) const noexcept;
};

double profile_at(const std::vector<Knot>& knots, double t) noexcept;

/// Linear profile from 0 at t = 0 to `total` radians at the last frame time.
std::vector<Knot> linear_profile(const SceneConfig& scene, double total);

struct RenderedFrame {
  GrayImage image;
  std::vector<double> theta;  ///< per bolt, radians
};

RenderedFrame render_frame(const SceneConfig& scene, double t);

/// ROI spanning the hexagon's circumcircle, clipped to the frame.
Roi bolt_roi(const SceneConfig& scene, std::size_t bolt);

struct GroundTruthRow {
  int frame = 0;
  double time_s = 0.0;
  int bolt_id = 0;
  double theta_rad = 0.0;
};

std::vector<GroundTruthRow> ground_truth(const SceneConfig& scene);

std::string frame_file_name(int k, const std::string& extension);

/// Writes frame_%06d.<ext>, manifest.json (with frame-0 ROIs) and gt.csv.
Manifest generate(const SceneConfig& scene, const std::filesystem::path& out_dir, const std::string& extension = "pgm");

/// Renders every frame in memory (no files).
std::vector<GrayImage> render_all(const SceneConfig& scene);

/// Named reference scenes:
///   clean     one bolt, 0 -> 8.45 rad linearly over 450 frames, constant light
///   lighting  one bolt, 0 -> 13.25 rad over 30 s at 15 fps, light x1.5 from 10 s to 20 s
///   static    five motionless bolts, 420 frames
///   study     one large bolt turning steadily with three sudden 0.25 rad slips
SceneConfig preset_scene(std::string_view name);
std::vector<std::string> preset_names();

std::string ground_truth_csv(const std::vector<GroundTruthRow>& rows);
std::vector<GroundTruthRow> parse_ground_truth_csv(const std::string& text);

}  // namespace boltrot
