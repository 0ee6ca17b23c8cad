#pragma once

// Bolt detector boundary plus the two dataset procedures that sit next to the
// detector: anchor-box estimation and lighting-condition augmentation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "boltrot/features.hpp"
#include "boltrot/image.hpp"

namespace boltrot {

/// Anything that localizes bolts in a frame.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Roi> detect(const GrayImage& frame, int frame_index) const = 0;
};

/// Keeps the ROIs that lie inside the frame, are at least kMinRoiSide on a
/// side and carry a confidence in [0, 1].
std::vector<Roi> validated_rois(std::vector<Roi> rois, int width, int height);

std::vector<Roi> detect_validated(const Detector& detector, const GrayImage& frame, int frame_index);

struct ManifestFrame {
  std::string file;
  std::optional<std::vector<Roi>> rois;
};

/// {fps, frames: [{file, rois?}]}; width/height are optional extras.
struct Manifest {
  double fps = 30.0;
  std::optional<int> width;
  std::optional<int> height;
  std::vector<ManifestFrame> frames;
  std::filesystem::path base_dir;  ///< directory the file names resolve against

  std::filesystem::path frame_path(std::size_t i) const { return base_dir / frames.at(i).file; }
};

Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir = {});
std::string manifest_to_json(const Manifest& m);

/// Replays annotated ROIs; frames without an entry reuse the nearest earlier one.
class AnnotationDetector final : public Detector {
 public:
  /// Throws ConfigError when any ROI falls outside a width x height frame.
  AnnotationDetector(const Manifest& manifest, int width, int height);

  std::vector<Roi> detect(const GrayImage& frame, int frame_index) const override;

 private:
  std::vector<std::pair<int, std::vector<Roi>>> keyed_;  // (frame index, rois), ascending
};

struct BlobParams {
  double luminance_threshold = 0.4;
  int min_area = 200;
  int max_area = 1 << 20;
};

/// Threshold, 8-connected labelling, area filter, bounding boxes padded by 2 px.
std::vector<Roi> blob_detect(const GrayImage& frame, const BlobParams& params);

class BlobDetector final : public Detector {
 public:
  explicit BlobDetector(BlobParams params) : params_(params) {}
  std::vector<Roi> detect(const GrayImage& frame, int) const override { return blob_detect(frame, params_); }

 private:
  BlobParams params_;
};

struct AnchorBox {
  double width = 0.0;
  double height = 0.0;
};

struct AnchorEstimate {
  std::vector<AnchorBox> anchors;   ///< sorted by descending area
  std::vector<double> cost_history;  ///< total (1 - IoU) after each assignment round
};

/// IoU of two boxes sharing a centre.
double centered_iou(const AnchorBox& a, const AnchorBox& b) noexcept;

/// k-means on (w, h) under the 1 - IoU distance with k-means++ seeding.
AnchorEstimate estimate_anchor_boxes(const std::vector<AnchorBox>& boxes, int k, std::uint64_t seed);

struct AugmentResult {
  std::vector<RgbImage> images;  ///< 3 per input: original, then the two rescaled copies
  std::vector<double> section_means;
  std::vector<std::string> warnings;
};

double mean_lightness(const RgbImage& img);

/// Splits the range of per-image mean lightness into three equal-width
/// sections and rescales each image's lightness to the other two section means.
AugmentResult lighting_augment(const std::vector<RgbImage>& images);

}  // namespace boltrot
