#pragma once

// Ground truth from labelled edges, the rotation accuracy metric and the
// NP x BE x BS x NI parameter-study harness.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "boltrot/pipeline.hpp"
#include "boltrot/synth.hpp"

namespace boltrot {

/// Line angles (degrees, mod 180) of one labelled edge at an interval's start and end.
struct EdgeLabel {
  double start_deg = 0.0;
  double end_deg = 0.0;
};

struct EdgeInterval {
  std::vector<EdgeLabel> edges;
};

struct EdgeLabelSet {
  std::vector<EdgeInterval> intervals;
};

struct EdgeGroundTruth {
  double phi_gt = 0.0;                       ///< radians
  std::vector<double> interval_rotation;     ///< radians, per interval
  std::vector<std::size_t> flagged_intervals;  ///< some |delta| >= 60 degrees
};

/// end - start wrapped into (-90, 90] degrees.
double wrap_line_delta_deg(double start_deg, double end_deg) noexcept;

/// Sum over intervals of the mean per-edge rotation. Throws InvalidParameter on an empty interval.
EdgeGroundTruth gt_from_edges(const EdgeLabelSet& labels);

/// max(0, 1 - |phi - phi_gt| / |phi_gt|); nullopt when |phi_gt| <= 1e-6.
std::optional<double> accuracy(double phi, double phi_gt) noexcept;

constexpr double kZeroGroundTruth = 1e-6;

struct StudyGrid {
  std::vector<int> np_values{1, 2, 3, 4};
  std::vector<double> be_values{2, 6, 10, 20};
  std::vector<int> bs_values{5, 11, 21, 31};
  std::vector<int> ni_values{10, 20, 30, 40};
  PipelineConfig base;  ///< supplies every non-varied setting
  std::string scene;    ///< optional scene directory (manifest.json + gt.csv)

  std::size_t size() const noexcept {
    return np_values.size() * be_values.size() * bs_values.size() * ni_values.size();
  }
  void validate() const;
};

struct StudyRow {
  int np = 0;
  double be = 0.0;
  int bs = 0;
  int ni = 0;
  std::optional<double> accuracy;  ///< nullopt when the cell failed
  double final_phi = 0.0;
  int redetects = 0;
  std::string error;
};

struct Marginal {
  std::string parameter;
  double value = 0.0;
  double mean_accuracy = 0.0;
  int cells = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<Marginal> marginals;

  /// `np,be,bs,ni,accuracy,final_phi,redetects`
  std::string to_csv() const;
  std::string summary_json() const;
};

/// Mean accuracy over successful rows satisfying `keep`.
std::optional<double> mean_accuracy(const std::vector<StudyRow>& rows,
                                    const std::function<bool(const StudyRow&)>& keep);

std::vector<Marginal> marginal_means(const std::vector<StudyRow>& rows);

/// Final ground-truth rotation per bolt id (last theta minus first theta).
std::vector<std::pair<int, double>> final_ground_truth(const std::vector<GroundTruthRow>& rows);

struct StudyInputs {
  const FrameSource* frames = nullptr;
  const Detector* detector = nullptr;
  std::vector<std::pair<int, double>> phi_gt;  ///< per bolt id
  unsigned threads = 0;                        ///< 0 = hardware concurrency
};

/// Accuracy averaged over bolts with nonzero ground truth, for one config.
StudyRow evaluate_cell(const StudyInputs& in, const PipelineConfig& cfg);

/// Runs the full pipeline for every grid cell over one shared frame set.
StudyResult run_param_study(const StudyGrid& grid, const StudyInputs& in);

}  // namespace boltrot
