#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "boltrot/eval.hpp"

using namespace boltrot;

namespace {

constexpr double kDeg = M_PI / 180.0;

SceneConfig small_turn() {
  SceneConfig s;
  s.duration = 1.0;
  s.noise_sigma = 0.01;
  s.bolts.push_back(BoltSpec{63.5, 63.5, 20.0, 2});
  s.bolts[0].angle_profile = linear_profile(s, 0.6);
  return s;
}

Manifest rois_of(const SceneConfig& s) {
  Manifest m;
  m.fps = s.fps;
  m.frames.push_back({"f", std::vector<Roi>{bolt_roi(s, 0)}});
  return m;
}

}  // namespace

TEST(Accuracy, TabulatedExamples) {
  EXPECT_NEAR(accuracy(8.42, 8.45).value(), 0.99645, 1e-5);
  EXPECT_NEAR(accuracy(51.61, 54.32).value(), 0.95011, 1e-5);
  EXPECT_EQ(accuracy(8.45, 8.45).value(), 1.0);
  EXPECT_EQ(accuracy(0.0, 1.0).value(), 0.0);
  EXPECT_EQ(accuracy(5.0, 1.0).value(), 0.0);
  EXPECT_FALSE(accuracy(0.3, 0.0).has_value());
  EXPECT_FALSE(accuracy(0.3, 1e-7).has_value());
}

TEST(Accuracy, ScaleInvariant) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-10.0, 10.0), k(0.01, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double phi = u(rng), gt = u(rng), s = k(rng);
    if (std::abs(gt) < 0.01) continue;
    EXPECT_NEAR(accuracy(s * phi, s * gt).value(), accuracy(phi, gt).value(), 1e-12);
  }
}

TEST(EdgeTruth, SingleDelta) {
  const auto gt = gt_from_edges({{{{{10.0, 40.0}}}}});
  EXPECT_NEAR(gt.phi_gt, 0.5236, 1e-4);
  EXPECT_TRUE(gt.flagged_intervals.empty());
}

TEST(EdgeTruth, IntervalsSum) {
  const auto gt = gt_from_edges({{{{{0.0, 30.0}}}, {{{30.0, 60.0}}}}});
  EXPECT_NEAR(gt.phi_gt, 60.0 * kDeg, 1e-12);
  ASSERT_EQ(gt.interval_rotation.size(), 2u);
}

TEST(EdgeTruth, SeamWraps) {
  EXPECT_DOUBLE_EQ(wrap_line_delta_deg(170.0, 5.0), 15.0);
  EXPECT_DOUBLE_EQ(wrap_line_delta_deg(5.0, 170.0), -15.0);
  EXPECT_DOUBLE_EQ(wrap_line_delta_deg(0.0, 90.0), 90.0);
  EXPECT_DOUBLE_EQ(wrap_line_delta_deg(90.0, 0.0), 90.0);
  EXPECT_NEAR(gt_from_edges({{{{{170.0, 5.0}}}}}).phi_gt, 15.0 * kDeg, 1e-12);
}

TEST(EdgeTruth, LargeDeltaFlagged) {
  const auto gt = gt_from_edges({{{{{0.0, 10.0}}}, {{{0.0, 65.0}, {0.0, 10.0}}}}});
  ASSERT_EQ(gt.flagged_intervals.size(), 1u);
  EXPECT_EQ(gt.flagged_intervals[0], 1u);
  EXPECT_EQ(gt_from_edges({{{{{0.0, 60.0}}}}}).flagged_intervals.size(), 1u);
}

TEST(EdgeTruth, EmptyIntervalThrows) {
  EXPECT_THROW(gt_from_edges({{{{{0.0, 5.0}}}, {}}}), InvalidParameter);
}

TEST(EdgeTruth, EdgeOrderIrrelevant) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> a(0.0, 180.0), d(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    EdgeLabelSet set;
    for (int j = 0; j < 4; ++j) {
      EdgeInterval iv;
      for (int e = 0; e < 5; ++e) {
        const double s = a(rng);
        iv.edges.push_back({s, std::fmod(s + d(rng) + 180.0, 180.0)});
      }
      set.intervals.push_back(iv);
    }
    EdgeLabelSet shuffled = set;
    for (auto& iv : shuffled.intervals) std::shuffle(iv.edges.begin(), iv.edges.end(), rng);
    EXPECT_NEAR(gt_from_edges(shuffled).phi_gt, gt_from_edges(set).phi_gt, 1e-12);
  }
}

TEST(StudyGrid, SizeAndValidation) {
  StudyGrid g;
  EXPECT_EQ(g.size(), 256u);
  EXPECT_NO_THROW(g.validate());
  g.bs_values = {4};
  EXPECT_THROW(g.validate(), ConfigError);
  g = {};
  g.ni_values.clear();
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(StudyGrid, FinalGroundTruthSpansFirstToLast) {
  const std::vector<GroundTruthRow> rows{{0, 0.0, 0, 0.5}, {1, 0.1, 0, 1.0}, {0, 0.0, 1, 0.0}, {2, 0.2, 0, 2.5}};
  const auto gt = final_ground_truth(rows);
  ASSERT_EQ(gt.size(), 2u);
  EXPECT_EQ(gt[0].second, 2.0);
  EXPECT_EQ(gt[1].second, 0.0);
}

TEST(StudyGrid, SingleCellEqualsDirectRun) {
  const SceneConfig s = small_turn();
  const InMemoryFrames frames(render_all(s), s.fps);
  const AnnotationDetector det(rois_of(s), s.width, s.height);
  StudyGrid g;
  g.np_values = {2};
  g.be_values = {6};
  g.bs_values = {7};
  g.ni_values = {20};
  StudyInputs in{&frames, &det, final_ground_truth(ground_truth(s)), 1};
  const StudyResult r = run_param_study(g, in);
  ASSERT_EQ(r.rows.size(), 1u);
  ASSERT_TRUE(r.rows[0].accuracy);

  PipelineConfig cfg;
  cfg.tracker.np = 2;
  cfg.tracker.be = 6;
  cfg.tracker.bs = 7;
  cfg.tracker.ni = 20;
  const RunResult direct = run(frames, det, cfg);
  EXPECT_EQ(r.rows[0].final_phi, direct.summary[0].final_phi);
  EXPECT_EQ(*r.rows[0].accuracy, *accuracy(direct.summary[0].final_phi, 0.6));
  EXPECT_EQ(r.marginals.size(), 4u);
}

TEST(StudyGrid, CsvAndSummaryShape) {
  const SceneConfig s = small_turn();
  const InMemoryFrames frames(render_all(s), s.fps);
  const AnnotationDetector det(rois_of(s), s.width, s.height);
  StudyGrid g;
  g.np_values = {1, 3};
  g.be_values = {6};
  g.bs_values = {5, 9};
  g.ni_values = {30};
  const StudyResult r = run_param_study(g, {&frames, &det, final_ground_truth(ground_truth(s)), 2});
  const std::string csv = r.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "np,be,bs,ni,accuracy,final_phi,redetects");
  const auto mean = mean_accuracy(r.rows, [](const StudyRow& row) { return row.np == 3; });
  ASSERT_TRUE(mean);
  EXPECT_GT(*mean, 0.9);
  EXPECT_NE(r.summary_json().find("\"bs\""), std::string::npos);
}

TEST(StudyGrid, ZeroTruthCellsFail) {
  SceneConfig s = small_turn();
  s.bolts[0].angle_profile = {{0.0, 0.0}};
  const InMemoryFrames frames(render_all(s), s.fps);
  const AnnotationDetector det(rois_of(s), s.width, s.height);
  StudyGrid g;
  g.np_values = {3};
  g.be_values = {6};
  g.bs_values = {5};
  g.ni_values = {30};
  const StudyResult r = run_param_study(g, {&frames, &det, final_ground_truth(ground_truth(s)), 1});
  EXPECT_FALSE(r.rows[0].accuracy);
  EXPECT_FALSE(r.rows[0].error.empty());
  EXPECT_NE(r.to_csv().find("nan,nan,-1"), std::string::npos);
}
