#include <benchmark/benchmark.h>

#include <random>

#include "boltrot/features.hpp"
#include "boltrot/geometry.hpp"
#include "boltrot/klt.hpp"
#include "boltrot/pipeline.hpp"
#include "boltrot/synth.hpp"

using namespace boltrot;

namespace {

SceneConfig bolt_scene(int size, double radius, double total) {
  SceneConfig s;
  s.width = s.height = size;
  s.duration = 2.0 / s.fps;
  s.noise_sigma = 0.01;
  s.supersample = 2;
  s.bolts.push_back(BoltSpec{(size - 1) / 2.0, (size - 1) / 2.0, radius, 1});
  s.bolts[0].angle_profile = linear_profile(s, total);
  return s;
}

void BM_PrepareFrame(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const GrayImage img = render_frame(bolt_scene(size, size / 9.0, 0.0), 0.0).image;
  for (auto _ : state) benchmark::DoNotOptimize(prepare_frame(img, 3));
}
BENCHMARK(BM_PrepareFrame)->Arg(128)->Arg(416)->Unit(benchmark::kMicrosecond);

void BM_DetectCorners(benchmark::State& state) {
  const SceneConfig s = bolt_scene(416, 45.0, 0.0);
  const GrayImage img = render_frame(s, 0.0).image;
  CornerParams p;
  p.max_points = 64;
  for (auto _ : state) benchmark::DoNotOptimize(detect_corners(img, bolt_roi(s, 0), p));
}
BENCHMARK(BM_DetectCorners)->Unit(benchmark::kMicrosecond);

void BM_TrackPoints(benchmark::State& state) {
  const SceneConfig s = bolt_scene(416, 45.0, 0.03);
  const auto frames = render_all(s);
  TrackerConfig cfg;
  cfg.bs = static_cast<int>(state.range(0));
  const TrackingFrame a = prepare_frame(frames[0], cfg.np), b = prepare_frame(frames[1], cfg.np);
  CornerParams p;
  p.max_points = 64;
  const auto pts = detect_corners(frames[0], bolt_roi(s, 0), p);
  for (auto _ : state) benchmark::DoNotOptimize(track_points(a, b, pts, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_TrackPoints)->Arg(5)->Arg(11)->Arg(21)->Arg(31)->Unit(benchmark::kMicrosecond);

void BM_Msac(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  const RigidTransform t{0.1, 2.0, -1.0};
  Correspondences c;
  for (int i = 0; i < 64; ++i) {
    const Point2 p{u(rng), u(rng)};
    c.src.push_back(p);
    c.dst.push_back(i < 48 ? t.apply(p) : Point2{u(rng), u(rng)});
  }
  const MsacConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fit_rigid_msac(c, cfg));
}
BENCHMARK(BM_Msac)->Unit(benchmark::kMicrosecond);

void BM_PipelineStep(benchmark::State& state) {
  const SceneConfig s = bolt_scene(416, 45.0, 0.03);
  const auto frames = render_all(s);
  Manifest m;
  m.frames.push_back({"f", std::vector<Roi>{bolt_roi(s, 0)}});
  const AnnotationDetector det(m, s.width, s.height);
  PipelineConfig cfg;
  cfg.corners.max_points = 64;
  const auto seed = init_tracks(frames[0], det, cfg);
  const TrackingFrame a = prepare_frame(frames[0], cfg.tracker.np), b = prepare_frame(frames[1], cfg.tracker.np);
  for (auto _ : state) {
    auto tracks = seed;
    benchmark::DoNotOptimize(step(tracks, a, b, det, cfg, 1));
  }
}
BENCHMARK(BM_PipelineStep)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
