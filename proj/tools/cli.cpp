#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "boltrot/config.hpp"
#include "boltrot/csv.hpp"
#include "boltrot/detection.hpp"
#include "boltrot/eval.hpp"
#include "boltrot/hough.hpp"
#include "boltrot/image_io.hpp"
#include "boltrot/pipeline.hpp"
#include "boltrot/synth.hpp"

namespace boltrot::cli {
namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

void ensure_parent(const fs::path& file) {
  const fs::path dir = file.parent_path();
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message(), dir.string());
}

void write_output(const fs::path& file, const std::string& contents) {
  ensure_parent(file);
  write_file_atomic(file, contents);
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("BOLTROT_SEED");
  if (!v || !*v) return std::nullopt;
  try {
    return static_cast<std::uint64_t>(csv::to_int(v));
  } catch (const ConfigError&) {
    throw ConfigError(std::string("BOLTROT_SEED is not an integer: '") + v + "'");
  }
}

/// Flag beats config file beats environment.
PipelineConfig resolve_pipeline(const RunConfig& rc, std::optional<std::uint64_t> flag_seed) {
  PipelineConfig p = rc.effective_pipeline();
  if (flag_seed) {
    p.msac.seed = *flag_seed;
  } else if (!rc.seed) {
    if (auto s = env_seed()) p.msac.seed = *s;
  }
  return p;
}

std::string angle_text(double rad, bool degrees) {
  std::ostringstream ss;
  ss << std::fixed;
  if (degrees) {
    ss << std::setprecision(2) << rad * kRadToDeg << " deg";
  } else {
    ss << std::setprecision(4) << rad << " rad";
  }
  return ss.str();
}

// ---- synth ----

struct SynthArgs {
  std::string config, preset, out, format = "pgm";
  bool dump = false;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.config.empty() == a.preset.empty()) throw ConfigError("synth: give exactly one of --config or --preset");
  const SceneConfig scene = a.preset.empty() ? parse_scene_config(read_text_file(a.config)) : preset_scene(a.preset);
  if (a.dump) {
    out << to_json(scene);
    return kOk;
  }
  if (a.out.empty()) throw ConfigError("synth: --out is required");
  const Manifest m = generate(scene, a.out, a.format);
  out << "wrote " << m.frames.size() << " frames, manifest.json and gt.csv to " << a.out << "\n";
  return kOk;
}

// ---- track ----

struct TrackArgs {
  std::string frames, manifest, config, out, summary, gnuplot, detector;
  bool ccw = false, no_redetect = false, degrees = false;
  std::optional<std::uint64_t> seed;
};

int cmd_track(const TrackArgs& a, std::ostream& out) {
  RunConfig rc;
  if (!a.config.empty()) rc = parse_run_config(read_text_file(a.config));
  if (!a.detector.empty()) {
    if (a.detector == "annotation") {
      rc.detector = DetectorKind::Annotation;
    } else if (a.detector == "blob") {
      rc.detector = DetectorKind::Blob;
    } else {
      throw ConfigError("--detector must be 'annotation' or 'blob'");
    }
  }
  PipelineConfig cfg = resolve_pipeline(rc, a.seed);
  if (a.no_redetect) cfg.redetect_enabled = false;

  const std::string history_path = a.out.empty() ? rc.history_out : a.out;
  const std::string summary_path = a.summary.empty() ? rc.summary_out : a.summary;
  if (history_path.empty()) throw ConfigError("track: --out (or history_out in the config) is required");

  fs::path manifest_path = a.manifest;
  if (manifest_path.empty()) {
    if (a.frames.empty()) throw ConfigError("track: give --frames or --manifest");
    manifest_path = fs::path(a.frames) / "manifest.json";
  }
  Manifest manifest = load_manifest(manifest_path);
  if (!a.frames.empty()) manifest.base_dir = a.frames;
  const ManifestFrames frames(manifest);
  if (frames.size() < 2) throw ConfigError("track: the manifest lists fewer than 2 frames");

  int width = 0, height = 0;
  if (manifest.width && manifest.height) {
    width = *manifest.width;
    height = *manifest.height;
  } else {
    GrayImage first;
    try {
      first = frames.frame(0);
    } catch (const IoError& e) {
      throw FrameReadError(0, e);
    }
    width = first.width();
    height = first.height();
  }
  std::unique_ptr<Detector> detector;
  if (rc.detector == DetectorKind::Annotation) {
    detector = std::make_unique<AnnotationDetector>(manifest, width, height);
  } else {
    detector = std::make_unique<BlobDetector>(rc.blob);
  }

  const RunResult result = boltrot::run(frames, *detector, cfg);
  write_output(history_path, result.history.to_csv(a.ccw));
  if (!summary_path.empty()) write_output(summary_path, result.summary_json(a.ccw));
  if (!a.gnuplot.empty()) write_output(a.gnuplot, result.history.to_gnuplot(a.ccw));

  const double sign = a.ccw ? -1.0 : 1.0;
  for (const BoltSummary& s : result.summary) {
    out << "bolt " << s.bolt_id << ": " << angle_text(sign * s.final_phi, a.degrees) << ", " << to_string(s.status)
        << ", " << s.redetects << " redetects";
    if (s.first_loss_frame) out << ", first loss at frame " << *s.first_loss_frame;
    out << "\n";
  }
  return kOk;
}

// ---- study ----

struct StudyArgs {
  std::string grid, scene, out, summary;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_study(const StudyArgs& a, std::ostream& out) {
  StudyGrid grid = parse_study_grid(read_text_file(a.grid));
  if (a.seed) {
    grid.base.msac.seed = *a.seed;
  } else if (auto s = env_seed()) {
    grid.base.msac.seed = *s;
  }
  fs::path scene_dir = a.scene;
  if (scene_dir.empty()) {
    if (grid.scene.empty()) throw ConfigError("study: give --scene or set \"scene\" in the grid file");
    scene_dir = fs::path(a.grid).parent_path() / grid.scene;
  }
  const Manifest manifest = load_manifest(scene_dir / "manifest.json");
  const auto gt_rows = parse_ground_truth_csv(read_text_file(scene_dir / "gt.csv"));
  const auto phi_gt = final_ground_truth(gt_rows);
  if (std::none_of(phi_gt.begin(), phi_gt.end(), [](const auto& p) { return std::abs(p.second) > kZeroGroundTruth; })) {
    throw std::domain_error("study: every bolt has zero ground-truth rotation; accuracy is undefined");
  }

  std::vector<GrayImage> images;
  images.reserve(manifest.frames.size());
  for (std::size_t k = 0; k < manifest.frames.size(); ++k) {
    try {
      images.push_back(read_gray(manifest.frame_path(k)));
    } catch (const IoError& e) {
      throw FrameReadError(static_cast<int>(k), e);
    }
  }
  if (images.empty()) throw ConfigError("study: the scene has no frames");
  const int width = manifest.width.value_or(images.front().width());
  const int height = manifest.height.value_or(images.front().height());
  const InMemoryFrames frames(std::move(images), manifest.fps);
  const AnnotationDetector detector(manifest, width, height);

  StudyInputs in;
  in.frames = &frames;
  in.detector = &detector;
  in.phi_gt = phi_gt;
  in.threads = a.threads;
  const StudyResult result = run_param_study(grid, in);

  write_output(a.out, result.to_csv());
  const fs::path summary = a.summary.empty() ? fs::path(a.out).parent_path() / "study_summary.json" : fs::path(a.summary);
  write_output(summary, result.summary_json());
  for (const Marginal& m : result.marginals)
    out << m.parameter << "=" << m.value << ": mean accuracy " << std::fixed << std::setprecision(4) << m.mean_accuracy
        << std::defaultfloat << "\n";
  return kOk;
}

// ---- eval ----

struct EvalArgs {
  std::string pred, gt;
  bool ccw = false, degrees = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RotationHistory hist = RotationHistory::from_csv(read_text_file(a.pred));
  const auto gt = final_ground_truth(parse_ground_truth_csv(read_text_file(a.gt)));
  std::map<int, double> pred;
  for (const auto& [id, phi] : hist.final_angles()) pred[id] = a.ccw ? -phi : phi;

  out << "bolt_id,phi,phi_gt,accuracy\n";
  bool any_defined = false;
  for (const auto& [id, phi_gt] : gt) {
    const auto it = pred.find(id);
    const double phi = it == pred.end() ? 0.0 : it->second;
    const double scale = a.degrees ? kRadToDeg : 1.0;
    out << id << ',' << csv::fmt(phi * scale) << ',' << csv::fmt(phi_gt * scale) << ',';
    if (const auto acc = accuracy(phi, phi_gt)) {
      any_defined = true;
      out << csv::fmt(*acc) << "\n";
    } else {
      out << "undefined (|phi| = " << csv::fmt(std::abs(phi) * scale) << ")\n";
    }
  }
  return any_defined ? kOk : kEvaluationUndefined;
}

// ---- edges ----

int cmd_edges(const std::string& labels_path, bool degrees, std::ostream& out, std::ostream& err) {
  const auto j = nlohmann::json::parse(read_text_file(labels_path), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("intervals") || !j["intervals"].is_array())
    throw ConfigError("labels: expected {\"intervals\": [{\"edges\": [{\"start_deg\", \"end_deg\"}]}]}");
  EdgeLabelSet set;
  for (std::size_t i = 0; i < j["intervals"].size(); ++i) {
    const auto& iv = j["intervals"][i];
    if (!iv.is_object() || !iv.contains("edges") || !iv["edges"].is_array())
      throw ConfigError("labels: field 'intervals[" + std::to_string(i) + "].edges' missing");
    EdgeInterval interval;
    for (const auto& e : iv["edges"]) {
      if (!e.is_object() || !e.contains("start_deg") || !e.contains("end_deg") || !e["start_deg"].is_number() ||
          !e["end_deg"].is_number())
        throw ConfigError("labels: interval " + std::to_string(i) + " has an edge without numeric start_deg/end_deg");
      interval.edges.push_back({e["start_deg"].get<double>(), e["end_deg"].get<double>()});
    }
    set.intervals.push_back(std::move(interval));
  }
  EdgeGroundTruth g;
  try {
    g = gt_from_edges(set);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t idx : g.flagged_intervals)
    err << "warning: interval " << idx << " has an edge rotating 60 degrees or more\n";
  out << "phi_gt " << (degrees ? csv::fmt(g.phi_gt * kRadToDeg) + " deg" : csv::fmt(g.phi_gt) + " rad") << "\n";
  return kOk;
}

// ---- hough ----

struct HoughArgs {
  std::string image, method = "canny", edges_out, out;
  int peaks = 10;
  std::optional<double> low, high, threshold;
};

int cmd_hough(const HoughArgs& a, std::ostream& out) {
  EdgeThresholds t;
  const EdgeMethod method = edge_method_from_string(a.method);
  if (a.low) t.canny_low = *a.low;
  if (a.high) t.canny_high = *a.high;
  if (a.threshold) (method == EdgeMethod::Log ? t.log : t.prewitt) = *a.threshold;
  const GrayImage img = read_gray(a.image);
  const BinaryImage edges = edge_map(img, method, t);
  if (!a.edges_out.empty()) {
    ensure_parent(a.edges_out);
    write_binary(a.edges_out, edges);
  }
  const std::string table = lines_csv(hough_lines(edges, a.peaks));
  if (a.out.empty()) {
    out << table;
  } else {
    write_output(a.out, table);
  }
  return kOk;
}

// ---- augment / anchors ----

int cmd_augment(const std::vector<std::string>& inputs, const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  std::vector<RgbImage> images;
  for (const auto& p : inputs) images.push_back(read_rgb(p));
  const AugmentResult r = lighting_augment(images);
  for (const auto& w : r.warnings) err << "warning: " << w << "\n";
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create directory " + out_dir, out_dir);
  for (std::size_t i = 0; i < r.images.size(); ++i) {
    const fs::path src(inputs[i / 3]);
    const std::string name = src.stem().string() + "_" + std::to_string(i % 3) + ".png";
    write_rgb(fs::path(out_dir) / name, r.images[i]);
  }
  out << "section means: " << r.section_means[0] << " " << r.section_means[1] << " " << r.section_means[2] << "\n";
  out << "wrote " << r.images.size() << " images to " << out_dir << "\n";
  return kOk;
}

int cmd_anchors(const std::string& boxes_path, int k, std::uint64_t seed, std::ostream& out) {
  const auto text = read_text_file(boxes_path);
  const auto lines = csv::lines(text);
  if (lines.empty() || lines.front() != "w,h") throw ConfigError("boxes csv: expected header 'w,h'");
  std::vector<AnchorBox> boxes;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() != 2) throw ConfigError("boxes csv line " + std::to_string(i + 1) + ": expected 2 fields");
    boxes.push_back({csv::to_double(f[0]), csv::to_double(f[1])});
  }
  AnchorEstimate est;
  try {
    est = estimate_anchor_boxes(boxes, k, seed);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
  out << "w,h\n";
  for (const AnchorBox& b : est.anchors) out << csv::fmt(b.width) << ',' << csv::fmt(b.height) << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bolt rotation tracking from video"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* sc = app.add_subcommand("synth", "Render a synthetic bolt scene with ground truth");
  sc->add_option("--config", synth.config, "Scene config JSON");
  sc->add_option("--preset", synth.preset, "Named scene")->check(CLI::IsMember(preset_names()));
  sc->add_option("--out", synth.out, "Output directory");
  sc->add_option("--format", synth.format, "Frame format")->check(CLI::IsMember({"pgm", "png"}));
  sc->add_flag("--dump-config", synth.dump, "Print the scene config instead of rendering");

  TrackArgs track;
  auto* tc = app.add_subcommand("track", "Track bolt rotation through a frame sequence");
  tc->add_option("--frames", track.frames, "Frame directory");
  tc->add_option("--manifest", track.manifest, "Manifest JSON (default: <frames>/manifest.json)");
  tc->add_option("--config", track.config, "Run config JSON");
  tc->add_option("--out", track.out, "Rotation history CSV");
  tc->add_option("--summary", track.summary, "Summary JSON");
  tc->add_option("--gnuplot", track.gnuplot, "Whitespace-separated history for plotting");
  tc->add_option("--detector", track.detector, "annotation or blob");
  tc->add_option("--seed", track.seed, "MSAC seed");
  tc->add_flag("--ccw-positive", track.ccw, "Report counter-clockwise rotation as positive");
  tc->add_flag("--no-redetect", track.no_redetect, "Plain KLT: drop a bolt once its points are lost");
  tc->add_flag("--degrees", track.degrees, "Print angles in degrees (files stay in radians)");

  StudyArgs study;
  auto* stc = app.add_subcommand("study", "Run the NP x BE x BS x NI parameter study");
  stc->add_option("--grid", study.grid, "Study grid JSON")->required();
  stc->add_option("--scene", study.scene, "Scene directory with manifest.json and gt.csv");
  stc->add_option("--out", study.out, "Study CSV")->required();
  stc->add_option("--summary", study.summary, "Summary JSON (default: study_summary.json next to --out)");
  stc->add_option("--threads", study.threads, "Worker threads (0 = all cores)");
  stc->add_option("--seed", study.seed, "MSAC seed");

  EvalArgs ev;
  auto* ec = app.add_subcommand("eval", "Score a rotation history against ground truth");
  ec->add_option("--pred", ev.pred, "Rotation history CSV")->required();
  ec->add_option("--gt", ev.gt, "Ground truth CSV")->required();
  ec->add_flag("--ccw-positive", ev.ccw, "The history was written with --ccw-positive");
  ec->add_flag("--degrees", ev.degrees, "Print angles in degrees");

  std::string labels;
  bool labels_deg = false;
  auto* lc = app.add_subcommand("edges", "Ground-truth rotation from labelled edge angles");
  lc->add_option("--labels", labels, "Edge label JSON")->required();
  lc->add_flag("--degrees", labels_deg, "Print in degrees");

  HoughArgs hough;
  auto* hc = app.add_subcommand("hough", "Edge map and Hough line peaks");
  hc->add_option("--image", hough.image, "Input image")->required();
  hc->add_option("--method", hough.method, "canny, prewitt or log")->check(CLI::IsMember({"canny", "prewitt", "log"}));
  hc->add_option("--peaks", hough.peaks, "Number of lines")->check(CLI::PositiveNumber);
  hc->add_option("--edges", hough.edges_out, "Write the edge raster (PGM/PNG)");
  hc->add_option("--out", hough.out, "Lines CSV (default: stdout)");
  hc->add_option("--low", hough.low, "Canny low threshold");
  hc->add_option("--high", hough.high, "Canny high threshold");
  hc->add_option("--threshold", hough.threshold, "Prewitt or LoG threshold");

  std::vector<std::string> aug_inputs;
  std::string aug_out;
  auto* ac = app.add_subcommand("augment", "Lighting-condition augmentation of training images");
  ac->add_option("images", aug_inputs, "Input images")->required();
  ac->add_option("--out", aug_out, "Output directory")->required();

  std::string boxes;
  int k = 6;
  std::uint64_t anchor_seed = 0;
  auto* kc = app.add_subcommand("anchors", "Anchor box sizes by IoU k-means");
  kc->add_option("--boxes", boxes, "CSV with header w,h")->required();
  kc->add_option("--k", k, "Number of anchors");
  kc->add_option("--seed", anchor_seed, "Seeding RNG seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*sc) return cmd_synth(synth, out);
    if (*tc) return cmd_track(track, out);
    if (*stc) return cmd_study(study, out);
    if (*ec) return cmd_eval(ev, out);
    if (*lc) return cmd_edges(labels, labels_deg, out, err);
    if (*hc) return cmd_hough(hough, out);
    if (*ac) return cmd_augment(aug_inputs, aug_out, out, err);
    if (*kc) return cmd_anchors(boxes, k, anchor_seed, out);
  } catch (const FrameReadError& e) {
    err << "error: cannot read frame " << e.index() << " (" << e.path() << "): " << e.what() << "\n";
    return kIoError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kEvaluationUndefined;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kConfigError;
}

}  // namespace boltrot::cli
