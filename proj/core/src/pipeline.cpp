#include "boltrot/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "boltrot/csv.hpp"
#include "boltrot/image_io.hpp"

namespace boltrot {

void PipelineConfig::validate() const {
  tracker.validate();
  msac.validate();
  if (redetect_min_fp < 2) throw InvalidParameter("pipeline: redetect_min_fp must be >= 2");
  if (redetect_fraction && !(*redetect_fraction > 0.0 && *redetect_fraction <= 1.0))
    throw InvalidParameter("pipeline: redetect_fraction must lie in (0, 1]");
  if (!(associate_iou > 0.0 && associate_iou < 1.0))
    throw InvalidParameter("pipeline: associate_iou must lie in (0, 1)");
  if (periodic_redetect_every && *periodic_redetect_every < 1)
    throw InvalidParameter("pipeline: periodic_redetect_every must be >= 1");
  if (terminate_after_failures < 1) throw InvalidParameter("pipeline: terminate_after_failures must be >= 1");
  if (!(corners.min_quality > 0.0 && corners.min_quality < 1.0))
    throw InvalidParameter("pipeline: corner min_quality must lie in (0, 1)");
  if (corners.filter_dim < 3 || corners.filter_dim % 2 == 0)
    throw InvalidParameter("pipeline: corner filter_dim must be odd and >= 3");
  if (corners.max_points < 1) throw InvalidParameter("pipeline: corner max_points must be >= 1");
}

std::string_view to_string(TrackStatus s) noexcept {
  switch (s) {
    case TrackStatus::Active: return "active";
    case TrackStatus::AwaitingRedetect: return "awaiting_redetect";
    case TrackStatus::Terminated: return "terminated";
  }
  return "unknown";
}

std::string_view to_string(EventKind e) noexcept {
  switch (e) {
    case EventKind::None: return "none";
    case EventKind::Redetect: return "redetect";
    case EventKind::Lost: return "lost";
    case EventKind::Spawn: return "spawn";
    case EventKind::Terminate: return "terminate";
  }
  return "unknown";
}

EventKind event_from_string(std::string_view s) {
  for (EventKind e : {EventKind::None, EventKind::Redetect, EventKind::Lost, EventKind::Spawn, EventKind::Terminate})
    if (to_string(e) == s) return e;
  throw ConfigError("unknown event kind '" + std::string(s) + "'");
}

int BoltTrack::loss_threshold(const PipelineConfig& cfg) const {
  int thr = cfg.redetect_min_fp;
  if (cfg.redetect_fraction)
    thr = std::max(thr, static_cast<int>(std::ceil(*cfg.redetect_fraction * initial_fp_count)));
  return thr;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

void add_event(BoltTrack& t, int frame, EventKind kind, EventKind& row_event) {
  t.events.push_back({frame, kind});
  row_event = kind;
}

void seed_points(BoltTrack& t, const GrayImage& frame, const Roi& roi, const PipelineConfig& cfg) {
  t.roi = roi;
  t.points = detect_corners(frame, roi, cfg.corners);
  t.initial_fp_count = static_cast<int>(t.points.size());
}

Roi clamp_roi(Roi r, int width, int height) {
  r.w = std::min(r.w, width);
  r.h = std::min(r.h, height);
  r.x = std::clamp(r.x, 0, width - r.w);
  r.y = std::clamp(r.y, 0, height - r.h);
  return r;
}

// Moves the ROI with the fitted motion, expressed about the inlier centroid.
void move_roi(BoltTrack& t, const RigidTransform& motion, Point2 centroid, int width, int height) {
  const Point2 moved = motion.apply(centroid);
  const RigidTransform about{motion.theta, moved.x - centroid.x, moved.y - centroid.y};
  const Matrix3 tstar = transform_about_point(about, centroid.x, centroid.y);
  const Point2 c = apply(tstar, {t.roi.center_x(), t.roi.center_y()});
  Roi r = t.roi;
  r.x = static_cast<int>(std::lround(c.x - 0.5 * (r.w - 1)));
  r.y = static_cast<int>(std::lround(c.y - 0.5 * (r.h - 1)));
  t.roi = clamp_roi(r, width, height);
  t.box_angle += motion.theta;
}

}  // namespace

std::vector<BoltTrack> init_tracks(const GrayImage& first_frame, const Detector& detector, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<BoltTrack> tracks;
  int id = 0;
  for (const Roi& roi : detect_validated(detector, first_frame, 0)) {
    BoltTrack t;
    t.id = id++;
    seed_points(t, first_frame, roi, cfg);
    if (static_cast<int>(t.points.size()) < t.loss_threshold(cfg)) t.status = TrackStatus::AwaitingRedetect;
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::vector<StepRecord> step(std::vector<BoltTrack>& tracks, const TrackingFrame& prev, const TrackingFrame& next,
                             const Detector& detector, const PipelineConfig& cfg, int frame_index) {
  const GrayImage& next_image = next.pyramid.base();
  const int width = next.width();
  const int height = next.height();
  std::vector<StepRecord> records;
  std::map<int, std::size_t> record_of;  // track id -> index in records

  for (BoltTrack& t : tracks) {
    if (t.status == TrackStatus::Terminated) continue;
    record_of[t.id] = records.size();
    StepRecord& rec = records.emplace_back();
    rec.bolt_id = t.id;
    if (t.status != TrackStatus::Active) continue;

    const auto outcomes = track_points(prev, next, t.points, cfg.tracker);
    Correspondences corr;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (!outcomes[i].tracked()) continue;
      corr.src.push_back({t.points[i].x, t.points[i].y});
      corr.dst.push_back({outcomes[i].new_x, outcomes[i].new_y});
    }
    const int threshold = t.loss_threshold(cfg);
    bool lost = static_cast<int>(corr.size()) < std::max(2, threshold);
    if (!lost) {
      MsacConfig mc = cfg.msac;
      mc.seed = mix(cfg.msac.seed ^ mix(static_cast<std::uint64_t>(frame_index) * 1000003ull + t.id));
      try {
        const MsacResult fit = fit_rigid_msac(corr, mc);
        rec.increment = extract_angle(fit.transform);
        t.phi += rec.increment;
        Point2 centroid{0.0, 0.0};
        std::vector<FeaturePoint> kept;
        for (std::size_t i = 0; i < corr.size(); ++i) {
          if (!fit.inliers[i]) continue;
          centroid.x += corr.src[i].x;
          centroid.y += corr.src[i].y;
          kept.push_back({corr.dst[i].x, corr.dst[i].y, 0.0});
        }
        centroid.x /= static_cast<double>(kept.size());
        centroid.y /= static_cast<double>(kept.size());
        move_roi(t, fit.transform, centroid, width, height);
        t.points = std::move(kept);
        lost = static_cast<int>(t.points.size()) < threshold;
      } catch (const EstimationFailure&) {
        lost = true;
      }
    } else {
      t.points.clear();
    }
    if (lost) {
      t.status = cfg.redetect_enabled ? TrackStatus::AwaitingRedetect : TrackStatus::Terminated;
      add_event(t, frame_index, EventKind::Lost, rec.event);
    }
  }

  if (!cfg.redetect_enabled) return records;
  const bool periodic = cfg.periodic_redetect_every && frame_index % *cfg.periodic_redetect_every == 0;
  const bool any_waiting = std::any_of(tracks.begin(), tracks.end(),
                                       [](const BoltTrack& t) { return t.status == TrackStatus::AwaitingRedetect; });
  if (!periodic && !any_waiting) return records;

  const std::vector<Roi> detections = detect_validated(detector, next_image, frame_index);
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;  // (iou, track, detection)
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    if (tracks[ti].status == TrackStatus::Terminated) continue;
    for (std::size_t di = 0; di < detections.size(); ++di) {
      const double v = iou(tracks[ti].roi, detections[di]);
      if (v >= cfg.associate_iou) pairs.emplace_back(v, ti, di);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  std::vector<bool> track_used(tracks.size(), false), det_used(detections.size(), false);
  for (const auto& [v, ti, di] : pairs) {
    if (track_used[ti] || det_used[di]) continue;
    track_used[ti] = det_used[di] = true;
    BoltTrack& t = tracks[ti];
    if (t.status == TrackStatus::Active && !periodic) continue;
    StepRecord& rec = records[record_of.at(t.id)];
    seed_points(t, next_image, detections[di], cfg);
    if (static_cast<int>(t.points.size()) >= t.loss_threshold(cfg)) {
      t.status = TrackStatus::Active;
      t.failed_redetects = 0;
      add_event(t, frame_index, EventKind::Redetect, rec.event);
    } else {
      t.status = TrackStatus::AwaitingRedetect;
      ++t.failed_redetects;
    }
  }
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    BoltTrack& t = tracks[ti];
    if (t.status != TrackStatus::AwaitingRedetect || track_used[ti]) continue;
    ++t.failed_redetects;
  }
  for (BoltTrack& t : tracks) {
    if (t.status == TrackStatus::AwaitingRedetect && t.failed_redetects >= cfg.terminate_after_failures) {
      t.status = TrackStatus::Terminated;
      add_event(t, frame_index, EventKind::Terminate, records[record_of.at(t.id)].event);
    }
  }

  int next_id = 0;
  for (const BoltTrack& t : tracks) next_id = std::max(next_id, t.id + 1);
  for (std::size_t di = 0; di < detections.size(); ++di) {
    if (det_used[di]) continue;
    BoltTrack t;
    t.id = next_id++;
    seed_points(t, next_image, detections[di], cfg);
    if (static_cast<int>(t.points.size()) < t.loss_threshold(cfg)) t.status = TrackStatus::AwaitingRedetect;
    StepRecord& rec = records.emplace_back();
    rec.bolt_id = t.id;
    add_event(t, frame_index, EventKind::Spawn, rec.event);
    tracks.push_back(std::move(t));
  }
  return records;
}

GrayImage ManifestFrames::frame(int k) const {
  if (k < 0 || k >= size()) throw IoError("frame index out of range", std::to_string(k));
  return read_gray(manifest_.frame_path(static_cast<std::size_t>(k)));
}

RunResult run(const FrameSource& frames, const Detector& detector, const PipelineConfig& cfg) {
  cfg.validate();
  const int n = frames.size();
  if (n < 2) throw InvalidParameter("run: need at least 2 frames");
  auto load = [&](int k) {
    try {
      return frames.frame(k);
    } catch (const IoError& e) {
      throw FrameReadError(k, e);
    }
  };

  RunResult result;
  result.frames = n;
  GrayImage first = load(0);
  result.tracks = init_tracks(first, detector, cfg);
  TrackingFrame prev = prepare_frame(first, cfg.tracker.np);
  for (int k = 1; k < n; ++k) {
    GrayImage img = load(k);
    if (img.width() != prev.width() || img.height() != prev.height())
      throw FrameReadError(k, IoError("frame size differs from frame 0", std::to_string(k)));
    TrackingFrame next = prepare_frame(img, cfg.tracker.np);
    const auto records = step(result.tracks, prev, next, detector, cfg, k);
    const double t = k / frames.fps();
    for (const StepRecord& rec : records) {
      const auto it = std::find_if(result.tracks.begin(), result.tracks.end(),
                                   [&](const BoltTrack& b) { return b.id == rec.bolt_id; });
      result.history.rows.push_back({k, t, rec.bolt_id, rec.increment, it->phi, static_cast<int>(it->points.size()),
                                     rec.event});
    }
    prev = std::move(next);
  }

  std::map<int, BoltSummary> by_id;
  std::map<int, double> fp_sum;
  for (const BoltTrack& t : result.tracks) {
    BoltSummary s;
    s.bolt_id = t.id;
    s.final_phi = t.phi;
    s.status = t.status;
    for (const TrackEvent& e : t.events) {
      switch (e.kind) {
        case EventKind::Redetect: ++s.redetects; break;
        case EventKind::Lost:
          ++s.losses;
          if (!s.first_loss_frame) s.first_loss_frame = e.frame;
          break;
        case EventKind::Spawn: ++s.spawns; break;
        case EventKind::Terminate: ++s.terminations; break;
        case EventKind::None: break;
      }
    }
    by_id[t.id] = s;
  }
  for (const HistoryRow& r : result.history.rows) {
    BoltSummary& s = by_id[r.bolt_id];
    ++s.rows;
    s.last_frame = r.frame;
    fp_sum[r.bolt_id] += r.n_fps;
  }
  for (auto& [id, s] : by_id) {
    if (s.rows > 0) s.mean_fps = fp_sum[id] / s.rows;
    result.summary.push_back(s);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string RotationHistory::to_csv(bool ccw_positive) const {
  const double sign = ccw_positive ? -1.0 : 1.0;
  std::string out = "frame,time_s,bolt_id,inc_rad,cum_rad,n_fps,event\n";
  for (const HistoryRow& r : rows) {
    out += std::to_string(r.frame);
    out += ',' + csv::fmt(r.time_s);
    out += ',' + std::to_string(r.bolt_id);
    out += ',' + csv::fmt(sign * r.inc_rad + 0.0);
    out += ',' + csv::fmt(sign * r.cum_rad + 0.0);
    out += ',' + std::to_string(r.n_fps);
    out += ',';
    out += to_string(r.event);
    out += '\n';
  }
  return out;
}

std::string RotationHistory::to_gnuplot(bool ccw_positive) const {
  const double sign = ccw_positive ? -1.0 : 1.0;
  std::map<int, std::vector<const HistoryRow*>> per_bolt;
  for (const HistoryRow& r : rows) per_bolt[r.bolt_id].push_back(&r);
  std::string out = "# frame time_s bolt_id inc_rad cum_rad n_fps\n";
  bool first = true;
  for (const auto& [id, list] : per_bolt) {
    if (!first) out += "\n\n";
    first = false;
    out += "# bolt " + std::to_string(id) + "\n";
    for (const HistoryRow* r : list)
      out += std::to_string(r->frame) + ' ' + csv::fmt(r->time_s) + ' ' + std::to_string(id) + ' ' +
             csv::fmt(sign * r->inc_rad + 0.0) + ' ' + csv::fmt(sign * r->cum_rad + 0.0) + ' ' +
             std::to_string(r->n_fps) + '\n';
  }
  return out;
}

RotationHistory RotationHistory::from_csv(const std::string& text) {
  const auto lines = csv::lines(text);
  if (lines.empty() || lines.front() != "frame,time_s,bolt_id,inc_rad,cum_rad,n_fps,event")
    throw ConfigError("history csv: expected header 'frame,time_s,bolt_id,inc_rad,cum_rad,n_fps,event'");
  RotationHistory h;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() != 7) throw ConfigError("history csv line " + std::to_string(i + 1) + ": expected 7 fields");
    h.rows.push_back({static_cast<int>(csv::to_int(f[0])), csv::to_double(f[1]), static_cast<int>(csv::to_int(f[2])),
                      csv::to_double(f[3]), csv::to_double(f[4]), static_cast<int>(csv::to_int(f[5])),
                      event_from_string(f[6])});
  }
  return h;
}

std::vector<std::pair<int, double>> RotationHistory::final_angles() const {
  std::map<int, double> last;
  for (const HistoryRow& r : rows) last[r.bolt_id] = r.cum_rad;
  return {last.begin(), last.end()};
}

std::string RunResult::summary_json(bool ccw_positive) const {
  const double sign = ccw_positive ? -1.0 : 1.0;
  nlohmann::ordered_json j;
  j["frames"] = frames;
  j["angle_convention"] = ccw_positive ? "ccw_positive" : "cw_positive";
  j["bolts"] = nlohmann::ordered_json::array();
  for (const BoltSummary& s : summary) {
    nlohmann::ordered_json b;
    b["bolt_id"] = s.bolt_id;
    b["final_phi_rad"] = sign * s.final_phi + 0.0;
    b["status"] = std::string(to_string(s.status));
    b["redetects"] = s.redetects;
    b["losses"] = s.losses;
    b["spawns"] = s.spawns;
    b["terminations"] = s.terminations;
    b["mean_fps"] = s.mean_fps;
    b["rows"] = s.rows;
    b["last_frame"] = s.last_frame;
    b["lost_before_end"] = s.status != TrackStatus::Active;
    if (s.first_loss_frame)
      b["first_loss_frame"] = *s.first_loss_frame;
    else
      b["first_loss_frame"] = nullptr;
    j["bolts"].push_back(std::move(b));
  }
  return j.dump(2) + "\n";
}

}  // namespace boltrot
