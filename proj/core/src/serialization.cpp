#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "boltrot/config.hpp"

namespace boltrot {

using Json = nlohmann::ordered_json;

namespace {

Json parse_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(what + ": line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// Strict object reader: typed lookups plus an unknown-key check.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "document" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* v = find(key);
    if (!v) fail(join(path_, key), "missing");
    return *v;
  }

  std::string field(const std::string& key) const { return join(path_, key); }

  void get(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = as_double(*v, field(key));
  }
  void get(const std::string& key, int& out) {
    if (const Json* v = find(key)) out = as_int(*v, field(key));
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (const Json* v = find(key)) out = as_u64(*v, field(key));
  }
  void get(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const Json* v = find(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    const Json* v = find(key);
    if (!v || v->is_null()) return;
    T tmp{};
    seen_.erase(key);
    get(key, tmp);
    out = tmp;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
  }

  static double as_double(const Json& v, const std::string& f) {
    if (!v.is_number()) fail(f, "expected a number");
    return v.get<double>();
  }
  static int as_int(const Json& v, const std::string& f) {
    if (!v.is_number_integer()) fail(f, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(f, "integer out of range");
    return static_cast<int>(x);
  }
  static std::uint64_t as_u64(const Json& v, const std::string& f) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    fail(f, "expected a non-negative integer");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const Json& array_at(Reader& r, const std::string& key) {
  const Json& v = r.require(key);
  if (!v.is_array()) Reader::fail(r.field(key), "expected an array");
  return v;
}

template <class T, class F>
void read_list(Reader& r, const std::string& key, std::vector<T>& out, F&& each) {
  const Json* v = r.find(key);
  if (!v) return;
  if (!v->is_array()) Reader::fail(r.field(key), "expected an array");
  out.clear();
  for (std::size_t i = 0; i < v->size(); ++i) out.push_back(each((*v)[i], r.field(key) + "[" + std::to_string(i) + "]"));
}

// ---- pipeline ----

Json tracker_json(const TrackerConfig& t) {
  return Json{{"np", t.np}, {"be", t.be}, {"bs", t.bs}, {"ni", t.ni}, {"eps", t.eps}};
}

Json pipeline_json(const PipelineConfig& c) {
  Json j;
  j["tracker"] = tracker_json(c.tracker);
  j["msac"] = Json{{"inlier_threshold", c.msac.inlier_threshold},
                   {"confidence", c.msac.confidence},
                   {"max_trials", c.msac.max_trials},
                   {"seed", c.msac.seed}};
  j["corners"] = Json{{"min_quality", c.corners.min_quality},
                      {"filter_dim", c.corners.filter_dim},
                      {"max_points", c.corners.max_points}};
  j["redetect_min_fp"] = c.redetect_min_fp;
  j["redetect_fraction"] = c.redetect_fraction ? Json(*c.redetect_fraction) : Json(nullptr);
  j["associate_iou"] = c.associate_iou;
  j["periodic_redetect_every"] = c.periodic_redetect_every ? Json(*c.periodic_redetect_every) : Json(nullptr);
  j["redetect_enabled"] = c.redetect_enabled;
  j["terminate_after_failures"] = c.terminate_after_failures;
  return j;
}

PipelineConfig read_pipeline(const Json& j, const std::string& path) {
  PipelineConfig c;
  Reader r(j, path);
  if (const Json* t = r.find("tracker")) {
    Reader tr(*t, r.field("tracker"));
    tr.get("np", c.tracker.np);
    tr.get("be", c.tracker.be);
    tr.get("bs", c.tracker.bs);
    tr.get("ni", c.tracker.ni);
    tr.get("eps", c.tracker.eps);
    tr.finish();
  }
  if (const Json* m = r.find("msac")) {
    Reader mr(*m, r.field("msac"));
    mr.get("inlier_threshold", c.msac.inlier_threshold);
    mr.get("confidence", c.msac.confidence);
    mr.get("max_trials", c.msac.max_trials);
    mr.get("seed", c.msac.seed);
    mr.finish();
  }
  if (const Json* k = r.find("corners")) {
    Reader kr(*k, r.field("corners"));
    kr.get("min_quality", c.corners.min_quality);
    kr.get("filter_dim", c.corners.filter_dim);
    kr.get("max_points", c.corners.max_points);
    kr.finish();
  }
  r.get("redetect_min_fp", c.redetect_min_fp);
  r.get("redetect_fraction", c.redetect_fraction);
  r.get("associate_iou", c.associate_iou);
  r.get("periodic_redetect_every", c.periodic_redetect_every);
  r.get("redetect_enabled", c.redetect_enabled);
  r.get("terminate_after_failures", c.terminate_after_failures);
  r.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string(path.empty() ? "pipeline" : path) + ": " + e.what());
  }
  return c;
}

// ---- scene ----

Json knots_json(const std::vector<Knot>& knots) {
  Json a = Json::array();
  for (const Knot& k : knots) a.push_back(Json{{"t", k.t}, {"value", k.value}});
  return a;
}

Knot read_knot(const Json& j, const std::string& path) {
  Knot k;
  Reader r(j, path);
  k.t = Reader::as_double(r.require("t"), r.field("t"));
  k.value = Reader::as_double(r.require("value"), r.field("value"));
  r.finish();
  return k;
}

Json scene_json(const SceneConfig& c) {
  Json j;
  j["width"] = c.width;
  j["height"] = c.height;
  j["fps"] = c.fps;
  j["duration"] = c.duration;
  Json bolts = Json::array();
  for (const BoltSpec& b : c.bolts) {
    bolts.push_back(Json{{"cx", b.cx},
                         {"cy", b.cy},
                         {"circumradius", b.circumradius},
                         {"texture_seed", b.texture_seed},
                         {"textured", b.textured},
                         {"angle_profile", knots_json(b.angle_profile)}});
  }
  j["bolts"] = std::move(bolts);
  j["lighting"] = knots_json(c.lighting);
  j["noise_sigma"] = c.noise_sigma;
  j["noise_seed"] = c.noise_seed;
  j["background"] = c.background;
  Json clutter = Json::array();
  for (const ClutterRect& r : c.clutter)
    clutter.push_back(Json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}, {"level", r.level}});
  j["clutter"] = std::move(clutter);
  j["supersample"] = c.supersample;
  j["washer_level"] = c.washer_level;
  j["hex_level"] = c.hex_level;
  j["speckle_cell"] = c.speckle_cell;
  return j;
}

SceneConfig read_scene(const Json& j) {
  SceneConfig c;
  Reader r(j, "");
  r.get("width", c.width);
  r.get("height", c.height);
  r.get("fps", c.fps);
  r.get("duration", c.duration);
  r.get("noise_sigma", c.noise_sigma);
  r.get("noise_seed", c.noise_seed);
  r.get("background", c.background);
  r.get("supersample", c.supersample);
  r.get("washer_level", c.washer_level);
  r.get("hex_level", c.hex_level);
  r.get("speckle_cell", c.speckle_cell);
  read_list(r, "lighting", c.lighting, read_knot);
  read_list(r, "clutter", c.clutter, [](const Json& e, const std::string& p) {
    ClutterRect rect;
    Reader cr(e, p);
    cr.get("x", rect.x);
    cr.get("y", rect.y);
    cr.get("w", rect.w);
    cr.get("h", rect.h);
    cr.get("level", rect.level);
    cr.finish();
    return rect;
  });
  // Bolts may give "total_rotation" instead of explicit knots: a linear ramp
  // from 0 to that angle at the last frame time.
  std::vector<std::optional<double>> totals;
  read_list(r, "bolts", c.bolts, [&](const Json& e, const std::string& p) {
    BoltSpec b;
    Reader br(e, p);
    br.get("cx", b.cx);
    br.get("cy", b.cy);
    br.get("circumradius", b.circumradius);
    br.get("texture_seed", b.texture_seed);
    br.get("textured", b.textured);
    read_list(br, "angle_profile", b.angle_profile, read_knot);
    std::optional<double> total;
    br.get("total_rotation", total);
    if (total && e.contains("angle_profile"))
      Reader::fail(p, "give either angle_profile or total_rotation, not both");
    br.finish();
    totals.push_back(total);
    return b;
  });
  r.finish();
  try {
    for (std::size_t i = 0; i < c.bolts.size(); ++i)
      if (totals[i]) c.bolts[i].angle_profile = linear_profile(c, *totals[i]);
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  return c;
}

// ---- manifest ----

Roi read_roi(const Json& j, const std::string& path) {
  Roi roi;
  Reader r(j, path);
  roi.x = Reader::as_int(r.require("x"), r.field("x"));
  roi.y = Reader::as_int(r.require("y"), r.field("y"));
  roi.w = Reader::as_int(r.require("w"), r.field("w"));
  roi.h = Reader::as_int(r.require("h"), r.field("h"));
  r.get("confidence", roi.confidence);
  r.finish();
  return roi;
}

}  // namespace

std::string_view to_string(DetectorKind k) noexcept { return k == DetectorKind::Blob ? "blob" : "annotation"; }

PipelineConfig RunConfig::effective_pipeline() const {
  PipelineConfig p = pipeline;
  if (seed) p.msac.seed = *seed;
  return p;
}

void RunConfig::validate() const {
  pipeline.validate();
  if (blob.min_area < 1 || blob.max_area < blob.min_area) throw ConfigError("blob: need 1 <= min_area <= max_area");
}

std::string to_json(const PipelineConfig& c) { return pipeline_json(c).dump(2) + "\n"; }
std::string to_json(const SceneConfig& c) { return scene_json(c).dump(2) + "\n"; }

std::string to_json(const StudyGrid& c) {
  Json j;
  j["np_values"] = c.np_values;
  j["be_values"] = c.be_values;
  j["bs_values"] = c.bs_values;
  j["ni_values"] = c.ni_values;
  j["base"] = pipeline_json(c.base);
  j["scene"] = c.scene;
  return j.dump(2) + "\n";
}

std::string to_json(const RunConfig& c) {
  Json j;
  j["pipeline"] = pipeline_json(c.pipeline);
  j["detector"] = std::string(to_string(c.detector));
  j["blob"] = Json{{"luminance_threshold", c.blob.luminance_threshold},
                   {"min_area", c.blob.min_area},
                   {"max_area", c.blob.max_area}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  j["history_out"] = c.history_out;
  j["summary_out"] = c.summary_out;
  return j.dump(2) + "\n";
}

PipelineConfig parse_pipeline_config(const std::string& text) {
  return read_pipeline(parse_text(text, "pipeline config"), "");
}

SceneConfig parse_scene_config(const std::string& text) { return read_scene(parse_text(text, "scene config")); }

StudyGrid parse_study_grid(const std::string& text) {
  const Json j = parse_text(text, "study grid");
  StudyGrid g;
  Reader r(j, "");
  auto ints = [](const Json& e, const std::string& p) { return Reader::as_int(e, p); };
  auto doubles = [](const Json& e, const std::string& p) { return Reader::as_double(e, p); };
  read_list(r, "np_values", g.np_values, ints);
  read_list(r, "be_values", g.be_values, doubles);
  read_list(r, "bs_values", g.bs_values, ints);
  read_list(r, "ni_values", g.ni_values, ints);
  if (const Json* b = r.find("base")) g.base = read_pipeline(*b, "base");
  r.get("scene", g.scene);
  r.finish();
  try {
    g.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return g;
}

RunConfig parse_run_config(const std::string& text) {
  const Json j = parse_text(text, "run config");
  RunConfig c;
  Reader r(j, "");
  if (const Json* p = r.find("pipeline")) c.pipeline = read_pipeline(*p, "pipeline");
  std::string det = std::string(to_string(c.detector));
  r.get("detector", det);
  if (det == "annotation") {
    c.detector = DetectorKind::Annotation;
  } else if (det == "blob") {
    c.detector = DetectorKind::Blob;
  } else {
    Reader::fail("detector", "expected \"annotation\" or \"blob\", got \"" + det + "\"");
  }
  if (const Json* b = r.find("blob")) {
    Reader br(*b, "blob");
    br.get("luminance_threshold", c.blob.luminance_threshold);
    br.get("min_area", c.blob.min_area);
    br.get("max_area", c.blob.max_area);
    br.finish();
  }
  r.get("seed", c.seed);
  r.get("history_out", c.history_out);
  r.get("summary_out", c.summary_out);
  r.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string(), path.string());
  return ss.str();
}

Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir) {
  const Json j = parse_text(json_text, "manifest");
  Manifest m;
  m.base_dir = base_dir;
  Reader r(j, "");
  m.fps = Reader::as_double(r.require("fps"), "fps");
  if (!(m.fps > 0.0)) Reader::fail("fps", "must be positive");
  r.get("width", m.width);
  r.get("height", m.height);
  const Json& frames = array_at(r, "frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string p = "frames[" + std::to_string(i) + "]";
    Reader fr(frames[i], p);
    ManifestFrame f;
    const Json& file = fr.require("file");
    if (!file.is_string()) Reader::fail(fr.field("file"), "expected a string");
    f.file = file.get<std::string>();
    if (const Json* rois = fr.find("rois"); rois && !rois->is_null()) {
      if (!rois->is_array()) Reader::fail(fr.field("rois"), "expected an array");
      std::vector<Roi> list;
      for (std::size_t k = 0; k < rois->size(); ++k)
        list.push_back(read_roi((*rois)[k], fr.field("rois") + "[" + std::to_string(k) + "]"));
      f.rois = std::move(list);
    }
    fr.finish();
    m.frames.push_back(std::move(f));
  }
  r.finish();
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_text_file(path), path.parent_path());
}

std::string manifest_to_json(const Manifest& m) {
  Json j;
  j["fps"] = m.fps;
  if (m.width) j["width"] = *m.width;
  if (m.height) j["height"] = *m.height;
  Json frames = Json::array();
  for (const ManifestFrame& f : m.frames) {
    Json fj;
    fj["file"] = f.file;
    if (f.rois) {
      Json rois = Json::array();
      for (const Roi& roi : *f.rois)
        rois.push_back(Json{{"x", roi.x}, {"y", roi.y}, {"w", roi.w}, {"h", roi.h}, {"confidence", roi.confidence}});
      fj["rois"] = std::move(rois);
    }
    frames.push_back(std::move(fj));
  }
  j["frames"] = std::move(frames);
  return j.dump(2) + "\n";
}

}  // namespace boltrot
