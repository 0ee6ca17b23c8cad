#include "boltrot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "boltrot/csv.hpp"
#include "boltrot/error.hpp"
#include "boltrot/image_io.hpp"

namespace boltrot {
namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double unit(std::uint64_t& state) noexcept {
  state = splitmix64(state);
  return static_cast<double>(state >> 11) * 0x1.0p-53;
}

constexpr double kSpeckleDepths[] = {0.9, 0.75, 0.6};

// Multiplicative speckle attenuation at bolt-local (u, v): a product of smooth,
// compactly supported dark blobs, one per occupied grid cell.
double speckle(const SceneConfig& scene, const BoltSpec& bolt, double u, double v) noexcept {
  const double pitch = scene.speckle_cell;
  const long ci = static_cast<long>(std::floor(u / pitch));
  const long cj = static_cast<long>(std::floor(v / pitch));
  double gain = 1.0;
  for (long j = cj - 1; j <= cj + 1; ++j) {
    for (long i = ci - 1; i <= ci + 1; ++i) {
      std::uint64_t s = splitmix64(bolt.texture_seed ^ splitmix64(static_cast<std::uint64_t>(i) * 0x1f1f1f1full +
                                                                   static_cast<std::uint64_t>(j) * 0x9e3779b1ull));
      if (unit(s) > 0.85) continue;  // empty cell
      const double bx = (i + 0.2 + 0.6 * unit(s)) * pitch;
      const double by = (j + 0.2 + 0.6 * unit(s)) * pitch;
      const double r = (0.55 + 0.35 * unit(s)) * pitch;
      const double depth = kSpeckleDepths[static_cast<int>(unit(s) * 3.0) % 3];
      const double q = ((u - bx) * (u - bx) + (v - by) * (v - by)) / (r * r);
      if (q >= 1.0) continue;
      const double w = (1.0 - q) * (1.0 - q) * (1.0 - q);
      gain *= 1.0 - depth * w;
    }
  }
  return gain;
}

bool inside_hexagon(double u, double v, double circumradius) noexcept {
  // Flat-top hexagon with a vertex on +u: edge normals at 30 + 60k degrees.
  const double inradius = circumradius * std::sqrt(3.0) / 2.0;
  const double au = std::abs(u), av = std::abs(v);
  if (av > inradius) return false;
  return 0.5 * std::sqrt(3.0) * au + 0.5 * av <= inradius;
}

double scene_sample(const SceneConfig& scene, const std::vector<double>& theta, double x, double y) noexcept {
  double value = scene.background;
  for (const auto& c : scene.clutter)
    if (x >= c.x - 0.5 && x < c.x + c.w - 0.5 && y >= c.y - 0.5 && y < c.y + c.h - 0.5) value = c.level;
  for (std::size_t b = 0; b < scene.bolts.size(); ++b) {
    const BoltSpec& bolt = scene.bolts[b];
    const double dx = x - bolt.cx, dy = y - bolt.cy;
    const double rw = bolt.washer_radius();
    if (dx * dx + dy * dy > rw * rw) continue;
    value = scene.washer_level;
    // world = centre + R(theta) local, so local = R(-theta) (world - centre)
    const double c = std::cos(theta[b]), s = std::sin(theta[b]);
    const double u = dx * c + dy * s;
    const double v = -dx * s + dy * c;
    if (!inside_hexagon(u, v, bolt.circumradius)) continue;
    value = scene.hex_level;
    if (bolt.textured) value *= speckle(scene, bolt, u, v);
  }
  return value;
}

std::uint64_t frame_seed(std::uint64_t seed, int k) noexcept {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(k) + 0x51ed27ull));
}

}  // namespace

void SceneConfig::validate() const {
  if (width < 16 || height < 16) throw ConfigError("scene: frame must be at least 16x16");
  if (!(fps > 0.0)) throw ConfigError("scene: fps must be positive");
  if (!(duration > 0.0)) throw ConfigError("scene: duration must be positive");
  if (supersample < 1) throw ConfigError("scene: supersample must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scene: noise_sigma must be >= 0");
  if (!(speckle_cell > 1.0)) throw ConfigError("scene: speckle_cell must exceed 1 px");
  if (lighting.empty()) throw ConfigError("scene: lighting schedule is empty");
  for (const auto& k : lighting)
    if (!(k.value > 0.0 && k.value <= 2.0)) throw ConfigError("scene: lighting multipliers must lie in (0, 2]");
  for (std::size_t i = 1; i < lighting.size(); ++i)
    if (!(lighting[i].t >= lighting[i - 1].t)) throw ConfigError("scene: lighting knots must be time-ordered");
  for (std::size_t b = 0; b < bolts.size(); ++b) {
    const auto& bolt = bolts[b];
    const std::string tag = "scene: bolt " + std::to_string(b);
    if (!(bolt.circumradius >= 12.0)) throw ConfigError(tag + " circumradius must be >= 12 px");
    const double m = bolt.circumradius;
    if (bolt.cx - m < m || bolt.cy - m < m || bolt.cx + m > width - 1 - m || bolt.cy + m > height - 1 - m)
      throw ConfigError(tag + " lies outside the frame margin");
    if (bolt.angle_profile.empty()) throw ConfigError(tag + " has an empty angle profile");
    for (std::size_t i = 1; i < bolt.angle_profile.size(); ++i)
      if (!(bolt.angle_profile[i].t > bolt.angle_profile[i - 1].t))
        throw ConfigError(tag + " angle knots must be strictly time-ordered");
  }
}

int SceneConfig::frame_count() const { return std::max(1, static_cast<int>(std::lround(duration * fps))); }

double SceneConfig::lighting_at(double t) const noexcept {
  double m = lighting.empty() ? 1.0 : lighting.front().value;
  for (const auto& k : lighting)
    if (t >= k.t) m = k.value;
  return m;
}

double profile_at(const std::vector<Knot>& knots, double t) noexcept {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().t) return knots.front().value;
  if (t >= knots.back().t) return knots.back().value;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (t <= knots[i].t) {
      const Knot& a = knots[i - 1];
      const Knot& b = knots[i];
      return a.value + (t - a.t) / (b.t - a.t) * (b.value - a.value);
    }
  }
  return knots.back().value;
}

std::vector<Knot> linear_profile(const SceneConfig& scene, double total) {
  return {{0.0, 0.0}, {scene.frame_time(scene.frame_count() - 1), total}};
}

RenderedFrame render_frame(const SceneConfig& scene, double t) {
  if (!(t >= 0.0 && t <= scene.duration)) throw InvalidParameter("render_frame: time outside the scene duration");
  RenderedFrame out;
  out.theta.reserve(scene.bolts.size());
  for (const auto& b : scene.bolts) out.theta.push_back(profile_at(b.angle_profile, t));

  const int ss = scene.supersample;
  const double inv = 1.0 / (ss * ss);
  const double gain = scene.lighting_at(t);
  GrayImage img(scene.width, scene.height);
  std::vector<double> offsets(ss);
  for (int i = 0; i < ss; ++i) offsets[i] = -0.5 + (i + 0.5) / ss;

  for (int y = 0; y < scene.height; ++y) {
    for (int x = 0; x < scene.width; ++x) {
      double acc = 0.0;
      for (int j = 0; j < ss; ++j)
        for (int i = 0; i < ss; ++i) acc += scene_sample(scene, out.theta, x + offsets[i], y + offsets[j]);
      img(x, y) = acc * inv * gain;
    }
  }

  if (scene.noise_sigma > 0.0) {
    std::uint64_t state = frame_seed(scene.noise_seed, static_cast<int>(std::lround(t * scene.fps)));
    for (double& v : img.pixels()) {
      // Box-Muller on a splitmix stream
      const double u1 = std::max(unit(state), 1e-300);
      const double u2 = unit(state);
      v += scene.noise_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
  }
  for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
  out.image = std::move(img);
  return out;
}

Roi bolt_roi(const SceneConfig& scene, std::size_t bolt) {
  const BoltSpec& b = scene.bolts.at(bolt);
  const int x0 = std::max(0, static_cast<int>(std::floor(b.cx - b.circumradius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(b.cy - b.circumradius)));
  const int x1 = std::min(scene.width - 1, static_cast<int>(std::ceil(b.cx + b.circumradius)));
  const int y1 = std::min(scene.height - 1, static_cast<int>(std::ceil(b.cy + b.circumradius)));
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1, 1.0};
}

std::vector<GroundTruthRow> ground_truth(const SceneConfig& scene) {
  std::vector<GroundTruthRow> rows;
  const int n = scene.frame_count();
  rows.reserve(static_cast<std::size_t>(n) * scene.bolts.size());
  for (int k = 0; k < n; ++k) {
    const double t = scene.frame_time(k);
    for (std::size_t b = 0; b < scene.bolts.size(); ++b)
      rows.push_back({k, t, static_cast<int>(b), profile_at(scene.bolts[b].angle_profile, t)});
  }
  return rows;
}

std::string frame_file_name(int k, const std::string& extension) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.", k);
  return buf + extension;
}

std::vector<GrayImage> render_all(const SceneConfig& scene) {
  scene.validate();
  std::vector<GrayImage> frames;
  const int n = scene.frame_count();
  frames.reserve(n);
  for (int k = 0; k < n; ++k) {
    GrayImage img = render_frame(scene, scene.frame_time(k)).image;
    for (double& v : img.pixels()) v = to_u8(v) / 255.0;  // match the 8-bit files exactly
    frames.push_back(std::move(img));
  }
  return frames;
}

Manifest generate(const SceneConfig& scene, const fs::path& out_dir, const std::string& extension) {
  scene.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + ec.message(), out_dir.string());

  Manifest manifest;
  manifest.fps = scene.fps;
  manifest.width = scene.width;
  manifest.height = scene.height;
  manifest.base_dir = out_dir;
  const int n = scene.frame_count();
  for (int k = 0; k < n; ++k) {
    const std::string name = frame_file_name(k, extension);
    write_gray(out_dir / name, render_frame(scene, scene.frame_time(k)).image);
    ManifestFrame entry{name, std::nullopt};
    if (k == 0) {
      std::vector<Roi> rois;
      for (std::size_t b = 0; b < scene.bolts.size(); ++b) rois.push_back(bolt_roi(scene, b));
      entry.rois = std::move(rois);
    }
    manifest.frames.push_back(std::move(entry));
  }
  write_file_atomic(out_dir / "manifest.json", manifest_to_json(manifest));
  write_file_atomic(out_dir / "gt.csv", ground_truth_csv(ground_truth(scene)));
  return manifest;
}

SceneConfig preset_scene(std::string_view name) {
  SceneConfig s;
  s.noise_sigma = 0.01;
  if (name == "clean") {
    s.fps = 30.0;
    s.duration = 15.0;
    s.bolts.push_back(BoltSpec{63.5, 63.5, 20.0, 1});
    s.bolts[0].angle_profile = linear_profile(s, 8.45);
  } else if (name == "lighting") {
    s.fps = 15.0;
    s.duration = 30.0;
    s.lighting = {{0.0, 1.0}, {10.0, 1.5}, {20.0, 1.0}};
    s.bolts.push_back(BoltSpec{63.5, 63.5, 20.0, 1});
    s.bolts[0].angle_profile = linear_profile(s, 13.25);
  } else if (name == "static") {
    s.width = 256;
    s.height = 160;
    s.fps = 30.0;
    s.duration = 14.0;
    for (int i = 0; i < 5; ++i)
      s.bolts.push_back(BoltSpec{41.0 + (i % 3) * 64.0, 41.0 + (i / 3) * 64.0, 20.0, 11u + i});
  } else if (name == "study") {
    s.width = 248;
    s.height = 248;
    s.fps = 30.0;
    s.duration = 5.0;
    BoltSpec b{123.5, 123.5, 60.0, 1};
    b.angle_profile = {{0.0, 0.0}};
    double angle = 0.0;
    for (int k = 1; k < s.frame_count(); ++k) {
      const bool slip = k % 50 == 25;
      if (slip) b.angle_profile.push_back({s.frame_time(k - 1), angle});
      angle += slip ? 0.25 : 0.03;
      if (slip || k == s.frame_count() - 1) b.angle_profile.push_back({s.frame_time(k), angle});
    }
    s.bolts.push_back(b);
  } else {
    throw ConfigError("unknown preset scene '" + std::string(name) + "'");
  }
  s.noise_seed = 101;
  return s;
}

std::vector<std::string> preset_names() { return {"clean", "lighting", "static", "study"}; }

std::string ground_truth_csv(const std::vector<GroundTruthRow>& rows) {
  std::string out = "frame,time_s,bolt_id,theta_rad\n";
  for (const auto& r : rows)
    out += std::to_string(r.frame) + "," + csv::fmt(r.time_s) + "," + std::to_string(r.bolt_id) + "," +
           csv::fmt(r.theta_rad) + "\n";
  return out;
}

std::vector<GroundTruthRow> parse_ground_truth_csv(const std::string& text) {
  const auto lines = csv::lines(text);
  if (lines.empty() || lines.front() != "frame,time_s,bolt_id,theta_rad")
    throw ConfigError("gt.csv: expected header 'frame,time_s,bolt_id,theta_rad'");
  std::vector<GroundTruthRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() != 4) throw ConfigError("gt.csv line " + std::to_string(i + 1) + ": expected 4 fields");
    rows.push_back({static_cast<int>(csv::to_int(f[0])), csv::to_double(f[1]), static_cast<int>(csv::to_int(f[2])),
                    csv::to_double(f[3])});
  }
  return rows;
}

}  // namespace boltrot
