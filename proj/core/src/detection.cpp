#include "boltrot/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "boltrot/error.hpp"

namespace boltrot {

std::vector<Roi> validated_rois(std::vector<Roi> rois, int width, int height) {
  std::erase_if(rois, [&](const Roi& r) {
    return !r.inside(width, height) || r.w < kMinRoiSide || r.h < kMinRoiSide || !(r.confidence >= 0.0) ||
           !(r.confidence <= 1.0);
  });
  return rois;
}

std::vector<Roi> detect_validated(const Detector& detector, const GrayImage& frame, int frame_index) {
  return validated_rois(detector.detect(frame, frame_index), frame.width(), frame.height());
}

AnnotationDetector::AnnotationDetector(const Manifest& manifest, int width, int height) {
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const auto& entry = manifest.frames[i];
    if (!entry.rois) continue;
    for (const Roi& r : *entry.rois) {
      if (!r.inside(width, height) || r.w < kMinRoiSide || r.h < kMinRoiSide)
        throw ConfigError("manifest frame " + std::to_string(i) + ": ROI {" + std::to_string(r.x) + "," +
                          std::to_string(r.y) + "," + std::to_string(r.w) + "," + std::to_string(r.h) +
                          "} is outside the " + std::to_string(width) + "x" + std::to_string(height) +
                          " frame or smaller than " + std::to_string(kMinRoiSide) + " px");
    }
    std::vector<Roi> rois = *entry.rois;
    for (Roi& r : rois) r.confidence = 1.0;
    keyed_.emplace_back(static_cast<int>(i), std::move(rois));
  }
}

std::vector<Roi> AnnotationDetector::detect(const GrayImage&, int frame_index) const {
  auto it = std::upper_bound(keyed_.begin(), keyed_.end(), frame_index,
                             [](int idx, const auto& entry) { return idx < entry.first; });
  if (it == keyed_.begin()) return {};
  return std::prev(it)->second;
}

std::vector<Roi> blob_detect(const GrayImage& frame, const BlobParams& params) {
  if (!(params.luminance_threshold > 0.0 && params.luminance_threshold < 1.0))
    throw InvalidParameter("blob_detect: threshold must lie in (0, 1)");
  const int w = frame.width();
  const int h = frame.height();
  Raster<int> label(w, h, -1);
  std::vector<Roi> out;
  std::vector<std::pair<int, int>> stack;
  int next_label = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (label(x, y) >= 0 || frame(x, y) <= params.luminance_threshold) continue;
      int minx = x, maxx = x, miny = y, maxy = y, area = 0;
      stack.assign(1, {x, y});
      label(x, y) = next_label;
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        minx = std::min(minx, cx);
        maxx = std::max(maxx, cx);
        miny = std::min(miny, cy);
        maxy = std::max(maxy, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (!frame.contains(nx, ny) || label(nx, ny) >= 0 || frame(nx, ny) <= params.luminance_threshold)
              continue;
            label(nx, ny) = next_label;
            stack.emplace_back(nx, ny);
          }
        }
      }
      ++next_label;
      if (area < params.min_area || area > params.max_area) continue;
      const int x0 = std::max(0, minx - 2);
      const int y0 = std::max(0, miny - 2);
      const int x1 = std::min(w - 1, maxx + 2);
      const int y1 = std::min(h - 1, maxy + 2);
      out.push_back({x0, y0, x1 - x0 + 1, y1 - y0 + 1, 1.0});
    }
  }
  return out;
}

double centered_iou(const AnchorBox& a, const AnchorBox& b) noexcept {
  const double inter = std::min(a.width, b.width) * std::min(a.height, b.height);
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

AnchorEstimate estimate_anchor_boxes(const std::vector<AnchorBox>& boxes, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidParameter("estimate_anchor_boxes: k must be >= 1");
  for (const auto& b : boxes)
    if (!(b.width > 0.0 && b.height > 0.0)) throw InvalidParameter("estimate_anchor_boxes: box sides must be > 0");
  std::vector<std::pair<double, double>> distinct;
  for (const auto& b : boxes) distinct.emplace_back(b.width, b.height);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<std::size_t>(k) > distinct.size())
    throw InvalidParameter("estimate_anchor_boxes: k exceeds the number of distinct boxes");

  auto dist = [](const AnchorBox& a, const AnchorBox& b) { return 1.0 - centered_iou(a, b); };
  std::mt19937_64 rng(seed);
  auto uniform01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<AnchorBox> centroids;
  centroids.push_back(boxes[static_cast<std::size_t>(rng() % boxes.size())]);
  std::vector<double> d2(boxes.size());
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, dist(boxes[i], c));
      d2[i] = best * best;
      total += d2[i];
    }
    double target = uniform01() * total;
    std::size_t pick = boxes.size() - 1;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      if (target < d2[i]) break;
      target -= d2[i];
    }
    centroids.push_back(boxes[pick]);
  }

  auto assign_all = [&](const std::vector<AnchorBox>& cs, std::vector<int>& assign) {
    double cost = 0.0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      int best = 0;
      double best_d = dist(boxes[i], cs[0]);
      for (int c = 1; c < k; ++c) {
        const double d = dist(boxes[i], cs[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      cost += best_d;
      assign[i] = best;
    }
    return cost;
  };

  AnchorEstimate est;
  std::vector<int> assign(boxes.size(), -1);
  est.cost_history.push_back(assign_all(centroids, assign));
  for (int round = 1; round < 100; ++round) {
    std::vector<double> sw(k, 0.0), sh(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      sw[assign[i]] += boxes[i].width;
      sh[assign[i]] += boxes[i].height;
      ++count[assign[i]];
    }
    std::vector<AnchorBox> updated = centroids;
    for (int c = 0; c < k; ++c)
      if (count[c] > 0) updated[c] = {sw[c] / count[c], sh[c] / count[c]};
    std::vector<int> next(boxes.size(), -1);
    const double cost = assign_all(updated, next);
    // stop at the first update that raises the cost
    if (cost > est.cost_history.back()) break;
    centroids = std::move(updated);
    est.cost_history.push_back(cost);
    if (next == assign) break;
    assign = std::move(next);
  }
  std::stable_sort(centroids.begin(), centroids.end(),
                   [](const AnchorBox& a, const AnchorBox& b) { return a.width * a.height > b.width * b.height; });
  est.anchors = std::move(centroids);
  return est;
}

double mean_lightness(const RgbImage& img) {
  double sum = 0.0;
  for (const Rgb& px : img.pixels()) {
    const int mx = std::max({px.r, px.g, px.b});
    const int mn = std::min({px.r, px.g, px.b});
    sum += (mx + mn) / 510.0;
  }
  return sum / static_cast<double>(img.size());
}

namespace {

double mean_scaled_l(const HslImage& hsl, double factor) {
  double sum = 0.0;
  for (const Hsl& px : hsl.pixels()) sum += std::min(1.0, px.l * factor);
  return sum / static_cast<double>(hsl.size());
}

// Multiplier on L that brings the clipped mean lightness to `target`.
double solve_lightness_factor(const HslImage& hsl, double mean_l, double target) {
  double lo = 0.0;
  double hi = target / mean_l;
  if (mean_scaled_l(hsl, hi) >= target) return hi;  // no clipping slack to make up
  while (mean_scaled_l(hsl, hi) < target && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_scaled_l(hsl, mid) < target ? lo : hi) = mid;
  }
  return hi;
}

RgbImage rescale_lightness(const HslImage& hsl, double factor) {
  HslImage scaled = hsl;
  for (Hsl& px : scaled.pixels()) px.l = std::clamp(px.l * factor, 0.0, 1.0);
  return hsl_to_rgb(scaled);
}

}  // namespace

AugmentResult lighting_augment(const std::vector<RgbImage>& images) {
  if (images.empty()) throw InvalidParameter("lighting_augment: need at least one image");
  std::vector<double> means;
  means.reserve(images.size());
  for (const auto& img : images) means.push_back(mean_lightness(img));
  const auto [lo_it, hi_it] = std::minmax_element(means.begin(), means.end());
  const double lo = *lo_it;
  const double width = (*hi_it - lo) / 3.0;

  auto section_of = [&](double m) {
    if (!(width > 0.0)) return 0;
    return std::clamp(static_cast<int>((m - lo) / width), 0, 2);
  };
  std::vector<double> sum(3, 0.0);
  std::vector<int> count(3, 0);
  for (double m : means) {
    sum[section_of(m)] += m;
    ++count[section_of(m)];
  }
  AugmentResult result;
  for (int s = 0; s < 3; ++s)
    result.section_means.push_back(count[s] > 0 ? sum[s] / count[s] : lo + width * (s + 0.5));

  result.images.reserve(images.size() * 3);
  for (std::size_t i = 0; i < images.size(); ++i) {
    result.images.push_back(images[i]);
    const int own = section_of(means[i]);
    const HslImage hsl = rgb_to_hsl(images[i]);
    for (int s = 0; s < 3; ++s) {
      if (s == own) continue;
      if (!(means[i] > 0.0)) {
        result.warnings.push_back("image " + std::to_string(i) + " has zero mean lightness; copy left unscaled");
        result.images.push_back(images[i]);
        continue;
      }
      const double target = result.section_means[s];
      result.images.push_back(rescale_lightness(hsl, solve_lightness_factor(hsl, means[i], target)));
    }
  }
  return result;
}

}  // namespace boltrot
