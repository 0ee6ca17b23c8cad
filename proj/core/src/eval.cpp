#include "boltrot/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "boltrot/csv.hpp"

namespace boltrot {

double wrap_line_delta_deg(double start_deg, double end_deg) noexcept {
  double d = std::fmod(end_deg - start_deg, 180.0);
  if (d > 90.0) d -= 180.0;
  if (d <= -90.0) d += 180.0;
  return d;
}

EdgeGroundTruth gt_from_edges(const EdgeLabelSet& labels) {
  EdgeGroundTruth out;
  for (std::size_t j = 0; j < labels.intervals.size(); ++j) {
    const auto& edges = labels.intervals[j].edges;
    if (edges.empty()) throw InvalidParameter("gt_from_edges: interval " + std::to_string(j) + " has no edges");
    double sum = 0.0;
    bool flagged = false;
    for (const EdgeLabel& e : edges) {
      const double d = wrap_line_delta_deg(e.start_deg, e.end_deg);
      if (std::abs(d) >= 60.0) flagged = true;
      sum += d;
    }
    const double mean_rad = sum / static_cast<double>(edges.size()) * std::numbers::pi / 180.0;
    out.interval_rotation.push_back(mean_rad);
    out.phi_gt += mean_rad;
    if (flagged) out.flagged_intervals.push_back(j);
  }
  return out;
}

std::optional<double> accuracy(double phi, double phi_gt) noexcept {
  if (!(std::abs(phi_gt) > kZeroGroundTruth)) return std::nullopt;
  return std::max(0.0, 1.0 - std::abs((phi - phi_gt) / phi_gt));
}

void StudyGrid::validate() const {
  if (np_values.empty() || be_values.empty() || bs_values.empty() || ni_values.empty())
    throw ConfigError("study grid: every parameter needs at least one value");
  for (int np : np_values) {
    TrackerConfig t = base.tracker;
    t.np = np;
    t.validate();
  }
  for (double be : be_values)
    if (!(be > 0.0)) throw ConfigError("study grid: be values must be positive");
  for (int bs : bs_values)
    if (bs < 3 || bs % 2 == 0) throw ConfigError("study grid: bs values must be odd and >= 3");
  for (int ni : ni_values)
    if (ni < 1) throw ConfigError("study grid: ni values must be >= 1");
}

std::optional<double> mean_accuracy(const std::vector<StudyRow>& rows,
                                    const std::function<bool(const StudyRow&)>& keep) {
  double sum = 0.0;
  int n = 0;
  for (const StudyRow& r : rows) {
    if (!r.accuracy || !keep(r)) continue;
    sum += *r.accuracy;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::vector<Marginal> marginal_means(const std::vector<StudyRow>& rows) {
  std::vector<Marginal> out;
  auto collect = [&](const std::string& name, auto value_of) {
    std::map<double, std::pair<double, int>> acc;
    for (const StudyRow& r : rows) {
      if (!r.accuracy) continue;
      auto& slot = acc[static_cast<double>(value_of(r))];
      slot.first += *r.accuracy;
      ++slot.second;
    }
    for (const auto& [v, s] : acc) out.push_back({name, v, s.first / s.second, s.second});
  };
  collect("np", [](const StudyRow& r) { return r.np; });
  collect("be", [](const StudyRow& r) { return r.be; });
  collect("bs", [](const StudyRow& r) { return r.bs; });
  collect("ni", [](const StudyRow& r) { return r.ni; });
  return out;
}

std::vector<std::pair<int, double>> final_ground_truth(const std::vector<GroundTruthRow>& rows) {
  std::map<int, std::pair<const GroundTruthRow*, const GroundTruthRow*>> span;
  for (const GroundTruthRow& r : rows) {
    auto& s = span[r.bolt_id];
    if (!s.first || r.frame < s.first->frame) s.first = &r;
    if (!s.second || r.frame >= s.second->frame) s.second = &r;
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [id, s] : span) out.emplace_back(id, s.second->theta_rad - s.first->theta_rad);
  return out;
}

StudyRow evaluate_cell(const StudyInputs& in, const PipelineConfig& cfg) {
  StudyRow row;
  row.np = cfg.tracker.np;
  row.be = cfg.tracker.be;
  row.bs = cfg.tracker.bs;
  row.ni = cfg.tracker.ni;
  try {
    const RunResult res = run(*in.frames, *in.detector, cfg);
    double sum = 0.0;
    int n = 0;
    bool have_phi = false;
    for (const auto& [id, gt] : in.phi_gt) {
      if (!(std::abs(gt) > kZeroGroundTruth)) continue;
      const auto it = std::find_if(res.summary.begin(), res.summary.end(),
                                   [&](const BoltSummary& s) { return s.bolt_id == id; });
      const double phi = it == res.summary.end() ? 0.0 : it->final_phi;
      if (!have_phi) {
        row.final_phi = phi;
        have_phi = true;
      }
      sum += *accuracy(phi, gt);
      ++n;
    }
    for (const BoltSummary& s : res.summary) row.redetects += s.redetects;
    if (n == 0) {
      row.error = "no bolt with nonzero ground truth";
    } else {
      row.accuracy = sum / n;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

StudyResult run_param_study(const StudyGrid& grid, const StudyInputs& in) {
  grid.validate();
  if (!in.frames || !in.detector) throw InvalidParameter("run_param_study: frames and detector are required");
  std::vector<PipelineConfig> cells;
  cells.reserve(grid.size());
  for (int np : grid.np_values)
    for (double be : grid.be_values)
      for (int bs : grid.bs_values)
        for (int ni : grid.ni_values) {
          PipelineConfig cfg = grid.base;
          cfg.tracker.np = np;
          cfg.tracker.be = be;
          cfg.tracker.bs = bs;
          cfg.tracker.ni = ni;
          cells.push_back(cfg);
        }

  StudyResult result;
  result.rows.resize(cells.size());
  unsigned threads = in.threads ? in.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) result.rows[i] = evaluate_cell(in, cells[i]);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  result.marginals = marginal_means(result.rows);
  return result;
}

std::string StudyResult::to_csv() const {
  std::string out = "np,be,bs,ni,accuracy,final_phi,redetects\n";
  for (const StudyRow& r : rows) {
    out += std::to_string(r.np) + ',' + csv::fmt(r.be) + ',' + std::to_string(r.bs) + ',' + std::to_string(r.ni) + ',';
    if (r.accuracy) {
      out += csv::fmt(*r.accuracy) + ',' + csv::fmt(r.final_phi) + ',' + std::to_string(r.redetects);
    } else {
      out += "nan,nan,-1";
    }
    out += '\n';
  }
  return out;
}

std::string StudyResult::summary_json() const {
  nlohmann::ordered_json j;
  j["cells"] = rows.size();
  j["failed_cells"] = std::count_if(rows.begin(), rows.end(), [](const StudyRow& r) { return !r.accuracy; });
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const Marginal& mg : marginals) {
    if (!m.contains(mg.parameter)) m[mg.parameter] = nlohmann::ordered_json::array();
    m[mg.parameter].push_back({{"value", mg.value}, {"mean_accuracy", mg.mean_accuracy}, {"cells", mg.cells}});
  }
  j["marginal_means"] = std::move(m);
  const StudyRow* best = nullptr;
  const StudyRow* worst = nullptr;
  for (const StudyRow& r : rows) {
    if (!r.accuracy) continue;
    if (!best || *r.accuracy > *best->accuracy) best = &r;
    if (!worst || *r.accuracy < *worst->accuracy) worst = &r;
  }
  auto cell = [](const StudyRow* r) {
    if (!r) return nlohmann::ordered_json(nullptr);
    return nlohmann::ordered_json{{"np", r->np}, {"be", r->be}, {"bs", r->bs}, {"ni", r->ni}, {"accuracy", *r->accuracy}};
  };
  j["best"] = cell(best);
  j["worst"] = cell(worst);
  return j.dump(2) + "\n";
}

}  // namespace boltrot
