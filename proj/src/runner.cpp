// Copyright 2026 The qmemtest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmemtest/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qmemtest/error.hpp"
#include "qmemtest/render.hpp"
#include "qmemtest/rng.hpp"
#include "qmemtest/simulator.hpp"
#include "qmemtest/version.hpp"

namespace qmemtest {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

PatternSpec parse_pattern_json(const json& p) {
  PatternSpec spec;
  const std::string name = p.at("variant").get<std::string>();
  const auto variant = parse_variant(name);
  if (!variant) {
    throw DataError("config: unknown pattern variant '" + name + "'");
  }
  spec.variant = *variant;
  if (p.contains("side")) {
    const std::string side = p["side"].get<std::string>();
    if (side == "A") spec.side = CheckerSide::A;
    else if (side == "B") spec.side = CheckerSide::B;
    else throw DataError("config: side must be A or B, got '" + side + "'");
  }
  spec.n_x_gates = p.value("n_x_gates", 0);
  if (p.contains("bell_kind")) {
    const std::string kind = p["bell_kind"].get<std::string>();
    if (kind == "phi_plus") spec.bell_kind = BellKind::PhiPlus;
    else if (kind == "phi_minus") spec.bell_kind = BellKind::PhiMinus;
    else throw DataError("config: bell_kind must be phi_plus or phi_minus");
  }
  if (p.contains("bell_layout")) {
    const std::string layout = p["bell_layout"].get<std::string>();
    if (layout == "dense") spec.bell_layout = BellLayout::Dense;
    else if (layout == "spaced") spec.bell_layout = BellLayout::Spaced;
    else throw DataError("config: bell_layout must be dense or spaced");
  }
  spec.with_cnot = p.value("with_cnot", true);
  spec.chain_length = p.value("chain_length", 2);
  return spec.normalized();
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || hi <= lo || points < 2) {
    throw DataError("config: log tau grid needs 0 < min < max and points >= 2");
  }
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  }
  return grid;
}

std::vector<double> parse_tau_grid(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<double>());
  } else if (j.is_object() && j.contains("log")) {
    const auto& l = j["log"];
    grid = log_spaced(l.at("min").get<double>(), l.at("max").get<double>(),
                      l.at("points").get<int>());
  } else {
    throw DataError("config: tau_grid_us must be an array or {\"log\": {...}}");
  }
  if (grid.empty()) throw DataError("config: tau grid must be non-empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0) throw DataError("config: tau values must be >= 0");
    if (i > 0 && grid[i] <= grid[i - 1]) {
      throw DataError("config: tau grid must be strictly increasing");
    }
  }
  return grid;
}

std::uint64_t record_seed(std::uint64_t suite_seed, const std::string& run_id,
                          int tau_index) {
  return mix_seed(mix_seed(suite_seed, fnv1a(run_id)),
                  static_cast<std::uint64_t>(tau_index));
}

std::string checksum_hex(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct WorkItem {
  PatternSpec spec;
  std::string run_id;
  double tau_us = 0.0;
  int tau_index = 0;
  PartitionInput partition;
};

// Seeds that overlap or touch each other cannot all be placed; keep the
// first placeable subset in report order.
std::vector<Triplet> placeable_seeds(const ChipTopology& topo,
                                     std::span<const Triplet> candidates) {
  std::vector<Triplet> seeds;
  for (const Triplet& t : candidates) {
    std::vector<Triplet> trial = seeds;
    trial.push_back(t);
    try {
      triplet_cover(topo, trial);
      seeds = std::move(trial);
    } catch (const DataError&) {
      // skip conflicting seed
    }
  }
  return seeds;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<double> default_tau_grid() { return log_spaced(1.0, 150.0, 20); }

SuiteConfig load_suite_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }

  SuiteConfig config;
  config.device_path = doc.at("device").get<std::string>();
  if (config.device_path.is_relative()) {
    config.device_path = path.parent_path() / config.device_path;
  }
  for (const auto& p : doc.at("patterns")) {
    config.patterns.push_back(parse_pattern_json(p));
  }
  config.tau_grid_us = doc.contains("tau_grid_us")
                           ? parse_tau_grid(doc["tau_grid_us"])
                           : default_tau_grid();
  config.shots = doc.value("shots", 2500);
  if (config.shots < 1) throw DataError("config: shots must be >= 1");
  config.seed = doc.value("seed", 1ull);
  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    if (b.is_string() && b.get<std::string>() == "simulator") {
      config.backend = SuiteBackend::Simulator;
    } else if (b.is_object() && b.contains("replay")) {
      config.backend = SuiteBackend::Replay;
      config.replay_path = b["replay"].get<std::string>();
      if (config.replay_path.is_relative()) {
        config.replay_path = path.parent_path() / config.replay_path;
      }
    } else {
      throw DataError("config: backend must be \"simulator\" or {\"replay\": path}");
    }
  }
  config.output_dir = doc.value("output_dir", std::string("out"));
  if (config.output_dir.is_relative()) {
    config.output_dir = path.parent_path() / config.output_dir;
  }
  if (doc.contains("thresholds")) {
    const auto& t = doc["thresholds"];
    config.delta_f_threshold = t.value("delta_f", 0.1);
    config.collision_type1_mhz = t.value("collision_type1_mhz", 10.0);
    config.collision_type2_mhz = t.value("collision_type2_mhz", 5.0);
  }
  if (doc.contains("render")) {
    config.render_color_limit = doc["render"].value("color_limit", 0.25);
  }
  if (doc.contains("analyses")) {
    const auto& a = doc["analyses"];
    config.run_fits = a.value("fits", false);
    config.run_collisions = a.value("collisions", true);
    if (a.contains("delta_maps")) {
      for (const auto& d : a["delta_maps"]) {
        config.delta_maps.push_back({d.at("a").get<std::string>(),
                                     d.at("b").get<std::string>(),
                                     d.at("tau_us").get<double>()});
      }
    }
  }
  config.parallel = doc.value("parallel", true);
  return config;
}

double exact_group_fidelity(const SimulationResult& result,
                            std::span<const QubitId> group) {
  const std::set<QubitId> wanted(group.begin(), group.end());
  double fidelity = 1.0;
  for (const ClusterDistribution& cluster : result.clusters) {
    std::uint32_t mask = 0;
    for (std::size_t k = 0; k < cluster.qubits.size(); ++k) {
      if (wanted.count(cluster.qubits[k])) mask |= 1u << k;
    }
    if (mask == 0) continue;
    double p = 0.0;
    for (int i = 0; i < cluster.probabilities.size(); ++i) {
      if ((static_cast<std::uint32_t>(i) & mask) == 0) p += cluster.probabilities(i);
    }
    fidelity *= p;
  }
  return fidelity;
}

namespace {

// Target groups and spectators of a pattern, needed to turn counts back into
// series on the analysis side.
struct PatternShape {
  std::vector<std::vector<QubitId>> groups;
  std::vector<QubitId> spectators;
};

std::map<QubitId, FidelitySeries> singleton_view(
    const std::map<std::string, FidelitySeries>& series) {
  std::map<QubitId, FidelitySeries> out;
  for (const auto& [key, s] : series) {
    if (s.group.size() == 1) out[s.group[0]] = s;
  }
  return out;
}

}  // namespace

RunManifest run_suite(const SuiteConfig& config) {
  if (config.patterns.empty()) {
    throw DataError("run_suite: no patterns configured");
  }
  const DeviceFile dev = load_device_file(config.device_path);
  const ChipTopology& topo = dev.topology;
  const DeviceModel& model = dev.model;
  fs::create_directories(config.output_dir);

  bool need_bipartition = false, need_cover = false;
  for (const PatternSpec& p : config.patterns) {
    switch (p.variant) {
      case PatternVariant::CheckerboardOne:
      case PatternVariant::CheckerboardPlusEchoed:
      case PatternVariant::CheckerboardOneActive:
        need_bipartition = true;
        break;
      case PatternVariant::TripletCollision:
        need_cover = true;
        break;
      default:
        break;
    }
  }

  CollisionReport collision_report;
  const bool need_collisions = config.run_collisions || need_cover;
  if (need_collisions) {
    collision_report = detect_collisions(model, topo, config.collision_type1_mhz,
                                         config.collision_type2_mhz);
  }
  std::optional<Bipartition> bp;
  if (need_bipartition) bp = bipartition(topo);
  std::optional<TripletCover> cover;
  if (need_cover) {
    // Detector-driven covers: flagged chains are seeded first in their
    // detected orientation so the suite reproduces the suspicious circuits.
    std::vector<Triplet> candidates;
    for (const CollisionEntry& e : collision_report.entries) {
      candidates.push_back(e.chain);
    }
    cover = triplet_cover(topo, placeable_seeds(topo, candidates));
  }
  const std::vector<LeakSite> leak_sites = collision_report.leak_sites();

  std::vector<WorkItem> items;
  for (const PatternSpec& spec0 : config.patterns) {
    const PatternSpec spec = spec0.normalized();
    PartitionInput part;
    switch (spec.variant) {
      case PatternVariant::CheckerboardOne:
      case PatternVariant::CheckerboardPlusEchoed:
      case PatternVariant::CheckerboardOneActive:
        part.bipartition = *bp;
        break;
      case PatternVariant::TripletCollision:
        part.cover = *cover;
        break;
      case PatternVariant::Bell: {
        const auto pairs =
            bell_pairs(topo, spec.bell_layout == BellLayout::Spaced);
        if (pairs.empty()) {
          throw DataError("run_suite: no Bell pairs available on this topology");
        }
        for (auto [i, j] : pairs) part.paths.push_back({i, j});
        break;
      }
      case PatternVariant::GhzChain: {
        part.paths = random_chains(topo, spec.chain_length, 1,
                                   mix_seed(config.seed, fnv1a(pattern_id(spec))));
        break;
      }
      default:
        break;
    }
    if (spec.variant == PatternVariant::TripletCollision) {
      items.push_back({spec, pattern_id(spec),
                       model.gate_durations.cx_ns / 1000.0, 0, part});
    } else {
      for (std::size_t i = 0; i < config.tau_grid_us.size(); ++i) {
        items.push_back({spec, pattern_id(spec), config.tau_grid_us[i],
                         static_cast<int>(i), part});
      }
    }
  }

  std::map<std::string, CountsRecord> replay_index;
  if (config.backend == SuiteBackend::Replay) {
    for (CountsRecord& rec : ingest_replay(config.replay_path)) {
      replay_index[rec.pattern_id + "@" + fmt(rec.tau_us)] = std::move(rec);
    }
  }

  std::vector<CountsRecord> records(items.size());
  std::vector<std::string> circuit_texts(items.size());
  std::map<std::string, PatternShape> shapes;
  for (const WorkItem& item : items) {
    if (!shapes.count(item.run_id)) {
      const Circuit probe = build_pattern(item.spec, topo, item.partition,
                                          item.tau_us, model.gate_durations);
      shapes[item.run_id] = {probe.target_groups, probe.spectators};
    }
  }

  std::vector<std::exception_ptr> errors(items.size());
  const long n_items = static_cast<long>(items.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (long i = 0; i < n_items; ++i) {
    try {
      const WorkItem& item = items[i];
      Circuit circuit = build_pattern(item.spec, topo, item.partition,
                                      item.tau_us, model.gate_durations);
      circuit_texts[i] = serialize(circuit);
      if (config.backend == SuiteBackend::Simulator) {
        SimOptions options;
        options.parallel = false;  // grid points already run in parallel
        options.leak_sites = leak_sites;
        records[i] = run_circuit(circuit, model, topo, config.shots,
                                 record_seed(config.seed, item.run_id,
                                             item.tau_index),
                                 options);
      } else {
        const std::string key = item.run_id + "@" + fmt(item.tau_us);
        auto it = replay_index.find(key);
        if (it == replay_index.end()) {
          throw DataError("replay record mismatch: no counts for " + key);
        }
        records[i] = it->second;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  std::vector<std::string> written;
  auto persist = [&](const std::string& name, const std::string& text) {
    write_text_file(config.output_dir / name, text);
    written.push_back(name);
  };

  persist("counts.txt", [&] {
    std::ostringstream out;
    for (const auto& rec : records) out << counts_line(rec) << "\n";
    return out.str();
  }());
  persist("circuits.txt", [&] {
    std::ostringstream out;
    for (const auto& text : circuit_texts) out << text << "%%\n";
    return out.str();
  }());

  // fidelity series per pattern
  std::map<std::string, std::map<std::string, FidelitySeries>> all_series;
  std::map<std::string, std::vector<CountsRecord>> records_by_pattern;
  for (std::size_t i = 0; i < items.size(); ++i) {
    records_by_pattern[items[i].run_id].push_back(records[i]);
  }
  {
    std::ostringstream out;
    for (const PatternSpec& spec0 : config.patterns) {
      const std::string id = pattern_id(spec0.normalized());
      if (all_series.count(id)) continue;
      const PatternShape& shape = shapes.at(id);
      auto series = series_from_records(records_by_pattern.at(id), shape.groups,
                                        shape.spectators);
      for (const auto& [key, s] : series) {
        out << "series " << id << ' ' << key << " shots " << s.shots << "\n";
        for (const auto& p : s.points) {
          out << "  " << fmt(p.tau_us) << ' ' << fmt(p.fidelity) << ' '
              << fmt(p.stderr) << "\n";
        }
      }
      all_series[id] = std::move(series);
    }
    persist("series.txt", out.str());
  }

  if (config.run_fits) {
    std::ostringstream out;
    for (const PatternSpec& spec0 : config.patterns) {
      const PatternSpec spec = spec0.normalized();
      const std::string id = pattern_id(spec);
      const auto& series = all_series.at(id);
      for (const auto& [key, s] : series) {
        if (s.group.size() != 1 || s.points.size() < 4) continue;
        FitResult fit;
        switch (spec.variant) {
          case PatternVariant::BlankOne:
          case PatternVariant::CheckerboardOne:
          case PatternVariant::CheckerboardOneActive:
            fit = fit_exponential(s);
            break;
          case PatternVariant::BlankPlusEchoed: {
            const int deg = std::min<std::size_t>(
                topo.neighbors(s.group[0]).size(), 3);
            if (s.points.size() < 4u * (deg + 1)) continue;
            fit = fit_zz_oscillation(s, deg);
            break;
          }
          case PatternVariant::CheckerboardPlusEchoed:
            fit = fit_zz_oscillation(s, 0);
            break;
          default:
            continue;
        }
        out << "fit " << id << ' ' << key << ' ' << fit.model;
        for (const auto& [name, value] : fit.params) {
          out << ' ' << name << '=' << fmt(value);
        }
        out << " rms=" << fmt(fit.residual_rms)
            << " converged=" << (fit.converged ? 1 : 0)
            << " starts=" << fit.n_starts_used << "\n";
      }
    }
    persist("fits.txt", out.str());
  }

  for (const DeltaMapRequest& req : config.delta_maps) {
    auto ita = all_series.find(req.pattern_a);
    auto itb = all_series.find(req.pattern_b);
    if (ita == all_series.end() || itb == all_series.end()) {
      throw DataError("delta map: pattern '" +
                      (ita == all_series.end() ? req.pattern_a : req.pattern_b) +
                      "' is not part of this suite");
    }
    std::set<QubitId> pinned;
    for (const auto& id : {req.pattern_a, req.pattern_b}) {
      for (QubitId q : shapes.at(id).spectators) pinned.insert(q);
    }
    const std::vector<QubitId> spectators(pinned.begin(), pinned.end());
    const FailureMap map =
        delta_map(singleton_view(ita->second), singleton_view(itb->second),
                  req.tau_us, spectators, config.delta_f_threshold);
    const std::string stem =
        "delta_" + req.pattern_a + "__" + req.pattern_b + "_tau" + fmt(req.tau_us);
    RenderOptions render{config.render_color_limit};
    persist(stem + ".txt", emit_failure_map(map, topo, MapFormat::Text, render));
    persist(stem + ".csv", emit_failure_map(map, topo, MapFormat::Csv, render));
    persist(stem + ".svg", emit_failure_map(map, topo, MapFormat::Svg, render));
  }

  if (config.run_collisions) {
    std::ostringstream out;
    for (const CollisionEntry& e : collision_report.entries) {
      out << (e.type == CollisionType::Type1 ? "type1" : "type2") << ' '
          << e.chain.a << ' ' << e.chain.b << ' ' << e.chain.c
          << " detuning_mhz " << fmt(e.detuning_mhz) << " threshold_mhz "
          << fmt(e.threshold_mhz) << "\n";
    }
    persist("collisions.txt", out.str());
  }

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.created_utc = utc_timestamp();
  json mdoc;
  mdoc["tool"] = "qmemtest";
  mdoc["version"] = manifest.tool_version;
  mdoc["created_utc"] = manifest.created_utc;
  mdoc["config"] = {
      {"device", config.device_path.string()},
      {"shots", config.shots},
      {"seed", config.seed},
      {"backend", config.backend == SuiteBackend::Simulator ? "simulator" : "replay"},
      {"tau_grid_us", config.tau_grid_us},
      {"patterns", [&] {
         std::vector<std::string> ids;
         for (const auto& p : config.patterns) ids.push_back(pattern_id(p));
         return ids;
       }()},
  };
  json outputs = json::array();
  for (const std::string& name : written) {
    std::ifstream in(config.output_dir / name, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    ManifestEntry entry{name, checksum_hex(bytes), bytes.size()};
    manifest.outputs.push_back(entry);
    outputs.push_back({{"path", entry.path},
                       {"fnv1a", entry.checksum},
                       {"bytes", entry.bytes}});
  }
  mdoc["outputs"] = outputs;
  write_text_file(config.output_dir / "manifest.json", mdoc.dump(2) + "\n");
  return manifest;
}

std::vector<GhzStats> ghz_study(const GhzStudyConfig& config) {
  if (config.min_length < 2 || config.max_length < config.min_length) {
    throw DataError("ghz_study: need 2 <= min_length <= max_length");
  }
  if (config.samples < 1) throw DataError("ghz_study: samples must be >= 1");
  const DeviceFile dev = load_device_file(config.device_path);
  const std::vector<double> grid =
      config.tau_grid_us.empty() ? log_spaced(1.0, 50.0, 5) : config.tau_grid_us;

  std::vector<GhzStats> stats;
  for (int length = config.min_length; length <= config.max_length; ++length) {
    const auto chains =
        random_chains(dev.topology, length, config.samples,
                      mix_seed(config.seed, static_cast<std::uint64_t>(length)));
    std::vector<FidelitySeries> per_sample;
    for (std::size_t s = 0; s < chains.size(); ++s) {
      PatternSpec spec;
      spec.variant = PatternVariant::GhzChain;
      spec.chain_length = length;
      PartitionInput part;
      part.paths = {chains[s]};
      FidelitySeries series;
      series.group = chains[s];
      for (std::size_t t = 0; t < grid.size(); ++t) {
        Circuit circuit = build_pattern(spec, dev.topology, part, grid[t],
                                        dev.model.gate_durations);
        circuit.pattern_id += "_s" + std::to_string(s);
        if (config.shots == 0) {
          const SimulationResult sim =
              simulate_distributions(circuit, dev.topology, dev.model);
          series.points.push_back(
              {grid[t], exact_group_fidelity(sim, chains[s]), 0.0});
          series.shots = 0;
        } else {
          const CountsRecord rec = run_circuit(
              circuit, dev.model, dev.topology, config.shots,
              record_seed(config.seed, circuit.pattern_id, static_cast<int>(t)));
          auto [f, se] = estimate_fidelity(rec, chains[s]);
          series.points.push_back({grid[t], f, se});
          series.shots = config.shots;
        }
      }
      per_sample.push_back(std::move(series));
    }
    stats.push_back(ghz_statistics(per_sample, length));
  }
  return stats;
}

}  // namespace qmemtest
