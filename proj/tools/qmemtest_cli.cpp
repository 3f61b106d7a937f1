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

// Batch CLI for pattern-based functional testing of quantum memories.
//
//   qmemtest run --config suite.json
//   qmemtest analyze --counts out/counts.txt --device device.json
//   qmemtest map --in out/counts.txt --device device.json --a <id> --b <id>
//                --tau <us> --format svg|csv|text [--out file]
//   qmemtest collisions --device device.json
//   qmemtest ghz-study --device device.json --lengths 2..6 --samples 10 --seed 7
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "qmemtest/analysis.hpp"
#include "qmemtest/error.hpp"
#include "qmemtest/render.hpp"
#include "qmemtest/runner.hpp"
#include "qmemtest/simulator.hpp"
#include "qmemtest/version.hpp"

namespace {

using namespace qmemtest;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

int cmd_run(const std::string& config_path) {
  const SuiteConfig config = load_suite_config(config_path);
  const RunManifest manifest = run_suite(config);
  std::cout << "wrote " << manifest.outputs.size() << " files to "
            << config.output_dir.string() << "\n";
  for (const auto& entry : manifest.outputs) {
    std::cout << "  " << entry.path << "  (" << entry.bytes << " bytes, fnv1a "
              << entry.checksum << ")\n";
  }
  return 0;
}

int cmd_analyze(const std::string& counts_path, const std::string& device_path) {
  const DeviceFile dev = load_device_file(device_path);
  const auto records = ingest_replay(counts_path);
  if (records.empty()) {
    std::cout << "no records\n";
    return 0;
  }
  // group records per pattern id; report per-qubit fidelity series
  std::map<std::string, std::vector<CountsRecord>> by_pattern;
  for (const auto& rec : records) by_pattern[rec.pattern_id].push_back(rec);
  for (const auto& [id, recs] : by_pattern) {
    std::vector<std::vector<QubitId>> singles;
    for (QubitId q = 0; q < dev.topology.num_qubits(); ++q) singles.push_back({q});
    const auto series = series_from_records(recs, singles, {});
    std::cout << "pattern " << id << " (" << recs.size() << " tau points, "
              << recs.front().shots << " shots)\n";
    for (const auto& [key, s] : series) {
      std::cout << "  qubit " << key << ":";
      for (const auto& p : s.points) {
        std::cout << "  F(" << fmt(p.tau_us) << ")=" << fmt(p.fidelity);
      }
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_map(const std::string& counts_path, const std::string& device_path,
            const std::string& pattern_a, const std::string& pattern_b,
            double tau_us, double threshold, const std::string& format,
            const std::string& out_path, double color_limit) {
  const DeviceFile dev = load_device_file(device_path);
  const auto records = ingest_replay(counts_path);
  std::map<std::string, std::vector<CountsRecord>> by_pattern;
  for (const auto& rec : records) by_pattern[rec.pattern_id].push_back(rec);
  for (const auto& id : {pattern_a, pattern_b}) {
    if (!by_pattern.count(id)) {
      throw DataError("map: no counts for pattern '" + id + "'");
    }
  }
  std::vector<std::vector<QubitId>> singles;
  for (QubitId q = 0; q < dev.topology.num_qubits(); ++q) singles.push_back({q});
  auto view = [&](const std::string& id) {
    std::map<QubitId, FidelitySeries> out;
    for (auto& [key, s] : series_from_records(by_pattern.at(id), singles, {})) {
      out[s.group[0]] = s;
    }
    return out;
  };
  const FailureMap map =
      delta_map(view(pattern_a), view(pattern_b), tau_us, {}, threshold);
  const std::string text = emit_failure_map(map, dev.topology,
                                            parse_map_format(format),
                                            RenderOptions{color_limit});
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + out_path);
    out << text;
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_collisions(const std::string& device_path, double thr1, double thr2) {
  const DeviceFile dev = load_device_file(device_path);
  const CollisionReport report =
      detect_collisions(dev.model, dev.topology, thr1, thr2);
  if (report.entries.empty()) {
    std::cout << "no frequency collisions at thresholds " << fmt(thr1) << " / "
              << fmt(thr2) << " MHz\n";
    return 0;
  }
  for (const auto& e : report.entries) {
    std::cout << (e.type == CollisionType::Type1 ? "type-1" : "type-2")
              << " chain " << e.chain.a << "-" << e.chain.b << "-" << e.chain.c
              << "  detuning " << fmt(e.detuning_mhz) << " MHz (threshold "
              << fmt(e.threshold_mhz) << ")\n";
  }
  return 0;
}

int cmd_ghz(const std::string& device_path, const std::string& lengths,
            int samples, std::uint64_t seed, int shots) {
  GhzStudyConfig config;
  config.device_path = device_path;
  const auto dots = lengths.find("..");
  if (dots == std::string::npos) {
    throw DataError("ghz-study: --lengths expects the form MIN..MAX, e.g. 2..6");
  }
  config.min_length = std::stoi(lengths.substr(0, dots));
  config.max_length = std::stoi(lengths.substr(dots + 2));
  config.samples = samples;
  config.seed = seed;
  config.shots = shots;
  const auto stats = ghz_study(config);
  std::cout << "# length tau_us mean_fidelity stderr (n=" << samples << ")\n";
  for (const GhzStats& s : stats) {
    for (const auto& p : s.points) {
      std::cout << s.length << ' ' << fmt(p.tau_us) << ' ' << fmt(p.mean) << ' '
                << fmt(p.stderr) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern-based functional testing for quantum memories"};
  app.set_version_flag("--version", qmemtest::kVersion);
  app.require_subcommand(1);

  std::string config_path, counts_path, device_path, pattern_a, pattern_b;
  std::string format = "text", out_path, lengths = "2..6";
  double tau_us = 0.0, threshold = 0.1, thr1 = 10.0, thr2 = 5.0;
  double color_limit = 0.25;
  int samples = 10, shots = 0;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "execute a suite config");
  run->add_option("--config", config_path, "suite config JSON")->required();

  auto* analyze = app.add_subcommand("analyze", "summarize recorded counts");
  analyze->add_option("--counts", counts_path, "counts file")->required();
  analyze->add_option("--device", device_path, "device file")->required();

  auto* map = app.add_subcommand("map", "render a failure map from counts");
  map->add_option("--in", counts_path, "counts file")->required();
  map->add_option("--device", device_path, "device file")->required();
  map->add_option("--a", pattern_a, "minuend pattern id")->required();
  map->add_option("--b", pattern_b, "subtrahend pattern id")->required();
  map->add_option("--tau", tau_us, "tau in us (exact grid point)")->required();
  map->add_option("--threshold", threshold, "|dF| flag threshold");
  map->add_option("--format", format, "text|csv|svg");
  map->add_option("--out", out_path, "output file (stdout if omitted)");
  map->add_option("--color-limit", color_limit, "symmetric color scale limit");

  auto* collisions = app.add_subcommand("collisions", "screen calibration data");
  collisions->add_option("--device", device_path, "device file")->required();
  collisions->add_option("--type1-mhz", thr1, "type-1 threshold (MHz)");
  collisions->add_option("--type2-mhz", thr2, "type-2 threshold (MHz)");

  auto* ghz = app.add_subcommand("ghz-study", "entangled-size study");
  ghz->add_option("--device", device_path, "device file")->required();
  ghz->add_option("--lengths", lengths, "chain lengths MIN..MAX");
  ghz->add_option("--samples", samples, "chains per length");
  ghz->add_option("--seed", seed, "RNG seed");
  ghz->add_option("--shots", shots, "shots per point (0 = exact)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (analyze->parsed()) return cmd_analyze(counts_path, device_path);
    if (map->parsed()) {
      return cmd_map(counts_path, device_path, pattern_a, pattern_b, tau_us,
                     threshold, format, out_path, color_limit);
    }
    if (collisions->parsed()) return cmd_collisions(device_path, thr1, thr2);
    if (ghz->parsed()) return cmd_ghz(device_path, lengths, samples, seed, shots);
  } catch (const qmemtest::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const qmemtest::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
