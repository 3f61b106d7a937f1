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

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmemtest/analysis.hpp"
#include "qmemtest/circuit.hpp"
#include "qmemtest/counts.hpp"
#include "qmemtest/device.hpp"

namespace qmemtest {

enum class SuiteBackend { Simulator, Replay };

struct DeltaMapRequest {
  std::string pattern_a;
  std::string pattern_b;
  double tau_us = 0.0;
};

/// Batch configuration, loaded from a JSON file mirroring these fields.
struct SuiteConfig {
  std::filesystem::path device_path;
  std::vector<PatternSpec> patterns;
  std::vector<double> tau_grid_us;  // strictly increasing, non-empty
  int shots = 2500;
  std::uint64_t seed = 1;
  SuiteBackend backend = SuiteBackend::Simulator;
  std::filesystem::path replay_path;
  std::filesystem::path output_dir;
  double delta_f_threshold = 0.1;
  double collision_type1_mhz = 10.0;
  double collision_type2_mhz = 5.0;
  double render_color_limit = 0.25;
  bool run_fits = false;
  bool run_collisions = true;
  std::vector<DeltaMapRequest> delta_maps;
  bool parallel = true;
};

SuiteConfig load_suite_config(const std::filesystem::path& path);

/// Default grid: 20 log-spaced points over [1, 150] us.
std::vector<double> default_tau_grid();

struct ManifestEntry {
  std::string path;      // relative to the output dir
  std::string checksum;  // fnv1a-64, hex
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string tool_version;
  std::string created_utc;
  std::vector<ManifestEntry> outputs;
};

/// Builds every (pattern, tau) circuit, executes it on the simulator (or
/// matches it against replayed counts), persists counts and analyses under
/// the output directory and writes a checksummed manifest. Deterministic
/// given the config; grid points run on OpenMP threads unless
/// config.parallel is false.
RunManifest run_suite(const SuiteConfig& config);

struct GhzStudyConfig {
  std::filesystem::path device_path;
  int min_length = 2;
  int max_length = 6;
  int samples = 10;
  std::uint64_t seed = 1;
  std::vector<double> tau_grid_us;
  /// shots = 0 computes exact pre-sampling fidelities.
  int shots = 0;
};

/// Samples `samples` random chains per length and returns the per-length
/// mean-fidelity statistics over the tau grid.
std::vector<GhzStats> ghz_study(const GhzStudyConfig& config);

/// Joint all-zeros probability of a group under the product of cluster
/// distributions (pre-sampling).
double exact_group_fidelity(const SimulationResult& result,
                            std::span<const QubitId> group);

}  // namespace qmemtest
