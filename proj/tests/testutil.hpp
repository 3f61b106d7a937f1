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

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "qmemtest/device.hpp"
#include "qmemtest/rng.hpp"
#include "qmemtest/topology.hpp"

namespace qmemtest::test {

inline ChipTopology line_topology(std::uint32_t n) {
  std::vector<std::pair<QubitId, QubitId>> edges;
  std::vector<std::array<double, 2>> coords;
  for (QubitId q = 0; q < n; ++q) {
    if (q + 1 < n) edges.push_back({q, q + 1});
    coords.push_back({static_cast<double>(q), 0.0});
  }
  return ChipTopology(n, edges, coords);
}

// Center qubit 0 with n_neighbors leaves.
inline ChipTopology star_topology(std::uint32_t n_neighbors) {
  std::vector<std::pair<QubitId, QubitId>> edges;
  std::vector<std::array<double, 2>> coords{{0.0, 0.0}};
  for (QubitId q = 1; q <= n_neighbors; ++q) {
    edges.push_back({0, q});
    coords.push_back({std::cos(q * 1.0), std::sin(q * 1.0)});
  }
  return ChipTopology(n_neighbors + 1, edges, coords);
}

constexpr double kOff = std::numeric_limits<double>::infinity();

/// Uniform calibration; omega_2pi_mhz applies to every topology edge.
/// Pass kOff to switch a channel off.
inline DeviceModel uniform_model(const ChipTopology& topo, double t1_us,
                                 double t2_us, double omega_2pi_mhz) {
  DeviceModel model;
  model.qubits.resize(topo.num_qubits());
  for (auto& cal : model.qubits) {
    cal.t1_us = t1_us;
    cal.t2_us = t2_us;
    cal.omega01_ghz = 5.0;
    cal.alpha_ghz = -0.33;
  }
  if (omega_2pi_mhz != 0.0) {
    for (auto [i, j] : topo.edges()) {
      model.coupling_rad_per_us[{i, j}] =
          2.0 * std::numbers::pi * omega_2pi_mhz;
    }
  }
  return model;
}

inline int binomial_draw(std::mt19937_64& rng, int n, double p) {
  int k = 0;
  for (int i = 0; i < n; ++i) {
    if (next_double(rng) < p) ++k;
  }
  return k;
}

}  // namespace qmemtest::test
