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

#include <array>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qmemtest/circuit.hpp"
#include "qmemtest/topology.hpp"

namespace qmemtest {

/// Per-qubit calibration. Times in us; omitting a channel in the device file
/// stores +inf (channel off). Frequencies in GHz; anharmonicity is negative
/// for transmons. readout = {p(1|0), p(0|1)}.
struct QubitCalibration {
  double t1_us = std::numeric_limits<double>::infinity();
  double t2_us = std::numeric_limits<double>::infinity();
  double omega01_ghz = 0.0;
  double alpha_ghz = 0.0;
  std::array<double, 2> readout = {0.0, 0.0};
};

enum class CouplingBasis { ZZ, XX, YY };

std::string to_string(CouplingBasis basis);

/// Calibration and noise model of a chip. Coupling strengths are stored as
/// angular frequencies in rad/us (the device file takes Omega/2pi in MHz).
struct DeviceModel {
  std::vector<QubitCalibration> qubits;
  std::map<std::pair<QubitId, QubitId>, double> coupling_rad_per_us;
  double collision_p_leak = 0.0;
  double heating_kappa = 0.0;
  std::uint32_t cluster_cap = 10;
  CouplingBasis coupling_basis = CouplingBasis::ZZ;
  GateDurations gate_durations;

  double omega12_ghz(QubitId q) const {
    return qubits[q].omega01_ghz + qubits[q].alpha_ghz;
  }
  double omega02_ghz(QubitId q) const {
    return 2.0 * qubits[q].omega01_ghz + qubits[q].alpha_ghz;
  }
  /// 0 for non-coupled pairs.
  double coupling(QubitId i, QubitId j) const {
    auto it = coupling_rad_per_us.find({std::min(i, j), std::max(i, j)});
    return it == coupling_rad_per_us.end() ? 0.0 : it->second;
  }
};

struct DeviceFile {
  std::string name;
  ChipTopology topology;
  DeviceModel model;
};

/// Parses the JSON device description (fields: num_qubits, edges, coords,
/// qubits[{t1_us,t2_us,omega01_ghz,alpha_ghz,readout}], couplings[{i,j,
/// omega_zz_2pi_mhz}], collision_p_leak, heating_kappa, cluster_cap, ...).
DeviceFile load_device_file(const std::filesystem::path& path);
DeviceFile parse_device_text(const std::string& text, const std::string& origin);

/// Topology-only view of a device document.
ChipTopology load_topology(const std::string& text);

}  // namespace qmemtest
