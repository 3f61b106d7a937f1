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

#include "qmemtest/device.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "qmemtest/error.hpp"

namespace qmemtest {

using nlohmann::json;

std::string to_string(CouplingBasis basis) {
  switch (basis) {
    case CouplingBasis::ZZ: return "zz";
    case CouplingBasis::XX: return "xx";
    case CouplingBasis::YY: return "yy";
  }
  return "?";
}

namespace {

// Relaxation / coherence times: absent or null means channel off (+inf);
// a present value must be positive.
double parse_time_field(const json& rec, const char* key, const std::string& ctx) {
  if (!rec.contains(key) || rec[key].is_null()) {
    return std::numeric_limits<double>::infinity();
  }
  const double v = rec[key].get<double>();
  if (!(v > 0.0)) {
    throw DataError(ctx + ": " + key + " must be > 0, got " + std::to_string(v));
  }
  return v;
}

double parse_probability(const json& v, const char* key, const std::string& ctx) {
  const double p = v.get<double>();
  if (p < 0.0 || p > 1.0) {
    throw DataError(ctx + ": " + key + " must be in [0,1]");
  }
  return p;
}

}  // namespace

DeviceFile parse_device_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(origin + ": " + e.what());
  }

  DeviceFile out;
  out.name = doc.value("name", origin);
  const std::string ctx = "device '" + out.name + "'";

  if (!doc.contains("num_qubits") || !doc.contains("edges") ||
      !doc.contains("coords")) {
    throw DataError(ctx + ": num_qubits, edges and coords are required");
  }
  const std::uint32_t n = doc["num_qubits"].get<std::uint32_t>();

  std::vector<std::pair<QubitId, QubitId>> edges;
  for (const auto& e : doc["edges"]) {
    if (!e.is_array() || e.size() != 2) {
      throw DataError(ctx + ": each edge must be a pair of qubit ids");
    }
    edges.emplace_back(e[0].get<QubitId>(), e[1].get<QubitId>());
  }
  std::vector<std::array<double, 2>> coords;
  for (const auto& c : doc["coords"]) {
    if (!c.is_array() || c.size() != 2) {
      throw DataError(ctx + ": each coord must be [x, y]");
    }
    coords.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  out.topology = ChipTopology(n, std::move(edges), std::move(coords));

  DeviceModel& m = out.model;
  m.qubits.resize(n);
  if (doc.contains("qubits")) {
    const auto& qs = doc["qubits"];
    if (qs.size() != n) {
      throw DataError(ctx + ": qubits block must have one record per qubit (" +
                      std::to_string(qs.size()) + " given, " + std::to_string(n) +
                      " expected)");
    }
    for (std::uint32_t q = 0; q < n; ++q) {
      const auto& rec = qs[q];
      const std::string qctx = ctx + " qubit " + std::to_string(q);
      QubitCalibration& cal = m.qubits[q];
      cal.t1_us = parse_time_field(rec, "t1_us", qctx);
      cal.t2_us = parse_time_field(rec, "t2_us", qctx);
      cal.omega01_ghz = rec.value("omega01_ghz", 0.0);
      cal.alpha_ghz = rec.value("alpha_ghz", 0.0);
      if (rec.contains("readout")) {
        const auto& ro = rec["readout"];
        if (!ro.is_array() || ro.size() != 2) {
          throw DataError(qctx + ": readout must be [p10, p01]");
        }
        cal.readout = {parse_probability(ro[0], "p10", qctx),
                       parse_probability(ro[1], "p01", qctx)};
      }
    }
  }

  if (doc.contains("couplings")) {
    for (const auto& c : doc["couplings"]) {
      const QubitId i = c.at("i").get<QubitId>();
      const QubitId j = c.at("j").get<QubitId>();
      if (!out.topology.connected(i, j)) {
        throw DataError(ctx + ": coupling (" + std::to_string(i) + "," +
                        std::to_string(j) + ") is not a topology edge");
      }
      const double mhz = c.at("omega_zz_2pi_mhz").get<double>();
      m.coupling_rad_per_us[{std::min(i, j), std::max(i, j)}] =
          2.0 * std::numbers::pi * mhz;
    }
  }

  m.collision_p_leak =
      doc.contains("collision_p_leak")
          ? parse_probability(doc["collision_p_leak"], "collision_p_leak", ctx)
          : 0.0;
  m.heating_kappa = doc.value("heating_kappa", 0.0);
  if (m.heating_kappa < 0.0) {
    throw DataError(ctx + ": heating_kappa must be >= 0");
  }
  m.cluster_cap = doc.value("cluster_cap", 10u);

  const std::string basis = doc.value("coupling_basis", "zz");
  if (basis == "zz") m.coupling_basis = CouplingBasis::ZZ;
  else if (basis == "xx") m.coupling_basis = CouplingBasis::XX;
  else if (basis == "yy") m.coupling_basis = CouplingBasis::YY;
  else throw DataError(ctx + ": unknown coupling_basis '" + basis + "'");

  if (doc.contains("gate_durations_ns")) {
    const auto& g = doc["gate_durations_ns"];
    m.gate_durations.x_ns = g.value("x", 35.0);
    m.gate_durations.h_ns = g.value("h", 35.0);
    m.gate_durations.cx_ns = g.value("cx", 500.0);
  }
  return out;
}

DeviceFile load_device_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open device file " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_device_text(buf.str(), path.filename().string());
}

ChipTopology load_topology(const std::string& text) {
  return parse_device_text(text, "<inline>").topology;
}

}  // namespace qmemtest
