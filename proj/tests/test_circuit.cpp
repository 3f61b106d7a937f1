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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>

#include "qmemtest/circuit.hpp"
#include "qmemtest/error.hpp"
#include "qmemtest/topology.hpp"
#include "testutil.hpp"

using namespace qmemtest;
using test::line_topology;

namespace {

std::vector<const Gate*> gates_on(const Circuit& c, QubitId q) {
  std::vector<const Gate*> out;
  for (const Gate& g : c.gates) {
    if (std::find(g.qubits.begin(), g.qubits.end(), q) != g.qubits.end()) {
      out.push_back(&g);
    }
  }
  return out;
}

PartitionInput checkerboard_input(const ChipTopology& topo) {
  PartitionInput part;
  part.bipartition = bipartition(topo);
  return part;
}

}  // namespace

TEST_CASE("invert reverses self-inverse preparations") {
  const std::vector<Gate> prep{h_gate(0), cx_gate(0, 1)};
  const auto inv = invert(prep);
  REQUIRE(inv.size() == 2);
  CHECK(inv[0].kind == GateKind::CX);
  CHECK(inv[1].kind == GateKind::H);

  CHECK(invert({}).empty());

  const auto single = invert({x_gate(2)});
  REQUIRE(single.size() == 1);
  CHECK(single[0].kind == GateKind::X);
  CHECK(single[0].qubits == std::vector<QubitId>{2});

  Gate d{GateKind::Delay, {0}, 10.0, 0.0};
  CHECK_THROWS_AS(invert({d}), DataError);
}

TEST_CASE("invert is its own inverse") {
  const std::vector<Gate> prep{x_gate(0), h_gate(0), cx_gate(0, 1),
                               cx_gate(1, 2), h_gate(2)};
  const auto twice = invert(invert(prep));
  REQUIRE(twice.size() == prep.size());
  for (std::size_t i = 0; i < prep.size(); ++i) {
    CHECK(twice[i].kind == prep[i].kind);
    CHECK(twice[i].qubits == prep[i].qubits);
  }
}

TEST_CASE("blank |1> pattern: X, delay, X, measure on every qubit") {
  const ChipTopology topo = line_topology(4);
  const Circuit c = build_pattern({PatternVariant::BlankOne}, topo, {}, 75.0);
  CHECK(c.tau_us == 75.0);
  CHECK(c.target_groups.size() == 4);
  CHECK(c.spectators.empty());
  for (QubitId q = 0; q < 4; ++q) {
    const auto gates = gates_on(c, q);
    REQUIRE(gates.size() == 4);
    CHECK(gates[0]->kind == GateKind::X);
    CHECK(gates[1]->kind == GateKind::Delay);
    CHECK(gates[1]->duration_ns == doctest::Approx(75000.0));
    CHECK(gates[2]->kind == GateKind::X);
    CHECK(gates[3]->kind == GateKind::Measure);
  }
}

TEST_CASE("triplet pattern replaces the CX by an equal delay") {
  const ChipTopology topo = line_topology(3);
  PartitionInput part;
  part.cover = triplet_cover(topo);

  PatternSpec with_cx{PatternVariant::TripletCollision};
  with_cx.with_cnot = true;
  const Circuit cx_circuit = build_pattern(with_cx, topo, part, 0.0);
  CHECK(cx_circuit.tau_us == doctest::Approx(0.5));
  bool saw_cx = false;
  for (const Gate& g : cx_circuit.gates) {
    if (g.kind == GateKind::CX) {
      saw_cx = true;
      CHECK(g.qubits == std::vector<QubitId>{1, 2});
    }
  }
  CHECK(saw_cx);

  PatternSpec without{PatternVariant::TripletCollision};
  without.with_cnot = false;
  const Circuit delay_circuit = build_pattern(without, topo, part, 0.0);
  for (const Gate& g : delay_circuit.gates) {
    CHECK(g.kind != GateKind::CX);
  }
  // the control and target idle for exactly the CX duration instead
  for (QubitId q : {1u, 2u}) {
    const auto gates = gates_on(delay_circuit, q);
    bool saw_delay = false;
    for (const Gate* g : gates) {
      if (g->kind == GateKind::Delay) {
        saw_delay = true;
        CHECK(g->duration_ns == doctest::Approx(500.0));
      }
    }
    CHECK(saw_delay);
  }
}

TEST_CASE("active checkerboard spreads the X train at 200 ns spacing") {
  const ChipTopology topo = line_topology(4);
  PatternSpec spec{PatternVariant::CheckerboardOneActive};
  spec.n_x_gates = 250;
  const Circuit c = build_pattern(spec, topo, checkerboard_input(topo), 50.0);

  // spectators are group B = {1, 3}
  REQUIRE(c.spectators == std::vector<QubitId>{1, 3});
  for (QubitId spectator : c.spectators) {
    std::vector<double> x_times;
    for (const Gate* g : gates_on(c, spectator)) {
      if (g->kind == GateKind::X) x_times.push_back(g->at_ns);
    }
    REQUIRE(x_times.size() == 250);
    std::sort(x_times.begin(), x_times.end());
    for (std::size_t k = 1; k < x_times.size(); ++k) {
      CHECK(x_times[k] - x_times[k - 1] == doctest::Approx(200.0));
    }
  }
}

TEST_CASE("odd X-train counts are rejected") {
  const ChipTopology topo = line_topology(4);
  PatternSpec spec{PatternVariant::CheckerboardOneActive};
  spec.n_x_gates = 251;
  CHECK_THROWS_AS(build_pattern(spec, topo, checkerboard_input(topo), 50.0),
                  DataError);
}

TEST_CASE("GHZ of length 2 builds the same circuit as a dense Bell pair") {
  const ChipTopology topo = line_topology(2);
  PatternSpec ghz{PatternVariant::GhzChain};
  ghz.chain_length = 2;
  PartitionInput chain;
  chain.paths = {{0, 1}};
  const Circuit a = build_pattern(ghz, topo, chain, 10.0);

  PatternSpec bell{PatternVariant::Bell};
  bell.bell_kind = BellKind::PhiPlus;
  bell.bell_layout = BellLayout::Dense;
  const Circuit b = build_pattern(bell, topo, chain, 10.0);

  REQUIRE(a.gates.size() == b.gates.size());
  for (std::size_t i = 0; i < a.gates.size(); ++i) {
    CHECK(a.gates[i].kind == b.gates[i].kind);
    CHECK(a.gates[i].qubits == b.gates[i].qubits);
    CHECK(a.gates[i].at_ns == doctest::Approx(b.gates[i].at_ns));
  }
  CHECK(a.target_groups == b.target_groups);
}

TEST_CASE("echoed variants carry exactly one mid-delay X per target") {
  const ChipTopology topo = line_topology(6);
  const double tau = 80.0;
  for (PatternVariant variant : {PatternVariant::BlankPlusEchoed,
                                 PatternVariant::CheckerboardPlusEchoed}) {
    PatternSpec spec{variant};
    const Circuit c =
        build_pattern(spec, topo, checkerboard_input(topo), tau);
    // the delay window starts after preparation
    double window_start = 0.0;
    for (const Gate& g : c.gates) {
      if (g.kind == GateKind::Delay) window_start = g.at_ns;
    }
    for (const auto& group : c.target_groups) {
      const QubitId q = group[0];
      int mid_x = 0;
      for (const Gate* g : gates_on(c, q)) {
        if (g->kind != GateKind::X) continue;
        ++mid_x;
        CHECK(std::abs(g->at_ns - (window_start + tau * 1000.0 / 2.0)) <=
              35.0 / 2.0 + 1e-9);
      }
      CHECK(mid_x == 1);
    }
  }
}

TEST_CASE("measure is the last gate on every qubit") {
  const ChipTopology topo = line_topology(6);
  PartitionInput bell_part;
  for (auto [i, j] : bell_pairs(topo, false)) bell_part.paths.push_back({i, j});
  PatternSpec bell{PatternVariant::Bell};
  bell.bell_kind = BellKind::PhiMinus;

  for (const Circuit& c :
       {build_pattern({PatternVariant::BlankOne}, topo, {}, 5.0),
        build_pattern(bell, topo, bell_part, 5.0),
        build_pattern({PatternVariant::CheckerboardPlusEchoed}, topo,
                      checkerboard_input(topo), 5.0)}) {
    for (QubitId q = 0; q < topo.num_qubits(); ++q) {
      const auto gates = gates_on(c, q);
      REQUIRE_FALSE(gates.empty());
      CHECK(gates.back()->kind == GateKind::Measure);
      for (std::size_t i = 1; i < gates.size(); ++i) {
        CHECK(gates[i]->at_ns >= gates[i - 1]->at_ns);
      }
    }
  }
}

TEST_CASE("bell pattern bookkeeping: pair groups, individual spectators") {
  const ChipTopology topo = line_topology(8);
  PartitionInput part;
  for (auto [i, j] : bell_pairs(topo, true)) part.paths.push_back({i, j});
  PatternSpec spec{PatternVariant::Bell};
  const Circuit c = build_pattern(spec, topo, part, 21.0);
  REQUIRE(c.target_groups.size() == 3);
  for (const auto& group : c.target_groups) CHECK(group.size() == 2);
  CHECK(c.spectators == std::vector<QubitId>{2, 5});
}

TEST_CASE("mismatched partition input is rejected") {
  const ChipTopology topo = line_topology(4);
  CHECK_THROWS_AS(
      build_pattern({PatternVariant::CheckerboardOne}, topo, {}, 10.0),
      DataError);
  CHECK_THROWS_AS(build_pattern({PatternVariant::Bell}, topo, {}, 10.0),
                  DataError);
  CHECK_THROWS_AS(
      build_pattern({PatternVariant::TripletCollision}, topo, {}, 10.0),
      DataError);
  PartitionInput bad_pair;
  bad_pair.paths = {{0, 2}};  // not an edge
  CHECK_THROWS_AS(build_pattern({PatternVariant::Bell}, topo, bad_pair, 10.0),
                  DataError);
}

TEST_CASE("serialization carries the header and one line per gate") {
  const ChipTopology topo = line_topology(3);
  const Circuit c = build_pattern({PatternVariant::BlankOne}, topo, {}, 12.5);
  const std::string text = serialize(c);
  CHECK(text.find("pattern blank_one") != std::string::npos);
  CHECK(text.find("tau_us 12.5") != std::string::npos);
  CHECK(text.find("spectators\n") != std::string::npos);
  std::size_t gate_lines = 0;
  for (const Gate& g : c.gates) {
    (void)g;
    ++gate_lines;
  }
  std::size_t measured = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && (std::isdigit(line[0]) || line[0] == '-')) ++measured;
  }
  CHECK(measured == gate_lines);
}

TEST_CASE("pattern ids are stable") {
  PatternSpec active{PatternVariant::CheckerboardOneActive};
  active.side = CheckerSide::A;
  active.n_x_gates = 250;
  CHECK(pattern_id(active) == "checkerboard_one_active_A_n250");

  PatternSpec bell{PatternVariant::Bell};
  bell.bell_kind = BellKind::PhiMinus;
  bell.bell_layout = BellLayout::Spaced;
  CHECK(pattern_id(bell) == "bell_phi_minus_spaced");

  PatternSpec triplet{PatternVariant::TripletCollision};
  triplet.with_cnot = false;
  CHECK(pattern_id(triplet) == "triplet_delay");
}
