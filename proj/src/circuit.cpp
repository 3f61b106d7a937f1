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

#include "qmemtest/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qmemtest/error.hpp"

namespace qmemtest {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::X: return "X";
    case GateKind::H: return "H";
    case GateKind::CX: return "CX";
    case GateKind::Delay: return "DELAY";
    case GateKind::Measure: return "MEASURE";
  }
  return "?";
}

Gate x_gate(QubitId q) { return Gate{GateKind::X, {q}, 0.0, 0.0}; }
Gate h_gate(QubitId q) { return Gate{GateKind::H, {q}, 0.0, 0.0}; }
Gate cx_gate(QubitId control, QubitId target) {
  return Gate{GateKind::CX, {control, target}, 0.0, 0.0};
}

std::string to_string(PatternVariant variant) {
  switch (variant) {
    case PatternVariant::BlankOne: return "blank_one";
    case PatternVariant::BlankPlusEchoed: return "blank_plus_echoed";
    case PatternVariant::CheckerboardOne: return "checkerboard_one";
    case PatternVariant::CheckerboardPlusEchoed: return "checkerboard_plus_echoed";
    case PatternVariant::CheckerboardOneActive: return "checkerboard_one_active";
    case PatternVariant::Bell: return "bell";
    case PatternVariant::TripletCollision: return "triplet_collision";
    case PatternVariant::GhzChain: return "ghz_chain";
  }
  return "?";
}

std::optional<PatternVariant> parse_variant(const std::string& name) {
  for (PatternVariant v :
       {PatternVariant::BlankOne, PatternVariant::BlankPlusEchoed,
        PatternVariant::CheckerboardOne, PatternVariant::CheckerboardPlusEchoed,
        PatternVariant::CheckerboardOneActive, PatternVariant::Bell,
        PatternVariant::TripletCollision, PatternVariant::GhzChain}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

PatternSpec PatternSpec::normalized() const {
  PatternSpec out = *this;
  switch (variant) {
    case PatternVariant::BlankPlusEchoed:
    case PatternVariant::CheckerboardPlusEchoed:
    case PatternVariant::Bell:
    case PatternVariant::GhzChain:
      out.echo = true;
      break;
    default:
      out.echo = false;
      break;
  }
  return out;
}

std::string pattern_id(const PatternSpec& spec0) {
  const PatternSpec spec = spec0.normalized();
  const std::string side = spec.side == CheckerSide::A ? "A" : "B";
  switch (spec.variant) {
    case PatternVariant::BlankOne: return "blank_one";
    case PatternVariant::BlankPlusEchoed: return "blank_plus_echoed";
    case PatternVariant::CheckerboardOne: return "checkerboard_one_" + side;
    case PatternVariant::CheckerboardPlusEchoed:
      return "checkerboard_plus_echoed_" + side;
    case PatternVariant::CheckerboardOneActive:
      return "checkerboard_one_active_" + side + "_n" +
             std::to_string(spec.n_x_gates);
    case PatternVariant::Bell:
      return std::string("bell_phi_") +
             (spec.bell_kind == BellKind::PhiPlus ? "plus" : "minus") + "_" +
             (spec.bell_layout == BellLayout::Dense ? "dense" : "spaced");
    case PatternVariant::TripletCollision:
      return spec.with_cnot ? "triplet_cnot" : "triplet_delay";
    case PatternVariant::GhzChain:
      return "ghz_chain_L" + std::to_string(spec.chain_length);
  }
  return "?";
}

std::vector<Gate> invert(const std::vector<Gate>& prep) {
  std::vector<Gate> out;
  out.reserve(prep.size());
  for (auto it = prep.rbegin(); it != prep.rend(); ++it) {
    switch (it->kind) {
      case GateKind::X:
      case GateKind::H:
      case GateKind::CX:
        out.push_back(*it);
        break;
      default:
        throw DataError("invert: gate kind " + to_string(it->kind) +
                        " is not an invertible preparation gate");
    }
  }
  return out;
}

namespace {

double duration_of(const Gate& g, const GateDurations& d) {
  switch (g.kind) {
    case GateKind::X: return d.x_ns;
    case GateKind::H: return d.h_ns;
    case GateKind::CX: return d.cx_ns;
    case GateKind::Delay: return g.duration_ns;
    case GateKind::Measure: return 0.0;
  }
  return 0.0;
}

// Assigns start times: each gate begins once all of its qubits are free,
// never before `start`. Returns the latest busy time seen.
double schedule_sequence(std::vector<Gate>& gates, double start,
                         std::vector<double>& clock, const GateDurations& d) {
  double end = start;
  for (Gate& g : gates) {
    double t = start;
    for (QubitId q : g.qubits) t = std::max(t, clock[q]);
    g.at_ns = t;
    const double busy = t + duration_of(g, d);
    for (QubitId q : g.qubits) clock[q] = busy;
    end = std::max(end, busy);
  }
  return end;
}

void require_edge(const ChipTopology& topo, QubitId a, QubitId b,
                  const char* what) {
  if (!topo.connected(a, b)) {
    throw DataError(std::string("build_pattern: ") + what + " (" +
                    std::to_string(a) + "," + std::to_string(b) +
                    ") is not a coupling edge");
  }
}

}  // namespace

Circuit build_pattern(const PatternSpec& spec0, const ChipTopology& topo,
                      const PartitionInput& partition, double tau_us,
                      const GateDurations& durations) {
  const PatternSpec spec = spec0.normalized();
  if (tau_us < 0.0) throw DataError("build_pattern: tau must be >= 0");
  const std::uint32_t n = topo.num_qubits();

  Circuit circuit;
  circuit.num_qubits = n;
  circuit.tau_us = tau_us;
  circuit.pattern_id = pattern_id(spec);
  circuit.variant_name = to_string(spec.variant);

  std::vector<Gate> prep;
  std::vector<QubitId> echo_targets;
  std::vector<QubitId> train_qubits;
  // Triplet chains whose (b, c) pair runs a CX rather than a delay; those two
  // qubits get no idle window of their own.
  std::vector<char> no_delay(n, 0);
  double window_ns = tau_us * 1000.0;

  const auto singleton_groups = [&](const std::vector<QubitId>& qs) {
    for (QubitId q : qs) circuit.target_groups.push_back({q});
  };

  switch (spec.variant) {
    case PatternVariant::BlankOne: {
      for (QubitId q = 0; q < n; ++q) prep.push_back(x_gate(q));
      std::vector<QubitId> all(n);
      for (QubitId q = 0; q < n; ++q) all[q] = q;
      singleton_groups(all);
      break;
    }
    case PatternVariant::BlankPlusEchoed: {
      for (QubitId q = 0; q < n; ++q) {
        prep.push_back(h_gate(q));
        echo_targets.push_back(q);
      }
      std::vector<QubitId> all(n);
      for (QubitId q = 0; q < n; ++q) all[q] = q;
      singleton_groups(all);
      break;
    }
    case PatternVariant::CheckerboardOne:
    case PatternVariant::CheckerboardPlusEchoed:
    case PatternVariant::CheckerboardOneActive: {
      if (!partition.bipartition) {
        throw DataError("build_pattern: checkerboard variants need a bipartition");
      }
      const auto& bp = *partition.bipartition;
      const auto& targets = spec.side == CheckerSide::A ? bp.group_a : bp.group_b;
      const auto& others = spec.side == CheckerSide::A ? bp.group_b : bp.group_a;
      for (QubitId q : targets) {
        if (spec.variant == PatternVariant::CheckerboardPlusEchoed) {
          prep.push_back(h_gate(q));
          echo_targets.push_back(q);
        } else {
          prep.push_back(x_gate(q));
        }
      }
      if (spec.variant == PatternVariant::CheckerboardOneActive) {
        if (spec.n_x_gates < 0 || spec.n_x_gates % 2 != 0) {
          throw DataError("build_pattern: n_x_gates must be a non-negative even count, got " +
                          std::to_string(spec.n_x_gates));
        }
        train_qubits = others;
      }
      singleton_groups(targets);
      circuit.spectators = others;
      break;
    }
    case PatternVariant::Bell: {
      if (partition.paths.empty()) {
        throw DataError("build_pattern: Bell variant needs qubit pairs");
      }
      std::vector<char> entangled(n, 0);
      for (const auto& pair : partition.paths) {
        if (pair.size() != 2) {
          throw DataError("build_pattern: Bell partition entries must be pairs");
        }
        require_edge(topo, pair[0], pair[1], "Bell pair");
        if (spec.bell_kind == BellKind::PhiMinus) prep.push_back(x_gate(pair[0]));
        prep.push_back(h_gate(pair[0]));
        prep.push_back(cx_gate(pair[0], pair[1]));
        echo_targets.push_back(pair[0]);
        echo_targets.push_back(pair[1]);
        circuit.target_groups.push_back({pair[0], pair[1]});
        entangled[pair[0]] = entangled[pair[1]] = 1;
      }
      for (QubitId q = 0; q < n; ++q) {
        if (!entangled[q]) circuit.spectators.push_back(q);
      }
      break;
    }
    case PatternVariant::GhzChain: {
      if (partition.paths.empty()) {
        throw DataError("build_pattern: GHZ variant needs chains");
      }
      if (spec.chain_length < 2) {
        throw DataError("build_pattern: GHZ chain_length must be >= 2");
      }
      std::vector<char> member(n, 0);
      for (const auto& chain : partition.paths) {
        if (chain.size() != static_cast<std::size_t>(spec.chain_length)) {
          throw DataError("build_pattern: chain length mismatch");
        }
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
          require_edge(topo, chain[i], chain[i + 1], "GHZ chain link");
        }
        prep.push_back(h_gate(chain[0]));
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
          prep.push_back(cx_gate(chain[i], chain[i + 1]));
        }
        for (QubitId q : chain) {
          echo_targets.push_back(q);
          member[q] = 1;
        }
        circuit.target_groups.push_back(chain);
      }
      for (QubitId q = 0; q < n; ++q) {
        if (!member[q]) circuit.spectators.push_back(q);
      }
      break;
    }
    case PatternVariant::TripletCollision: {
      if (!partition.cover) {
        throw DataError("build_pattern: triplet variant needs a triplet cover");
      }
      // The idle window of this pattern is the CX duration itself (the
      // delay-substitution comparison), not the suite's tau.
      window_ns = durations.cx_ns;
      circuit.tau_us = durations.cx_ns / 1000.0;
      for (const Triplet& t : partition.cover->triplets) {
        require_edge(topo, t.a, t.b, "triplet link");
        require_edge(topo, t.b, t.c, "triplet link");
        prep.push_back(x_gate(t.a));
        circuit.target_groups.push_back({t.a});
        circuit.target_groups.push_back({t.b});
        circuit.target_groups.push_back({t.c});
        if (spec.with_cnot) {
          no_delay[t.b] = no_delay[t.c] = 1;
        }
      }
      circuit.spectators = partition.cover->idle;
      break;
    }
  }

  std::vector<double> clock(n, 0.0);
  const double prep_end = schedule_sequence(prep, 0.0, clock, durations);
  circuit.gates = prep;

  // Idle window [prep_end, prep_end + window]; all decoherence acts here.
  for (QubitId q = 0; q < n; ++q) {
    if (no_delay[q]) continue;
    Gate d{GateKind::Delay, {q}, window_ns, prep_end};
    circuit.gates.push_back(d);
  }
  if (spec.variant == PatternVariant::TripletCollision && spec.with_cnot) {
    for (const Triplet& t : partition.cover->triplets) {
      Gate g = cx_gate(t.b, t.c);
      g.at_ns = prep_end;
      circuit.gates.push_back(g);
    }
  }
  for (QubitId q : echo_targets) {
    Gate g = x_gate(q);
    g.at_ns = prep_end + window_ns / 2.0;
    circuit.gates.push_back(g);
  }
  if (!train_qubits.empty() && spec.n_x_gates > 0) {
    const double spacing = window_ns / spec.n_x_gates;
    for (QubitId q : train_qubits) {
      for (int k = 0; k < spec.n_x_gates; ++k) {
        Gate g = x_gate(q);
        g.at_ns = prep_end + k * spacing;
        circuit.gates.push_back(g);
      }
    }
  }

  const double inverse_start = prep_end + window_ns;
  std::vector<Gate> inverse = invert(prep);
  std::fill(clock.begin(), clock.end(), inverse_start);
  const double end = schedule_sequence(inverse, inverse_start, clock, durations);
  circuit.gates.insert(circuit.gates.end(), inverse.begin(), inverse.end());

  for (QubitId q = 0; q < n; ++q) {
    Gate m{GateKind::Measure, {q}, 0.0, end};
    circuit.gates.push_back(m);
  }

  std::stable_sort(circuit.gates.begin(), circuit.gates.end(),
                   [](const Gate& a, const Gate& b) { return a.at_ns < b.at_ns; });
  return circuit;
}

std::string serialize(const Circuit& circuit) {
  std::ostringstream out;
  char buf[64];
  out << "# qmemtest circuit v1\n";
  out << "pattern " << circuit.pattern_id << "\n";
  out << "variant " << circuit.variant_name << "\n";
  out << "qubits " << circuit.num_qubits << "\n";
  std::snprintf(buf, sizeof(buf), "%.9g", circuit.tau_us);
  out << "tau_us " << buf << "\n";
  for (const auto& group : circuit.target_groups) {
    out << "group";
    for (QubitId q : group) out << ' ' << q;
    out << "\n";
  }
  out << "spectators";
  for (QubitId q : circuit.spectators) out << ' ' << q;
  out << "\n";
  for (const Gate& g : circuit.gates) {
    std::snprintf(buf, sizeof(buf), "%.9g", g.at_ns);
    out << buf << ' ' << to_string(g.kind);
    for (QubitId q : g.qubits) out << ' ' << q;
    if (g.kind == GateKind::Delay) {
      std::snprintf(buf, sizeof(buf), "%.9g", g.duration_ns);
      out << ' ' << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace qmemtest
