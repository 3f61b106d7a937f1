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

#include <optional>
#include <string>
#include <vector>

#include "qmemtest/topology.hpp"

namespace qmemtest {

enum class GateKind { X, H, CX, Delay, Measure };

std::string to_string(GateKind kind);

/// One scheduled gate. Times are absolute, in ns; gates act as instantaneous
/// unitaries at their start time, durations describe hardware occupancy and
/// define the idle windows. CX qubits are ordered [control, target].
struct Gate {
  GateKind kind = GateKind::X;
  std::vector<QubitId> qubits;
  double duration_ns = 0.0;
  double at_ns = 0.0;
};

Gate x_gate(QubitId q);
Gate h_gate(QubitId q);
Gate cx_gate(QubitId control, QubitId target);

/// Timed gate-level circuit. Gates are kept in schedule order; ties are
/// applied in list order. Fidelity is defined per target group as the joint
/// all-zeros probability; spectator fidelity is always per single qubit.
struct Circuit {
  std::uint32_t num_qubits = 0;
  std::vector<Gate> gates;
  double tau_us = 0.0;
  std::vector<std::vector<QubitId>> target_groups;
  std::vector<QubitId> spectators;
  std::string pattern_id;
  std::string variant_name;
};

enum class PatternVariant {
  BlankOne,
  BlankPlusEchoed,
  CheckerboardOne,
  CheckerboardPlusEchoed,
  CheckerboardOneActive,
  Bell,
  TripletCollision,
  GhzChain,
};

enum class CheckerSide { A, B };
enum class BellKind { PhiPlus, PhiMinus };
enum class BellLayout { Dense, Spaced };

std::string to_string(PatternVariant variant);
std::optional<PatternVariant> parse_variant(const std::string& name);

/// What to build. Echo is not a free choice: the superposition, Bell and GHZ
/// patterns are always echoed, the |1> patterns never are; normalized() sets
/// the flag accordingly.
struct PatternSpec {
  PatternVariant variant = PatternVariant::BlankOne;
  CheckerSide side = CheckerSide::A;
  int n_x_gates = 0;                       // CheckerboardOneActive; must be even
  BellKind bell_kind = BellKind::PhiPlus;
  BellLayout bell_layout = BellLayout::Dense;
  bool with_cnot = true;                   // TripletCollision
  int chain_length = 2;                    // GhzChain
  bool echo = false;                       // derived, see normalized()

  PatternSpec normalized() const;
};

/// Stable identifier string, e.g. "checkerboard_one_active_A_n250".
std::string pattern_id(const PatternSpec& spec);

struct GateDurations {
  double x_ns = 35.0;
  double h_ns = 35.0;
  double cx_ns = 500.0;
};

/// Partition payload consumed by build_pattern; which member is required
/// depends on the variant (checkerboards take the bipartition, triplet
/// patterns the cover, Bell/GHZ the paths).
struct PartitionInput {
  std::optional<Bipartition> bipartition;
  std::optional<TripletCover> cover;
  std::vector<std::vector<QubitId>> paths;
};

/// Builds the pseudo-identity circuit U - delay(tau) - U^dagger - measure for
/// the requested pattern. Echoed variants carry one mid-delay X per target
/// qubit; the active variant spreads n_x_gates X gates evenly over the idle
/// window of each spectator.
Circuit build_pattern(const PatternSpec& spec, const ChipTopology& topo,
                      const PartitionInput& partition, double tau_us,
                      const GateDurations& durations = {});

/// Inverse of a preparation sequence: reversed order, each gate self-inverse.
/// Only X, H and CX are invertible prep gates.
std::vector<Gate> invert(const std::vector<Gate>& prep);

/// Line-oriented text form: header with tau, target groups and spectators,
/// then one gate per line "<time_ns> <kind> <qubits...> [duration_ns]".
std::string serialize(const Circuit& circuit);

}  // namespace qmemtest
