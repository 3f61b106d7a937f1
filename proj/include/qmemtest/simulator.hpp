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

#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qmemtest/circuit.hpp"
#include "qmemtest/counts.hpp"
#include "qmemtest/device.hpp"
#include "qmemtest/lindblad.hpp"
#include "qmemtest/topology.hpp"

namespace qmemtest {

/// Type-1: the CX drive at omega01(c) hits the 1->2 transition of the excited
/// neighbor a. Type-2: the drive makes the combined transition b:0->2, a:1->0
/// resonant; the (a, b) pair then reads out 00 or 11 together.
enum class CollisionType { Type1, Type2 };

/// A collision-flagged chain; executing CX(b, c) with qubit a excited
/// triggers the phenomenological leakage channel.
struct LeakSite {
  Triplet chain;
  CollisionType type = CollisionType::Type1;
};

struct SimOptions {
  /// Simulate all qubits as one joint cluster (test oracle for the
  /// frozen-spectator separation; subject to the cluster cap).
  bool force_single_cluster = false;
  /// Evolve clusters on OpenMP threads. Results are identical either way;
  /// the serial path is kept as the reference for testing and benchmarks.
  bool parallel = true;
  std::vector<LeakSite> leak_sites;
};

/// Density matrix over an ordered cluster of qubits. Slot k of the basis
/// index holds qubits[k]; |0...0> is index 0.
struct ClusterState {
  std::vector<QubitId> qubits;
  Eigen::MatrixXcd rho;
};

/// One step of a pseudo-identity timeline: idle for delay_us under the
/// ambient (H, ops), then apply the gate if present. Gate qubits are cluster
/// slots here.
struct ScheduleItem {
  double delay_us = 0.0;
  std::optional<Gate> gate;
};

struct ClusterDistribution {
  std::vector<QubitId> qubits;
  Eigen::VectorXd probabilities;  // computational basis, readout errors folded in
  double trace_drift = 0.0;
};

struct SimulationResult {
  std::vector<ClusterDistribution> clusters;
};

/// Connected components of the interaction graph: nonzero couplings between
/// qubits that are not frozen in a sigma_z eigenstate, plus any pair sharing
/// a multi-qubit gate. Frozen spectators separate exactly; their coupling is
/// folded into the neighbor Hamiltonian as a signed single-qubit term. For
/// xx/yy coupling bases no separation applies. Throws when a cluster exceeds
/// the device cluster cap.
std::vector<std::vector<QubitId>> partition_into_clusters(
    const Circuit& circuit, const ChipTopology& topo, const DeviceModel& device,
    bool force_single_cluster = false);

/// H/hbar = sum_(edges in cluster) Omega sz x sz
///        + sum_(frozen neighbors) Omega * (+-1) * sz, in rad/us.
/// frozen_neighbors maps a neighbor qubit id to its sigma_z eigenvalue.
Eigen::MatrixXcd build_zz_hamiltonian(
    const DeviceModel& device, std::span<const QubitId> cluster,
    const std::map<QubitId, int>& frozen_neighbors);

/// T1_eff = T1 / (1 + kappa * x_rate); x_rate is X gates per us applied to
/// the qubit's neighbors during the idle window.
double heating_adjusted_t1(const DeviceModel& device, QubitId qubit,
                           double x_rate_per_us);

enum class NeighborMode { Superposition, FrozenZero };

/// Echoed |+> fidelity of one qubit coupled to N neighbors:
///   F = 1/2 [1 + exp(-tau/T2) * prod_(superposition neighbors) cos(2 Omega_i tau)].
/// Frozen-|0> neighbors are refocused by the echo and contribute factor 1.
/// Omegas are angular (rad/us). Only the echoed form is defined.
double closed_form_plus_fidelity(
    double t2_us,
    std::span<const std::pair<double, NeighborMode>> couplings,
    double tau_us, bool echoed);

/// Walks the schedule: RK4 over each delay segment (fixed step
/// min(T1, T2, pi/(4 max Omega), segment)/200), gates applied as instantaneous
/// unitary conjugations. Trace is renormalized only if drift exceeds 1e-9.
ClusterState evolve_delay(ClusterState state,
                          std::span<const ScheduleItem> schedule,
                          const Eigen::MatrixXcd& hamiltonian,
                          std::span<const CollapseOp> ops);

/// U rho U^dag with the standard gate matrix embedded at the gate's slots.
Eigen::MatrixXcd apply_gate(const Eigen::MatrixXcd& rho, const Gate& gate);

/// Evolves every cluster of the circuit independently and returns the
/// per-cluster computational-basis distributions (pre-sampling).
SimulationResult simulate_distributions(const Circuit& circuit,
                                        const ChipTopology& topo,
                                        const DeviceModel& device,
                                        const SimOptions& options = {});

/// Full backend run: cluster distributions, multinomial sampling with the
/// seeded generator, collision leakage per shot. Deterministic given seed,
/// independent of execution order.
CountsRecord run_circuit(const Circuit& circuit, const DeviceModel& device,
                         const ChipTopology& topo, int shots,
                         std::uint64_t seed, const SimOptions& options = {});

/// Per-shot leakage: with probability p_leak the excited outer qubit (and,
/// for type-2, the control with it) reads out 1 regardless of later gates.
/// site.chain.a must be the excited outer qubit.
void apply_collision_channel(std::vector<std::uint8_t>& shot_bits,
                             const LeakSite& site, double p_leak,
                             std::mt19937_64& rng);

}  // namespace qmemtest
