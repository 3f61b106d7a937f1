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

#include "qmemtest/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "qmemtest/error.hpp"
#include "qmemtest/rng.hpp"

namespace qmemtest {

namespace {

using Complex = std::complex<double>;
constexpr double kNsToUs = 1e-3;
constexpr double kTraceTolerance = 1e-9;

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

// A qubit that only ever sees X / DELAY / MEASURE stays in a sigma_z
// eigenstate for the whole circuit.
std::vector<char> frozen_z_qubits(const Circuit& circuit) {
  std::vector<char> frozen(circuit.num_qubits, 1);
  for (const Gate& g : circuit.gates) {
    if (g.kind == GateKind::X || g.kind == GateKind::Delay ||
        g.kind == GateKind::Measure) {
      continue;
    }
    for (QubitId q : g.qubits) frozen[q] = 0;
  }
  return frozen;
}

Eigen::MatrixXcd gate_matrix(GateKind kind) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  switch (kind) {
    case GateKind::X: {
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2, 2);
      u(0, 1) = 1.0;
      u(1, 0) = 1.0;
      return u;
    }
    case GateKind::H: {
      Eigen::MatrixXcd u(2, 2);
      u << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
      return u;
    }
    case GateKind::CX: {
      // sub-index = control + 2 * target; control set flips the target
      Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
      u(0, 0) = 1.0;
      u(3, 1) = 1.0;
      u(2, 2) = 1.0;
      u(1, 3) = 1.0;
      return u;
    }
    default:
      throw DataError("apply_gate: gate kind " + to_string(kind) +
                      " is not a unitary");
  }
}

struct FrozenCoupling {
  int slot = 0;          // cluster member the term acts on
  QubitId neighbor = 0;  // frozen source qubit
  double omega = 0.0;    // rad/us
};

// Everything needed to evolve one cluster through the circuit.
struct ClusterPlan {
  std::vector<QubitId> members;  // ascending
  int num_qubits = 0;

  struct Event {
    double t_us = 0.0;
    long order = 0;  // original circuit position; breaks time ties
    bool is_flip = false;
    GateKind kind = GateKind::X;
    std::vector<std::uint32_t> slots;  // unitary events
    QubitId neighbor = 0;              // flip events
  };
  std::vector<Event> events;
  std::vector<std::pair<double, double>> windows;  // merged idle intervals, us

  std::vector<CollapseOp> ops;
  std::vector<std::tuple<int, int, double>> internal_couplings;  // slot pairs
  std::vector<FrozenCoupling> frozen_couplings;
  double base_step_us = 0.0;  // min(T1, T2, pi/(4 max Omega)) / 200 before seg cap
};

std::vector<std::pair<double, double>> merge_intervals(
    std::vector<std::pair<double, double>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<double, double>> merged;
  for (auto [s, e] : intervals) {
    if (e <= s) continue;
    if (!merged.empty() && s <= merged.back().second + 1e-12) {
      merged.back().second = std::max(merged.back().second, e);
    } else {
      merged.emplace_back(s, e);
    }
  }
  return merged;
}

// Per-qubit merged idle windows in us, from the qubit's DELAY gates.
std::vector<std::vector<std::pair<double, double>>> idle_windows_per_qubit(
    const Circuit& circuit) {
  std::vector<std::vector<std::pair<double, double>>> raw(circuit.num_qubits);
  for (const Gate& g : circuit.gates) {
    if (g.kind != GateKind::Delay) continue;
    for (QubitId q : g.qubits) {
      raw[q].emplace_back(g.at_ns * kNsToUs, (g.at_ns + g.duration_ns) * kNsToUs);
    }
  }
  for (auto& w : raw) w = merge_intervals(std::move(w));
  return raw;
}

double window_duration(const std::vector<std::pair<double, double>>& windows) {
  double total = 0.0;
  for (auto [s, e] : windows) total += e - s;
  return total;
}

// X gates per us applied to a qubit's neighbors inside its own idle window.
double neighbor_x_rate(const Circuit& circuit, const ChipTopology& topo,
                       QubitId qubit,
                       const std::vector<std::pair<double, double>>& windows) {
  const double total = window_duration(windows);
  if (total <= 0.0) return 0.0;
  const auto& nbrs = topo.neighbors(qubit);
  long count = 0;
  for (const Gate& g : circuit.gates) {
    if (g.kind != GateKind::X) continue;
    const QubitId q = g.qubits[0];
    if (!std::binary_search(nbrs.begin(), nbrs.end(), q)) continue;
    const double t = g.at_ns * kNsToUs;
    for (auto [s, e] : windows) {
      if (t >= s - 1e-12 && t <= e + 1e-12) {
        ++count;
        break;
      }
    }
  }
  return static_cast<double>(count) / total;
}

Eigen::VectorXd zz_diagonal(const ClusterPlan& plan,
                            const std::map<QubitId, int>& neighbor_sign) {
  const int dim = 1 << plan.num_qubits;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
  for (auto [s1, s2, w] : plan.internal_couplings) {
    for (int i = 0; i < dim; ++i) {
      const int z1 = (i >> s1) & 1 ? -1 : 1;
      const int z2 = (i >> s2) & 1 ? -1 : 1;
      h(i) += w * z1 * z2;
    }
  }
  for (const FrozenCoupling& f : plan.frozen_couplings) {
    const int sign = neighbor_sign.at(f.neighbor);
    for (int i = 0; i < dim; ++i) {
      const int z = (i >> f.slot) & 1 ? -1 : 1;
      h(i) += f.omega * sign * z;
    }
  }
  return h;
}

Eigen::MatrixXcd coupling_pair_matrix(CouplingBasis basis) {
  Eigen::MatrixXcd s(2, 2);
  switch (basis) {
    case CouplingBasis::XX:
      s << 0, 1, 1, 0;
      break;
    case CouplingBasis::YY:
      s << 0, Complex(0, -1), Complex(0, 1), 0;
      break;
    case CouplingBasis::ZZ:
      s << 1, 0, 0, -1;
      break;
  }
  Eigen::MatrixXcd pair(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          pair(i + 2 * k, j + 2 * l) = s(i, j) * s(k, l);
  return pair;
}

Eigen::MatrixXcd dense_coupling_hamiltonian(const ClusterPlan& plan,
                                            CouplingBasis basis) {
  const int dim = 1 << plan.num_qubits;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  const Eigen::MatrixXcd pair = coupling_pair_matrix(basis);
  for (auto [s1, s2, w] : plan.internal_couplings) {
    const std::uint32_t slots[] = {static_cast<std::uint32_t>(s1),
                                   static_cast<std::uint32_t>(s2)};
    h += w * embed_unitary(pair, slots, plan.num_qubits);
  }
  return h;
}

ClusterPlan make_plan(const Circuit& circuit, const ChipTopology& topo,
                      const DeviceModel& device, std::vector<QubitId> members,
                      const std::vector<char>& frozen,
                      const std::vector<std::vector<std::pair<double, double>>>&
                          qubit_windows) {
  ClusterPlan plan;
  plan.members = std::move(members);
  plan.num_qubits = static_cast<int>(plan.members.size());

  std::unordered_map<QubitId, int> slot;
  for (int k = 0; k < plan.num_qubits; ++k) slot[plan.members[k]] = k;

  // windows: union over members
  std::vector<std::pair<double, double>> intervals;
  for (QubitId q : plan.members) {
    intervals.insert(intervals.end(), qubit_windows[q].begin(),
                     qubit_windows[q].end());
  }
  plan.windows = merge_intervals(std::move(intervals));

  // couplings
  double omega_max = 0.0;
  for (int k = 0; k < plan.num_qubits; ++k) {
    const QubitId m = plan.members[k];
    for (QubitId nb : topo.neighbors(m)) {
      const double w = device.coupling(m, nb);
      if (w == 0.0) continue;
      auto it = slot.find(nb);
      if (it != slot.end()) {
        if (nb > m) plan.internal_couplings.emplace_back(k, it->second, w);
      } else {
        plan.frozen_couplings.push_back({k, nb, w});
      }
      omega_max = std::max(omega_max, std::abs(w));
    }
  }

  // collapse channels; heating shortens T1 when neighbors run X trains
  double min_time = std::numeric_limits<double>::infinity();
  for (int k = 0; k < plan.num_qubits; ++k) {
    const QubitId m = plan.members[k];
    const QubitCalibration& cal = device.qubits[m];
    const double x_rate = neighbor_x_rate(circuit, topo, m, qubit_windows[m]);
    const double t1_eff = heating_adjusted_t1(device, m, x_rate);
    if (std::isfinite(t1_eff)) {
      plan.ops.push_back({static_cast<std::uint32_t>(k),
                          CollapseKind::Relaxation, 1.0 / t1_eff});
      min_time = std::min(min_time, t1_eff);
    }
    if (std::isfinite(cal.t2_us)) {
      plan.ops.push_back({static_cast<std::uint32_t>(k), CollapseKind::Dephasing,
                          1.0 / (2.0 * cal.t2_us)});
      min_time = std::min(min_time, cal.t2_us);
    }
  }
  if (omega_max > 0.0) {
    min_time = std::min(min_time, std::numbers::pi / (4.0 * omega_max));
  }
  plan.base_step_us = min_time / 200.0;  // may be inf; capped per segment

  // events: member unitaries plus sigma_z flips of frozen coupled neighbors
  std::vector<char> is_frozen_source(circuit.num_qubits, 0);
  for (const FrozenCoupling& f : plan.frozen_couplings) is_frozen_source[f.neighbor] = 1;

  long order = 0;
  for (const Gate& g : circuit.gates) {
    ++order;
    if (g.kind == GateKind::Delay || g.kind == GateKind::Measure) continue;
    const bool on_cluster =
        std::all_of(g.qubits.begin(), g.qubits.end(),
                    [&](QubitId q) { return slot.count(q) > 0; });
    if (on_cluster) {
      ClusterPlan::Event ev;
      ev.t_us = g.at_ns * kNsToUs;
      ev.order = order;
      ev.kind = g.kind;
      for (QubitId q : g.qubits) ev.slots.push_back(slot[q]);
      plan.events.push_back(std::move(ev));
    } else if (g.kind == GateKind::X && is_frozen_source[g.qubits[0]]) {
      ClusterPlan::Event ev;
      ev.t_us = g.at_ns * kNsToUs;
      ev.order = order;
      ev.is_flip = true;
      ev.neighbor = g.qubits[0];
      plan.events.push_back(std::move(ev));
    } else if (std::any_of(g.qubits.begin(), g.qubits.end(),
                           [&](QubitId q) { return slot.count(q) > 0; })) {
      throw NumericalError("simulate: gate spans cluster boundary");
    }
  }
  std::sort(plan.events.begin(), plan.events.end(),
            [](const auto& a, const auto& b) {
              return a.t_us != b.t_us ? a.t_us < b.t_us : a.order < b.order;
            });
  return plan;
}

ClusterDistribution evolve_cluster(const ClusterPlan& plan,
                                   const DeviceModel& device) {
  const int dim = 1 << plan.num_qubits;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(0, 0) = 1.0;

  std::map<QubitId, int> neighbor_sign;
  for (const FrozenCoupling& f : plan.frozen_couplings) {
    neighbor_sign[f.neighbor] = 1;  // all qubits start in |0>
  }

  const bool diagonal = device.coupling_basis == CouplingBasis::ZZ;
  std::unique_ptr<DiagonalLindbladKernel> diag_kernel;
  std::unique_ptr<GenericLindbladKernel> generic_kernel;
  if (diagonal) {
    diag_kernel = std::make_unique<DiagonalLindbladKernel>(
        zz_diagonal(plan, neighbor_sign), plan.ops, plan.num_qubits);
  } else {
    generic_kernel = std::make_unique<GenericLindbladKernel>(
        dense_coupling_hamiltonian(plan, device.coupling_basis), plan.ops,
        plan.num_qubits);
  }
  const LindbladKernel& kernel =
      diagonal ? static_cast<const LindbladKernel&>(*diag_kernel)
               : static_cast<const LindbladKernel&>(*generic_kernel);

  double cursor = 0.0;
  auto integrate_to = [&](double t_end) {
    if (t_end <= cursor) return;
    for (auto [ws, we] : plan.windows) {
      const double s = std::max(ws, cursor);
      const double e = std::min(we, t_end);
      if (e - s > 1e-15) {
        const double h = std::min(plan.base_step_us, (e - s) / 200.0);
        rk4_evolve(rho, e - s, h, kernel);
      }
    }
    cursor = t_end;
  };

  for (const ClusterPlan::Event& ev : plan.events) {
    integrate_to(ev.t_us);
    if (ev.is_flip) {
      neighbor_sign[ev.neighbor] = -neighbor_sign[ev.neighbor];
      diag_kernel->set_diagonal(zz_diagonal(plan, neighbor_sign));
    } else {
      const Eigen::MatrixXcd u =
          embed_unitary(gate_matrix(ev.kind), ev.slots, plan.num_qubits);
      rho = u * rho * u.adjoint();
    }
  }
  if (!plan.windows.empty()) integrate_to(plan.windows.back().second);

  ClusterDistribution out;
  out.qubits = plan.members;
  const double trace = rho.trace().real();
  out.trace_drift = std::abs(trace - 1.0);
  if (!std::isfinite(trace) || trace <= 0.0) {
    throw NumericalError("simulate: density matrix trace is not finite");
  }
  if (out.trace_drift > kTraceTolerance) rho /= trace;

  Eigen::VectorXd probs(dim);
  for (int i = 0; i < dim; ++i) probs(i) = std::max(rho(i, i).real(), 0.0);
  const double total = probs.sum();
  if (total > 0.0) probs /= total;

  // readout confusion per qubit
  for (int k = 0; k < plan.num_qubits; ++k) {
    const auto [p10, p01] = device.qubits[plan.members[k]].readout;
    if (p10 == 0.0 && p01 == 0.0) continue;
    const int mask = 1 << k;
    for (int i = 0; i < dim; ++i) {
      if (i & mask) continue;
      const int j = i | mask;
      const double a = probs(i), b = probs(j);
      probs(i) = a * (1.0 - p10) + b * p01;
      probs(j) = a * p10 + b * (1.0 - p01);
    }
  }
  out.probabilities = std::move(probs);
  return out;
}

struct LeakEvent {
  double t_ns = 0.0;
  LeakSite site;  // oriented: chain.a is the excited outer qubit
};

std::vector<LeakEvent> resolve_leak_events(const Circuit& circuit,
                                           std::span<const LeakSite> sites) {
  std::vector<LeakEvent> events;
  if (sites.empty()) return events;

  auto has_x_before = [&](QubitId q, double t_ns) {
    for (const Gate& g : circuit.gates) {
      if (g.kind == GateKind::X && g.qubits[0] == q && g.at_ns < t_ns) return true;
    }
    return false;
  };

  for (const Gate& g : circuit.gates) {
    if (g.kind != GateKind::CX) continue;
    const QubitId control = g.qubits[0];
    const QubitId target = g.qubits[1];
    for (const LeakSite& ls : sites) {
      if (ls.chain.b != control) continue;
      if (ls.type == CollisionType::Type1) {
        if (ls.chain.c == target && has_x_before(ls.chain.a, g.at_ns)) {
          events.push_back({g.at_ns, ls});
        }
      } else {
        // type-2 is symmetric in the outer qubits
        QubitId other;
        if (ls.chain.c == target) other = ls.chain.a;
        else if (ls.chain.a == target) other = ls.chain.c;
        else continue;
        if (has_x_before(other, g.at_ns)) {
          LeakEvent ev;
          ev.t_ns = g.at_ns;
          ev.site.type = CollisionType::Type2;
          ev.site.chain = Triplet{other, control, target};
          events.push_back(ev);
        }
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
    return std::tie(a.site.chain.a, a.site.chain.b, a.site.chain.c) <
           std::tie(b.site.chain.a, b.site.chain.b, b.site.chain.c);
  });
  return events;
}

}  // namespace

std::vector<std::vector<QubitId>> partition_into_clusters(
    const Circuit& circuit, const ChipTopology& topo, const DeviceModel& device,
    bool force_single_cluster) {
  const int n = static_cast<int>(circuit.num_qubits);
  if (topo.num_qubits() != circuit.num_qubits ||
      device.qubits.size() != circuit.num_qubits) {
    throw DataError("partition_into_clusters: qubit count mismatch");
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);

  if (force_single_cluster) {
    for (int q = 1; q < n; ++q) unite(parent, 0, q);
  } else {
    const std::vector<char> frozen = frozen_z_qubits(circuit);
    for (const Gate& g : circuit.gates) {
      if (g.qubits.size() < 2) continue;
      for (std::size_t i = 1; i < g.qubits.size(); ++i) {
        unite(parent, g.qubits[0], g.qubits[i]);
      }
    }
    for (auto [i, j] : topo.edges()) {
      if (device.coupling(i, j) == 0.0) continue;
      if (device.coupling_basis != CouplingBasis::ZZ || (!frozen[i] && !frozen[j])) {
        unite(parent, i, j);
      }
    }
  }

  std::map<int, std::vector<QubitId>> groups;
  for (int q = 0; q < n; ++q) {
    groups[find_root(parent, q)].push_back(q);
  }
  std::vector<std::vector<QubitId>> clusters;
  clusters.reserve(groups.size());
  for (auto& [root, members] : groups) {
    if (members.size() > device.cluster_cap) {
      std::ostringstream msg;
      msg << "cluster {";
      for (std::size_t i = 0; i < members.size(); ++i) {
        msg << (i ? "," : "") << members[i];
      }
      msg << "} has " << members.size() << " qubits, above the cap of "
          << device.cluster_cap;
      throw NumericalError(msg.str());
    }
    clusters.push_back(std::move(members));
  }
  return clusters;
}

Eigen::MatrixXcd build_zz_hamiltonian(
    const DeviceModel& device, std::span<const QubitId> cluster,
    const std::map<QubitId, int>& frozen_neighbors) {
  const int k = static_cast<int>(cluster.size());
  std::unordered_map<QubitId, int> slot;
  for (int i = 0; i < k; ++i) {
    if (!slot.emplace(cluster[i], i).second) {
      throw DataError("build_zz_hamiltonian: duplicate qubit in cluster");
    }
  }
  const int dim = 1 << k;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(dim);
  for (int s1 = 0; s1 < k; ++s1) {
    for (int s2 = s1 + 1; s2 < k; ++s2) {
      const double w = device.coupling(cluster[s1], cluster[s2]);
      if (w == 0.0) continue;
      for (int i = 0; i < dim; ++i) {
        const int z1 = (i >> s1) & 1 ? -1 : 1;
        const int z2 = (i >> s2) & 1 ? -1 : 1;
        h(i) += w * z1 * z2;
      }
    }
  }
  for (auto [nb, sign] : frozen_neighbors) {
    if (sign != 1 && sign != -1) {
      throw DataError("build_zz_hamiltonian: frozen eigenvalue must be +1 or -1");
    }
    for (int s = 0; s < k; ++s) {
      const double w = device.coupling(cluster[s], nb);
      if (w == 0.0) continue;
      for (int i = 0; i < dim; ++i) {
        const int z = (i >> s) & 1 ? -1 : 1;
        h(i) += w * sign * z;
      }
    }
  }
  return h.cast<Complex>().asDiagonal();
}

double heating_adjusted_t1(const DeviceModel& device, QubitId qubit,
                           double x_rate_per_us) {
  if (x_rate_per_us < 0.0) {
    throw DataError("heating_adjusted_t1: x_rate must be >= 0");
  }
  const double t1 = device.qubits[qubit].t1_us;
  return t1 / (1.0 + device.heating_kappa * x_rate_per_us);
}

double closed_form_plus_fidelity(
    double t2_us, std::span<const std::pair<double, NeighborMode>> couplings,
    double tau_us, bool echoed) {
  if (!echoed) {
    throw DataError("closed_form_plus_fidelity: only the echoed form is defined");
  }
  double envelope = std::isfinite(t2_us) ? std::exp(-tau_us / t2_us) : 1.0;
  for (auto [omega, mode] : couplings) {
    if (mode == NeighborMode::Superposition) {
      envelope *= std::cos(2.0 * omega * tau_us);
    }
    // frozen-|0> neighbors are refocused: factor 1
  }
  return 0.5 * (1.0 + envelope);
}

ClusterState evolve_delay(ClusterState state,
                          std::span<const ScheduleItem> schedule,
                          const Eigen::MatrixXcd& hamiltonian,
                          std::span<const CollapseOp> ops) {
  const int dim = static_cast<int>(state.rho.rows());
  if (hamiltonian.rows() != dim || hamiltonian.cols() != dim) {
    throw NumericalError("evolve_delay: Hamiltonian/state dimension mismatch");
  }
  int k = 0;
  while ((1 << k) < dim) ++k;

  double off_diag = 0.0;
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i)
      if (i != j) off_diag = std::max(off_diag, std::abs(hamiltonian(i, j)));

  std::unique_ptr<DiagonalLindbladKernel> diag_kernel;
  std::unique_ptr<GenericLindbladKernel> generic_kernel;
  if (off_diag < 1e-14) {
    diag_kernel = std::make_unique<DiagonalLindbladKernel>(
        hamiltonian.diagonal().real(), ops, k);
  } else {
    generic_kernel = std::make_unique<GenericLindbladKernel>(hamiltonian, ops, k);
  }
  const LindbladKernel& kernel =
      diag_kernel ? static_cast<const LindbladKernel&>(*diag_kernel)
                  : static_cast<const LindbladKernel&>(*generic_kernel);

  double min_time = std::numeric_limits<double>::infinity();
  for (const CollapseOp& op : ops) {
    if (op.rate_per_us <= 0.0) continue;
    min_time = std::min(min_time, op.kind == CollapseKind::Relaxation
                                      ? 1.0 / op.rate_per_us
                                      : 1.0 / (2.0 * op.rate_per_us));
  }
  const double h_max = hamiltonian.cwiseAbs().maxCoeff();
  if (h_max > 0.0) {
    min_time = std::min(min_time, std::numbers::pi / (4.0 * h_max));
  }

  for (const ScheduleItem& item : schedule) {
    if (item.delay_us < 0.0) {
      throw DataError("evolve_delay: negative delay segment");
    }
    if (item.delay_us > 0.0) {
      const double h = std::min(min_time, item.delay_us) / 200.0;
      rk4_evolve(state.rho, item.delay_us, h, kernel);
    }
    if (item.gate) state.rho = apply_gate(state.rho, *item.gate);
  }

  const double trace = state.rho.trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance && trace > 0.0) {
    state.rho /= trace;
  }
  return state;
}

Eigen::MatrixXcd apply_gate(const Eigen::MatrixXcd& rho, const Gate& gate) {
  int k = 0;
  while ((1 << k) < rho.rows()) ++k;
  std::vector<std::uint32_t> slots(gate.qubits.begin(), gate.qubits.end());
  const Eigen::MatrixXcd u = embed_unitary(gate_matrix(gate.kind), slots, k);
  return u * rho * u.adjoint();
}

SimulationResult simulate_distributions(const Circuit& circuit,
                                        const ChipTopology& topo,
                                        const DeviceModel& device,
                                        const SimOptions& options) {
  const auto clusters = partition_into_clusters(circuit, topo, device,
                                                options.force_single_cluster);
  const auto qubit_windows = idle_windows_per_qubit(circuit);
  const std::vector<char> frozen =
      options.force_single_cluster ? std::vector<char>(circuit.num_qubits, 0)
                                   : frozen_z_qubits(circuit);

  std::vector<ClusterPlan> plans;
  plans.reserve(clusters.size());
  for (const auto& members : clusters) {
    plans.push_back(
        make_plan(circuit, topo, device, members, frozen, qubit_windows));
  }

  SimulationResult result;
  result.clusters.resize(plans.size());
  std::vector<std::exception_ptr> errors(plans.size());

  const long count = static_cast<long>(plans.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (long i = 0; i < count; ++i) {
    try {
      result.clusters[i] = evolve_cluster(plans[i], device);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return result;
}

void apply_collision_channel(std::vector<std::uint8_t>& shot_bits,
                             const LeakSite& site, double p_leak,
                             std::mt19937_64& rng) {
  const double u = next_double(rng);
  if (u >= p_leak) return;
  shot_bits[site.chain.a] = 1;
  if (site.type == CollisionType::Type2) {
    shot_bits[site.chain.b] = 1;
  }
}

CountsRecord run_circuit(const Circuit& circuit, const DeviceModel& device,
                         const ChipTopology& topo, int shots,
                         std::uint64_t seed, const SimOptions& options) {
  if (shots < 1) throw DataError("run_circuit: shots must be >= 1");
  const SimulationResult sim = simulate_distributions(circuit, topo, device, options);
  const auto leak_events = resolve_leak_events(circuit, options.leak_sites);
  const std::uint32_t n = circuit.num_qubits;

  // Every cluster samples from its own derived stream; the merge below is
  // then independent of the order clusters were evolved in.
  std::vector<std::vector<std::uint32_t>> outcomes(sim.clusters.size());
  for (std::size_t ci = 0; ci < sim.clusters.size(); ++ci) {
    const Eigen::VectorXd& p = sim.clusters[ci].probabilities;
    std::vector<double> cum(p.size());
    double run = 0.0;
    for (int i = 0; i < p.size(); ++i) {
      run += p(i);
      cum[i] = run;
    }
    const double total = cum.empty() ? 0.0 : cum.back();
    std::mt19937_64 rng(mix_seed(mix_seed(seed, 0x636c7573746572ULL), ci));
    auto& out = outcomes[ci];
    out.resize(shots);
    for (int s = 0; s < shots; ++s) {
      const double u = next_double(rng) * total;
      out[s] = static_cast<std::uint32_t>(
          std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      if (out[s] >= cum.size()) out[s] = static_cast<std::uint32_t>(cum.size() - 1);
    }
  }

  std::mt19937_64 leak_rng(mix_seed(seed, 0x6c65616bULL));
  CountsRecord record;
  record.pattern_id = circuit.pattern_id;
  record.variant = circuit.variant_name;
  record.tau_us = circuit.tau_us;
  record.shots = shots;
  record.seed = seed;

  std::vector<std::uint8_t> bits(n);
  std::string key(n, '0');
  for (int s = 0; s < shots; ++s) {
    std::fill(bits.begin(), bits.end(), 0);
    for (std::size_t ci = 0; ci < sim.clusters.size(); ++ci) {
      const auto& qubits = sim.clusters[ci].qubits;
      const std::uint32_t idx = outcomes[ci][s];
      for (std::size_t k = 0; k < qubits.size(); ++k) {
        bits[qubits[k]] = (idx >> k) & 1;
      }
    }
    for (const LeakEvent& ev : leak_events) {
      apply_collision_channel(bits, ev.site, device.collision_p_leak, leak_rng);
    }
    for (std::uint32_t q = 0; q < n; ++q) {
      key[n - 1 - q] = bits[q] ? '1' : '0';
    }
    ++record.histogram[key];
  }
  return record;
}

}  // namespace qmemtest
