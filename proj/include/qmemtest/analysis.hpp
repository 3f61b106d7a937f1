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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmemtest/counts.hpp"
#include "qmemtest/device.hpp"
#include "qmemtest/simulator.hpp"
#include "qmemtest/topology.hpp"

namespace qmemtest {

/// Estimated F(tau) for one target group; stderr is the binomial
/// sqrt(F(1-F)/shots). Taus are strictly increasing.
struct FidelitySeries {
  std::vector<QubitId> group;
  struct Point {
    double tau_us = 0.0;
    double fidelity = 0.0;
    double stderr = 0.0;
  };
  std::vector<Point> points;
  int shots = 0;
};

/// Fit output. params carries named values:
///   exponential:   A, T, C            (T in us)
///   zz-oscillation: T2, omega_1..N    (omegas in 2pi*MHz, sorted descending)
struct FitResult {
  std::string model;
  std::map<std::string, double> params;
  double residual_rms = 0.0;
  bool converged = false;
  int n_starts_used = 0;
};

/// Per-qubit Delta F at one tau. Spectator entries are pinned to 0; flags
/// lists qubits with |Delta F| above the threshold.
struct FailureMap {
  double tau_us = 0.0;
  double threshold = 0.0;
  std::vector<double> delta_f;  // indexed by qubit id
  std::vector<QubitId> flags;
  std::vector<QubitId> spectators;
};

struct CollisionEntry {
  Triplet chain;
  CollisionType type = CollisionType::Type1;
  double detuning_mhz = 0.0;
  double threshold_mhz = 0.0;
};

struct CollisionReport {
  std::vector<CollisionEntry> entries;

  std::vector<LeakSite> leak_sites() const;
};

/// Mean fidelity over n sampled chains of one GHZ size, with the standard
/// error estimate sigma_F / sqrt(n) per tau.
struct GhzStats {
  int length = 0;
  int n_samples = 0;
  struct Point {
    double tau_us = 0.0;
    double mean = 0.0;
    double stderr = 0.0;
  };
  std::vector<Point> points;
};

/// F = (shots with every group bit 0, marginalized over the rest) / shots.
/// Bitstrings put qubit 0 rightmost. Returns (F, stderr).
std::pair<double, double> estimate_fidelity(const CountsRecord& record,
                                            std::span<const QubitId> group);

/// Builds one series per group (and per spectator, individually) from a set
/// of records of the same pattern over a tau grid.
std::map<std::string, FidelitySeries> series_from_records(
    std::span<const CountsRecord> records,
    const std::vector<std::vector<QubitId>>& groups,
    std::span<const QubitId> spectators);

/// Nonlinear least squares for F = A exp(-tau/T) + C, Levenberg-Marquardt
/// initialized by log-linear regression. Constant series are reported as
/// non-identifiable (T at the upper bound, converged = false).
FitResult fit_exponential(const FidelitySeries& series);

struct ZzFitOptions {
  int max_starts = 20;
  std::uint64_t seed = 0x7a7aULL;
  /// Evaluate the model by integrating the master equation instead of the
  /// closed form (orders of magnitude slower; kept for parity checks).
  bool use_master_equation = false;
};

/// Fit of F(tau) = 1/2 [1 + exp(-tau/T2) prod_i cos(2 Omega_i tau)].
/// Initial Omega guesses come from the largest peaks of the (detrended)
/// discrete Fourier transform of 2F-1, refined by seeded multi-start LM.
/// Omegas are reported sorted descending, in 2pi*MHz.
FitResult fit_zz_oscillation(const FidelitySeries& series, int n_neighbors,
                             const ZzFitOptions& options = {});

/// Delta F = F_a - F_b per qubit at one tau (exact grid match required).
/// Series maps are keyed by qubit id; spectators are pinned to 0.
FailureMap delta_map(const std::map<QubitId, FidelitySeries>& series_a,
                     const std::map<QubitId, FidelitySeries>& series_b,
                     double tau_us, std::span<const QubitId> spectators,
                     double threshold);

/// Joint per-pair reference fidelity F_A(q1) * F_B(q2) from the two
/// checkerboard patterns; each pair must have one qubit in the A targets and
/// one in the B targets.
std::vector<std::pair<std::pair<QubitId, QubitId>, double>> product_fidelity(
    const std::map<QubitId, FidelitySeries>& series_a,
    const std::map<QubitId, FidelitySeries>& series_b,
    std::span<const std::pair<QubitId, QubitId>> pairs, double tau_us);

/// Screens calibration data over every chain a-b-c:
///   type-1: |omega12(a) - omega01(c)| <= type1 threshold,
///   type-2: |omega02(b) - omega01(a) - omega01(c)| <= type2 threshold
/// (type-2 is symmetric in a and c; reported with a < c).
CollisionReport detect_collisions(const DeviceModel& device,
                                  const ChipTopology& topo,
                                  double type1_threshold_mhz = 10.0,
                                  double type2_threshold_mhz = 5.0);

/// Per-tau mean and sigma_F/sqrt(n) over the sampled chains. All series must
/// share one tau grid.
GhzStats ghz_statistics(std::span<const FidelitySeries> per_sample, int length);

}  // namespace qmemtest
