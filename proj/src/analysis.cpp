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

#include "qmemtest/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qmemtest/error.hpp"

namespace qmemtest {

std::vector<LeakSite> CollisionReport::leak_sites() const {
  std::vector<LeakSite> sites;
  sites.reserve(entries.size());
  for (const CollisionEntry& e : entries) sites.push_back({e.chain, e.type});
  return sites;
}

std::pair<double, double> estimate_fidelity(const CountsRecord& record,
                                            std::span<const QubitId> group) {
  if (group.empty()) {
    throw DataError("estimate_fidelity: empty target group");
  }
  if (record.histogram.empty()) {
    throw DataError("estimate_fidelity: empty histogram");
  }
  const std::size_t len = record.histogram.begin()->first.size();
  for (QubitId q : group) {
    if (q >= len) {
      throw DataError("estimate_fidelity: qubit " + std::to_string(q) +
                      " outside the measured set of " + std::to_string(len) +
                      " qubits");
    }
  }
  long zeros = 0;
  for (const auto& [bits, count] : record.histogram) {
    bool all_zero = true;
    for (QubitId q : group) {
      if (bits[len - 1 - q] != '0') {
        all_zero = false;
        break;
      }
    }
    if (all_zero) zeros += count;
  }
  const double f = static_cast<double>(zeros) / record.shots;
  const double se = std::sqrt(std::max(f * (1.0 - f), 0.0) / record.shots);
  return {f, se};
}

namespace {

std::string group_key(std::span<const QubitId> group) {
  std::string key;
  for (QubitId q : group) {
    if (!key.empty()) key += '-';
    key += std::to_string(q);
  }
  return key;
}

}  // namespace

std::map<std::string, FidelitySeries> series_from_records(
    std::span<const CountsRecord> records,
    const std::vector<std::vector<QubitId>>& groups,
    std::span<const QubitId> spectators) {
  std::vector<const CountsRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->tau_us < b->tau_us; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->tau_us <= sorted[i - 1]->tau_us) {
      throw DataError("series_from_records: duplicate tau " +
                      std::to_string(sorted[i]->tau_us) + " in record set");
    }
  }

  std::vector<std::vector<QubitId>> all_groups = groups;
  for (QubitId q : spectators) all_groups.push_back({q});

  std::map<std::string, FidelitySeries> out;
  for (const auto& group : all_groups) {
    FidelitySeries series;
    series.group = group;
    for (const CountsRecord* rec : sorted) {
      auto [f, se] = estimate_fidelity(*rec, group);
      series.points.push_back({rec->tau_us, f, se});
      series.shots = rec->shots;
    }
    out.emplace(group_key(group), std::move(series));
  }
  return out;
}

namespace {

const FidelitySeries::Point& point_at(const FidelitySeries& series,
                                      double tau_us) {
  for (const auto& p : series.points) {
    if (std::abs(p.tau_us - tau_us) <= 1e-9 * std::max(1.0, std::abs(tau_us))) {
      return p;
    }
  }
  throw DataError("analysis: tau = " + std::to_string(tau_us) +
                  " us is not on the series grid (exact match required)");
}

}  // namespace

FailureMap delta_map(const std::map<QubitId, FidelitySeries>& series_a,
                     const std::map<QubitId, FidelitySeries>& series_b,
                     double tau_us, std::span<const QubitId> spectators,
                     double threshold) {
  QubitId max_q = 0;
  for (const auto& [q, s] : series_a) max_q = std::max(max_q, q);
  for (const auto& [q, s] : series_b) max_q = std::max(max_q, q);
  for (QubitId q : spectators) max_q = std::max(max_q, q);

  FailureMap map;
  map.tau_us = tau_us;
  map.threshold = threshold;
  map.delta_f.assign(max_q + 1, 0.0);
  map.spectators.assign(spectators.begin(), spectators.end());

  const std::set<QubitId> spec_set(spectators.begin(), spectators.end());
  for (QubitId q = 0; q <= max_q; ++q) {
    if (spec_set.count(q)) continue;  // pinned to 0
    auto ita = series_a.find(q);
    auto itb = series_b.find(q);
    if (ita == series_a.end() || itb == series_b.end()) {
      throw DataError("delta_map: qubit " + std::to_string(q) +
                      " missing from one of the series maps");
    }
    const double df =
        point_at(ita->second, tau_us).fidelity - point_at(itb->second, tau_us).fidelity;
    map.delta_f[q] = df;
    if (std::abs(df) > threshold) map.flags.push_back(q);
  }
  return map;
}

std::vector<std::pair<std::pair<QubitId, QubitId>, double>> product_fidelity(
    const std::map<QubitId, FidelitySeries>& series_a,
    const std::map<QubitId, FidelitySeries>& series_b,
    std::span<const std::pair<QubitId, QubitId>> pairs, double tau_us) {
  std::vector<std::pair<std::pair<QubitId, QubitId>, double>> out;
  out.reserve(pairs.size());
  for (auto [q1, q2] : pairs) {
    QubitId in_a = q1, in_b = q2;
    if (!series_a.count(in_a) || !series_b.count(in_b)) {
      std::swap(in_a, in_b);
    }
    auto ita = series_a.find(in_a);
    auto itb = series_b.find(in_b);
    if (ita == series_a.end() || itb == series_b.end()) {
      throw DataError("product_fidelity: pair (" + std::to_string(q1) + "," +
                      std::to_string(q2) +
                      ") is not split across the A and B target sets");
    }
    const double f =
        point_at(ita->second, tau_us).fidelity * point_at(itb->second, tau_us).fidelity;
    out.push_back({{q1, q2}, f});
  }
  return out;
}

CollisionReport detect_collisions(const DeviceModel& device,
                                  const ChipTopology& topo,
                                  double type1_threshold_mhz,
                                  double type2_threshold_mhz) {
  const std::uint32_t n = topo.num_qubits();
  bool has_chain = false;
  for (QubitId b = 0; b < n; ++b) {
    if (topo.neighbors(b).size() >= 2) has_chain = true;
  }
  if (has_chain) {
    for (QubitId q = 0; q < n; ++q) {
      const auto& cal = device.qubits[q];
      if (cal.omega01_ghz <= 0.0 || cal.alpha_ghz == 0.0) {
        throw DataError("detect_collisions: qubit " + std::to_string(q) +
                        " is missing omega01 or anharmonicity calibration");
      }
    }
  }

  CollisionReport report;
  for (QubitId b = 0; b < n; ++b) {
    const auto& nbrs = topo.neighbors(b);
    for (QubitId a : nbrs) {
      for (QubitId c : nbrs) {
        if (a == c) continue;
        // type-1: drive at omega01(c) hits a's 1->2 transition
        const double d1_mhz =
            std::abs(device.omega12_ghz(a) - device.qubits[c].omega01_ghz) * 1e3;
        if (d1_mhz <= type1_threshold_mhz) {
          report.entries.push_back(
              {Triplet{a, b, c}, CollisionType::Type1, d1_mhz, type1_threshold_mhz});
        }
        // type-2 is symmetric in (a, c); report each chain once
        if (a < c) {
          const double d2_mhz = std::abs(device.omega02_ghz(b) -
                                         device.qubits[a].omega01_ghz -
                                         device.qubits[c].omega01_ghz) *
                                1e3;
          if (d2_mhz <= type2_threshold_mhz) {
            report.entries.push_back({Triplet{a, b, c}, CollisionType::Type2,
                                      d2_mhz, type2_threshold_mhz});
          }
        }
      }
    }
  }
  return report;
}

GhzStats ghz_statistics(std::span<const FidelitySeries> per_sample, int length) {
  if (per_sample.empty()) {
    throw DataError("ghz_statistics: need at least one sample");
  }
  const std::size_t n_tau = per_sample.front().points.size();
  for (const auto& s : per_sample) {
    if (s.points.size() != n_tau) {
      throw DataError("ghz_statistics: samples disagree on the tau grid");
    }
  }
  GhzStats stats;
  stats.length = length;
  stats.n_samples = static_cast<int>(per_sample.size());
  const double n = static_cast<double>(per_sample.size());
  for (std::size_t t = 0; t < n_tau; ++t) {
    double mean = 0.0;
    for (const auto& s : per_sample) mean += s.points[t].fidelity;
    mean /= n;
    double var = 0.0;
    if (per_sample.size() >= 2) {
      for (const auto& s : per_sample) {
        const double d = s.points[t].fidelity - mean;
        var += d * d;
      }
      var /= (n - 1.0);
    }
    stats.points.push_back(
        {per_sample.front().points[t].tau_us, mean, std::sqrt(var / n)});
  }
  return stats;
}

}  // namespace qmemtest
