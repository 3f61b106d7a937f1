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

#include "qmemtest/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>
#include <unordered_set>

#include "qmemtest/error.hpp"
#include "qmemtest/rng.hpp"

namespace qmemtest {

ChipTopology::ChipTopology(std::uint32_t num_qubits,
                           std::vector<std::pair<QubitId, QubitId>> edges,
                           std::vector<std::array<double, 2>> coords)
    : num_qubits_(num_qubits), coords_(std::move(coords)) {
  if (num_qubits_ == 0) {
    throw DataError("topology: num_qubits must be positive");
  }
  if (coords_.size() != num_qubits_) {
    throw DataError("topology: expected " + std::to_string(num_qubits_) +
                    " coordinate pairs, got " + std::to_string(coords_.size()));
  }
  edges_.reserve(edges.size());
  for (auto [i, j] : edges) {
    if (i >= num_qubits_ || j >= num_qubits_) {
      throw DataError("topology: edge (" + std::to_string(i) + "," +
                      std::to_string(j) + ") references a qubit id >= " +
                      std::to_string(num_qubits_));
    }
    if (i == j) {
      throw DataError("topology: self-loop edge (" + std::to_string(i) + "," +
                      std::to_string(j) + ")");
    }
    edges_.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw DataError("topology: duplicate edge (" + std::to_string(dup->first) +
                    "," + std::to_string(dup->second) + ")");
  }
  adjacency_.assign(num_qubits_, {});
  for (auto [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

const std::vector<QubitId>& ChipTopology::neighbors(QubitId q) const {
  if (q >= num_qubits_) {
    throw DataError("topology: qubit id " + std::to_string(q) + " out of range");
  }
  return adjacency_[q];
}

bool ChipTopology::connected(QubitId a, QubitId b) const {
  if (a >= num_qubits_ || b >= num_qubits_ || a == b) return false;
  const auto& nbrs = adjacency_[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

Bipartition bipartition(const ChipTopology& topo) {
  const std::uint32_t n = topo.num_qubits();
  std::vector<int> color(n, -1);
  std::vector<QubitId> parent(n, 0);

  for (QubitId root = 0; root < n; ++root) {
    if (color[root] != -1) continue;
    color[root] = 0;
    parent[root] = root;
    std::deque<QubitId> queue{root};
    while (!queue.empty()) {
      QubitId u = queue.front();
      queue.pop_front();
      for (QubitId v : topo.neighbors(u)) {
        if (color[v] == -1) {
          color[v] = 1 - color[u];
          parent[v] = u;
          queue.push_back(v);
        } else if (color[v] == color[u]) {
          // Reconstruct the odd cycle through the BFS tree: u -> lca -> v
          // plus the conflicting edge (v, u).
          std::vector<QubitId> up;
          std::unordered_set<QubitId> seen;
          for (QubitId w = u;; w = parent[w]) {
            up.push_back(w);
            seen.insert(w);
            if (parent[w] == w) break;
          }
          std::vector<QubitId> down;
          QubitId lca = root;
          for (QubitId w = v;; w = parent[w]) {
            if (seen.count(w)) {
              lca = w;
              break;
            }
            down.push_back(w);
            if (parent[w] == w) break;
          }
          std::vector<QubitId> cycle;
          for (QubitId w : up) {
            cycle.push_back(w);
            if (w == lca) break;
          }
          for (auto it = down.rbegin(); it != down.rend(); ++it) cycle.push_back(*it);
          throw OddCycleError(
              "bipartition: graph is not bipartite (odd cycle of length " +
                  std::to_string(cycle.size()) + " through qubit " +
                  std::to_string(u) + ")",
              cycle);
        }
      }
    }
  }

  Bipartition out;
  for (QubitId q = 0; q < n; ++q) {
    (color[q] == 0 ? out.group_a : out.group_b).push_back(q);
  }
  return out;
}

namespace {

bool triplet_shape_ok(const ChipTopology& topo, const Triplet& t) {
  return t.a != t.c && t.a != t.b && t.b != t.c && topo.connected(t.a, t.b) &&
         topo.connected(t.b, t.c);
}

// Cover constraint: members unused, and no member adjacent to a member of an
// already accepted triplet.
bool triplet_placeable(const ChipTopology& topo, const Triplet& t,
                       const std::vector<char>& used) {
  for (QubitId m : {t.a, t.b, t.c}) {
    if (used[m]) return false;
    for (QubitId nb : topo.neighbors(m)) {
      if (used[nb] && nb != t.a && nb != t.b && nb != t.c) return false;
    }
  }
  return true;
}

}  // namespace

TripletCover triplet_cover(const ChipTopology& topo,
                           std::span<const Triplet> seeds) {
  const std::uint32_t n = topo.num_qubits();
  std::vector<char> used(n, 0);
  TripletCover cover;

  for (const Triplet& s : seeds) {
    if (s.a >= n || s.b >= n || s.c >= n || !triplet_shape_ok(topo, s)) {
      throw DataError("triplet_cover: seed (" + std::to_string(s.a) + "," +
                      std::to_string(s.b) + "," + std::to_string(s.c) +
                      ") is not a chain in the topology");
    }
    if (!triplet_placeable(topo, s, used)) {
      throw DataError("triplet_cover: seed (" + std::to_string(s.a) + "," +
                      std::to_string(s.b) + "," + std::to_string(s.c) +
                      ") overlaps or touches another triplet");
    }
    cover.triplets.push_back(s);
    used[s.a] = used[s.b] = used[s.c] = 1;
  }

  for (QubitId b = 0; b < n; ++b) {
    if (used[b]) continue;
    const auto& nbrs = topo.neighbors(b);
    bool placed = false;
    for (std::size_t ia = 0; ia < nbrs.size() && !placed; ++ia) {
      for (std::size_t ic = 0; ic < nbrs.size() && !placed; ++ic) {
        if (ia == ic) continue;
        Triplet t{nbrs[ia], b, nbrs[ic]};
        if (triplet_placeable(topo, t, used)) {
          cover.triplets.push_back(t);
          used[t.a] = used[t.b] = used[t.c] = 1;
          placed = true;
        }
      }
    }
  }

  for (QubitId q = 0; q < n; ++q) {
    if (!used[q]) cover.idle.push_back(q);
  }
  return cover;
}

std::vector<std::vector<QubitId>> random_chains(const ChipTopology& topo,
                                                std::uint32_t length,
                                                std::uint32_t samples,
                                                std::uint64_t seed) {
  if (length < 2) {
    throw DataError("random_chains: length must be >= 2");
  }
  constexpr std::uint32_t kAttemptBudget = 10000;
  std::mt19937_64 rng(mix_seed(seed, 0x636861696eULL));
  std::vector<std::vector<QubitId>> chains;
  chains.reserve(samples);

  std::vector<char> visited(topo.num_qubits(), 0);
  for (std::uint32_t s = 0; s < samples; ++s) {
    bool found = false;
    for (std::uint32_t attempt = 0; attempt < kAttemptBudget && !found; ++attempt) {
      std::fill(visited.begin(), visited.end(), 0);
      std::vector<QubitId> path;
      QubitId cur = static_cast<QubitId>(next_below(rng, topo.num_qubits()));
      path.push_back(cur);
      visited[cur] = 1;
      while (path.size() < length) {
        std::vector<QubitId> options;
        for (QubitId nb : topo.neighbors(cur)) {
          if (!visited[nb]) options.push_back(nb);
        }
        if (options.empty()) break;  // dead end, restart
        cur = options[next_below(rng, options.size())];
        path.push_back(cur);
        visited[cur] = 1;
      }
      if (path.size() == length) {
        chains.push_back(std::move(path));
        found = true;
      }
    }
    if (!found) {
      throw DataError("random_chains: no simple path of length " +
                      std::to_string(length) + " found within " +
                      std::to_string(kAttemptBudget) + " attempts");
    }
  }
  return chains;
}

std::vector<std::pair<QubitId, QubitId>> bell_pairs(const ChipTopology& topo,
                                                    bool spaced) {
  std::vector<char> used(topo.num_qubits(), 0);
  std::vector<std::pair<QubitId, QubitId>> pairs;
  for (auto [i, j] : topo.edges()) {
    if (used[i] || used[j]) continue;
    if (spaced) {
      bool touches = false;
      for (QubitId m : {i, j}) {
        for (QubitId nb : topo.neighbors(m)) {
          if (used[nb]) touches = true;
        }
      }
      if (touches) continue;
    }
    pairs.emplace_back(i, j);
    used[i] = used[j] = 1;
  }
  return pairs;
}

}  // namespace qmemtest
