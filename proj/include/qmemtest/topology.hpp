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
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace qmemtest {

using QubitId = std::uint32_t;

/// Undirected coupling graph of a chip plus 2-D layout coordinates for map
/// rendering. Edges are stored normalized (i < j), sorted and deduplicated;
/// construction validates ids, self-loops and duplicates.
class ChipTopology {
 public:
  ChipTopology() = default;
  ChipTopology(std::uint32_t num_qubits,
               std::vector<std::pair<QubitId, QubitId>> edges,
               std::vector<std::array<double, 2>> coords);

  std::uint32_t num_qubits() const { return num_qubits_; }
  const std::vector<std::pair<QubitId, QubitId>>& edges() const { return edges_; }
  const std::vector<std::array<double, 2>>& coords() const { return coords_; }
  const std::vector<QubitId>& neighbors(QubitId q) const;
  bool connected(QubitId a, QubitId b) const;

 private:
  std::uint32_t num_qubits_ = 0;
  std::vector<std::pair<QubitId, QubitId>> edges_;
  std::vector<std::array<double, 2>> coords_;
  std::vector<std::vector<QubitId>> adjacency_;
};

/// Two-coloring of the chip: no edge inside either group. Group A contains
/// qubit 0; other components are rooted at their smallest id.
struct Bipartition {
  std::vector<QubitId> group_a;
  std::vector<QubitId> group_b;
};

/// Chain a - b - c. Qubit a is the excited spectator-neighbor, b the CX
/// control, c the CX target; {a,b} and {b,c} are edges, a != c.
struct Triplet {
  QubitId a = 0;
  QubitId b = 0;
  QubitId c = 0;

  bool operator==(const Triplet&) const = default;
};

/// Disjoint triplets, every cross-triplet qubit pair non-adjacent; idle is
/// the complement of all triplet members.
struct TripletCover {
  std::vector<Triplet> triplets;
  std::vector<QubitId> idle;
};

/// Breadth-first 2-coloring by parity from the smallest id of each
/// component. Throws OddCycleError (with a witness cycle) when the graph is
/// not bipartite.
Bipartition bipartition(const ChipTopology& topo);

/// Greedy deterministic cover: seeds are placed first (validated against the
/// cover invariants), then chains are added over ascending b with the two
/// smallest free neighbors as (a, c). An empty cover is legal.
TripletCover triplet_cover(const ChipTopology& topo,
                           std::span<const Triplet> seeds = {});

/// Seeded self-avoiding walks with uniform restarts; `length` counts qubits.
/// Throws when no path of the requested length is found within the attempt
/// budget (10,000 restarts per sample).
std::vector<std::vector<QubitId>> random_chains(const ChipTopology& topo,
                                                std::uint32_t length,
                                                std::uint32_t samples,
                                                std::uint64_t seed);

/// Greedy disjoint edge selection for the two-qubit entangled patterns.
/// Spaced layout additionally keeps every selected pair non-adjacent to all
/// other selected pairs (separated by at least one idle qubit).
std::vector<std::pair<QubitId, QubitId>> bell_pairs(const ChipTopology& topo,
                                                    bool spaced);

}  // namespace qmemtest
