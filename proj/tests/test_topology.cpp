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
#include <set>

#include "qmemtest/analysis.hpp"
#include "qmemtest/device.hpp"
#include "qmemtest/error.hpp"
#include "qmemtest/topology.hpp"
#include "testutil.hpp"

using namespace qmemtest;
using test::line_topology;

namespace {

ChipTopology falcon27() {
  return load_device_file(std::string(QMEMTEST_SOURCE_DIR) +
                          "/devices/ehningen_falcon27.json")
      .topology;
}

ChipTopology random_graph(std::mt19937_64& rng, std::uint32_t n,
                          double edge_prob) {
  std::vector<std::pair<QubitId, QubitId>> edges;
  for (QubitId i = 0; i < n; ++i) {
    for (QubitId j = i + 1; j < n; ++j) {
      if (next_double(rng) < edge_prob) edges.push_back({i, j});
    }
  }
  std::vector<std::array<double, 2>> coords(n, {0.0, 0.0});
  return ChipTopology(n, edges, coords);
}

}  // namespace

TEST_CASE("topology validation") {
  std::vector<std::array<double, 2>> one_coord{{0, 0}};
  CHECK_NOTHROW(ChipTopology(1, {}, one_coord));

  CHECK_THROWS_AS(ChipTopology(2, {{0, 0}}, {{0, 0}, {1, 0}}), DataError);
  CHECK_THROWS_AS(ChipTopology(2, {{0, 1}, {1, 0}}, {{0, 0}, {1, 0}}), DataError);
  CHECK_THROWS_AS(ChipTopology(2, {{0, 2}}, {{0, 0}, {1, 0}}), DataError);
  CHECK_THROWS_AS(ChipTopology(2, {{0, 1}}, {{0, 0}}), DataError);
}

TEST_CASE("27-qubit heavy-hex device loads with 28 edges") {
  const ChipTopology topo = falcon27();
  CHECK(topo.num_qubits() == 27);
  CHECK(topo.edges().size() == 28);
  CHECK(topo.connected(24, 25));
  CHECK(topo.connected(22, 25));
  CHECK_FALSE(topo.connected(24, 22));
}

TEST_CASE("bipartition of a path") {
  const Bipartition bp = bipartition(line_topology(3));
  CHECK(bp.group_a == std::vector<QubitId>{0, 2});
  CHECK(bp.group_b == std::vector<QubitId>{1});
}

TEST_CASE("bipartition rejects odd cycles with a witness") {
  const ChipTopology triangle(3, {{0, 1}, {1, 2}, {0, 2}},
                              {{0, 0}, {1, 0}, {0, 1}});
  try {
    bipartition(triangle);
    FAIL("expected OddCycleError");
  } catch (const OddCycleError& e) {
    CHECK(e.odd_cycle.size() % 2 == 1);
    CHECK(e.odd_cycle.size() >= 3);
    for (std::size_t i = 0; i < e.odd_cycle.size(); ++i) {
      const QubitId a = e.odd_cycle[i];
      const QubitId b = e.odd_cycle[(i + 1) % e.odd_cycle.size()];
      CHECK(triangle.connected(a, b));
    }
  }
}

TEST_CASE("falcon bipartition never puts adjacent qubits in one group") {
  const ChipTopology topo = falcon27();
  const Bipartition bp = bipartition(topo);
  CHECK(std::find(bp.group_a.begin(), bp.group_a.end(), 0) != bp.group_a.end());
  CHECK(bp.group_a.size() + bp.group_b.size() == topo.num_qubits());
  const std::set<QubitId> a(bp.group_a.begin(), bp.group_a.end());
  for (auto [i, j] : topo.edges()) {
    CHECK(a.count(i) != a.count(j));
  }
}

TEST_CASE("bipartition of random trees is always valid") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 30; ++rep) {
    const std::uint32_t n = 2 + rng() % 30;
    std::vector<std::pair<QubitId, QubitId>> edges;
    for (QubitId q = 1; q < n; ++q) {
      edges.push_back({static_cast<QubitId>(rng() % q), q});
    }
    const ChipTopology topo(n, edges,
                            std::vector<std::array<double, 2>>(n, {0, 0}));
    const Bipartition bp = bipartition(topo);
    const std::set<QubitId> a(bp.group_a.begin(), bp.group_a.end());
    for (auto [i, j] : topo.edges()) CHECK(a.count(i) != a.count(j));
  }
}

TEST_CASE("triplet cover of a path uses the whole chain") {
  const TripletCover cover = triplet_cover(line_topology(3));
  REQUIRE(cover.triplets.size() == 1);
  CHECK(cover.triplets[0] == Triplet{0, 1, 2});
  CHECK(cover.idle.empty());
}

TEST_CASE("two qubits cannot form a triplet") {
  const TripletCover cover = triplet_cover(line_topology(2));
  CHECK(cover.triplets.empty());
  CHECK(cover.idle == std::vector<QubitId>{0, 1});
}

namespace {

void check_cover_invariants(const ChipTopology& topo, const TripletCover& cover) {
  std::set<QubitId> used;
  for (const Triplet& t : cover.triplets) {
    CHECK(topo.connected(t.a, t.b));
    CHECK(topo.connected(t.b, t.c));
    CHECK(t.a != t.c);
    for (QubitId m : {t.a, t.b, t.c}) {
      CHECK(used.insert(m).second);  // pairwise disjoint
    }
  }
  // every cross-triplet qubit pair is non-adjacent
  for (std::size_t i = 0; i < cover.triplets.size(); ++i) {
    for (std::size_t j = i + 1; j < cover.triplets.size(); ++j) {
      const Triplet& s = cover.triplets[i];
      const Triplet& t = cover.triplets[j];
      for (QubitId m1 : {s.a, s.b, s.c}) {
        for (QubitId m2 : {t.a, t.b, t.c}) {
          CHECK_FALSE(topo.connected(m1, m2));
        }
      }
    }
  }
  // idle = complement
  std::vector<QubitId> expected_idle;
  for (QubitId q = 0; q < topo.num_qubits(); ++q) {
    if (!used.count(q)) expected_idle.push_back(q);
  }
  CHECK(cover.idle == expected_idle);
}

}  // namespace

TEST_CASE("falcon triplet cover invariants") {
  const ChipTopology topo = falcon27();
  check_cover_invariants(topo, triplet_cover(topo));
}

TEST_CASE("detector-seeded falcon cover contains the collision chains") {
  const DeviceFile dev = load_device_file(std::string(QMEMTEST_SOURCE_DIR) +
                                          "/devices/ehningen_falcon27.json");
  const CollisionReport report = detect_collisions(dev.model, dev.topology);
  std::vector<Triplet> seeds;
  for (const auto& e : report.entries) seeds.push_back(e.chain);
  const TripletCover cover = triplet_cover(dev.topology, seeds);
  check_cover_invariants(dev.topology, cover);
  CHECK(std::find(cover.triplets.begin(), cover.triplets.end(),
                  Triplet{24, 25, 22}) != cover.triplets.end());
  CHECK(std::find(cover.triplets.begin(), cover.triplets.end(),
                  Triplet{2, 3, 5}) != cover.triplets.end());
}

TEST_CASE("cover invariants hold on random graphs") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 25; ++rep) {
    const ChipTopology topo = random_graph(rng, 4 + rng() % 16, 0.25);
    check_cover_invariants(topo, triplet_cover(topo));
  }
}

TEST_CASE("random chains are edges of the graph") {
  const ChipTopology topo = falcon27();
  const auto chains = random_chains(topo, 2, 10, 7);
  REQUIRE(chains.size() == 10);
  for (const auto& chain : chains) {
    REQUIRE(chain.size() == 2);
    CHECK(topo.connected(chain[0], chain[1]));
  }
}

TEST_CASE("impossible chain length is an error") {
  CHECK_THROWS_AS(random_chains(falcon27(), 28, 1, 1), DataError);
  CHECK_THROWS_AS(random_chains(line_topology(3), 1, 1, 1), DataError);
}

TEST_CASE("chain sampling is deterministic and self-avoiding") {
  const ChipTopology topo = falcon27();
  const auto first = random_chains(topo, 6, 10, 1234);
  const auto second = random_chains(topo, 6, 10, 1234);
  CHECK(first == second);
  for (const auto& chain : first) {
    const std::set<QubitId> unique(chain.begin(), chain.end());
    CHECK(unique.size() == chain.size());
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      CHECK(topo.connected(chain[i], chain[i + 1]));
    }
  }
}

TEST_CASE("bell pair selection") {
  const ChipTopology line = line_topology(8);
  const auto dense = bell_pairs(line, false);
  CHECK(dense == std::vector<std::pair<QubitId, QubitId>>{
                     {0, 1}, {2, 3}, {4, 5}, {6, 7}});
  const auto spaced = bell_pairs(line, true);
  CHECK(spaced == std::vector<std::pair<QubitId, QubitId>>{
                      {0, 1}, {3, 4}, {6, 7}});
  // spaced pairs are mutually non-adjacent
  for (std::size_t i = 0; i < spaced.size(); ++i) {
    for (std::size_t j = i + 1; j < spaced.size(); ++j) {
      for (QubitId a : {spaced[i].first, spaced[i].second}) {
        for (QubitId b : {spaced[j].first, spaced[j].second}) {
          CHECK_FALSE(line.connected(a, b));
        }
      }
    }
  }
}
