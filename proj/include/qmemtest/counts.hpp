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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qmemtest {

/// Shot-resolved measurement histogram for one (pattern, tau) point.
/// Bitstrings cover all measured qubits, qubit 0 rightmost; counts sum to
/// shots. `seed` is the derived sub-seed the record was sampled with.
struct CountsRecord {
  std::string pattern_id;
  std::string variant;
  double tau_us = 0.0;
  int shots = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> histogram;
};

/// One record per line:
///   <pattern_id> <variant> <tau_us> <shots> <seed> <bitstring>:<count> ...
std::string counts_line(const CountsRecord& record);
CountsRecord parse_counts_line(const std::string& line, int line_number);

void write_counts_file(const std::filesystem::path& path,
                       const std::vector<CountsRecord>& records);

/// Reads and validates a counts file: histogram sums must match shots,
/// bitstring lengths must agree within a record. Malformed lines are
/// reported with their line number.
std::vector<CountsRecord> ingest_replay(const std::filesystem::path& path);

}  // namespace qmemtest
