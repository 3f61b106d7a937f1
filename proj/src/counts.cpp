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

#include "qmemtest/counts.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmemtest/error.hpp"

namespace qmemtest {

std::string counts_line(const CountsRecord& record) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", record.tau_us);
  out << record.pattern_id << ' ' << record.variant << ' ' << buf << ' '
      << record.shots << ' ' << record.seed;
  for (const auto& [bits, count] : record.histogram) {
    out << ' ' << bits << ':' << count;
  }
  return out.str();
}

CountsRecord parse_counts_line(const std::string& line, int line_number) {
  const std::string where = "counts line " + std::to_string(line_number);
  std::istringstream in(line);
  CountsRecord rec;
  if (!(in >> rec.pattern_id >> rec.variant >> rec.tau_us >> rec.shots >> rec.seed)) {
    throw DataError(where + ": expected 'pattern variant tau shots seed ...'");
  }
  if (rec.shots < 1) {
    throw DataError(where + ": shots must be >= 1");
  }
  std::string token;
  long long total = 0;
  std::size_t bit_len = 0;
  while (in >> token) {
    const auto colon = token.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
      throw DataError(where + ": malformed histogram entry '" + token + "'");
    }
    const std::string bits = token.substr(0, colon);
    for (char c : bits) {
      if (c != '0' && c != '1') {
        throw DataError(where + ": bitstring '" + bits + "' is not binary");
      }
    }
    if (bit_len == 0) bit_len = bits.size();
    if (bits.size() != bit_len) {
      throw DataError(where + ": inconsistent bitstring lengths");
    }
    int count = 0;
    try {
      count = std::stoi(token.substr(colon + 1));
    } catch (const std::exception&) {
      throw DataError(where + ": malformed count in '" + token + "'");
    }
    if (count < 0) throw DataError(where + ": negative count in '" + token + "'");
    if (!rec.histogram.emplace(bits, count).second) {
      throw DataError(where + ": duplicate bitstring '" + bits + "'");
    }
    total += count;
  }
  if (total != rec.shots) {
    throw DataError(where + " (record '" + rec.pattern_id +
                    "'): histogram sums to " + std::to_string(total) +
                    " but shots = " + std::to_string(rec.shots));
  }
  return rec;
}

void write_counts_file(const std::filesystem::path& path,
                       const std::vector<CountsRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write counts file " + path.string());
  for (const auto& rec : records) out << counts_line(rec) << "\n";
}

std::vector<CountsRecord> ingest_replay(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open counts file " + path.string());
  std::vector<CountsRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty() || line[0] == '#') continue;
    records.push_back(parse_counts_line(line, line_number));
  }
  return records;
}

}  // namespace qmemtest
