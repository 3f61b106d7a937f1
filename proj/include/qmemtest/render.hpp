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

#include <string>

#include "qmemtest/analysis.hpp"
#include "qmemtest/topology.hpp"

namespace qmemtest {

enum class MapFormat { Text, Csv, Svg };

MapFormat parse_map_format(const std::string& name);

struct RenderOptions {
  /// Symmetric color scale limit: Delta F = +limit is full red, -limit full
  /// blue, 0 white.
  double color_limit = 0.25;
};

/// Renders a failure map. SVG places qubits at the topology coordinates and
/// draws coupling edges; flagged qubits get a heavy outline. Text and csv
/// list qubit, Delta F and flag per line.
std::string emit_failure_map(const FailureMap& map, const ChipTopology& topo,
                             MapFormat format, const RenderOptions& options = {});

}  // namespace qmemtest
