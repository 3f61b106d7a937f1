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

#include <stdexcept>
#include <string>
#include <vector>

namespace qmemtest {

/// Malformed or inconsistent input data (files, configs, invariant
/// violations in user-supplied structures). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (integrator underflow, non-finite parameters,
/// oversized clusters). CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a 2-coloring is requested for a non-bipartite graph.
/// Carries one odd cycle as evidence.
class OddCycleError : public DataError {
 public:
  OddCycleError(const std::string& what, std::vector<std::uint32_t> cycle)
      : DataError(what), odd_cycle(std::move(cycle)) {}

  std::vector<std::uint32_t> odd_cycle;
};

}  // namespace qmemtest
