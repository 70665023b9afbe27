// Copyright 2026 The bohmlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bohm {

/// A point of configuration space at a given time.
struct Configuration {
  std::vector<double> coordinates;
  double time = 0.0;
};

/// Batch of configurations stored flat (dims values per member).
struct Ensemble {
  std::size_t dims = 0;
  std::vector<double> coordinates;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t size() const { return dims == 0 ? 0 : coordinates.size() / dims; }
  std::span<const double> position(std::size_t i) const {
    return std::span<const double>(coordinates).subspan(i * dims, dims);
  }
  Configuration member(std::size_t i) const {
    auto p = position(i);
    return Configuration{std::vector<double>(p.begin(), p.end()), time};
  }
};

}  // namespace bohm
