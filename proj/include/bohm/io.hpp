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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bohm/dynamics.hpp"

namespace bohm {

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Bin edges plus observed counts; `predicted` (optional) holds expected counts.
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::vector<double> predicted;

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  std::size_t total() const;
};

/// Equal-width bins over [lower, upper); values outside are not counted.
Histogram make_histogram(std::span<const double> values, double lower, double upper,
                         std::size_t bins);

/// Header `member,t,x1,...,xd`; only the first `limit` trajectories are written.
std::string trajectories_csv(const std::vector<Trajectory>& trajectories, std::size_t limit);

/// Header `lower,upper,count[,predicted]` plus any extra count columns.
std::string histogram_csv(const Histogram& histogram,
                          const std::vector<std::pair<std::string, std::vector<std::size_t>>>& extra = {});

}  // namespace bohm
