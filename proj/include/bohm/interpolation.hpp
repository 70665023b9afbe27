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

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bohm/grid.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// Lagrange weights for nodes {-1, 0, 1, 2} evaluated at s in [0, 1).
std::array<double, 4> cubic_weights(double s);

/// Tensor-product cubic stencil around an off-grid point of a periodic grid:
/// 4^d flat indices with their weights. Reused across fields and snapshots.
struct GridStencil {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

/// Builds the stencil for q (coordinates are wrapped into the domain first).
/// Points exactly on a grid node get the single weight 1.
void build_stencil(const Grid& grid, std::span<const double> q, GridStencil& out);

inline Complex apply_stencil(const GridStencil& stencil, const Complex* plane) {
  Complex acc{0.0, 0.0};
  for (std::size_t s = 0; s < stencil.index.size(); ++s) {
    acc += stencil.weight[s] * plane[stencil.index[s]];
  }
  return acc;
}

/// Lagrange stencil over equally spaced samples t_j = start + j * interval,
/// j in [0, count). Uses up to four nodes, shifted one-sided near the ends.
struct TimeStencil {
  std::array<std::size_t, 4> index{};
  std::array<double, 4> weight{};
  std::size_t size = 0;
};

TimeStencil time_stencil(double start, double interval, std::size_t count, double t);

}  // namespace bohm
