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

#include "bohm/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bohm/error.hpp"

namespace bohm {

Grid::Grid(std::span<const AxisSpec> axes, std::size_t point_budget)
    : axes_(axes.begin(), axes.end()) {
  if (axes_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least one axis");
  }
  size_ = 1;
  cell_volume_ = 1.0;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    const AxisSpec& a = axes_[j];
    if (a.n < 8 || !std::has_single_bit(a.n)) {
      throw Error(ErrorCode::kNonPowerOfTwo,
                  "axis " + std::to_string(j) + " has n=" + std::to_string(a.n) +
                      " (need a power of two >= 8)");
    }
    if (!(std::isfinite(a.lower) && std::isfinite(a.upper)) || !(a.upper > a.lower)) {
      throw Error(ErrorCode::kEmptyDomain, "axis " + std::to_string(j) + " has upper <= lower");
    }
    if (size_ > point_budget / a.n) {
      throw Error(ErrorCode::kMemoryBudgetExceeded,
                  "grid exceeds the budget of " + std::to_string(point_budget) + " points");
    }
    size_ *= a.n;
    const double dx = (a.upper - a.lower) / static_cast<double>(a.n);
    spacing_.push_back(dx);
    cell_volume_ *= dx;

    std::vector<double> k(a.n);
    const double dk = 2.0 * std::numbers::pi / (a.upper - a.lower);
    const auto half = static_cast<std::ptrdiff_t>(a.n / 2);
    for (std::size_t i = 0; i < a.n; ++i) {
      auto m = static_cast<std::ptrdiff_t>(i);
      if (m >= half) m -= static_cast<std::ptrdiff_t>(a.n);
      k[i] = dk * static_cast<double>(m);
    }
    wavenumbers_.push_back(std::move(k));
  }
  if (size_ > point_budget) {
    throw Error(ErrorCode::kMemoryBudgetExceeded,
                "grid exceeds the budget of " + std::to_string(point_budget) + " points");
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t j = axes_.size() - 1; j > 0; --j) {
    strides_[j - 1] = strides_[j] * axes_[j].n;
  }
}

double Grid::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

void Grid::point(std::size_t index, std::span<double> out) const {
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    const std::size_t i = (index / strides_[j]) % axes_[j].n;
    out[j] = coordinate(j, i);
  }
}

void Grid::unflatten(std::size_t index, std::span<std::size_t> out) const {
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    out[j] = (index / strides_[j]) % axes_[j].n;
  }
}

double Grid::wrap(std::size_t j, double x) const {
  const double a = axes_[j].lower;
  const double len = length(j);
  if (x >= a && x < axes_[j].upper) return x;
  double r = std::fmod(x - a, len);
  if (r < 0.0) r += len;
  // fmod can return len itself after the correction above for tiny negatives.
  if (r >= len) r = 0.0;
  return a + r;
}

bool Grid::contains(std::span<const double> q) const {
  if (q.size() != axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (!(q[j] >= axes_[j].lower && q[j] < axes_[j].upper)) return false;
  }
  return true;
}

bool Grid::operator==(const Grid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t j = 0; j < axes_.size(); ++j) {
    if (axes_[j].n != other.axes_[j].n || axes_[j].lower != other.axes_[j].lower ||
        axes_[j].upper != other.axes_[j].upper) {
      return false;
    }
  }
  return true;
}

Grid make_grid(std::span<const AxisSpec> axes, std::size_t point_budget) {
  return Grid(axes, point_budget);
}

}  // namespace bohm
