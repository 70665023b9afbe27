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
#include <span>
#include <vector>

namespace bohm {

/// One axis of a configuration-space grid: `n` points covering [lower, upper)
/// with periodic wrap-around.
struct AxisSpec {
  std::size_t n = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Default cap on the total number of grid points (2^24).
inline constexpr std::size_t kDefaultPointBudget = std::size_t{1} << 24;

/// Rectangular periodic grid over a d-dimensional configuration space.
///
/// Storage order is row-major: the last axis varies fastest. Point i of axis
/// j sits at lower_j + i * spacing_j. Wavenumbers are cached per axis in FFT
/// order (0, 1, ..., n/2-1, -n/2, ..., -1) times 2*pi/(upper - lower).
class Grid {
 public:
  explicit Grid(std::span<const AxisSpec> axes,
                std::size_t point_budget = kDefaultPointBudget);

  std::size_t dims() const { return axes_.size(); }
  std::size_t size() const { return size_; }

  const AxisSpec& axis(std::size_t j) const { return axes_[j]; }
  std::size_t extent(std::size_t j) const { return axes_[j].n; }
  double lower(std::size_t j) const { return axes_[j].lower; }
  double upper(std::size_t j) const { return axes_[j].upper; }
  double length(std::size_t j) const { return axes_[j].upper - axes_[j].lower; }
  double spacing(std::size_t j) const { return spacing_[j]; }
  double min_spacing() const;
  double cell_volume() const { return cell_volume_; }
  std::size_t stride(std::size_t j) const { return strides_[j]; }

  double coordinate(std::size_t j, std::size_t i) const {
    return axes_[j].lower + static_cast<double>(i) * spacing_[j];
  }
  /// Writes the coordinates of flat point `index` into `out` (size dims()).
  void point(std::size_t index, std::span<double> out) const;
  /// Per-axis integer index of flat point `index`.
  void unflatten(std::size_t index, std::span<std::size_t> out) const;

  /// Wavenumbers of axis j in FFT order.
  const std::vector<double>& wavenumbers(std::size_t j) const { return wavenumbers_[j]; }

  /// Maps x periodically into [lower_j, upper_j).
  double wrap(std::size_t j, double x) const;
  bool contains(std::span<const double> q) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  std::vector<AxisSpec> axes_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> wavenumbers_;
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

Grid make_grid(std::span<const AxisSpec> axes,
               std::size_t point_budget = kDefaultPointBudget);
inline Grid make_grid(std::initializer_list<AxisSpec> axes,
                      std::size_t point_budget = kDefaultPointBudget) {
  return make_grid(std::span<const AxisSpec>(axes.begin(), axes.size()), point_budget);
}

}  // namespace bohm
