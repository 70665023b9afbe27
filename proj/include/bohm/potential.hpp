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

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bohm/grid.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// Hermiticity gate for matrix-valued potentials (max-entry norm of V - V^dagger).
inline constexpr double kHermiticityTolerance = 1e-12;

/// Switches a potential on for t in [t_on, t_off), scaled by `strength`.
struct Schedule {
  double t_on = 0.0;
  double t_off = 0.0;
  double strength = 1.0;
};

/// Real scalar field, or a field of Hermitian k x k matrices, on a grid.
/// A scalar potential acts as V(q) times the identity on every spin component.
class Potential {
 public:
  enum class Kind { kScalar, kMatrix };

  static Potential zero(const Grid& grid);
  static Potential scalar(const Grid& grid, std::vector<double> values);
  static Potential scalar(const Grid& grid, const std::function<double(std::span<const double>)>& f);
  /// `entries` holds one row-major k x k block per grid point.
  static Potential matrix(const Grid& grid, std::size_t k, std::vector<Complex> entries);
  static Potential matrix(const Grid& grid, std::size_t k,
                          const std::function<Eigen::MatrixXcd(std::span<const double>)>& f);

  Potential with_schedule(Schedule schedule) const;

  Kind kind() const { return kind_; }
  std::size_t matrix_size() const { return k_; }
  const Grid& grid() const { return *grid_; }
  const std::optional<Schedule>& schedule() const { return schedule_; }

  /// Scale factor applied at time t (1 when there is no schedule).
  double strength(double t) const;

  std::span<const double> scalar_values() const { return scalar_; }
  std::span<const Complex> matrix_entries() const { return matrix_; }
  Eigen::MatrixXcd matrix_at(std::size_t point) const;

 private:
  Potential() = default;

  Kind kind_ = Kind::kScalar;
  std::size_t k_ = 1;
  std::shared_ptr<const Grid> grid_;
  std::vector<double> scalar_;
  std::vector<Complex> matrix_;
  std::optional<Schedule> schedule_;
};

/// exp(-i V dt / hbar) for a Hermitian matrix. k = 2 uses the closed form
/// through the identity/Pauli decomposition, larger k an eigendecomposition.
Eigen::MatrixXcd matrix_phase(const Eigen::MatrixXcd& v, double dt, double hbar = 1.0);

}  // namespace bohm
