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

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bohm/grid.hpp"

namespace bohm {

using Complex = std::complex<double>;

/// Tolerance on |<psi|psi> - 1| for a wave function flagged as normalized.
inline constexpr double kNormalizationTolerance = 1e-10;

/// Complex k-component field on a grid. Components are stored as contiguous
/// planes: amplitude of component c at flat point i lives at c * size + i.
/// Instances are immutable; operations build new ones.
class WaveFunction {
 public:
  /// Empty placeholder without a grid; only assignment is meaningful.
  WaveFunction() = default;
  WaveFunction(Grid grid, std::size_t components, std::vector<Complex> amplitudes,
               double time = 0.0, bool normalized = false);
  WaveFunction(std::shared_ptr<const Grid> grid, std::size_t components,
               std::vector<Complex> amplitudes, double time = 0.0, bool normalized = false);

  /// Samples a scalar function f(q) at every grid point.
  static WaveFunction sample(const Grid& grid,
                             const std::function<Complex(std::span<const double>)>& f,
                             double time = 0.0);
  /// Samples a spinor: component c is f(q) * spinor[c].
  static WaveFunction sample_spinor(const Grid& grid,
                                    const std::function<Complex(std::span<const double>)>& f,
                                    std::span<const Complex> spinor, double time = 0.0);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::size_t components() const { return components_; }
  std::size_t points() const { return grid_->size(); }
  double time() const { return time_; }
  bool normalized() const { return normalized_; }
  bool empty() const { return grid_ == nullptr; }

  std::span<const Complex> amplitudes() const { return amplitudes_; }
  std::span<const Complex> component(std::size_t c) const {
    return std::span<const Complex>(amplitudes_).subspan(c * points(), points());
  }

  WaveFunction with_time(double t) const&;
  WaveFunction with_time(double t) &&;

 private:
  std::shared_ptr<const Grid> grid_;
  std::size_t components_ = 1;
  std::vector<Complex> amplitudes_;
  double time_ = 0.0;
  bool normalized_ = false;
};

/// rho = |Psi|^2 (summed over components) and, optionally, the current J.
struct DensityField {
  std::shared_ptr<const Grid> grid;
  std::vector<double> rho;
  /// One plane per configuration axis; empty unless computed.
  std::vector<std::vector<double>> current;
  /// Points where the velocity (and so J) is undefined; empty if not computed.
  std::vector<std::uint8_t> masked;
};

/// Riemann-sum inner product: sum over points and spin components of
/// conj(phi) * psi times the cell volume.
Complex inner_product(const WaveFunction& phi, const WaveFunction& psi);
double norm_squared(const WaveFunction& psi);
double norm(const WaveFunction& psi);

WaveFunction normalize(const WaveFunction& psi);
DensityField density(const WaveFunction& psi);
/// Integral of a density field under the grid quadrature.
double total_mass(const DensityField& field);

/// a * phi + b * psi on a common grid.
WaveFunction linear_combination(Complex a, const WaveFunction& phi, Complex b,
                                const WaveFunction& psi);
WaveFunction scaled(const WaveFunction& psi, Complex factor);

/// Tensor product of two scalar wave functions on the concatenated grid
/// (axes of `left` first).
WaveFunction tensor_product(const WaveFunction& left, const WaveFunction& right);

/// |<phi|psi>| / (|phi| |psi|).
double fidelity(const WaveFunction& phi, const WaveFunction& psi);

void require_same_grid(const WaveFunction& a, const WaveFunction& b);

}  // namespace bohm
