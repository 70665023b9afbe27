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

#include <span>
#include <vector>

#include "bohm/grid.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// Multi-dimensional complex DFT over one component plane of a grid.
/// Forward is unnormalized; backward divides by the point count, so
/// backward(forward(x)) == x. Safe to use concurrently from several threads.
class FourierTransform {
 public:
  explicit FourierTransform(const Grid& grid);

  void forward(std::span<Complex> data) const;
  void backward(std::span<Complex> data) const;

 private:
  const void* forward_plan_ = nullptr;
  const void* backward_plan_ = nullptr;
  std::size_t size_ = 0;
};

/// d/dx_axis of a periodic band-limited field. The Nyquist mode is dropped.
std::vector<Complex> spectral_derivative(const Grid& grid, std::span<const Complex> field,
                                         std::size_t axis);

/// All first derivatives of one plane, sharing a single forward transform.
std::vector<std::vector<Complex>> spectral_gradient(const Grid& grid,
                                                    std::span<const Complex> field);

/// Divergence of a real vector field given as one plane per axis.
std::vector<double> spectral_divergence(const Grid& grid,
                                        const std::vector<std::vector<double>>& field);

}  // namespace bohm
