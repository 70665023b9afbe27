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
#include <vector>

namespace bohm {

struct Particle {
  double mass = 1.0;
  std::size_t dims = 1;
  /// Twice the spin quantum number (0 for spinless, 1 for spin-1/2).
  unsigned twice_spin = 0;
};

/// Masses, per-particle spatial dimensions, spin-space size and hbar.
/// The spinor dimension is k = prod_i (2 s_i + 1).
class ParticleSystem {
 public:
  explicit ParticleSystem(std::vector<Particle> particles, double hbar = 1.0);

  /// One particle of the given dimension; `twice_spin` selects k = twice_spin + 1.
  static ParticleSystem single(std::size_t dims, double mass = 1.0, unsigned twice_spin = 0,
                               double hbar = 1.0);

  std::size_t particle_count() const { return particles_.size(); }
  const Particle& particle(std::size_t i) const { return particles_[i]; }
  std::size_t total_dims() const { return axis_mass_.size(); }
  std::size_t spin_components() const { return spin_components_; }
  double hbar() const { return hbar_; }

  /// Mass of the particle owning configuration axis j.
  double axis_mass(std::size_t j) const { return axis_mass_[j]; }
  std::size_t axis_owner(std::size_t j) const { return axis_owner_[j]; }

 private:
  std::vector<Particle> particles_;
  std::vector<double> axis_mass_;
  std::vector<std::size_t> axis_owner_;
  std::size_t spin_components_ = 1;
  double hbar_ = 1.0;
};

}  // namespace bohm
