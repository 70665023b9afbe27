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

#include "bohm/particles.hpp"
#include "bohm/potential.hpp"
#include "bohm/spectral.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

struct EvolutionParams {
  double dt = 0.0;
  /// Keep every store_stride-th state as a snapshot.
  std::size_t store_stride = 1;
  std::size_t max_steps = 2'000'000;
};

/// Ordered snapshots at start_time + j * interval.
struct WaveFunctionHistory {
  std::vector<WaveFunction> snapshots;
  double interval = 0.0;

  double start_time() const { return snapshots.front().time(); }
  double end_time() const { return snapshots.back().time(); }
  std::size_t size() const { return snapshots.size(); }
};

/// Strang split-operator propagator for a fixed dt:
///   exp(-i V dt/2hbar) exp(-i T dt/hbar) exp(-i V dt/2hbar).
/// Time-dependent (scheduled) potentials are evaluated at the step midpoint.
/// Holds cached phase tables, so one instance must not be shared across threads.
class SplitOperatorStepper {
 public:
  SplitOperatorStepper(const Grid& grid, Potential potential, ParticleSystem system, double dt);

  WaveFunction step(const WaveFunction& psi);
  double dt() const { return dt_; }

 private:
  void refresh_potential_phase(double strength);
  void apply_potential_half(std::vector<Complex>& amps, std::size_t k) const;

  Grid grid_;
  Potential potential_;
  ParticleSystem system_;
  double dt_;
  FourierTransform fft_;
  std::vector<Complex> kinetic_phase_;
  double cached_strength_ = 0.0;
  bool have_cache_ = false;
  // Scalar: one phase per point. Matrix: one row-major k x k unitary per point.
  std::vector<Complex> half_phase_;
};

/// One Strang step; norm is preserved to round-off. Advances time by dt.
WaveFunction step(const WaveFunction& psi, const Potential& v, const ParticleSystem& system,
                  double dt);

/// Evolves from t0 to t1 (dt may be negative when t1 < t0). The number of
/// steps must be a multiple of store_stride.
WaveFunctionHistory evolve(const WaveFunction& psi, const Potential& v,
                           const ParticleSystem& system, double t0, double t1,
                           const EvolutionParams& params);

/// <psi|H|psi> with the potential evaluated at psi.time().
double energy(const WaveFunction& psi, const Potential& v, const ParticleSystem& system);

/// Shared argument checks: grid, spin space and axis count agree.
void check_compatible(const WaveFunction& psi, const Potential& v, const ParticleSystem& system);
void check_compatible(const WaveFunction& psi, const ParticleSystem& system);

}  // namespace bohm
