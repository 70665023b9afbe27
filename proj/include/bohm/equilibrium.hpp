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
#include <string>
#include <vector>

#include "bohm/dynamics.hpp"
#include "bohm/ensemble.hpp"
#include "bohm/evolution.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// n draws from the cell histogram of |psi|^2 with uniform jitter inside each
/// cell (cells are centred on grid points). Draw j depends only on (seed, j).
Ensemble sample_density(const WaveFunction& psi, std::size_t n, std::uint64_t seed,
                        std::size_t threads = 1);

struct StatisticCheck {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool passed = false;
};

struct EquivarianceReport {
  /// "KS" for one-dimensional configuration spaces, "chi2" otherwise.
  std::string kind;
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool passed = false;
  std::size_t samples = 0;
  /// Members dropped because their trajectory did not complete.
  std::size_t excluded = 0;
  double time = 0.0;
  std::uint64_t seed = 0;
  double alpha = 0.01;
  /// Every statistic computed; the verdict requires all of them to pass.
  std::vector<StatisticCheck> checks;
};

struct ComparisonOptions {
  double alpha = 0.01;
  /// Equiprobable bins per axis for the chi-square test; 0 selects round(sqrt(n)).
  std::size_t bins = 64;
};

/// Goodness of fit of an ensemble against density(psi). d = 1: KS. d >= 2:
/// chi-square on equiprobable bins of every marginal plus a KS per marginal.
EquivarianceReport compare_to_density(const Ensemble& ensemble, const WaveFunction& psi,
                                      const ComparisonOptions& options = {});

struct EquivarianceOptions {
  EvolutionParams evolution;
  double dt_traj = 0.0;
  ComparisonOptions comparison;
  BoundaryPolicy boundary = BoundaryPolicy::kWrap;
  std::size_t threads = 1;
};

/// Samples |psi0|^2, transports the ensemble along Bohmian trajectories to
/// t0 + duration and compares with |psi_T|^2.
EquivarianceReport equivariance_test(const WaveFunction& psi0, const Potential& v,
                                     const ParticleSystem& system, double duration,
                                     std::size_t n, std::uint64_t seed,
                                     const EquivarianceOptions& options);

/// rho and J = rho v, with J zeroed (and flagged) where v is masked.
DensityField probability_current(const WaveFunction& psi, const ParticleSystem& system);

/// L2 norm over unmasked points of (rho(t+dt) - rho(t-dt)) / 2dt + div J.
double continuity_residual(const WaveFunction& psi, const Potential& v,
                           const ParticleSystem& system, double dt);

}  // namespace bohm
