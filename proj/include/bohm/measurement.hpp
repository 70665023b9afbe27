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
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "bohm/dynamics.hpp"
#include "bohm/evolution.hpp"
#include "bohm/grid.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// Probability mass outside a pointer support interval.
inline constexpr double kSupportTailMass = 1e-12;
/// Required pointer separation in units of the ready-state width.
inline constexpr double kSeparationWidths = 8.0;
inline constexpr double kCollapseFidelity = 1.0 - 1e-6;

struct MeasurementSetup {
  std::shared_ptr<const Grid> x_grid;
  std::shared_ptr<const Grid> y_grid;
  std::vector<double> eigenvalues;
  std::vector<WaveFunction> eigenstates;
  std::vector<Complex> coefficients;
  /// Ready state phi_0 on y_grid.
  WaveFunction pointer;
  double coupling = 1.0;
  double duration = 1.0;
  double pointer_mass = 1.0;
  double system_mass = 1.0;
  double hbar = 1.0;
  /// Snapshot spacing of the pointer history during coupling.
  double snapshot_dt = 0.05;
  /// RK4 step of the pointer trajectory; must divide snapshot_dt.
  double trajectory_dt = 0.01;
};

/// Standard deviation of |phi|^2.
double pointer_width(const WaveFunction& phi);

/// Throws NonOrthonormalBasis, InvalidArgument or SeparationGateFailed.
void validate(const MeasurementSetup& setup);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double y) const { return y >= lo && y <= hi; }
};

/// Central interval carrying 1 - tail of the mass of a 1D density.
Interval support_interval(const WaveFunction& phi, double tail = kSupportTailMass);

struct ConditionalSlice {
  WaveFunction slice;
  double norm = 0.0;
};

/// psi(x) = Psi(x, Y), with the environment on the trailing axes.
ConditionalSlice conditional_wavefunction(const WaveFunction& joint, std::span<const double> y);
ConditionalSlice conditional_wavefunction(const WaveFunction& joint, double y);

/// Branch pointer states phi_alpha(y, t). At t = 0 every branch is the ready
/// state; for t > 0 the coupling impulse has acted.
std::vector<WaveFunction> pointer_branches(const MeasurementSetup& setup, double t);

/// Psi_t(x, y) = sum_alpha c_alpha psi_alpha(x) phi_alpha(y, t).
WaveFunction premeasurement_unitary(const MeasurementSetup& setup, double t);

struct CollapseResult {
  std::size_t outcome = 0;
  double outcome_value = 0.0;
  double pointer_position = 0.0;
  double system_position = 0.0;
  WaveFunction collapsed;
  double normalization = 0.0;
  double fidelity = 0.0;
  double discarded_mass = 0.0;
  std::uint64_t seed = 0;
  /// Joint (X, Y) samples over [0, duration].
  Trajectory trajectory;
};

struct PvmResult {
  std::vector<double> probabilities;
  double expectation = 0.0;
};

PvmResult pvm_expectation(const WaveFunction& psi, const std::vector<WaveFunction>& eigenstates,
                          std::span<const double> eigenvalues);

struct PostMeasurementReport {
  Trajectory full;
  Trajectory pruned;
  double max_deviation = 0.0;
  /// Largest phase-aligned L2 distance between the normalized conditional
  /// wave function and the standalone system evolution.
  double conditional_error = 0.0;
};

/// Caches everything that does not depend on the run seed.
class MeasurementEngine {
 public:
  explicit MeasurementEngine(MeasurementSetup setup);

  const MeasurementSetup& setup() const { return setup_; }
  const std::vector<Interval>& supports() const { return supports_; }
  const WaveFunction& final_state() const { return final_state_; }

  CollapseResult run(std::uint64_t seed) const;

  /// Free evolution after the coupling, with and without the other branches.
  /// Trajectories take `steps` steps of `dt`; snapshots are kept every `stride` steps.
  PostMeasurementReport post_measurement(const CollapseResult& result, std::size_t steps,
                                         double dt, std::size_t stride = 5) const;

 private:
  struct PostHistories {
    std::shared_ptr<const WaveFunctionHistory> full;
    std::shared_ptr<const GuidingHistory> full_guide;
    std::shared_ptr<const GuidingHistory> pruned_guide;
    std::shared_ptr<const WaveFunctionHistory> system;
  };
  std::shared_ptr<const PostHistories> post_histories(std::size_t outcome, std::size_t steps,
                                                      double dt, std::size_t stride) const;

  MeasurementSetup setup_;
  WaveFunction initial_;
  WaveFunction final_state_;
  std::vector<WaveFunctionHistory> branch_history_;
  /// branch_frames_[j][a]: guiding frame of pointer branch a at snapshot j.
  std::vector<std::vector<GuidingFrame>> branch_frames_;
  std::vector<Interval> supports_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::tuple<std::size_t, std::size_t, double, std::size_t>,
                   std::shared_ptr<const PostHistories>>
      post_cache_;
};

CollapseResult run_ideal_measurement(const MeasurementSetup& setup, std::uint64_t seed);

struct RunSummary {
  std::uint64_t seed = 0;
  std::size_t outcome = 0;
  double pointer_position = 0.0;
  double fidelity = 0.0;
};

struct BornReport {
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;
  std::vector<double> predictions;
  std::vector<double> z_scores;
  double min_fidelity = 1.0;
  bool passed = false;
  std::vector<RunSummary> per_run;
};

BornReport born_statistics(const MeasurementEngine& engine, std::size_t runs, std::uint64_t seed,
                           std::size_t threads = 1);
BornReport born_statistics(const MeasurementSetup& setup, std::size_t runs, std::uint64_t seed,
                           std::size_t threads = 1);

struct EffectiveCheck {
  bool passed = false;
  double residual = 0.0;
  double overlap_mass = 0.0;
  bool y_in_support = false;
  Interval support;
};

/// Certifies psi as the effective wave function: Psi = psi phi + Phi with
/// disjoint y-supports and Y in the support of phi.
EffectiveCheck effective_wavefunction_check(const WaveFunction& joint, const WaveFunction& psi,
                                            const WaveFunction& phi, const WaveFunction& rest,
                                            double y);
EffectiveCheck effective_wavefunction_check(const WaveFunction& joint, const WaveFunction& psi,
                                            const WaveFunction& phi, double y);

/// The reference two-outcome setup: oscillator eigenstates psi_0, psi_1 as the
/// system basis and a Gaussian pointer.
MeasurementSetup reference_measurement(std::span<const Complex> coefficients);

}  // namespace bohm
