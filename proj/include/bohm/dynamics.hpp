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
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bohm/ensemble.hpp"
#include "bohm/evolution.hpp"
#include "bohm/interpolation.hpp"
#include "bohm/particles.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

/// Node guard: the guiding velocity is undefined where Psi*Psi falls below
/// this fraction of the maximum density.
inline constexpr double kNodeRelativeThreshold = 1e-12;

enum class TerminationReason { kCompleted, kNodeEncountered, kLeftDomain };
std::string_view to_string(TerminationReason reason);

struct Trajectory {
  std::size_t dims = 0;
  std::vector<double> times;
  /// dims values per stored sample.
  std::vector<double> coordinates;
  TerminationReason reason = TerminationReason::kCompleted;
  std::uint64_t seed = 0;
  std::string scenario;

  std::size_t sample_count() const { return times.size(); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(coordinates).subspan(i * dims, dims);
  }
  std::span<const double> final_position() const { return sample(sample_count() - 1); }
};

/// Guiding velocity on the grid, one plane per axis.
struct VelocityField {
  std::shared_ptr<const Grid> grid;
  std::vector<std::vector<double>> v;
  std::vector<std::uint8_t> masked;
  double node_threshold = 0.0;
};

/// v_j = (hbar / m_j) Im(Psi^dagger d_j Psi) / (Psi^dagger Psi), with spectral
/// gradients and the spin index contracted. Node points are masked (v = 0).
VelocityField velocity_field(const WaveFunction& psi, const ParticleSystem& system);

/// Psi and its spectral gradient for one snapshot, ready for off-grid lookups.
class GuidingFrame {
 public:
  explicit GuidingFrame(const WaveFunction& psi);
  /// sum_a weights[a] * frames[a]; exact because the gradient is linear.
  static GuidingFrame combine(std::span<const Complex> weights,
                              std::span<const GuidingFrame* const> frames);

  double time() const { return time_; }
  const Grid& grid() const { return *grid_; }
  std::size_t components() const { return components_; }
  double max_density() const { return max_density_; }
  /// field 0 is Psi_c, field 1 + j is d_j Psi_c.
  const Complex* plane(std::size_t c, std::size_t field) const {
    return data_.data() + (c * (grid_->dims() + 1) + field) * grid_->size();
  }

 private:
  GuidingFrame() = default;

  std::shared_ptr<const Grid> grid_;
  std::size_t components_ = 1;
  double time_ = 0.0;
  double max_density_ = 0.0;
  std::vector<Complex> data_;
};

/// Per-thread scratch for off-grid velocity evaluation.
struct VelocityWorkspace {
  GridStencil stencil;
  std::vector<Complex> values;
};

/// kGlobal multiplies each snapshot by the phase that best aligns it with the
/// previous one before interpolating in time. Velocities at the snapshots are
/// unchanged, but the fast global rotation exp(-i E t / hbar) no longer enters
/// the time interpolation. kNone interpolates the raw snapshots.
enum class PhaseAlignment { kGlobal, kNone };

/// Frames for every snapshot of a history, with cubic interpolation in time.
class GuidingHistory {
 public:
  explicit GuidingHistory(const WaveFunctionHistory& history, std::size_t threads = 1,
                          PhaseAlignment alignment = PhaseAlignment::kGlobal);
  GuidingHistory(std::vector<GuidingFrame> frames, double interval);

  double start_time() const { return frames_.front().time(); }
  double end_time() const { return frames_.back().time(); }
  double interval() const { return interval_; }
  std::size_t size() const { return frames_.size(); }
  const GuidingFrame& frame(std::size_t i) const { return frames_[i]; }
  const Grid& grid() const { return frames_.front().grid(); }

  /// Velocity at (t, q). Returns false at a node (nothing written to `out`).
  bool velocity(double t, std::span<const double> q, const ParticleSystem& system,
                std::span<double> out, VelocityWorkspace& ws) const;

 private:
  std::vector<GuidingFrame> frames_;
  double interval_ = 0.0;
};

/// Velocity at an off-grid configuration from cubic interpolation of Psi and
/// grad Psi. Throws NodeEncountered below the node guard.
std::vector<double> velocity_at(const WaveFunction& psi, const Configuration& q,
                                const ParticleSystem& system);
std::vector<double> velocity_at(const GuidingFrame& frame, std::span<const double> q,
                                const ParticleSystem& system);

enum class BoundaryPolicy { kWrap, kTerminate };

struct TrajectoryOptions {
  double dt = 0.0;
  /// Store every output_stride-th RK4 step.
  std::size_t output_stride = 1;
  BoundaryPolicy boundary = BoundaryPolicy::kWrap;
  /// Integration end; defaults to the end of the history.
  double t_end = std::numeric_limits<double>::quiet_NaN();
};

/// Classical RK4 on dQ/dt = v(Q, t). dt must divide the snapshot interval.
Trajectory integrate_trajectory(const Configuration& q0, const GuidingHistory& history,
                                const ParticleSystem& system, const TrajectoryOptions& options);
Trajectory integrate_trajectory(const Configuration& q0, const WaveFunctionHistory& history,
                                const ParticleSystem& system, const TrajectoryOptions& options);

/// Integrates every member; each result is identical to integrate_trajectory
/// run on that member alone, for any thread count.
std::vector<Trajectory> integrate_ensemble(const Ensemble& ensemble, const GuidingHistory& history,
                                           const ParticleSystem& system,
                                           const TrajectoryOptions& options,
                                           std::size_t threads = 1);

/// Final positions of completed trajectories, flattened.
Ensemble final_ensemble(const std::vector<Trajectory>& trajectories, double time);

}  // namespace bohm
