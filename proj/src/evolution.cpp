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

#include "bohm/evolution.hpp"

#include <cmath>
#include <string>

#include "bohm/error.hpp"

namespace bohm {
namespace {

// hbar * sum_j k_j^2 / (2 m_j) at every spectral index.
std::vector<double> kinetic_multiplier(const Grid& grid, const ParticleSystem& system) {
  std::vector<double> t(grid.size(), 0.0);
  std::vector<std::size_t> idx(grid.dims());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid.unflatten(i, idx);
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.dims(); ++j) {
      const double k = grid.wavenumbers(j)[idx[j]];
      sum += k * k / (2.0 * system.axis_mass(j));
    }
    t[i] = system.hbar() * system.hbar() * sum;
  }
  return t;
}

}  // namespace

void check_compatible(const WaveFunction& psi, const ParticleSystem& system) {
  if (system.total_dims() != psi.grid().dims()) {
    throw Error(ErrorCode::kGridMismatch, "particle system dimension does not match the grid");
  }
  if (system.spin_components() != psi.components()) {
    throw Error(ErrorCode::kGridMismatch, "spin components of system and wave function differ");
  }
}

void check_compatible(const WaveFunction& psi, const Potential& v, const ParticleSystem& system) {
  check_compatible(psi, system);
  if (v.grid() != psi.grid()) {
    throw Error(ErrorCode::kGridMismatch, "potential lives on a different grid");
  }
  if (v.kind() == Potential::Kind::kMatrix && v.matrix_size() != psi.components()) {
    throw Error(ErrorCode::kGridMismatch, "matrix potential size differs from spinor size");
  }
}

SplitOperatorStepper::SplitOperatorStepper(const Grid& grid, Potential potential,
                                           ParticleSystem system, double dt)
    : grid_(grid),
      potential_(std::move(potential)),
      system_(std::move(system)),
      dt_(dt),
      fft_(grid_) {
  if (!std::isfinite(dt) || dt == 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "time step must be finite and non-zero");
  }
  if (potential_.grid() != grid_) {
    throw Error(ErrorCode::kGridMismatch, "potential lives on a different grid");
  }
  const std::vector<double> t = kinetic_multiplier(grid_, system_);
  kinetic_phase_.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    kinetic_phase_[i] = std::exp(Complex(0.0, -t[i] * dt_ / system_.hbar()));
  }
}

void SplitOperatorStepper::refresh_potential_phase(double strength) {
  if (have_cache_ && strength == cached_strength_) return;
  const double half = 0.5 * dt_;
  const std::size_t n = grid_.size();
  if (potential_.kind() == Potential::Kind::kScalar) {
    const auto v = potential_.scalar_values();
    half_phase_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      half_phase_[i] = std::exp(Complex(0.0, -strength * v[i] * half / system_.hbar()));
    }
  } else {
    const std::size_t k = potential_.matrix_size();
    half_phase_.resize(n * k * k);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::MatrixXcd u = matrix_phase(strength * potential_.matrix_at(i), half, system_.hbar());
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
          half_phase_[i * k * k + r * k + c] =
              u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        }
      }
    }
  }
  cached_strength_ = strength;
  have_cache_ = true;
}

void SplitOperatorStepper::apply_potential_half(std::vector<Complex>& amps, std::size_t k) const {
  const std::size_t n = grid_.size();
  if (potential_.kind() == Potential::Kind::kScalar) {
    for (std::size_t c = 0; c < k; ++c) {
      Complex* plane = amps.data() + c * n;
      for (std::size_t i = 0; i < n; ++i) plane[i] *= half_phase_[i];
    }
    return;
  }
  std::vector<Complex> in(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) in[c] = amps[c * n + i];
    const Complex* u = half_phase_.data() + i * k * k;
    for (std::size_t r = 0; r < k; ++r) {
      Complex acc{0.0, 0.0};
      for (std::size_t c = 0; c < k; ++c) acc += u[r * k + c] * in[c];
      amps[r * n + i] = acc;
    }
  }
}

WaveFunction SplitOperatorStepper::step(const WaveFunction& psi) {
  check_compatible(psi, potential_, system_);
  const double strength = potential_.strength(psi.time() + 0.5 * dt_);
  const bool has_potential = strength != 0.0;
  if (has_potential) refresh_potential_phase(strength);

  const std::size_t n = grid_.size();
  const std::size_t k = psi.components();
  std::vector<Complex> amps(psi.amplitudes().begin(), psi.amplitudes().end());
  if (has_potential) apply_potential_half(amps, k);
  for (std::size_t c = 0; c < k; ++c) {
    std::span<Complex> plane(amps.data() + c * n, n);
    fft_.forward(plane);
    for (std::size_t i = 0; i < n; ++i) plane[i] *= kinetic_phase_[i];
    fft_.backward(plane);
  }
  if (has_potential) apply_potential_half(amps, k);

  // The propagator is unitary, so the flag carries over; the constructor
  // re-validates the norm to kNormalizationTolerance.
  return WaveFunction(psi.grid_ptr(), k, std::move(amps), psi.time() + dt_, psi.normalized());
}

WaveFunction step(const WaveFunction& psi, const Potential& v, const ParticleSystem& system,
                  double dt) {
  check_compatible(psi, v, system);
  SplitOperatorStepper stepper(psi.grid(), v, system, dt);
  return stepper.step(psi);
}

WaveFunctionHistory evolve(const WaveFunction& psi, const Potential& v,
                           const ParticleSystem& system, double t0, double t1,
                           const EvolutionParams& params) {
  check_compatible(psi, v, system);
  if (params.store_stride == 0) {
    throw Error(ErrorCode::kInvalidArgument, "store_stride must be >= 1");
  }
  WaveFunctionHistory history;
  history.interval = params.dt * static_cast<double>(params.store_stride);
  history.snapshots.push_back(psi.with_time(t0));
  const double span = t1 - t0;
  if (span == 0.0) return history;
  if (params.dt == 0.0 || !std::isfinite(params.dt) || (span > 0.0) != (params.dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dt must be non-zero with the sign of t1 - t0");
  }
  const double exact_steps = span / params.dt;
  const double rounded = std::round(exact_steps);
  if (std::abs(exact_steps - rounded) > 1e-9 * std::max(1.0, std::abs(rounded))) {
    throw Error(ErrorCode::kTimeGridMismatch, "t1 - t0 is not a whole number of steps");
  }
  if (rounded > static_cast<double>(params.max_steps)) {
    throw Error(ErrorCode::kStepBudgetExceeded,
                std::to_string(static_cast<long long>(rounded)) + " steps exceed the budget of " +
                    std::to_string(params.max_steps));
  }
  const auto steps = static_cast<std::size_t>(rounded);
  if (steps % params.store_stride != 0) {
    throw Error(ErrorCode::kTimeGridMismatch, "step count is not a multiple of store_stride");
  }
  history.snapshots.reserve(steps / params.store_stride + 1);

  SplitOperatorStepper stepper(psi.grid(), v, system, params.dt);
  WaveFunction current = history.snapshots.front();
  for (std::size_t s = 1; s <= steps; ++s) {
    // Restamp from the step index so round-off in the time tag does not accumulate.
    current = stepper.step(current).with_time(t0 + static_cast<double>(s) * params.dt);
    if (s % params.store_stride == 0) history.snapshots.push_back(current);
  }
  return history;
}

double energy(const WaveFunction& psi, const Potential& v, const ParticleSystem& system) {
  check_compatible(psi, v, system);
  const Grid& grid = psi.grid();
  const std::size_t n = grid.size();
  const std::size_t k = psi.components();
  const std::vector<double> t = kinetic_multiplier(grid, system);
  FourierTransform fft(grid);

  double kinetic = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<Complex> plane(psi.component(c).begin(), psi.component(c).end());
    fft.forward(plane);
    for (std::size_t i = 0; i < n; ++i) kinetic += t[i] * std::norm(plane[i]);
  }
  kinetic *= grid.cell_volume() / static_cast<double>(n);

  const double s = v.strength(psi.time());
  double pot = 0.0;
  if (s != 0.0) {
    const auto a = psi.amplitudes();
    if (v.kind() == Potential::Kind::kScalar) {
      const auto vals = v.scalar_values();
      for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) pot += vals[i] * std::norm(a[c * n + i]);
      }
    } else {
      const auto m = v.matrix_entries();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < k; ++r) {
          Complex row{0.0, 0.0};
          for (std::size_t c = 0; c < k; ++c) row += m[i * k * k + r * k + c] * a[c * n + i];
          pot += (std::conj(a[r * n + i]) * row).real();
        }
      }
    }
    pot *= s * grid.cell_volume();
  }
  return kinetic + pot;
}

}  // namespace bohm
