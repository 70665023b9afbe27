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

#include "bohm/wavefunction.hpp"

#include <cmath>
#include <string>

#include "bohm/error.hpp"
#include "bohm/particles.hpp"

namespace bohm {

ParticleSystem::ParticleSystem(std::vector<Particle> particles, double hbar)
    : particles_(std::move(particles)), hbar_(hbar) {
  if (particles_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "particle system is empty");
  }
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
    throw Error(ErrorCode::kInvalidArgument, "hbar must be positive");
  }
  for (std::size_t p = 0; p < particles_.size(); ++p) {
    const Particle& part = particles_[p];
    if (!(part.mass > 0.0) || !std::isfinite(part.mass)) {
      throw Error(ErrorCode::kInvalidArgument, "particle " + std::to_string(p) + " has mass <= 0");
    }
    if (part.dims == 0) {
      throw Error(ErrorCode::kInvalidArgument, "particle " + std::to_string(p) + " has no dimensions");
    }
    for (std::size_t j = 0; j < part.dims; ++j) {
      axis_mass_.push_back(part.mass);
      axis_owner_.push_back(p);
    }
    spin_components_ *= part.twice_spin + 1;
  }
}

ParticleSystem ParticleSystem::single(std::size_t dims, double mass, unsigned twice_spin,
                                      double hbar) {
  return ParticleSystem({Particle{mass, dims, twice_spin}}, hbar);
}

namespace {

double raw_norm_squared(std::span<const Complex> amps, std::size_t points, std::size_t comps,
                        double cell) {
  double sum = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    double local = 0.0;
    for (std::size_t c = 0; c < comps; ++c) local += std::norm(amps[c * points + i]);
    sum += local;
  }
  return sum * cell;
}

}  // namespace

WaveFunction::WaveFunction(Grid grid, std::size_t components, std::vector<Complex> amplitudes,
                           double time, bool normalized)
    : WaveFunction(std::make_shared<const Grid>(std::move(grid)), components,
                   std::move(amplitudes), time, normalized) {}

WaveFunction::WaveFunction(std::shared_ptr<const Grid> grid, std::size_t components,
                           std::vector<Complex> amplitudes, double time, bool normalized)
    : grid_(std::move(grid)),
      components_(components),
      amplitudes_(std::move(amplitudes)),
      time_(time),
      normalized_(normalized) {
  if (!grid_ || components_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "wave function needs a grid and k >= 1");
  }
  if (amplitudes_.size() != components_ * grid_->size()) {
    throw Error(ErrorCode::kGridMismatch, "amplitude count does not match grid size times k");
  }
  for (const Complex& z : amplitudes_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::kNonFinite, "wave function has a non-finite amplitude");
    }
  }
  if (normalized_) {
    const double n2 = raw_norm_squared(amplitudes_, grid_->size(), components_, grid_->cell_volume());
    if (std::abs(n2 - 1.0) > kNormalizationTolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "wave function flagged normalized has norm^2 " + std::to_string(n2));
    }
  }
}

WaveFunction WaveFunction::sample(const Grid& grid,
                                  const std::function<Complex(std::span<const double>)>& f,
                                  double time) {
  const Complex one{1.0, 0.0};
  return sample_spinor(grid, f, std::span<const Complex>(&one, 1), time);
}

WaveFunction WaveFunction::sample_spinor(const Grid& grid,
                                         const std::function<Complex(std::span<const double>)>& f,
                                         std::span<const Complex> spinor, double time) {
  const std::size_t n = grid.size();
  const std::size_t k = spinor.size();
  std::vector<Complex> amps(n * k);
  std::vector<double> q(grid.dims());
  for (std::size_t i = 0; i < n; ++i) {
    grid.point(i, q);
    const Complex value = f(q);
    for (std::size_t c = 0; c < k; ++c) amps[c * n + i] = value * spinor[c];
  }
  return WaveFunction(grid, k, std::move(amps), time, false);
}

WaveFunction WaveFunction::with_time(double t) const& {
  return WaveFunction(grid_, components_, amplitudes_, t, normalized_);
}

WaveFunction WaveFunction::with_time(double t) && {
  WaveFunction out = std::move(*this);
  out.time_ = t;
  return out;
}

void require_same_grid(const WaveFunction& a, const WaveFunction& b) {
  if (a.components() != b.components() ||
      (a.grid_ptr() != b.grid_ptr() && a.grid() != b.grid())) {
    throw Error(ErrorCode::kGridMismatch, "wave functions live on different grids or spin spaces");
  }
}

Complex inner_product(const WaveFunction& phi, const WaveFunction& psi) {
  require_same_grid(phi, psi);
  const std::size_t n = psi.points();
  const std::size_t k = psi.components();
  const auto a = phi.amplitudes();
  const auto b = psi.amplitudes();
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    Complex local{0.0, 0.0};
    for (std::size_t c = 0; c < k; ++c) local += std::conj(a[c * n + i]) * b[c * n + i];
    sum += local;
  }
  return sum * psi.grid().cell_volume();
}

double norm_squared(const WaveFunction& psi) {
  return raw_norm_squared(psi.amplitudes(), psi.points(), psi.components(),
                          psi.grid().cell_volume());
}

double norm(const WaveFunction& psi) { return std::sqrt(norm_squared(psi)); }

WaveFunction normalize(const WaveFunction& psi) {
  const double nrm = norm(psi);
  if (!(nrm >= 1e-300)) {
    throw Error(ErrorCode::kZeroNorm, "cannot normalize a field with norm " + std::to_string(nrm));
  }
  std::vector<Complex> amps(psi.amplitudes().begin(), psi.amplitudes().end());
  const double inv = 1.0 / nrm;
  for (Complex& z : amps) z *= inv;
  return WaveFunction(psi.grid_ptr(), psi.components(), std::move(amps), psi.time(), true);
}

DensityField density(const WaveFunction& psi) {
  const std::size_t n = psi.points();
  const std::size_t k = psi.components();
  const auto amps = psi.amplitudes();
  DensityField out;
  out.grid = psi.grid_ptr();
  out.rho.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double local = 0.0;
    for (std::size_t c = 0; c < k; ++c) local += std::norm(amps[c * n + i]);
    out.rho[i] = local;
  }
  return out;
}

double total_mass(const DensityField& field) {
  double sum = 0.0;
  for (double r : field.rho) sum += r;
  return sum * field.grid->cell_volume();
}

WaveFunction linear_combination(Complex a, const WaveFunction& phi, Complex b,
                                const WaveFunction& psi) {
  require_same_grid(phi, psi);
  const auto x = phi.amplitudes();
  const auto y = psi.amplitudes();
  std::vector<Complex> amps(x.size());
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = a * x[i] + b * y[i];
  return WaveFunction(psi.grid_ptr(), psi.components(), std::move(amps), psi.time(), false);
}

WaveFunction scaled(const WaveFunction& psi, Complex factor) {
  std::vector<Complex> amps(psi.amplitudes().begin(), psi.amplitudes().end());
  for (Complex& z : amps) z *= factor;
  return WaveFunction(psi.grid_ptr(), psi.components(), std::move(amps), psi.time(), false);
}

WaveFunction tensor_product(const WaveFunction& left, const WaveFunction& right) {
  if (left.components() != 1 || right.components() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "tensor_product expects scalar wave functions");
  }
  std::vector<AxisSpec> axes;
  for (std::size_t j = 0; j < left.grid().dims(); ++j) axes.push_back(left.grid().axis(j));
  for (std::size_t j = 0; j < right.grid().dims(); ++j) axes.push_back(right.grid().axis(j));
  Grid grid(axes);
  const auto a = left.amplitudes();
  const auto b = right.amplitudes();
  std::vector<Complex> amps(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) amps[i * b.size() + j] = a[i] * b[j];
  }
  return WaveFunction(std::move(grid), 1, std::move(amps), left.time(), false);
}

double fidelity(const WaveFunction& phi, const WaveFunction& psi) {
  const double denom = norm(phi) * norm(psi);
  if (!(denom > 0.0)) throw Error(ErrorCode::kZeroNorm, "fidelity of a zero field");
  return std::abs(inner_product(phi, psi)) / denom;
}

}  // namespace bohm
