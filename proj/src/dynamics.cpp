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

#include "bohm/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "bohm/error.hpp"
#include "bohm/parallel.hpp"
#include "bohm/spectral.hpp"

namespace bohm {

std::string_view to_string(TerminationReason reason) {
  switch (reason) {
    case TerminationReason::kCompleted: return "Completed";
    case TerminationReason::kNodeEncountered: return "NodeEncountered";
    case TerminationReason::kLeftDomain: return "LeftDomain";
  }
  return "Unknown";
}

VelocityField velocity_field(const WaveFunction& psi, const ParticleSystem& system) {
  check_compatible(psi, system);
  const Grid& grid = psi.grid();
  const std::size_t n = grid.size();
  const std::size_t d = grid.dims();
  const std::size_t k = psi.components();

  std::vector<double> rho(n, 0.0);
  std::vector<std::vector<double>> numer(d, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    const auto plane = psi.component(c);
    const auto grad = spectral_gradient(grid, plane);
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] += std::norm(plane[i]);
      for (std::size_t j = 0; j < d; ++j) numer[j][i] += (std::conj(plane[i]) * grad[j][i]).imag();
    }
  }
  const double max_rho = *std::max_element(rho.begin(), rho.end());

  VelocityField out;
  out.grid = psi.grid_ptr();
  out.node_threshold = kNodeRelativeThreshold * max_rho;
  out.masked.assign(n, 0);
  out.v.assign(d, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (rho[i] <= out.node_threshold) {
      out.masked[i] = 1;
      continue;
    }
    for (std::size_t j = 0; j < d; ++j) {
      out.v[j][i] = system.hbar() / system.axis_mass(j) * numer[j][i] / rho[i];
    }
  }
  return out;
}

GuidingFrame::GuidingFrame(const WaveFunction& psi)
    : grid_(psi.grid_ptr()), components_(psi.components()), time_(psi.time()) {
  const std::size_t n = grid_->size();
  const std::size_t d = grid_->dims();
  data_.resize(components_ * (d + 1) * n);
  std::vector<double> rho(n, 0.0);
  for (std::size_t c = 0; c < components_; ++c) {
    const auto plane = psi.component(c);
    std::copy(plane.begin(), plane.end(), data_.begin() + static_cast<std::ptrdiff_t>(c * (d + 1) * n));
    const auto grad = spectral_gradient(*grid_, plane);
    for (std::size_t j = 0; j < d; ++j) {
      std::copy(grad[j].begin(), grad[j].end(),
                data_.begin() + static_cast<std::ptrdiff_t>((c * (d + 1) + 1 + j) * n));
    }
    for (std::size_t i = 0; i < n; ++i) rho[i] += std::norm(plane[i]);
  }
  max_density_ = *std::max_element(rho.begin(), rho.end());
}

GuidingFrame GuidingFrame::combine(std::span<const Complex> weights,
                                   std::span<const GuidingFrame* const> frames) {
  if (frames.empty() || weights.size() != frames.size()) {
    throw Error(ErrorCode::kInvalidArgument, "frame combination needs one weight per frame");
  }
  const GuidingFrame& first = *frames.front();
  GuidingFrame out;
  out.grid_ = first.grid_;
  out.components_ = first.components_;
  out.time_ = first.time_;
  out.data_.assign(first.data_.size(), Complex{});
  for (std::size_t a = 0; a < frames.size(); ++a) {
    if (frames[a]->data_.size() != out.data_.size() || !(*frames[a]->grid_ == *out.grid_)) {
      throw Error(ErrorCode::kGridMismatch, "combined frames live on different grids");
    }
    // Spelled out to avoid the NaN-recovery path of std::complex multiplication.
    const double wr = weights[a].real();
    const double wi = weights[a].imag();
    const Complex* src = frames[a]->data_.data();
    Complex* dst = out.data_.data();
    for (std::size_t i = 0; i < out.data_.size(); ++i) {
      const double sr = src[i].real();
      const double si = src[i].imag();
      dst[i] = Complex(dst[i].real() + wr * sr - wi * si, dst[i].imag() + wr * si + wi * sr);
    }
  }
  const std::size_t n = out.grid_->size();
  std::vector<double> rho(n, 0.0);
  for (std::size_t c = 0; c < out.components_; ++c) {
    const Complex* plane = out.plane(c, 0);
    for (std::size_t i = 0; i < n; ++i) rho[i] += std::norm(plane[i]);
  }
  out.max_density_ = *std::max_element(rho.begin(), rho.end());
  return out;
}

namespace {

// Combines interpolated Psi (values[c*(d+1)]) and gradients into v; false at a node.
bool combine_velocity(std::span<const Complex> values, std::size_t k, std::size_t d,
                      double threshold, const ParticleSystem& system, std::span<double> out) {
  double rho = 0.0;
  for (std::size_t c = 0; c < k; ++c) rho += std::norm(values[c * (d + 1)]);
  if (!(rho >= threshold) || rho == 0.0) return false;
  for (std::size_t j = 0; j < d; ++j) {
    double num = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      num += (std::conj(values[c * (d + 1)]) * values[c * (d + 1) + 1 + j]).imag();
    }
    out[j] = system.hbar() / system.axis_mass(j) * num / rho;
  }
  return true;
}

void accumulate_frame(const GuidingFrame& frame, const GridStencil& stencil, double weight,
                      std::span<Complex> values) {
  const std::size_t k = frame.components();
  const std::size_t fields = frame.grid().dims() + 1;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < fields; ++f) {
      values[c * fields + f] += weight * apply_stencil(stencil, frame.plane(c, f));
    }
  }
}

}  // namespace

std::vector<double> velocity_at(const GuidingFrame& frame, std::span<const double> q,
                                const ParticleSystem& system) {
  const std::size_t d = frame.grid().dims();
  if (q.size() != d || system.total_dims() != d) {
    throw Error(ErrorCode::kGridMismatch, "configuration dimension does not match the grid");
  }
  GridStencil stencil;
  build_stencil(frame.grid(), q, stencil);
  std::vector<Complex> values(frame.components() * (d + 1), Complex{});
  accumulate_frame(frame, stencil, 1.0, values);
  std::vector<double> v(d);
  if (!combine_velocity(values, frame.components(), d,
                        kNodeRelativeThreshold * frame.max_density(), system, v)) {
    throw Error(ErrorCode::kNodeEncountered, "interpolated density below the node guard");
  }
  return v;
}

std::vector<double> velocity_at(const WaveFunction& psi, const Configuration& q,
                                const ParticleSystem& system) {
  check_compatible(psi, system);
  return velocity_at(GuidingFrame(psi), q.coordinates, system);
}

GuidingHistory::GuidingHistory(const WaveFunctionHistory& history, std::size_t threads,
                               PhaseAlignment alignment)
    : interval_(history.interval) {
  if (history.snapshots.empty()) throw Error(ErrorCode::kInvalidArgument, "empty history");
  const auto& snaps = history.snapshots;
  std::vector<Complex> phase(snaps.size(), Complex(1.0));
  if (alignment == PhaseAlignment::kGlobal) {
    for (std::size_t i = 1; i < snaps.size(); ++i) {
      const Complex z = inner_product(snaps[i], snaps[i - 1]);
      phase[i] = std::abs(z) > 0.0 ? phase[i - 1] * z / std::abs(z) : phase[i - 1];
    }
  }
  std::vector<std::unique_ptr<GuidingFrame>> built(snaps.size());
  parallel_for_chunks(built.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      built[i] = std::make_unique<GuidingFrame>(phase[i] == Complex(1.0) ? snaps[i] : scaled(snaps[i], phase[i]));
    }
  });
  frames_.reserve(built.size());
  for (auto& f : built) frames_.push_back(std::move(*f));
}

GuidingHistory::GuidingHistory(std::vector<GuidingFrame> frames, double interval)
    : frames_(std::move(frames)), interval_(interval) {
  if (frames_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty history");
  if (frames_.size() > 1 && !(std::abs(interval_) > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "snapshot interval must be non-zero");
  }
}

bool GuidingHistory::velocity(double t, std::span<const double> q, const ParticleSystem& system,
                              std::span<double> out, VelocityWorkspace& ws) const {
  const std::size_t d = grid().dims();
  const std::size_t k = frames_.front().components();
  const TimeStencil ts = time_stencil(start_time(), interval_, frames_.size(), t);
  build_stencil(grid(), q, ws.stencil);
  ws.values.assign(k * (d + 1), Complex{});
  double max_rho = 0.0;
  for (std::size_t a = 0; a < ts.size; ++a) {
    const GuidingFrame& frame = frames_[ts.index[a]];
    accumulate_frame(frame, ws.stencil, ts.weight[a], ws.values);
    max_rho = std::max(max_rho, frame.max_density());
  }
  return combine_velocity(ws.values, k, d, kNodeRelativeThreshold * max_rho, system, out);
}

namespace {

struct Rk4Scratch {
  VelocityWorkspace ws;
  std::vector<double> k1, k2, k3, k4, y;
  explicit Rk4Scratch(std::size_t d) : k1(d), k2(d), k3(d), k4(d), y(d) {}
};

bool rk4_step(const GuidingHistory& h, const ParticleSystem& system, double t, double dt,
              std::vector<double>& q, Rk4Scratch& s) {
  const std::size_t d = q.size();
  if (!h.velocity(t, q, system, s.k1, s.ws)) return false;
  for (std::size_t j = 0; j < d; ++j) s.y[j] = q[j] + 0.5 * dt * s.k1[j];
  if (!h.velocity(t + 0.5 * dt, s.y, system, s.k2, s.ws)) return false;
  for (std::size_t j = 0; j < d; ++j) s.y[j] = q[j] + 0.5 * dt * s.k2[j];
  if (!h.velocity(t + 0.5 * dt, s.y, system, s.k3, s.ws)) return false;
  for (std::size_t j = 0; j < d; ++j) s.y[j] = q[j] + dt * s.k3[j];
  if (!h.velocity(t + dt, s.y, system, s.k4, s.ws)) return false;
  for (std::size_t j = 0; j < d; ++j) {
    q[j] += dt / 6.0 * (s.k1[j] + 2.0 * s.k2[j] + 2.0 * s.k3[j] + s.k4[j]);
  }
  return true;
}

struct StepPlan {
  double t_start = 0.0;
  double dt = 0.0;
  std::size_t steps = 0;
};

StepPlan plan_steps(const GuidingHistory& h, const TrajectoryOptions& options) {
  if (!(std::abs(options.dt) > 0.0) || !std::isfinite(options.dt) || options.output_stride == 0) {
    throw Error(ErrorCode::kInvalidArgument, "trajectory dt must be finite and non-zero");
  }
  StepPlan plan;
  plan.t_start = h.start_time();
  plan.dt = options.dt;
  if (h.size() > 1) {
    // Either dt divides the interval or the interval divides dt.
    const double ratio = std::abs(h.interval() / options.dt);
    const double r = ratio >= 1.0 ? ratio : 1.0 / ratio;
    if (std::abs(r - std::round(r)) > 1e-9 * r) {
      throw Error(ErrorCode::kTimeGridMismatch, "trajectory dt and snapshot interval are incommensurate");
    }
  }
  const double t_end = std::isnan(options.t_end) ? h.end_time() : options.t_end;
  const double lo = std::min(h.start_time(), h.end_time());
  const double hi = std::max(h.start_time(), h.end_time());
  if (t_end < lo - 1e-9 || t_end > hi + 1e-9) {
    throw Error(ErrorCode::kTimeGridMismatch, "integration end lies outside the history");
  }
  const double exact = (t_end - plan.t_start) / options.dt;
  if (exact < -1e-9 || std::abs(exact - std::round(exact)) > 1e-9 * std::max(1.0, exact)) {
    throw Error(ErrorCode::kTimeGridMismatch, "integration span is not a whole number of steps");
  }
  plan.steps = static_cast<std::size_t>(std::llround(std::max(0.0, exact)));
  return plan;
}

bool inside(const Grid& grid, std::span<const double> q) { return grid.contains(q); }

// Integrates members [begin, end) with time as the outer loop, so the
// snapshots near the current time stay hot in cache across members.
void integrate_block(const std::vector<std::vector<double>>& starts, std::size_t begin,
                     std::size_t end, const GuidingHistory& h, const ParticleSystem& system,
                     const TrajectoryOptions& options, const StepPlan& plan,
                     std::vector<Trajectory>& out) {
  const Grid& grid = h.grid();
  const std::size_t d = grid.dims();
  Rk4Scratch scratch(d);
  std::vector<std::vector<double>> state(end - begin);
  std::vector<std::uint8_t> active(end - begin, 1);
  for (std::size_t m = begin; m < end; ++m) {
    Trajectory& tr = out[m];
    tr.dims = d;
    tr.reason = TerminationReason::kCompleted;
    tr.times.reserve(plan.steps / options.output_stride + 2);
    tr.coordinates.reserve((plan.steps / options.output_stride + 2) * d);
    state[m - begin] = starts[m];
    tr.times.push_back(plan.t_start);
    tr.coordinates.insert(tr.coordinates.end(), starts[m].begin(), starts[m].end());
  }
  for (std::size_t s = 0; s < plan.steps; ++s) {
    const double t = plan.t_start + static_cast<double>(s) * plan.dt;
    const double t_next = plan.t_start + static_cast<double>(s + 1) * plan.dt;
    const bool store = (s + 1) % options.output_stride == 0 || s + 1 == plan.steps;
    for (std::size_t m = begin; m < end; ++m) {
      if (!active[m - begin]) continue;
      std::vector<double>& q = state[m - begin];
      Trajectory& tr = out[m];
      if (!rk4_step(h, system, t, plan.dt, q, scratch)) {
        tr.reason = TerminationReason::kNodeEncountered;
        active[m - begin] = 0;
        continue;
      }
      if (!inside(grid, q)) {
        if (options.boundary == BoundaryPolicy::kTerminate) {
          tr.reason = TerminationReason::kLeftDomain;
          active[m - begin] = 0;
          continue;
        }
        for (std::size_t j = 0; j < d; ++j) q[j] = grid.wrap(j, q[j]);
      }
      if (store) {
        tr.times.push_back(t_next);
        tr.coordinates.insert(tr.coordinates.end(), q.begin(), q.end());
      }
    }
  }
}

}  // namespace

Trajectory integrate_trajectory(const Configuration& q0, const GuidingHistory& history,
                                const ParticleSystem& system, const TrajectoryOptions& options) {
  Ensemble single;
  single.dims = q0.coordinates.size();
  single.coordinates = q0.coordinates;
  single.time = q0.time;
  return integrate_ensemble(single, history, system, options, 1).front();
}

Trajectory integrate_trajectory(const Configuration& q0, const WaveFunctionHistory& history,
                                const ParticleSystem& system, const TrajectoryOptions& options) {
  return integrate_trajectory(q0, GuidingHistory(history), system, options);
}

std::vector<Trajectory> integrate_ensemble(const Ensemble& ensemble, const GuidingHistory& history,
                                           const ParticleSystem& system,
                                           const TrajectoryOptions& options, std::size_t threads) {
  const Grid& grid = history.grid();
  if (ensemble.dims != grid.dims() || system.total_dims() != grid.dims()) {
    throw Error(ErrorCode::kGridMismatch, "ensemble dimension does not match the grid");
  }
  if (std::abs(ensemble.time - history.start_time()) > 1e-9 * std::max(1.0, std::abs(ensemble.time))) {
    throw Error(ErrorCode::kTimeGridMismatch, "ensemble time differs from the history start");
  }
  const StepPlan plan = plan_steps(history, options);
  std::vector<std::vector<double>> starts(ensemble.size());
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    auto p = ensemble.position(m);
    starts[m].assign(p.begin(), p.end());
    for (std::size_t j = 0; j < grid.dims(); ++j) starts[m][j] = grid.wrap(j, starts[m][j]);
  }
  std::vector<Trajectory> out(ensemble.size());
  parallel_for_chunks(ensemble.size(), threads, [&](std::size_t begin, std::size_t end) {
    integrate_block(starts, begin, end, history, system, options, plan, out);
  });
  for (Trajectory& tr : out) tr.seed = ensemble.seed;
  return out;
}

Ensemble final_ensemble(const std::vector<Trajectory>& trajectories, double time) {
  Ensemble e;
  e.time = time;
  for (const Trajectory& tr : trajectories) {
    if (tr.reason != TerminationReason::kCompleted) continue;
    e.dims = tr.dims;
    auto p = tr.final_position();
    e.coordinates.insert(e.coordinates.end(), p.begin(), p.end());
  }
  return e;
}

}  // namespace bohm
