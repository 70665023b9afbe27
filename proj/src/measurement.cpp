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

#include "bohm/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bohm/equilibrium.hpp"
#include "bohm/error.hpp"
#include "bohm/interpolation.hpp"
#include "bohm/parallel.hpp"
#include "bohm/rng.hpp"
#include "bohm/spectral.hpp"
#include "bohm/statistics.hpp"

namespace bohm {
namespace {

constexpr double kOrthonormalTolerance = 1e-10;
constexpr double kOverlapGate = 1e-10;

void require_1d(const WaveFunction& psi, const char* what) {
  if (psi.empty() || psi.grid().dims() != 1 || psi.components() != 1) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be a scalar 1D wave function");
  }
}

void check_orthonormal(const std::vector<WaveFunction>& basis) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i; j < basis.size(); ++j) {
      const Complex ip = inner_product(basis[i], basis[j]);
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(ip - expected) > kOrthonormalTolerance) {
        throw Error(ErrorCode::kNonOrthonormalBasis,
                    "eigenstates " + std::to_string(i) + " and " + std::to_string(j) +
                        " are not orthonormal");
      }
    }
  }
}

// Exact free propagation of a 1D packet: multiply by exp(-i hbar k^2 t / 2m).
WaveFunction free_flight(const WaveFunction& phi, double mass, double hbar, double t) {
  const Grid& grid = phi.grid();
  FourierTransform fft(grid);
  std::vector<Complex> work(phi.amplitudes().begin(), phi.amplitudes().end());
  fft.forward(work);
  const auto& k = grid.wavenumbers(0);
  for (std::size_t i = 0; i < work.size(); ++i) {
    work[i] *= std::exp(Complex(0.0, -hbar * k[i] * k[i] * t / (2.0 * mass)));
  }
  fft.backward(work);
  return WaveFunction(phi.grid_ptr(), 1, std::move(work), phi.time() + t, phi.normalized());
}

WaveFunction kicked_pointer(const MeasurementSetup& s, double alpha) {
  const Grid& g = *s.y_grid;
  const double p = s.pointer_mass * s.coupling * alpha;
  std::vector<Complex> amps(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    amps[i] = s.pointer.amplitudes()[i] * std::exp(Complex(0.0, p * g.coordinate(0, i) / s.hbar));
  }
  return WaveFunction(s.y_grid, 1, std::move(amps), 0.0, s.pointer.normalized());
}

WaveFunction superpose(const std::vector<Complex>& weights, const std::vector<WaveFunction>& parts,
                       double time) {
  const std::size_t n = parts.front().amplitudes().size();
  std::vector<Complex> out(n, Complex{});
  for (std::size_t a = 0; a < parts.size(); ++a) {
    const auto src = parts[a].amplitudes();
    for (std::size_t i = 0; i < n; ++i) out[i] += weights[a] * src[i];
  }
  return WaveFunction(parts.front().grid_ptr(), parts.front().components(), std::move(out), time);
}

// Mass of a 1D density (given per grid point) inside [lo, hi], by the same
// piecewise-linear marginal used for support intervals.
double mass_inside(const Grid& g, std::span<const double> rho, const Interval& iv) {
  double total = 0.0;
  for (double r : rho) total += r;
  if (!(total > 0.0)) return 0.0;
  GridMarginalCdf cdf(g, rho, 0);
  return (cdf(iv.hi) - cdf(iv.lo)) * total * g.cell_volume();
}

std::vector<double> y_marginal(const WaveFunction& joint) {
  const Grid& g = joint.grid();
  const std::size_t ny = g.extent(1);
  std::vector<double> out(ny, 0.0);
  const double dx = g.spacing(0);
  for (std::size_t c = 0; c < joint.components(); ++c) {
    const auto plane = joint.component(c);
    for (std::size_t i = 0; i < g.size(); ++i) out[i % ny] += std::norm(plane[i]) * dx;
  }
  return out;
}

std::shared_ptr<const Grid> axis_grid(const Grid& g, std::size_t j) {
  const AxisSpec spec = g.axis(j);
  return std::make_shared<const Grid>(std::span<const AxisSpec>(&spec, 1));
}

}  // namespace

double pointer_width(const WaveFunction& phi) {
  require_1d(phi, "pointer state");
  const Grid& g = phi.grid();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = std::norm(phi.amplitudes()[i]);
    const double y = g.coordinate(0, i);
    m0 += r;
    m1 += r * y;
    m2 += r * y * y;
  }
  if (!(m0 > 0.0)) throw Error(ErrorCode::kZeroNorm, "pointer state has zero norm");
  const double mean = m1 / m0;
  return std::sqrt(std::max(0.0, m2 / m0 - mean * mean));
}

void validate(const MeasurementSetup& s) {
  if (!s.x_grid || !s.y_grid || s.x_grid->dims() != 1 || s.y_grid->dims() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "measurement needs 1D system and pointer grids");
  }
  const std::size_t k = s.eigenvalues.size();
  if (k < 1 || s.eigenstates.size() != k || s.coefficients.size() != k) {
    throw Error(ErrorCode::kInvalidArgument, "eigenvalues, eigenstates and coefficients differ in length");
  }
  for (const auto& e : s.eigenstates) {
    require_1d(e, "eigenstate");
    require_same_grid(e, WaveFunction(s.x_grid, 1, std::vector<Complex>(s.x_grid->size())));
  }
  require_1d(s.pointer, "pointer state");
  if (!(s.pointer.grid() == *s.y_grid)) throw Error(ErrorCode::kGridMismatch, "pointer is not on the y grid");
  if (std::abs(norm_squared(s.pointer) - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "pointer ready state is not normalized");
  }
  double mass = 0.0;
  for (const Complex& c : s.coefficients) mass += std::norm(c);
  if (std::abs(mass - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "coefficients must satisfy sum |c|^2 = 1");
  }
  for (double v : {s.coupling, s.duration, s.pointer_mass, s.system_mass, s.hbar, s.snapshot_dt,
                   s.trajectory_dt}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "coupling, duration, masses, hbar and snapshot_dt must be positive");
    }
  }
  const double steps = s.duration / s.snapshot_dt;
  if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
    throw Error(ErrorCode::kTimeGridMismatch, "snapshot_dt does not divide the coupling duration");
  }
  const double sub = s.snapshot_dt / s.trajectory_dt;
  if (sub < 1.0 - 1e-9 || std::abs(sub - std::round(sub)) > 1e-9 * sub) {
    throw Error(ErrorCode::kTimeGridMismatch, "trajectory_dt does not divide snapshot_dt");
  }
  check_orthonormal(s.eigenstates);

  const double width = pointer_width(s.pointer);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double gap = std::abs(s.eigenvalues[i] - s.eigenvalues[j]);
      if (gap == 0.0) throw Error(ErrorCode::kInvalidArgument, "eigenvalues must be distinct");
      if (s.coupling * s.duration * gap < kSeparationWidths * width) {
        throw Error(ErrorCode::kSeparationGateFailed,
                    "pointer separation is below 8 ready-state widths");
      }
    }
  }
}

Interval support_interval(const WaveFunction& phi, double tail) {
  require_1d(phi, "support state");
  const Grid& g = phi.grid();
  std::vector<double> rho(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rho[i] = std::norm(phi.amplitudes()[i]);
  GridMarginalCdf cdf(g, rho, 0);
  return Interval{cdf.quantile(0.5 * tail), cdf.quantile(1.0 - 0.5 * tail)};
}

ConditionalSlice conditional_wavefunction(const WaveFunction& joint, std::span<const double> y) {
  const Grid& g = joint.grid();
  const std::size_t d = g.dims();
  const std::size_t e = y.size();
  if (e == 0 || e >= d) throw Error(ErrorCode::kInvalidArgument, "environment must be a proper subset of the axes");
  std::vector<AxisSpec> sys_axes, env_axes;
  for (std::size_t j = 0; j < d; ++j) (j < d - e ? sys_axes : env_axes).push_back(g.axis(j));
  auto sys_grid = std::make_shared<const Grid>(std::span<const AxisSpec>(sys_axes));
  const Grid env_grid(env_axes);

  GridStencil stencil;
  build_stencil(env_grid, y, stencil);
  const std::size_t env_size = env_grid.size();
  const std::size_t n = sys_grid->size();
  const std::size_t k = joint.components();
  std::vector<Complex> out(k * n);
  for (std::size_t c = 0; c < k; ++c) {
    const Complex* plane = joint.component(c).data();
    for (std::size_t i = 0; i < n; ++i) out[c * n + i] = apply_stencil(stencil, plane + i * env_size);
  }
  double sum = 0.0;
  for (const Complex& z : out) sum += std::norm(z);
  const double nrm = std::sqrt(sum * sys_grid->cell_volume());
  if (!(nrm >= 1e-150)) {
    throw Error(ErrorCode::kZeroNorm, "conditional wave function vanishes at this environment configuration");
  }
  ConditionalSlice result{WaveFunction(std::move(sys_grid), k, std::move(out), joint.time()), nrm};
  return result;
}

ConditionalSlice conditional_wavefunction(const WaveFunction& joint, double y) {
  return conditional_wavefunction(joint, std::span<const double>(&y, 1));
}

std::vector<WaveFunction> pointer_branches(const MeasurementSetup& s, double t) {
  std::vector<WaveFunction> out;
  out.reserve(s.eigenvalues.size());
  for (double alpha : s.eigenvalues) {
    out.push_back(t == 0.0 ? s.pointer
                           : free_flight(kicked_pointer(s, alpha), s.pointer_mass, s.hbar, t));
  }
  return out;
}

namespace {

std::vector<Interval> branch_supports(const std::vector<WaveFunction>& branches) {
  std::vector<Interval> out;
  for (const auto& b : branches) out.push_back(support_interval(b));
  return out;
}

void separation_gate(const std::vector<WaveFunction>& branches, const std::vector<Interval>& supports) {
  for (std::size_t a = 0; a < branches.size(); ++a) {
    std::vector<double> rho(branches[a].points());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(branches[a].amplitudes()[i]);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      if (a == b) continue;
      const bool disjoint = supports[a].hi < supports[b].lo || supports[b].hi < supports[a].lo;
      if (!disjoint || mass_inside(branches[a].grid(), rho, supports[b]) > kOverlapGate) {
        throw Error(ErrorCode::kSeparationGateFailed, "pointer branches overlap at the end of the coupling");
      }
    }
  }
}

}  // namespace

WaveFunction premeasurement_unitary(const MeasurementSetup& s, double t) {
  validate(s);
  if (t < 0.0 || t > s.duration * (1 + 1e-12)) {
    throw Error(ErrorCode::kInvalidArgument, "time must lie in [0, duration]");
  }
  const auto branches = pointer_branches(s, t);
  if (t >= s.duration * (1 - 1e-12)) separation_gate(branches, branch_supports(branches));
  std::vector<WaveFunction> parts;
  for (std::size_t a = 0; a < branches.size(); ++a) parts.push_back(tensor_product(s.eigenstates[a], branches[a]));
  return normalize(superpose(s.coefficients, parts, t));
}

PvmResult pvm_expectation(const WaveFunction& psi, const std::vector<WaveFunction>& eigenstates,
                          std::span<const double> eigenvalues) {
  if (eigenvalues.size() != eigenstates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "eigenvalue and eigenstate counts differ");
  }
  check_orthonormal(eigenstates);
  PvmResult r;
  for (std::size_t a = 0; a < eigenstates.size(); ++a) {
    const double p = std::norm(inner_product(eigenstates[a], psi));
    r.probabilities.push_back(p);
    r.expectation += eigenvalues[a] * p;
  }
  return r;
}

MeasurementEngine::MeasurementEngine(MeasurementSetup setup) : setup_(std::move(setup)) {
  validate(setup_);
  const auto steps = static_cast<std::size_t>(std::llround(setup_.duration / setup_.snapshot_dt));
  std::vector<WaveFunction> kicked;
  for (double alpha : setup_.eigenvalues) kicked.push_back(kicked_pointer(setup_, alpha));
  branch_history_.resize(kicked.size());
  for (std::size_t a = 0; a < kicked.size(); ++a) {
    auto& h = branch_history_[a];
    h.interval = setup_.snapshot_dt;
    for (std::size_t j = 0; j <= steps; ++j) {
      const double t = static_cast<double>(j) * setup_.snapshot_dt;
      h.snapshots.push_back(free_flight(kicked[a], setup_.pointer_mass, setup_.hbar, t).with_time(t));
    }
  }
  branch_frames_.resize(steps + 1);
  for (std::size_t j = 0; j <= steps; ++j) {
    for (const auto& h : branch_history_) branch_frames_[j].emplace_back(h.snapshots[j]);
  }
  std::vector<WaveFunction> final_branches;
  for (const auto& h : branch_history_) final_branches.push_back(h.snapshots.back());
  supports_ = branch_supports(final_branches);
  separation_gate(final_branches, supports_);

  std::vector<WaveFunction> start, end;
  for (std::size_t a = 0; a < kicked.size(); ++a) {
    start.push_back(tensor_product(setup_.eigenstates[a], setup_.pointer));
    end.push_back(tensor_product(setup_.eigenstates[a], final_branches[a]));
  }
  initial_ = normalize(superpose(setup_.coefficients, start, 0.0));
  final_state_ = normalize(superpose(setup_.coefficients, end, setup_.duration));
}

CollapseResult MeasurementEngine::run(std::uint64_t seed) const {
  const MeasurementSetup& s = setup_;
  const Ensemble start = sample_density(initial_, 1, seed);
  const double x0 = start.position(0)[0];
  const double y0 = start.position(0)[1];

  // The system has no dynamics of its own during the coupling, so X stays
  // put and Y is guided by the conditional pointer wave function Psi(X, y, t).
  GridStencil stencil;
  build_stencil(*s.x_grid, std::span<const double>(&x0, 1), stencil);
  std::vector<Complex> weights(s.eigenvalues.size());
  for (std::size_t a = 0; a < weights.size(); ++a) {
    weights[a] = s.coefficients[a] * apply_stencil(stencil, s.eigenstates[a].amplitudes().data());
  }
  std::vector<GuidingFrame> frames;
  frames.reserve(branch_frames_.size());
  std::vector<const GuidingFrame*> parts(weights.size());
  for (const auto& row : branch_frames_) {
    for (std::size_t a = 0; a < row.size(); ++a) parts[a] = &row[a];
    frames.push_back(GuidingFrame::combine(weights, parts));
  }
  const GuidingHistory pointer_history(std::move(frames), s.snapshot_dt);
  const ParticleSystem pointer_system = ParticleSystem::single(1, s.pointer_mass, 0, s.hbar);
  TrajectoryOptions opts;
  opts.dt = s.trajectory_dt;
  opts.output_stride = static_cast<std::size_t>(std::llround(s.snapshot_dt / s.trajectory_dt));
  const Trajectory y_path = integrate_trajectory({{y0}, 0.0}, pointer_history, pointer_system, opts);
  if (y_path.reason != TerminationReason::kCompleted) {
    throw Error(ErrorCode::kNodeEncountered, "pointer trajectory hit a node of the conditional wave function");
  }
  const double y_final = s.y_grid->wrap(0, y_path.final_position()[0]);

  std::size_t outcome = supports_.size();
  for (std::size_t a = 0; a < supports_.size(); ++a) {
    if (supports_[a].contains(y_final)) {
      if (outcome != supports_.size()) throw Error(ErrorCode::kAmbiguousPointer, "pointer lies in two supports");
      outcome = a;
    }
  }
  if (outcome == supports_.size()) {
    throw Error(ErrorCode::kAmbiguousPointer, "pointer position lies in no branch support");
  }

  const ConditionalSlice slice = conditional_wavefunction(final_state_, y_final);
  CollapseResult r;
  r.outcome = outcome;
  r.outcome_value = s.eigenvalues[outcome];
  r.pointer_position = y_final;
  r.system_position = x0;
  r.collapsed = normalize(slice.slice);
  r.normalization = slice.norm;
  r.fidelity = std::abs(inner_product(s.eigenstates[outcome], r.collapsed));
  if (!(r.fidelity > kCollapseFidelity)) {
    throw Error(ErrorCode::kFidelityGateFailed, "collapsed wave function does not match the registered eigenstate");
  }
  for (std::size_t a = 0; a < s.coefficients.size(); ++a) {
    if (a != outcome) r.discarded_mass += std::norm(s.coefficients[a]);
  }
  r.seed = seed;
  r.trajectory.dims = 2;
  r.trajectory.times = y_path.times;
  r.trajectory.reason = y_path.reason;
  r.trajectory.seed = seed;
  r.trajectory.scenario = "measurement";
  for (std::size_t i = 0; i < y_path.sample_count(); ++i) {
    r.trajectory.coordinates.push_back(x0);
    r.trajectory.coordinates.push_back(y_path.sample(i)[0]);
  }
  return r;
}

std::shared_ptr<const MeasurementEngine::PostHistories> MeasurementEngine::post_histories(
    std::size_t outcome, std::size_t steps, double dt, std::size_t stride) const {
  const auto key = std::make_tuple(outcome, steps, dt, stride);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = post_cache_.find(key);
    if (it != post_cache_.end()) return it->second;
  }
  const MeasurementSetup& s = setup_;
  const ParticleSystem joint_system({Particle{s.system_mass, 1}, Particle{s.pointer_mass, 1}}, s.hbar);
  const Potential free_joint = Potential::zero(final_state_.grid());
  const double t0 = s.duration;
  const double t1 = t0 + static_cast<double>(steps) * dt;
  if (stride == 0 || steps % stride != 0) {
    throw Error(ErrorCode::kTimeGridMismatch, "snapshot stride must divide the step count");
  }
  const EvolutionParams params{dt, stride};

  auto post = std::make_shared<PostHistories>();
  auto full = std::make_shared<WaveFunctionHistory>(evolve(final_state_, free_joint, joint_system, t0, t1, params));
  // Local interpolation only, so that branches far away in y cannot enter the
  // comparison through a shared phase alignment.
  post->full_guide = std::make_shared<GuidingHistory>(*full, 1, PhaseAlignment::kNone);
  post->full = full;

  const WaveFunction registered = normalize(tensor_product(
      s.eigenstates[outcome], branch_history_[outcome].snapshots.back()).with_time(t0));
  const WaveFunctionHistory pruned = evolve(registered, free_joint, joint_system, t0, t1, params);
  post->pruned_guide = std::make_shared<GuidingHistory>(pruned, 1, PhaseAlignment::kNone);

  const ParticleSystem system_only = ParticleSystem::single(1, s.system_mass, 0, s.hbar);
  post->system = std::make_shared<WaveFunctionHistory>(evolve(
      s.eigenstates[outcome].with_time(t0), Potential::zero(*s.x_grid), system_only, t0, t1, params));

  std::lock_guard<std::mutex> lock(cache_mutex_);
  return post_cache_.emplace(key, std::move(post)).first->second;
}

PostMeasurementReport MeasurementEngine::post_measurement(const CollapseResult& result,
                                                          std::size_t steps, double dt,
                                                          std::size_t stride) const {
  const MeasurementSetup& s = setup_;
  const auto histories = post_histories(result.outcome, steps, dt, stride);
  const ParticleSystem joint_system({Particle{s.system_mass, 1}, Particle{s.pointer_mass, 1}}, s.hbar);
  TrajectoryOptions opts;
  opts.dt = dt;
  const Configuration q{{result.system_position, result.pointer_position}, s.duration};

  PostMeasurementReport r;
  r.full = integrate_trajectory(q, *histories->full_guide, joint_system, opts);
  r.pruned = integrate_trajectory(q, *histories->pruned_guide, joint_system, opts);
  if (r.full.reason != TerminationReason::kCompleted || r.pruned.reason != TerminationReason::kCompleted) {
    throw Error(ErrorCode::kNodeEncountered, "post-measurement trajectory hit a node");
  }
  for (std::size_t i = 0; i < r.full.sample_count(); ++i) {
    r.max_deviation = std::max(r.max_deviation, std::abs(r.full.sample(i)[0] - r.pruned.sample(i)[0]));
  }
  for (std::size_t j = 0; j < histories->full->size(); ++j) {
    const double y = r.full.sample(j * stride)[1];
    const WaveFunction cond = normalize(conditional_wavefunction(histories->full->snapshots[j], y).slice);
    const WaveFunction alone = normalize(histories->system->snapshots[j]);
    const double overlap = std::abs(inner_product(alone, cond));
    r.conditional_error = std::max(r.conditional_error, std::sqrt(std::max(0.0, 2.0 - 2.0 * overlap)));
  }
  return r;
}

CollapseResult run_ideal_measurement(const MeasurementSetup& setup, std::uint64_t seed) {
  return MeasurementEngine(setup).run(seed);
}

BornReport born_statistics(const MeasurementEngine& engine, std::size_t runs, std::uint64_t seed,
                           std::size_t threads) {
  if (runs < 100) throw Error(ErrorCode::kInvalidArgument, "born_statistics needs at least 100 runs");
  const MeasurementSetup& s = engine.setup();
  BornReport report;
  report.runs = runs;
  report.seed = seed;
  report.per_run.resize(runs);
  parallel_for_chunks(runs, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint64_t sub = derive_seed(seed, i);
      const CollapseResult c = engine.run(sub);
      report.per_run[i] = RunSummary{sub, c.outcome, c.pointer_position, c.fidelity};
    }
  });
  const std::size_t k = s.eigenvalues.size();
  report.counts.assign(k, 0);
  for (const auto& r : report.per_run) {
    ++report.counts[r.outcome];
    report.min_fidelity = std::min(report.min_fidelity, r.fidelity);
  }
  std::vector<WaveFunction> parts(s.eigenstates.begin(), s.eigenstates.end());
  const WaveFunction psi = superpose(s.coefficients, parts, 0.0);
  report.predictions = pvm_expectation(psi, s.eigenstates, s.eigenvalues).probabilities;
  report.passed = report.min_fidelity > kCollapseFidelity;
  for (std::size_t a = 0; a < k; ++a) {
    const double f = static_cast<double>(report.counts[a]) / static_cast<double>(runs);
    report.frequencies.push_back(f);
    report.z_scores.push_back(binomial_z(f, report.predictions[a], runs));
    report.passed = report.passed && std::abs(report.z_scores.back()) <= 3.0;
  }
  return report;
}

BornReport born_statistics(const MeasurementSetup& setup, std::size_t runs, std::uint64_t seed,
                           std::size_t threads) {
  return born_statistics(MeasurementEngine(setup), runs, seed, threads);
}

EffectiveCheck effective_wavefunction_check(const WaveFunction& joint, const WaveFunction& psi,
                                            const WaveFunction& phi, const WaveFunction& rest,
                                            double y) {
  require_1d(psi, "candidate");
  require_1d(phi, "pointer factor");
  const Grid& g = joint.grid();
  if (g.dims() != 2 || !(*axis_grid(g, 0) == psi.grid()) || !(*axis_grid(g, 1) == phi.grid())) {
    throw Error(ErrorCode::kGridMismatch, "decomposition does not match the joint grid");
  }
  require_same_grid(joint, rest);
  const WaveFunction product = tensor_product(psi, phi);
  std::vector<Complex> diff(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    diff[i] = joint.amplitudes()[i] - product.amplitudes()[i] - rest.amplitudes()[i];
  }
  EffectiveCheck r;
  r.residual = norm(WaveFunction(joint.grid_ptr(), 1, std::move(diff)));
  r.support = support_interval(phi);
  r.overlap_mass = mass_inside(phi.grid(), y_marginal(rest), r.support);
  r.y_in_support = r.support.contains(phi.grid().wrap(0, y));
  r.passed = r.residual <= 1e-8 && r.overlap_mass <= kOverlapGate && r.y_in_support;
  return r;
}

EffectiveCheck effective_wavefunction_check(const WaveFunction& joint, const WaveFunction& psi,
                                            const WaveFunction& phi, double y) {
  const WaveFunction product = tensor_product(psi, phi);
  std::vector<Complex> rest(joint.amplitudes().begin(), joint.amplitudes().end());
  for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= product.amplitudes()[i];
  return effective_wavefunction_check(joint, psi, phi, WaveFunction(joint.grid_ptr(), 1, std::move(rest)), y);
}

MeasurementSetup reference_measurement(std::span<const Complex> coefficients) {
  if (coefficients.size() != 2) throw Error(ErrorCode::kInvalidArgument, "reference setup has two outcomes");
  MeasurementSetup s;
  s.x_grid = std::make_shared<const Grid>(make_grid({{128, -16.0, 16.0}}));
  s.y_grid = std::make_shared<const Grid>(make_grid({{1024, -25.6, 25.6}}));
  const double c = std::pow(std::numbers::pi, -0.25);
  s.eigenstates.push_back(normalize(WaveFunction::sample(
      *s.x_grid, [&](std::span<const double> q) { return Complex(c * std::exp(-0.5 * q[0] * q[0])); })));
  s.eigenstates.push_back(normalize(WaveFunction::sample(*s.x_grid, [&](std::span<const double> q) {
    return Complex(c * std::sqrt(2.0) * q[0] * std::exp(-0.5 * q[0] * q[0]));
  })));
  s.eigenvalues = {-1.0, 1.0};
  s.coefficients.assign(coefficients.begin(), coefficients.end());
  // |phi_0|^2 is a unit-variance Gaussian.
  s.pointer = normalize(WaveFunction::sample(
      *s.y_grid, [](std::span<const double> q) { return Complex(std::exp(-0.25 * q[0] * q[0])); }));
  s.coupling = 1.0;
  s.duration = 9.0;
  s.pointer_mass = 10.0;
  s.system_mass = 1.0;
  s.hbar = 1.0;
  s.snapshot_dt = 0.05;
  return s;
}

}  // namespace bohm
