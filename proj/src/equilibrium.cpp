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

#include "bohm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bohm/error.hpp"
#include "bohm/parallel.hpp"
#include "bohm/rng.hpp"
#include "bohm/spectral.hpp"
#include "bohm/statistics.hpp"

namespace bohm {

Ensemble sample_density(const WaveFunction& psi, std::size_t n, std::uint64_t seed,
                        std::size_t threads) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "sample count must be >= 1");
  const Grid& grid = psi.grid();
  const DensityField rho = density(psi);
  std::vector<double> prefix(rho.rho.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    acc += rho.rho[i];
    prefix[i] = acc;
  }
  if (!(acc > 0.0) || acc * grid.cell_volume() < 1e-300) {
    throw Error(ErrorCode::kZeroNorm, "cannot sample a zero density");
  }
  const std::size_t d = grid.dims();
  Ensemble out;
  out.dims = d;
  out.time = psi.time();
  out.seed = seed;
  out.source = "|psi|^2 cell histogram";
  out.coordinates.resize(n * d);

  parallel_for_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(d);
    for (std::size_t j = begin; j < end; ++j) {
      const auto first = uniform_pair(seed, j, 0);
      const double target = first[0] * acc;
      auto it = std::upper_bound(prefix.begin(), prefix.end(), target);
      if (it == prefix.end()) --it;
      const auto cell = static_cast<std::size_t>(it - prefix.begin());
      grid.unflatten(cell, idx);
      for (std::size_t a = 0; a < d; ++a) {
        double u;
        if (a == 0) {
          u = first[1];
        } else {
          const auto pair = uniform_pair(seed, j, static_cast<std::uint32_t>(1 + (a - 1) / 2));
          u = pair[(a - 1) % 2];
        }
        const double x = grid.coordinate(a, idx[a]) + (u - 0.5) * grid.spacing(a);
        out.coordinates[j * d + a] = grid.wrap(a, x);
      }
    }
  });
  return out;
}

EquivarianceReport compare_to_density(const Ensemble& ensemble, const WaveFunction& psi,
                                      const ComparisonOptions& options) {
  const Grid& grid = psi.grid();
  if (ensemble.dims != grid.dims()) {
    throw Error(ErrorCode::kGridMismatch, "ensemble dimension does not match the grid");
  }
  const std::size_t n = ensemble.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty ensemble");
  const DensityField rho = density(psi);
  const std::size_t d = grid.dims();

  EquivarianceReport report;
  report.samples = n;
  report.time = psi.time();
  report.seed = ensemble.seed;
  report.alpha = options.alpha;
  report.kind = d == 1 ? "KS" : "chi2";

  const double ks_threshold = ks_critical_value(n, options.alpha);
  for (std::size_t a = 0; a < d; ++a) {
    GridMarginalCdf cdf(grid, rho.rho, a);
    std::vector<double> xs(n);
    for (std::size_t m = 0; m < n; ++m) xs[m] = grid.wrap(a, ensemble.coordinates[m * d + a]);
    StatisticCheck ks;
    ks.name = "KS axis " + std::to_string(a);
    ks.statistic = ks_statistic(xs, [&](double x) { return cdf(x); });
    ks.threshold = ks_threshold;
    ks.p_value = ks_p_value(ks.statistic, n);
    ks.passed = ks.statistic < ks.threshold;
    report.checks.push_back(ks);

    if (d >= 2) {
      const std::size_t bins =
          options.bins > 0 ? options.bins
                           : static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
      std::vector<double> counts(bins, 0.0);
      for (double x : xs) {
        const auto b = static_cast<std::size_t>(std::clamp(cdf(x) * static_cast<double>(bins), 0.0,
                                                           static_cast<double>(bins - 1)));
        counts[b] += 1.0;
      }
      const double expected = static_cast<double>(n) / static_cast<double>(bins);
      double chi2 = 0.0;
      for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
      const double dof = static_cast<double>(bins - 1);
      StatisticCheck cs;
      cs.name = "chi2 axis " + std::to_string(a);
      cs.statistic = chi2;
      cs.threshold = chi_square_quantile(1.0 - options.alpha, dof);
      cs.p_value = chi_square_survival(chi2, dof);
      cs.passed = chi2 < cs.threshold;
      report.checks.push_back(cs);
    }
  }

  // Headline statistic: the first check of the report's kind.
  const auto& head = d == 1 ? report.checks.front() : report.checks[1];
  report.statistic = head.statistic;
  report.threshold = head.threshold;
  report.p_value = head.p_value;
  report.passed = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const StatisticCheck& c) { return c.passed; });
  return report;
}

EquivarianceReport equivariance_test(const WaveFunction& psi0, const Potential& v,
                                     const ParticleSystem& system, double duration,
                                     std::size_t n, std::uint64_t seed,
                                     const EquivarianceOptions& options) {
  const Ensemble initial = sample_density(psi0, n, seed, options.threads);
  if (duration == 0.0) {
    EquivarianceReport r = compare_to_density(initial, psi0, options.comparison);
    return r;
  }
  const double t0 = psi0.time();
  const WaveFunctionHistory history =
      evolve(psi0, v, system, t0, t0 + duration, options.evolution);
  const GuidingHistory guide(history, options.threads);
  TrajectoryOptions topts;
  topts.dt = options.dt_traj;
  topts.boundary = options.boundary;
  topts.output_stride = std::numeric_limits<std::size_t>::max();
  const auto trajectories = integrate_ensemble(initial, guide, system, topts, options.threads);
  const Ensemble final = final_ensemble(trajectories, history.end_time());
  EquivarianceReport r = compare_to_density(final, history.snapshots.back(), options.comparison);
  r.excluded = n - final.size();
  r.seed = seed;
  if (r.excluded > 0) r.passed = false;
  return r;
}

DensityField probability_current(const WaveFunction& psi, const ParticleSystem& system) {
  DensityField out = density(psi);
  const VelocityField vf = velocity_field(psi, system);
  out.masked = vf.masked;
  out.current.assign(psi.grid().dims(), std::vector<double>(psi.points(), 0.0));
  for (std::size_t j = 0; j < out.current.size(); ++j) {
    for (std::size_t i = 0; i < psi.points(); ++i) out.current[j][i] = out.rho[i] * vf.v[j][i];
  }
  return out;
}

double continuity_residual(const WaveFunction& psi, const Potential& v,
                           const ParticleSystem& system, double dt) {
  check_compatible(psi, v, system);
  const Grid& grid = psi.grid();
  const std::size_t n = grid.size();
  const std::size_t d = grid.dims();
  const DensityField forward = density(step(psi, v, system, dt));
  const DensityField backward = density(step(psi, v, system, -dt));

  // J = (hbar/m) Im(Psi^dagger grad Psi), evaluated without the node division.
  std::vector<std::vector<double>> current(d, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < psi.components(); ++c) {
    const auto plane = psi.component(c);
    const auto grad = spectral_gradient(grid, plane);
    for (std::size_t j = 0; j < d; ++j) {
      const double scale = system.hbar() / system.axis_mass(j);
      for (std::size_t i = 0; i < n; ++i) {
        current[j][i] += scale * (std::conj(plane[i]) * grad[j][i]).imag();
      }
    }
  }
  const std::vector<double> div = spectral_divergence(grid, current);
  const DensityField rho = density(psi);
  const double max_rho = *std::max_element(rho.rho.begin(), rho.rho.end());
  const double threshold = kNodeRelativeThreshold * max_rho;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rho.rho[i] <= threshold) continue;
    const double r = (forward.rho[i] - backward.rho[i]) / (2.0 * dt) + div[i];
    sum += r * r;
  }
  return std::sqrt(sum * grid.cell_volume());
}

}  // namespace bohm
