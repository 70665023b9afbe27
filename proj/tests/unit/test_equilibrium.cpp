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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bohm/equilibrium.hpp"
#include "bohm/error.hpp"
#include "bohm/statistics.hpp"
#include "oracles.hpp"

using namespace bohm;

namespace {

const oracle::FreeGaussian kPacket{1.0, 0.0, 0.0};

WaveFunction packet(const Grid& g) {
  return normalize(WaveFunction::sample(g, [](std::span<const double> q) { return kPacket(q[0], 0.0); }));
}

}  // namespace

TEST_SUITE("equilibrium") {
  TEST_CASE("uniform density gives a uniform empirical CDF") {
    const Grid g = make_grid({{64, 0.0, 1.0}});
    const WaveFunction flat = normalize(WaveFunction::sample(g, [](std::span<const double>) { return Complex(1.0); }));
    const std::size_t n = 100000;
    const Ensemble e = sample_density(flat, n, 12345);
    REQUIRE(e.size() == n);
    std::vector<double> xs(e.coordinates);
    const double d = ks_statistic(xs, [](double x) { return x; });
    CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));
    // Critical values against the standard table.
    CHECK(ks_critical_value(n, 0.01) * std::sqrt(static_cast<double>(n)) == doctest::Approx(1.6276).epsilon(1e-4));
    CHECK(ks_critical_value(n, 0.05) * std::sqrt(static_cast<double>(n)) == doctest::Approx(1.3581).epsilon(1e-4));
    CHECK(ks_p_value(1.6276 / std::sqrt(static_cast<double>(n)), n) == doctest::Approx(0.01).epsilon(0.02));
  }

  TEST_CASE("density concentrated in one cell keeps every sample in that cell") {
    const Grid g = make_grid({{32, -4.0, 4.0}, {16, 0.0, 2.0}});
    std::vector<Complex> amps(g.size(), 0.0);
    const std::size_t cell = 7 * 16 + 3;
    amps[cell] = 1.0;
    const WaveFunction psi = normalize(WaveFunction(g, 1, amps));
    const Ensemble e = sample_density(psi, 5000, 3);
    std::vector<double> centre(2);
    g.point(cell, centre);
    for (std::size_t m = 0; m < e.size(); ++m) {
      for (std::size_t a = 0; a < 2; ++a) CHECK(std::abs(e.position(m)[a] - centre[a]) <= 0.5 * g.spacing(a));
    }
  }

  TEST_CASE("sampling is deterministic and thread independent") {
    const Grid g = make_grid({{128, -10.0, 10.0}});
    const WaveFunction psi = packet(g);
    const Ensemble a = sample_density(psi, 10001, 77, 1);
    const Ensemble b = sample_density(psi, 10001, 77, 4);
    const Ensemble c = sample_density(psi, 10001, 78, 1);
    CHECK(a.coordinates == b.coordinates);
    CHECK(a.coordinates != c.coordinates);
    // Draw j does not depend on how many draws are requested.
    const Ensemble prefix = sample_density(psi, 100, 77, 1);
    CHECK(std::equal(prefix.coordinates.begin(), prefix.coordinates.end(), a.coordinates.begin()));
  }

  TEST_CASE("zero density and empty requests are rejected") {
    const Grid g = make_grid({{16, 0.0, 1.0}});
    const WaveFunction zero(g, 1, std::vector<Complex>(g.size(), 0.0));
    CHECK_THROWS_AS(sample_density(zero, 10, 1), Error);
    try {
      sample_density(zero, 10, 1);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kZeroNorm);
    }
  }

  TEST_CASE("binned sample frequencies obey the multinomial bound") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 3; ++trial) {
      const Grid g = make_grid({{16, -2.0, 2.0}, {8, -1.0, 1.0}});
      std::vector<Complex> amps(g.size());
      for (auto& z : amps) z = Complex(nd(rng), nd(rng));
      const WaveFunction psi = normalize(WaveFunction(g, 1, amps));
      const DensityField rho = density(psi);
      const std::size_t n = 50000;
      const Ensemble e = sample_density(psi, n, 1000 + trial);
      std::vector<double> counts(g.size(), 0.0);
      for (std::size_t m = 0; m < n; ++m) {
        const auto pos = e.position(m);
        std::size_t flat = 0;
        for (std::size_t a = 0; a < 2; ++a) {
          const double s = (pos[a] - g.lower(a)) / g.spacing(a) + 0.5;
          const auto i = static_cast<std::size_t>(std::floor(s)) % g.extent(a);
          flat += i * g.stride(a);
        }
        counts[flat] += 1.0;
      }
      std::size_t within = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double p = rho.rho[i] * g.cell_volume();
        if (std::abs(counts[i] / n - p) <= 4.0 * std::sqrt(p * (1 - p) / n) + 1e-15) ++within;
      }
      CHECK(static_cast<double>(within) >= 0.99 * static_cast<double>(g.size()));
    }
  }

  TEST_CASE("grid marginal CDF is monotone and inverts") {
    const Grid g = make_grid({{64, -8.0, 8.0}});
    const WaveFunction psi = packet(g);
    const DensityField rho = density(psi);
    GridMarginalCdf cdf(g, rho.rho, 0);
    double prev = -1.0;
    for (double x = -8.0; x <= 8.0; x += 0.01) {
      const double c = cdf(x);
      CHECK(c >= prev);
      prev = c;
      if (c > 1e-6 && c < 1 - 1e-6) CHECK(cdf(cdf.quantile(c)) == doctest::Approx(c).epsilon(1e-10));
    }
    CHECK(cdf(-8.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(cdf(8.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Close to the continuous Gaussian CDF.
    for (double x : {-1.0, 0.0, 0.7}) CHECK(std::abs(cdf(x) - kPacket.cdf(x, 0.0)) < 2e-3);
  }

  TEST_CASE("equivariance at T = 0 compares the sampler with its own density") {
    const Grid g = make_grid({{256, -16.0, 16.0}});
    EquivarianceOptions opts;
    opts.evolution = {0.01, 1};
    opts.dt_traj = 0.01;
    const auto r = equivariance_test(packet(g), Potential::zero(g), ParticleSystem::single(1), 0.0, 20000, 5, opts);
    CHECK(r.kind == "KS");
    CHECK(r.passed);
    CHECK(r.statistic < r.threshold);
    CHECK(r.samples == 20000);
  }

  TEST_CASE("free Gaussian ensemble stays in equilibrium at T = 2") {
    const Grid g = make_grid({{512, -20.0, 20.0}});
    EquivarianceOptions opts;
    opts.evolution = {0.01, 5};
    opts.dt_traj = 0.05;
    opts.threads = 2;
    const auto r = equivariance_test(packet(g), Potential::zero(g), ParticleSystem::single(1), 2.0, 20000, 11, opts);
    MESSAGE("KS ", r.statistic, " vs ", r.threshold, " p = ", r.p_value);
    CHECK(r.passed);
    CHECK(r.excluded == 0);
    CHECK(r.time == doctest::Approx(2.0));
    // The analytic density gives the same verdict.
    const Ensemble e = sample_density(packet(g), 20000, 11);
    std::vector<double> moved(e.size());
    for (std::size_t m = 0; m < e.size(); ++m) moved[m] = kPacket.trajectory(e.position(m)[0], 2.0);
    const double d = ks_statistic(moved, [](double x) { return kPacket.cdf(x, 2.0); });
    CHECK(d < ks_critical_value(20000, 0.01));
  }

  TEST_CASE("transport without the guiding law is detected") {
    // Samples taken from |psi_0|^2 and compared with |psi_2|^2 directly must fail.
    const Grid g = make_grid({{512, -20.0, 20.0}});
    const WaveFunction psi2 = normalize(WaveFunction::sample(
        g, [](std::span<const double> q) { return kPacket(q[0], 2.0); }, 2.0));
    const Ensemble e = sample_density(packet(g), 20000, 4);
    CHECK_FALSE(compare_to_density(e, psi2).passed);
  }

  TEST_CASE("two-dimensional comparisons add chi-square marginals") {
    const Grid g = make_grid({{64, -8.0, 8.0}, {64, -8.0, 8.0}});
    const WaveFunction psi = normalize(WaveFunction::sample(g, [](std::span<const double> q) {
      return Complex(std::exp(-0.5 * q[0] * q[0] - 0.25 * (q[1] - 1) * (q[1] - 1)));
    }));
    const Ensemble e = sample_density(psi, 40000, 8);
    const auto r = compare_to_density(e, psi, {0.01, 64});
    CHECK(r.kind == "chi2");
    CHECK(r.checks.size() == 4);
    CHECK(r.threshold == doctest::Approx(chi_square_quantile(0.99, 63)));
    CHECK(r.passed);
    // sqrt(n) rule when no bin count is declared.
    const auto r2 = compare_to_density(e, psi, {0.01, 0});
    CHECK(r2.threshold == doctest::Approx(chi_square_quantile(0.99, 199)));
    // Shifted ensemble fails.
    Ensemble shifted = e;
    for (std::size_t m = 0; m < shifted.size(); ++m) shifted.coordinates[2 * m + 1] += 0.3;
    CHECK_FALSE(compare_to_density(shifted, psi).passed);
  }

  TEST_CASE("chi-square quantiles match tabulated values") {
    CHECK(chi_square_quantile(0.99, 63) == doctest::Approx(92.010).epsilon(1e-4));
    CHECK(chi_square_quantile(0.95, 10) == doctest::Approx(18.307).epsilon(1e-4));
    CHECK(chi_square_survival(18.307, 10) == doctest::Approx(0.05).epsilon(1e-3));
  }

  TEST_CASE("probability current of simple states") {
    const Grid g = make_grid({{64, 0.0, 2 * std::numbers::pi}});
    const ParticleSystem sys = ParticleSystem::single(1, 2.0, 0, 1.0);
    const double kappa = 4.0;
    const WaveFunction pw = normalize(WaveFunction::sample(
        g, [&](std::span<const double> q) { return std::exp(Complex(0.0, kappa * q[0])); }));
    const DensityField j = probability_current(pw, sys);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(j.current[0][i] - j.rho[i] * kappa / 2.0) < 1e-12);
    }
    const WaveFunction standing = normalize(WaveFunction::sample(
        g, [&](std::span<const double> q) { return std::exp(Complex(0.0, kappa * q[0])) + std::exp(Complex(0.0, -kappa * q[0])); }));
    const DensityField js = probability_current(standing, sys);
    double fringe = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(js.current[0][i]) < 1e-12);
      fringe = std::max(fringe, js.rho[i]);
    }
    CHECK(fringe > 1.5 / (2 * std::numbers::pi));
    const Grid h = make_grid({{128, -10.0, 10.0}});
    const WaveFunction ground = normalize(WaveFunction::sample(
        h, [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0])); }));
    const DensityField jg = probability_current(ground, ParticleSystem::single(1));
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(jg.current[0][i] == 0.0);
  }

  TEST_CASE("continuity residual") {
    const ParticleSystem sys = ParticleSystem::single(1);
    const Grid h = make_grid({{128, -10.0, 10.0}});
    const WaveFunction ground = normalize(WaveFunction::sample(
        h, [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0])); }));
    const Potential v = Potential::scalar(h, [](std::span<const double> q) { return 0.5 * q[0] * q[0]; });
    CHECK(continuity_residual(ground, v, sys, 0.01) < 1e-8);

    const Grid g = make_grid({{64, 0.0, 2 * std::numbers::pi}});
    const WaveFunction pw = normalize(WaveFunction::sample(
        g, [](std::span<const double> q) { return std::exp(Complex(0.0, 3.0 * q[0])); }));
    CHECK(continuity_residual(pw, Potential::zero(g), sys, 0.01) < 1e-10);

    const Grid f = make_grid({{512, -20.0, 20.0}});
    const oracle::FreeGaussian moving{1.0, -1.0, 1.0};
    const WaveFunction psi = normalize(WaveFunction::sample(
        f, [&](std::span<const double> q) { return moving(q[0], 0.0); }));
    std::vector<double> r;
    for (double dt : {0.1, 0.05, 0.025}) r.push_back(continuity_residual(psi, Potential::zero(f), sys, dt));
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      MESSAGE("continuity ratio ", r[i] / r[i + 1]);
      CHECK(r[i] / r[i + 1] >= 3.5);
      CHECK(r[i] / r[i + 1] <= 4.5);
    }
  }
}
