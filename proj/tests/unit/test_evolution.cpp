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

#include <cmath>
#include <numbers>
#include <random>

#include "bohm/error.hpp"
#include "bohm/evolution.hpp"
#include "oracles.hpp"

using namespace bohm;

namespace {

WaveFunction sample_free(const Grid& g, const oracle::FreeGaussian& og, double t) {
  return WaveFunction::sample(g, [&](std::span<const double> q) { return og(q[0], t); }, t);
}

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double density_width(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  const DensityField rho = density(psi);
  double m0 = 0, m1 = 0, m2 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, i);
    m0 += rho.rho[i];
    m1 += x * rho.rho[i];
    m2 += x * x * rho.rho[i];
  }
  const double mean = m1 / m0;
  return std::sqrt(m2 / m0 - mean * mean);
}

Potential harmonic(const Grid& g) {
  return Potential::scalar(g, [](std::span<const double> q) { return 0.5 * q[0] * q[0]; });
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_SUITE("evolution") {
  TEST_CASE("plane wave acquires the kinetic phase") {
    const Grid g = make_grid({{64, 0.0, 2 * std::numbers::pi}});
    const ParticleSystem sys = ParticleSystem::single(1, 1.7, 0, 0.9);
    const double kappa = 5.0;
    const double dt = 0.013;
    const WaveFunction pw = normalize(WaveFunction::sample(
        g, [&](std::span<const double> q) { return std::exp(Complex(0.0, kappa * q[0])); }));
    const WaveFunction out = step(pw, Potential::zero(g), sys, dt);
    const Complex phase = std::exp(Complex(0.0, -sys.hbar() * kappa * kappa * dt / (2 * sys.axis_mass(0))));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(out.amplitudes()[i] - phase * pw.amplitudes()[i]) < 1e-13);
    }
    CHECK(out.time() == doctest::Approx(dt));
  }

  TEST_CASE("harmonic ground state is stationary to O(dt^3) per step") {
    const Grid g = make_grid({{256, -16.0, 16.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const WaveFunction ground = normalize(WaveFunction::sample(
        g, [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0])); }));
    const Potential v = harmonic(g);
    double prev = 0.0;
    for (double dt : {0.02, 0.01}) {
      const DensityField before = density(ground);
      const DensityField after = density(step(ground, v, sys, dt));
      double change = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) change = std::max(change, std::abs(after.rho[i] - before.rho[i]));
      CHECK(change < 0.1 * dt * dt * dt);
      if (prev > 0.0) CHECK(prev / change > 6.0);  // ~8x for O(dt^3)
      prev = change;
    }
  }

  TEST_CASE("free Gaussian matches the closed-form packet at t = 2") {
    const Grid g = make_grid({{512, -20.0, 20.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const oracle::FreeGaussian og{1.0, 0.0, 0.0};
    const WaveFunction psi0 = normalize(sample_free(g, og, 0.0));
    const WaveFunctionHistory h = evolve(psi0, Potential::zero(g), sys, 0.0, 2.0, {0.005, 400});
    REQUIRE(h.size() == 2);
    const WaveFunction& psi = h.snapshots.back();
    CHECK(psi.time() == doctest::Approx(2.0));
    CHECK(std::abs(density_width(psi) - og.width(2.0)) / og.width(2.0) < 1e-6);
    const WaveFunction exact = sample_free(g, og, 2.0);
    CHECK(max_abs_diff(psi.amplitudes(), exact.amplitudes()) < 1e-10);
  }

  TEST_CASE("evolve then evolve back recovers the initial state") {
    const Grid g = make_grid({{256, -16.0, 16.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const oracle::FreeGaussian og{1.0, -2.0, 1.5};
    const WaveFunction psi0 = normalize(sample_free(g, og, 0.0));
    const Potential v = Potential::scalar(g, [](std::span<const double> q) { return 0.1 * q[0] * q[0] + std::sin(q[0]); });
    const WaveFunctionHistory fwd = evolve(psi0, v, sys, 0.0, 1.0, {0.01, 100});
    const WaveFunctionHistory back = evolve(fwd.snapshots.back(), v, sys, 1.0, 0.0, {-0.01, 100});
    CHECK(std::abs(inner_product(psi0, back.snapshots.back().with_time(0.0))) > 1.0 - 1e-8);
  }

  TEST_CASE("zero-duration evolution returns the input") {
    const Grid g = make_grid({{64, -8.0, 8.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const WaveFunction psi0 = normalize(sample_free(g, {1.0, 0.0, 0.0}, 0.0));
    const WaveFunctionHistory h = evolve(psi0, Potential::zero(g), sys, 0.0, 0.0, {0.01, 1});
    REQUIRE(h.size() == 1);
    CHECK(max_abs_diff(h.snapshots[0].amplitudes(), psi0.amplitudes()) == 0.0);
  }

  TEST_CASE("snapshots follow the stride and budgets are enforced") {
    const Grid g = make_grid({{64, -8.0, 8.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const WaveFunction psi0 = normalize(sample_free(g, {1.0, 0.0, 0.0}, 0.0));
    const WaveFunctionHistory h = evolve(psi0, Potential::zero(g), sys, 0.0, 1.0, {0.01, 10});
    CHECK(h.size() == 11);
    for (std::size_t j = 0; j < h.size(); ++j) {
      CHECK(h.snapshots[j].time() == doctest::Approx(0.1 * static_cast<double>(j)));
      CHECK(std::abs(norm_squared(h.snapshots[j]) - 1.0) < 1e-10);
    }
    EvolutionParams tight{0.01, 1, 50};
    CHECK(code_of([&] { evolve(psi0, Potential::zero(g), sys, 0.0, 1.0, tight); }) ==
          ErrorCode::kStepBudgetExceeded);
    CHECK(code_of([&] { evolve(psi0, Potential::zero(g), sys, 0.0, 1.0, {0.01, 7}); }) ==
          ErrorCode::kTimeGridMismatch);
  }

  TEST_CASE("energy drift over 1000 steps of a static potential") {
    // Spectral evaluation of <H> at two resolutions must agree, then the drift is measured.
    const ParticleSystem sys = ParticleSystem::single(1);
    const Grid coarse = make_grid({{256, -16.0, 16.0}});
    const Grid fine = make_grid({{512, -16.0, 16.0}});
    const auto ground = [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0])); };
    const WaveFunction a = normalize(WaveFunction::sample(coarse, ground));
    const WaveFunction b = normalize(WaveFunction::sample(fine, ground));
    CHECK(std::abs(energy(a, harmonic(coarse), sys) - energy(b, harmonic(fine), sys)) < 1e-12);
    CHECK(energy(a, harmonic(coarse), sys) == doctest::Approx(0.5).epsilon(1e-12));

    const WaveFunctionHistory h = evolve(a, harmonic(coarse), sys, 0.0, 5.0, {0.005, 1000});
    const double e0 = energy(a, harmonic(coarse), sys);
    const double e1 = energy(h.snapshots.back(), harmonic(coarse), sys);
    CHECK(std::abs(e1 - e0) / e0 < 1e-8);
  }

  TEST_CASE("norm is preserved for scalar and matrix potentials") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    const Grid g = make_grid({{32, -4.0, 4.0}, {16, -2.0, 2.0}});
    const ParticleSystem sys({Particle{1.0, 2, 1}});
    std::vector<Complex> amps(g.size() * 2);
    for (auto& z : amps) z = Complex(nd(rng), nd(rng));
    const WaveFunction psi = normalize(WaveFunction(g, 2, amps));
    const Potential scalar = Potential::scalar(g, [](std::span<const double> q) { return q[0] * q[1] + 3.0; });
    const Potential matrix = Potential::matrix(g, 2, [](std::span<const double> q) {
      Eigen::MatrixXcd m(2, 2);
      m << q[0], Complex(q[1], 0.5 * q[0]), Complex(q[1], -0.5 * q[0]), -q[0] + 1.0;
      return m;
    });
    for (const Potential* v : {&scalar, &matrix}) {
      WaveFunction cur = psi;
      for (int s = 0; s < 50; ++s) {
        const double before = norm_squared(cur);
        cur = step(cur, *v, sys, 0.05);
        CHECK(std::abs(norm_squared(cur) - before) < 1e-12);
      }
    }
  }

  TEST_CASE("second-order accuracy on the oscillator coherent state") {
    const Grid g = make_grid({{256, -16.0, 16.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const Potential v = harmonic(g);
    const WaveFunction psi0 = normalize(WaveFunction::sample(
        g, [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0] - 2.0)); }));
    const double t_end = 2.0;
    const double dt = 0.04;
    auto run = [&](double h) { return evolve(psi0, v, sys, 0.0, t_end, {h, static_cast<std::size_t>(std::llround(t_end / h))}).snapshots.back(); };
    // Reference at a quarter of the finer step.
    const WaveFunction ref = run(dt / 8);
    const auto err = [&](const WaveFunction& w) { return norm(linear_combination(1.0, w, -1.0, ref)); };
    const double e1 = err(run(dt));
    const double e2 = err(run(dt / 2));
    const double ratio = e1 / e2;
    MESSAGE("Strang error ratio ", ratio);
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
    // The coherent-state centre follows x0 cos t.
    const DensityField rho = density(ref);
    double mean = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) mean += g.coordinate(0, i) * rho.rho[i] * g.cell_volume();
    CHECK(mean == doctest::Approx(2.0 * std::cos(t_end)).epsilon(1e-5));
  }

  TEST_CASE("a step is linear in the wave function") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const Grid g = make_grid({{128, -8.0, 8.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const Potential v = harmonic(g);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Complex> x(g.size()), y(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        x[i] = Complex(nd(rng), nd(rng));
        y[i] = Complex(nd(rng), nd(rng));
      }
      const WaveFunction phi = normalize(WaveFunction(g, 1, x));
      const WaveFunction psi = normalize(WaveFunction(g, 1, y));
      const Complex a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
      const WaveFunction lhs = step(linear_combination(a, phi, b, psi), v, sys, 0.1);
      const WaveFunction rhs = linear_combination(a, step(phi, v, sys, 0.1), b, step(psi, v, sys, 0.1));
      CHECK(max_abs_diff(lhs.amplitudes(), rhs.amplitudes()) < 1e-12);
    }
  }

  TEST_CASE("matrix potential proportional to the identity matches the scalar path") {
    const Grid g = make_grid({{128, -8.0, 8.0}});
    const ParticleSystem sys = ParticleSystem::single(1, 1.0, 1);
    const auto f = [](std::span<const double> q) { return 0.3 * q[0] * q[0] - 1.0; };
    const Potential scalar = Potential::scalar(g, f);
    const Potential matrix = Potential::matrix(g, 2, [&](std::span<const double> q) {
      return Eigen::MatrixXcd(f(q) * Eigen::MatrixXcd::Identity(2, 2));
    });
    const Complex spinor[2] = {0.6, Complex(0.0, 0.8)};
    const WaveFunction psi = normalize(WaveFunction::sample_spinor(
        g, [](std::span<const double> q) { return Complex(std::exp(-(q[0] - 1) * (q[0] - 1))); }, spinor));
    WaveFunction a = psi, b = psi;
    for (int s = 0; s < 20; ++s) {
      a = step(a, scalar, sys, 0.05);
      b = step(b, matrix, sys, 0.05);
    }
    CHECK(max_abs_diff(a.amplitudes(), b.amplitudes()) < 1e-12);
  }

  TEST_CASE("matrix_phase closed forms and eigendecomposition") {
    const double dt = 0.37;
    const double hbar = 1.3;
    Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(2, 2);
    CHECK((matrix_phase(zero, dt, hbar) - Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-15);

    Eigen::MatrixXcd e_id = 2.5 * Eigen::MatrixXcd::Identity(2, 2);
    const Complex gphase = std::exp(Complex(0.0, -2.5 * dt / hbar));
    CHECK((matrix_phase(e_id, dt, hbar) - gphase * Eigen::MatrixXcd::Identity(2, 2)).norm() < 1e-14);

    const double lambda = 0.8;
    Eigen::MatrixXcd sz(2, 2);
    sz << lambda, 0, 0, -lambda;
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(2, 2);
    expected(0, 0) = std::exp(Complex(0.0, -lambda * dt / hbar));
    expected(1, 1) = std::exp(Complex(0.0, lambda * dt / hbar));
    CHECK((matrix_phase(sz, dt, hbar) - expected).norm() < 1e-14);

    // Oracle for general Hermitian matrices: truncated Taylor series of exp(-i V dt / hbar).
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int k : {2, 3, 4}) {
      Eigen::MatrixXcd a(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) a(r, c) = Complex(nd(rng), nd(rng));
      const Eigen::MatrixXcd v = 0.5 * (a + a.adjoint());
      Eigen::MatrixXcd series = Eigen::MatrixXcd::Identity(k, k);
      Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(k, k);
      const Eigen::MatrixXcd gen = Complex(0.0, -dt / hbar) * v;
      for (int n = 1; n < 60; ++n) {
        term = term * gen / static_cast<double>(n);
        series += term;
      }
      const Eigen::MatrixXcd u = matrix_phase(v, dt, hbar);
      CHECK((u - series).norm() < 1e-12);
      CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(k, k)).norm() < 1e-12);
    }

    Eigen::MatrixXcd bad(2, 2);
    bad << 1.0, 1.0, 0.0, 1.0;
    CHECK(code_of([&] { matrix_phase(bad, dt); }) == ErrorCode::kNonHermitianPotential);
  }

  TEST_CASE("non-Hermitian potential fields are rejected at construction") {
    const Grid g = make_grid({{8, 0.0, 1.0}});
    std::vector<Complex> entries(g.size() * 4, 0.0);
    entries[1] = Complex(0.0, 1.0);
    entries[2] = Complex(0.0, 1.0);
    CHECK(code_of([&] { Potential::matrix(g, 2, entries); }) == ErrorCode::kNonHermitianPotential);
  }

  TEST_CASE("scheduled potentials act only inside their window") {
    const Grid g = make_grid({{64, -8.0, 8.0}});
    const ParticleSystem sys = ParticleSystem::single(1);
    const WaveFunction psi0 = normalize(sample_free(g, {1.0, 0.0, 0.0}, 0.0));
    const Potential kick = Potential::scalar(g, [](std::span<const double> q) { return -q[0]; })
                               .with_schedule({0.5, 1.0, 2.0});
    CHECK(kick.strength(0.49) == 0.0);
    CHECK(kick.strength(0.5) == 2.0);
    CHECK(kick.strength(1.0) == 0.0);
    // Before the window the evolution is free.
    const WaveFunction a = evolve(psi0, kick, sys, 0.0, 0.5, {0.05, 10}).snapshots.back();
    const WaveFunction b = evolve(psi0, Potential::zero(g), sys, 0.0, 0.5, {0.05, 10}).snapshots.back();
    CHECK(max_abs_diff(a.amplitudes(), b.amplitudes()) < 1e-14);
    // A force of 2 for 0.5 time units transfers momentum 1.
    const WaveFunction c = evolve(psi0, kick, sys, 0.0, 1.0, {0.05, 20}).snapshots.back();
    const auto grad = spectral_derivative(g, c.amplitudes(), 0);
    double p = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) p += (std::conj(c.amplitudes()[i]) * grad[i]).imag() * g.cell_volume();
    CHECK(p == doctest::Approx(1.0).epsilon(1e-8));
  }
}
