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

#include "bohm/error.hpp"
#include "bohm/measurement.hpp"
#include "oracles.hpp"

using namespace bohm;

namespace {

const Complex kBorn[2] = {0.6, 0.8};

const MeasurementEngine& born_engine() {
  static const MeasurementEngine engine(reference_measurement(kBorn));
  return engine;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_SUITE("measurement") {
  TEST_CASE("conditional wave function of a product state") {
    const Grid g = make_grid({{64, -8.0, 8.0}, {64, -8.0, 8.0}});
    const Grid gx = make_grid({{64, -8.0, 8.0}});
    const Grid gy = make_grid({{64, -8.0, 8.0}});
    const WaveFunction psi = normalize(WaveFunction::sample(gx, [](std::span<const double> q) {
      return std::exp(Complex(-0.5 * (q[0] - 1) * (q[0] - 1), 0.3 * q[0]));
    }));
    const WaveFunction phi = normalize(WaveFunction::sample(
        gy, [](std::span<const double> q) { return Complex(std::exp(-0.25 * q[0] * q[0])); }));
    const WaveFunction joint = tensor_product(psi, phi);
    for (double y : {-2.3, 0.0, 0.77, 3.1}) {
      const ConditionalSlice s = conditional_wavefunction(joint, y);
      CHECK(std::abs(std::abs(inner_product(psi, normalize(s.slice))) - 1.0) < 1e-10);
      CHECK(s.norm > 0.0);
    }
    // Far outside the pointer packet the slice vanishes.
    const WaveFunction narrow = normalize(WaveFunction::sample(
        gy, [](std::span<const double> q) { return Complex(std::exp(-8.0 * q[0] * q[0])); }));
    CHECK(code_of([&] { conditional_wavefunction(tensor_product(psi, narrow), 7.5); }) == ErrorCode::kZeroNorm);
  }

  TEST_CASE("conditional wave function selects the registered branch") {
    const MeasurementEngine& e = born_engine();
    const MeasurementSetup& s = e.setup();
    for (std::size_t beta : {0u, 1u}) {
      const double y = s.coupling * s.duration * s.eigenvalues[beta] + 0.4;
      const ConditionalSlice slice = conditional_wavefunction(e.final_state(), y);
      CHECK(std::abs(inner_product(s.eigenstates[beta], normalize(slice.slice))) > 1.0 - 1e-12);
    }
  }

  TEST_CASE("pointer branches follow the closed-form kicked packet") {
    const MeasurementSetup s = reference_measurement(kBorn);
    CHECK(std::abs(inner_product(pointer_branches(s, 0.0)[1], s.pointer) - 1.0) < 1e-14);
    for (double t : {1e-9, 2.5, s.duration}) {
      const auto branches = pointer_branches(s, t);
      for (std::size_t a = 0; a < 2; ++a) {
        const oracle::FreeGaussian og{1.0, 0.0, s.pointer_mass * s.coupling * s.eigenvalues[a] / s.hbar,
                                      s.hbar, s.pointer_mass};
        const WaveFunction exact = normalize(WaveFunction::sample(
            *s.y_grid, [&](std::span<const double> q) { return og(q[0], t); }));
        CHECK(std::abs(inner_product(exact, branches[a])) > 1.0 - 1e-10);
        CHECK(og.center(t) == doctest::Approx(s.coupling * t * s.eigenvalues[a]));
      }
    }
  }

  TEST_CASE("premeasurement unitary at t = 0 and for a single branch") {
    const MeasurementSetup s = reference_measurement(kBorn);
    const WaveFunction psi = normalize(linear_combination(kBorn[0], s.eigenstates[0], kBorn[1], s.eigenstates[1]));
    const WaveFunction start = premeasurement_unitary(s, 0.0);
    CHECK(std::abs(inner_product(tensor_product(psi, s.pointer), start)) > 1.0 - 1e-12);

    const Complex single[2] = {1.0, 0.0};
    const MeasurementSetup one = reference_measurement(single);
    const WaveFunction end = premeasurement_unitary(one, one.duration);
    const WaveFunction expected = tensor_product(one.eigenstates[0], pointer_branches(one, one.duration)[0]);
    CHECK(std::abs(inner_product(expected, end)) > 1.0 - 1e-12);
    // The system state is untouched: every pointer slice is proportional to psi_0.
    for (double y : {-10.0, -9.0, -7.5}) {
      CHECK(std::abs(inner_product(one.eigenstates[0], normalize(conditional_wavefunction(end, y).slice))) >
            1.0 - 1e-10);
    }
  }

  TEST_CASE("branch overlap matches the Gaussian momentum-kick formula") {
    // Overlap of two kicked packets is conserved by free flight:
    // |<phi_1|phi_2>| = exp(-(dp sigma / hbar)^2 / 2).
    MeasurementSetup s = reference_measurement(kBorn);
    s.pointer_mass = 1.0;
    s.coupling = 0.5;
    s.duration = 20.0;
    for (double t : {1e-9, 1.0, 3.0}) {
      const auto b = pointer_branches(s, t);
      const double dp = s.pointer_mass * s.coupling * (s.eigenvalues[1] - s.eigenvalues[0]);
      CHECK(std::abs(inner_product(b[0], b[1])) == doctest::Approx(std::exp(-0.5 * dp * dp)).epsilon(1e-10));
    }
    const MeasurementSetup ref = reference_measurement(kBorn);
    const auto end = pointer_branches(ref, ref.duration);
    CHECK(std::abs(inner_product(end[0], end[1])) < 1e-10);
    // A rigidly translated packet pair at the same separation is also far below the gate.
    CHECK(oracle::gaussian_overlap(2 * ref.coupling * ref.duration, 1.0) < 1e-10);
  }

  TEST_CASE("setup validation") {
    MeasurementSetup s = reference_measurement(kBorn);
    s.duration = 3.0;
    CHECK(code_of([&] { validate(s); }) == ErrorCode::kSeparationGateFailed);

    MeasurementSetup bad = reference_measurement(kBorn);
    bad.eigenstates[1] = normalize(linear_combination(1.0, bad.eigenstates[0], 0.1, bad.eigenstates[1]));
    CHECK(code_of([&] { validate(bad); }) == ErrorCode::kNonOrthonormalBasis);

    const Complex unnormalized[2] = {0.6, 0.6};
    CHECK(code_of([&] { validate(reference_measurement(unnormalized)); }) == ErrorCode::kInvalidArgument);

    MeasurementSetup degenerate = reference_measurement(kBorn);
    degenerate.eigenvalues = {1.0, 1.0};
    CHECK(code_of([&] { validate(degenerate); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("eigenstate input registers with certainty") {
    const Complex certain[2] = {1.0, 0.0};
    const MeasurementEngine e(reference_measurement(certain));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const CollapseResult r = e.run(seed);
      CHECK(r.outcome == 0);
      CHECK(r.outcome_value == -1.0);
      CHECK(r.fidelity > 1.0 - 1e-12);
      CHECK(r.discarded_mass == 0.0);
    }
  }

  TEST_CASE("collapse results are reproducible and consistent") {
    const MeasurementEngine& e = born_engine();
    const CollapseResult a = e.run(4242);
    const CollapseResult b = run_ideal_measurement(reference_measurement(kBorn), 4242);
    CHECK(a.outcome == b.outcome);
    CHECK(a.pointer_position == b.pointer_position);
    CHECK(a.trajectory.coordinates == b.trajectory.coordinates);
    CHECK(a.fidelity > kCollapseFidelity);
    CHECK(e.supports()[a.outcome].contains(a.pointer_position));
    CHECK(std::abs(norm(a.collapsed) - 1.0) < 1e-12);
    // The system does not move during the coupling.
    for (std::size_t i = 0; i < a.trajectory.sample_count(); ++i) CHECK(a.trajectory.sample(i)[0] == a.system_position);
    CHECK(a.trajectory.times.back() == doctest::Approx(e.setup().duration));
    CHECK(a.discarded_mass == doctest::Approx(a.outcome == 0 ? 0.64 : 0.36));
    // |N| = |c_beta phi_beta(Y)|.
    const auto branches = pointer_branches(e.setup(), e.setup().duration);
    GridStencil st;
    build_stencil(*e.setup().y_grid, std::span<const double>(&a.pointer_position, 1), st);
    const double expected = std::abs(kBorn[a.outcome] * apply_stencil(st, branches[a.outcome].amplitudes().data()));
    CHECK(a.normalization == doctest::Approx(expected).epsilon(1e-9));
  }

  TEST_CASE("Born frequencies for c = (0.6, 0.8)") {
    const BornReport r = born_statistics(born_engine(), 2000, 99, 2);
    CHECK(r.predictions[0] == doctest::Approx(0.36).epsilon(1e-10));
    CHECK(r.predictions[1] == doctest::Approx(0.64).epsilon(1e-10));
    CHECK(std::abs(r.frequencies[1] - 0.64) <= 3.0 * std::sqrt(0.64 * 0.36 / 2000));
    CHECK(r.min_fidelity > kCollapseFidelity);
    CHECK(r.passed);
    // Thread count does not change the runs.
    const BornReport serial = born_statistics(born_engine(), 200, 5, 1);
    const BornReport threaded = born_statistics(born_engine(), 200, 5, 3);
    for (std::size_t i = 0; i < 200; ++i) {
      CHECK(serial.per_run[i].outcome == threaded.per_run[i].outcome);
      CHECK(serial.per_run[i].pointer_position == threaded.per_run[i].pointer_position);
    }
  }

  TEST_CASE("equal superposition gives equal frequencies") {
    const Complex half[2] = {std::sqrt(0.5), std::sqrt(0.5)};
    const BornReport r = born_statistics(reference_measurement(half), 1000, 3);
    CHECK(std::abs(r.frequencies[0] - r.frequencies[1]) <= 3.0 * 2.0 * std::sqrt(0.25 / 1000));
    CHECK(code_of([&] { born_statistics(born_engine(), 99, 1); }) == ErrorCode::kInvalidArgument);
  }

  TEST_CASE("PVM expectation") {
    const MeasurementSetup s = reference_measurement(kBorn);
    const PvmResult eig = pvm_expectation(s.eigenstates[1], s.eigenstates, s.eigenvalues);
    CHECK(eig.probabilities[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));
    const WaveFunction psi = linear_combination(kBorn[0], s.eigenstates[0], kBorn[1], s.eigenstates[1]);
    const PvmResult sup = pvm_expectation(psi, s.eigenstates, s.eigenvalues);
    CHECK(sup.probabilities[0] == doctest::Approx(0.36).epsilon(1e-10));
    CHECK(sup.probabilities[1] == doctest::Approx(0.64).epsilon(1e-10));
    CHECK(std::abs(sup.probabilities[0] + sup.probabilities[1] - 1.0) < 1e-10);
    CHECK(sup.expectation == doctest::Approx(0.28).epsilon(1e-10));
    std::vector<WaveFunction> skew = {s.eigenstates[0], s.eigenstates[0]};
    CHECK(code_of([&] { pvm_expectation(psi, skew, s.eigenvalues); }) == ErrorCode::kNonOrthonormalBasis);
  }

  TEST_CASE("effective wave function certification") {
    const MeasurementSetup s = reference_measurement(kBorn);
    const std::size_t beta = 1;
    auto decomposition = [&](double t) {
      const auto b = pointer_branches(s, t);
      const WaveFunction joint = premeasurement_unitary(s, t);
      const WaveFunction phi = scaled(b[beta], kBorn[beta]);
      const WaveFunction rest = scaled(tensor_product(s.eigenstates[0], b[0]), kBorn[0]);
      return std::make_tuple(joint, phi, rest);
    };
    const auto [end, phi, rest] = decomposition(s.duration);
    const double y_beta = s.coupling * s.duration;
    const EffectiveCheck ok = effective_wavefunction_check(end, s.eigenstates[beta], phi, rest, y_beta);
    CHECK(ok.passed);
    CHECK(ok.residual < 1e-10);
    CHECK(ok.overlap_mass < 1e-10);
    CHECK(effective_wavefunction_check(end, s.eigenstates[beta], phi, y_beta).passed);
    CHECK_FALSE(effective_wavefunction_check(end, s.eigenstates[beta], phi, rest, -y_beta).passed);

    // Mid-measurement the branches still overlap.
    const double t = s.duration / 4;
    const auto [mid, phi_mid, rest_mid] = decomposition(t);
    const EffectiveCheck early = effective_wavefunction_check(mid, s.eigenstates[beta], phi_mid, rest_mid, s.coupling * t);
    CHECK_FALSE(early.passed);
    const double width = std::sqrt(1.0 + std::pow(s.hbar * t / (2 * s.pointer_mass), 2));
    const double centre = -s.coupling * t;
    const double oracle_mass =
        std::norm(kBorn[0]) * (normal_cdf((early.support.hi - centre) / width) - normal_cdf((early.support.lo - centre) / width));
    CHECK(early.overlap_mass == doctest::Approx(oracle_mass).epsilon(1e-3));
  }

  TEST_CASE("discarded branches do not influence later motion") {
    const MeasurementEngine& e = born_engine();
    for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
      const CollapseResult r = e.run(seed);
      const PostMeasurementReport p = e.post_measurement(r, 100, 0.02);
      CHECK(p.full.sample_count() == 101);
      CHECK(p.max_deviation < 1e-8);
      CHECK(p.conditional_error < 1e-6);
    }
  }
}
