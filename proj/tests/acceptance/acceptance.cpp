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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bohm/cli.hpp"
#include "bohm/rng.hpp"
#include "bohm/scenarios.hpp"
#include "oracles.hpp"

using namespace bohm;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kUnitarity = 1e-10;
constexpr double kWidthRelative = 1e-6;
constexpr double kTrajectoryRelative = 1e-4;
constexpr double kRk4RatioLow = 10.0, kRk4RatioHigh = 22.0;
constexpr double kContinuityLow = 3.5, kContinuityHigh = 4.5;
constexpr double kBornSecond = 0.64;
constexpr double kBornSigmas = 3.0;
constexpr double kCollapseFloor = 1.0 - 1e-6;
constexpr double kDiscardedDeviation = 1e-8;
constexpr std::size_t kDiscardedRuns = 100;
constexpr std::size_t kPostSteps = 100;
constexpr double kPostDt = 0.02;
constexpr std::size_t kMinFringes = 5;
constexpr double kSpinWeight = 0.36;
constexpr double kVelocityTolerance = 1e-10;
constexpr double kFactorized = 1e-10;

const fs::path kSource(BOHM_SOURCE_DIR);

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ScenarioConfig config(const std::string& name) { return load_config(kSource / "configs" / (name + ".json")); }

const oracle::FreeGaussian kCentred{1.0, 0.0, 0.0};

WaveFunction free_packet(const Grid& g, const oracle::FreeGaussian& og) {
  return normalize(WaveFunction::sample(g, [&](std::span<const double> q) { return og(q[0], 0.0); }));
}

double density_width(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  const DensityField rho = density(psi);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinate(0, i);
    m0 += rho.rho[i];
    m1 += rho.rho[i] * x;
    m2 += rho.rho[i] * x * x;
  }
  const double mean = m1 / m0;
  return std::sqrt(m2 / m0 - mean * mean);
}

Outcome unitarity() {
  Outcome o;
  const Grid g = make_grid({{512, -20.0, 20.0}});
  const WaveFunction psi0 = free_packet(g, {1.0, 0.0, 1.0});
  const WaveFunctionHistory h = evolve(psi0, Potential::zero(g), ParticleSystem::single(1), 0.0, 5.0, {0.005, 1});
  double drift = 0.0;
  for (const auto& w : h.snapshots) drift = std::max(drift, std::abs(norm(w) - 1.0));
  o.require(h.size() == 1001, std::to_string(h.size() - 1) + " steps");
  o.require(drift < kUnitarity, "max |norm - 1| = " + fmt("%.2e", drift));
  return o;
}

Outcome packet_width() {
  Outcome o;
  const Grid g = make_grid({{512, -20.0, 20.0}});
  const WaveFunctionHistory h =
      evolve(free_packet(g, kCentred), Potential::zero(g), ParticleSystem::single(1), 0.0, 2.0, {0.005, 400});
  const double w = density_width(h.snapshots.back());
  const double rel = std::abs(w - kCentred.width(2.0)) / kCentred.width(2.0);
  o.require(rel < kWidthRelative, "sigma(2) = " + fmt("%.10f", w) + ", relative error " + fmt("%.2e", rel));
  return o;
}

double trajectory_error(const WaveFunctionHistory& h, double dt, double x0) {
  TrajectoryOptions opts;
  opts.dt = dt;
  const Trajectory tr = integrate_trajectory({{x0}, 0.0}, h, ParticleSystem::single(1), opts);
  const double exact = kCentred.trajectory(x0, tr.times.back());
  return std::abs(tr.final_position()[0] - exact) / std::abs(exact);
}

Outcome trajectory_law() {
  Outcome o;
  const ParticleSystem sys = ParticleSystem::single(1);
  const Grid g = make_grid({{512, -20.0, 20.0}});
  const WaveFunctionHistory h = evolve(free_packet(g, kCentred), Potential::zero(g), sys, 0.0, 2.0, {0.005, 2});
  const double err = trajectory_error(h, 1e-3, 1.0);
  o.require(err < kTrajectoryRelative, "dt 1e-3 relative error " + fmt("%.2e", err));
  // Order measured where stage times coincide with snapshots.
  const Grid fine = make_grid({{2048, -20.0, 20.0}});
  const WaveFunctionHistory hf =
      evolve(free_packet(fine, kCentred), Potential::zero(fine), sys, 0.0, 2.0, {0.03125 / 8, 8});
  std::vector<double> errs;
  for (double dt : {0.5, 0.25, 0.125}) errs.push_back(trajectory_error(hf, dt, 1.0));
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double r = errs[i] / errs[i + 1];
    o.require(r >= kRk4RatioLow && r <= kRk4RatioHigh, "halving ratio " + fmt("%.2f", r));
  }
  return o;
}

Outcome equivariance() {
  Outcome o;
  for (const char* name : {"free_packet", "double_slit_equivariance"}) {
    const PreparedScenario p = prepare_scenario(config(name));
    const ScenarioConfig& c = p.config;
    EquivarianceOptions eo;
    eo.evolution = {c.schedule.dt, c.schedule.snapshot_stride};
    eo.dt_traj = c.schedule.trajectory_dt;
    eo.boundary = BoundaryPolicy::kTerminate;
    const EquivarianceReport r =
        equivariance_test(p.initial, *p.potential, p.system, 2.0, 100000, c.seed, eo);
    std::string stats;
    for (const auto& chk : r.checks) {
      stats += " " + chk.name + "=" + fmt("%.4f", chk.statistic) + "/" + fmt("%.4f", chk.threshold);
    }
    o.require(r.passed && r.excluded == 0 && r.samples == 100000,
              std::string(name) + " n=" + std::to_string(r.samples) + stats);
  }
  return o;
}

Outcome continuity() {
  Outcome o;
  for (const char* name : {"free_packet", "harmonic"}) {
    const PreparedScenario p = prepare_scenario(config(name));
    const ScenarioConfig& c = p.config;
    const double t = 0.5 * c.schedule.duration;
    const auto steps = static_cast<std::size_t>(std::llround(t / c.schedule.dt));
    const WaveFunction mid =
        evolve(p.initial, *p.potential, p.system, 0.0, t, {c.schedule.dt, steps}).snapshots.back();
    std::vector<double> res;
    for (double dt : {0.1, 0.05, 0.025}) res.push_back(continuity_residual(mid, *p.potential, p.system, dt));
    for (std::size_t i = 0; i + 1 < res.size(); ++i) {
      const double r = res[i] / res[i + 1];
      o.require(r >= kContinuityLow && r <= kContinuityHigh, std::string(name) + " ratio " + fmt("%.3f", r));
    }
  }
  return o;
}

const MeasurementEngine& born_engine() {
  static const MeasurementEngine engine(build_measurement(config("measurement")));
  return engine;
}

Outcome born_rule() {
  Outcome o;
  const MeasurementEngine& e = born_engine();
  const std::size_t runs = 10000;
  const BornReport r = born_statistics(e, runs, 42);
  const double band = kBornSigmas * std::sqrt(kBornSecond * (1.0 - kBornSecond) / static_cast<double>(runs));
  const double f = r.frequencies[1];
  o.require(std::abs(f - kBornSecond) <= band,
            "second outcome " + fmt("%.4f", f) + " in 0.64 +- " + fmt("%.4f", band));
  o.require(r.min_fidelity > kCollapseFloor, "min fidelity 1 - " + fmt("%.2e", 1.0 - r.min_fidelity));
  return o;
}

Outcome discarded_branches() {
  Outcome o;
  const MeasurementEngine& e = born_engine();
  double worst = 0.0;
  std::size_t samples = 0;
  for (std::size_t i = 0; i < kDiscardedRuns; ++i) {
    const CollapseResult r = e.run(derive_seed(7, i));
    const PostMeasurementReport p = e.post_measurement(r, kPostSteps, kPostDt);
    worst = std::max(worst, p.max_deviation);
    samples += p.full.sample_count() == kPostSteps + 1;
  }
  o.require(samples == kDiscardedRuns, std::to_string(samples) + " runs of " + std::to_string(kPostSteps) + " steps");
  o.require(worst < kDiscardedDeviation, "max deviation " + fmt("%.2e", worst));
  return o;
}

const Verdict* find(const ScenarioSummary& s, const std::string& name) {
  for (const auto& v : s.verdicts) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

RunOptions in_memory() {
  RunOptions o;
  o.write_files = false;
  return o;
}

Outcome double_slit() {
  Outcome o;
  const ScenarioSummary two = run_scenario(config("double_slit"), in_memory());
  const auto peaks = two.report["screen"]["peaks"].get<std::size_t>();
  const auto crossings = two.report["screen"]["axis_crossings"].get<std::size_t>();
  o.require(peaks >= kMinFringes, std::to_string(peaks) + " fringe maxima");
  o.require(crossings == 0, std::to_string(crossings) + " axis crossings");
  o.require(two.passed(), "double-slit verdicts");
  const ScenarioSummary one = run_scenario(config("single_slit"), in_memory());
  const auto single = one.report["screen"]["peaks"].get<std::size_t>();
  o.require(single == 1, "single slit " + std::to_string(single) + " maximum");
  return o;
}

Outcome spin() {
  Outcome o;
  const ScenarioSummary s = run_scenario(config("spin"), in_memory());
  const auto& cl = s.report["clusters"];
  const double w = cl["weights"][0].get<double>();
  const double n = static_cast<double>(cl["counts"][0].get<std::size_t>() + cl["counts"][1].get<std::size_t>());
  const double band = 3.0 * std::sqrt(kSpinWeight * (1.0 - kSpinWeight) / n);
  o.require(n == 10000.0 && std::abs(w - kSpinWeight) <= band,
            "weights " + fmt("%.4f", w) + "/" + fmt("%.4f", 1.0 - w) + " within " + fmt("%.4f", band));
  o.require(find(s, "clusters.gap_occupancy") && find(s, "clusters.gap_occupancy")->passed,
            "gap occupancy " + fmt("%.1e", cl["gap_occupancy"].get<double>()));

  const Grid g = make_grid({{128, -16.0, 16.0}});
  const ParticleSystem sys = ParticleSystem::single(1, 1.0, 1);
  const std::array<Complex, 2> real_spinor{Complex(0.6), Complex(0.8)};
  const std::array<Complex, 2> spinor{Complex(0.6), Complex(0.0, 0.8)};
  const WaveFunction real = normalize(WaveFunction::sample_spinor(
      g, [](std::span<const double> q) { return Complex(oracle::ho_ground(q[0])); }, real_spinor));
  const double kappa = 2 * std::numbers::pi * 5.0 / 32.0;
  const WaveFunction wave = normalize(WaveFunction::sample_spinor(
      g, [&](std::span<const double> q) { return std::exp(Complex(0.0, kappa * q[0])); }, spinor));
  double real_err = 0.0, wave_err = 0.0;
  for (double x : {-3.1, -0.4, 0.0, 0.77, 2.5}) {
    real_err = std::max(real_err, std::abs(velocity_at(real, {{x}, 0.0}, sys)[0]));
    wave_err = std::max(wave_err, std::abs(velocity_at(wave, {{x}, 0.0}, sys)[0] - kappa));
  }
  o.require(real_err < kVelocityTolerance, "real spinor |v| " + fmt("%.1e", real_err));
  o.require(wave_err < kVelocityTolerance, "plane-wave spinor error " + fmt("%.1e", wave_err));
  return o;
}

Outcome nonlocality() {
  Outcome o;
  for (const char* name : {"entangled_pair", "entangled_factorized"}) {
    const PreparedScenario p = prepare_scenario(config(name));
    const auto& pr = p.config.pair;
    const NonlocalReport r =
        nonlocal_velocity(p.initial, p.system, pr.probe_x1, pr.separation / 2.0, -pr.separation / 2.0);
    if (pr.factorized) {
      o.require(r.difference < kFactorized, "factorized difference " + fmt("%.1e", r.difference));
    } else {
      o.require(r.difference > pr.epsilon,
                "entangled difference " + fmt("%.4f", r.difference) + " > " + fmt("%g", pr.epsilon));
    }
  }
  return o;
}

int quiet_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "bohmlab_acceptance";
  fs::remove_all(root);
  struct Case {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<Case> cases = {
      {"free_packet", {"run", (kSource / "configs/free_packet.json").string()}},
      {"spin", {"run", (kSource / "configs/spin.json").string()}},
      {"measurement", {"measure", (kSource / "configs/measurement.json").string(), "--runs", "200"}}};
  for (const auto& c : cases) {
    std::vector<std::string> files;
    for (const char* threads : {"1", "2"}) {
      const fs::path dir = root / c.name / threads;
      auto args = c.args;
      args.insert(args.end(), {"--seed", "42", "--threads", threads, "--out-dir", dir.string()});
      const int status = quiet_cli(args);
      o.require(status == kExitOk, c.name + " threads " + threads + " status " + std::to_string(status));
    }
    std::size_t compared = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(root / c.name / "1")) {
      const std::string f = entry.path().filename().string();
      if (f == "manifest.json") continue;
      ++compared;
      identical += read_file(entry.path()) == read_file(root / c.name / "2" / f);
    }
    o.require(compared >= 4 && identical == compared,
              c.name + " " + std::to_string(identical) + "/" + std::to_string(compared) + " payloads identical");
  }
  fs::remove_all(root);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "unitarity", 5.0, unitarity},
      {2, "analytic packet width", 5.0, packet_width},
      {3, "trajectory law", 10.0, trajectory_law},
      {4, "equivariance", 180.0, equivariance},
      {5, "continuity residual", 30.0, continuity},
      {6, "Born rule and collapse", 300.0, born_rule},
      {7, "discarded branches", 0.0, discarded_branches},
      {8, "double slit", 180.0, double_slit},
      {9, "spin", 0.0, spin},
      {10, "nonlocality", 0.0, nonlocality},
      {11, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_seconds > 0.0) {
      const bool in_budget = secs < c.budget_seconds;
      timing += fmt(" (budget %.0f s)", c.budget_seconds);
      if (!in_budget) {
        o.passed = false;
        timing += " [over budget]";
      }
    }
    failures += !o.passed;
    std::printf("AC%-2d %s  %-24s %s; %s\n", c.id, o.passed ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
