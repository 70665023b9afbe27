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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bohm/dynamics.hpp"
#include "bohm/equilibrium.hpp"
#include "bohm/evolution.hpp"
#include "bohm/grid.hpp"
#include "bohm/io.hpp"
#include "bohm/measurement.hpp"
#include "bohm/particles.hpp"
#include "bohm/potential.hpp"
#include "bohm/wavefunction.hpp"

namespace bohm {

enum class ScenarioKind { kFreePacket, kHarmonic, kDoubleSlit, kSpin, kEntangledPair, kMeasurement };

std::string_view to_string(ScenarioKind kind);

struct PotentialSpec {
  /// "zero", "harmonic" or "spin_gradient".
  std::string family = "zero";
  double omega = 1.0;
  /// lambda in V(z) = -lambda z sigma_z.
  double gradient = 0.0;
  double t_on = 0.0;
  double t_off = 0.0;
};

/// Product Gaussian; per-axis density std, centre and wavenumber.
struct GaussianSpec {
  std::vector<double> center;
  std::vector<double> width;
  std::vector<double> momentum;
};

/// Two coherent Gaussian slit exits at y = +-separation/2, moving along x.
struct DoubleSlitSpec {
  double separation = 12.0;
  /// Transverse density std of each exit.
  double slit_width = 0.35;
  /// Longitudinal density std.
  double packet_width = 1.0;
  double momentum = 8.0;
  double start = -22.0;
  bool single_slit = false;
  double screen = 10.0;
  std::size_t bins = 201;
  double screen_lower = -50.25;
  double screen_upper = 50.25;
  std::size_t min_fringes = 5;
};

struct SpinSpec {
  double center = 0.0;
  double width = 1.0;
  std::array<Complex, 2> spinor{Complex(1.0), Complex(0.0)};
};

/// psi ~ g1(x1) h1(x2) + g2(x1) h2(x2) with g_{1,2} carrying wavenumbers
/// +-momentum and h_{1,2} centred at +-separation/2. The factorized control
/// is g1(x1) (h1 + h2)(x2).
struct EntangledPairSpec {
  double width = 1.0;
  double momentum = 1.0;
  double separation = 20.0;
  bool factorized = false;
  double probe_x1 = 0.0;
  double epsilon = 0.1;
};

/// Oscillator eigenbasis for the system, Gaussian pointer.
struct MeasurementSpec {
  AxisSpec system_axis{128, -16.0, 16.0};
  AxisSpec pointer_axis{1024, -25.6, 25.6};
  std::vector<Complex> coefficients;
  std::vector<double> eigenvalues;
  double omega = 1.0;
  /// Density std of the ready pointer state.
  double pointer_width = 1.0;
  double coupling = 1.0;
  double duration = 9.0;
  double pointer_mass = 10.0;
  double snapshot_dt = 0.05;
  double trajectory_dt = 0.01;
};

struct ScheduleSpec {
  double duration = 0.0;
  double dt = 0.0;
  std::size_t snapshot_stride = 1;
  double trajectory_dt = 0.0;
};

struct AccuracySpec {
  std::vector<double> dt_ladder;
  /// Largest probability mass allowed near the domain edges.
  double domain_margin = 1e-6;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::kFreePacket;
  std::vector<AxisSpec> grid;
  std::vector<Particle> particles;
  double hbar = 1.0;
  PotentialSpec potential;
  GaussianSpec gaussian;
  DoubleSlitSpec double_slit;
  SpinSpec spin;
  EntangledPairSpec pair;
  MeasurementSpec measurement;
  ScheduleSpec schedule;
  AccuracySpec accuracy;
  std::size_t ensemble_size = 0;
  std::uint64_t seed = 0;
  std::filesystem::path output_directory;
  std::size_t export_limit = 100;
};

/// Throws Error(kConfigError) naming the offending field.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Number of standard deviations z with P(|Z| > z) = domain_margin.
double margin_widths(double domain_margin);

/// Everything needed to evolve a scenario, built and checked before compute.
struct PreparedScenario {
  ScenarioConfig config;
  std::shared_ptr<const Grid> grid;
  ParticleSystem system{std::vector<Particle>{Particle{}}};
  /// Empty for the measurement scenario.
  std::optional<Potential> potential;
  WaveFunction initial;
  std::optional<MeasurementSetup> measurement;
};

/// Builds grid, system, potential and initial state; runs every
/// pre-compute check (DomainTooSmall, FactorizableSpec, boundary margin).
PreparedScenario prepare_scenario(const ScenarioConfig& config);

WaveFunction build_double_slit(const ScenarioConfig& config);

struct SpinScenario {
  WaveFunction initial;
  Potential potential;
};
SpinScenario build_spin_scenario(const ScenarioConfig& config);

WaveFunction build_entangled_pair(const ScenarioConfig& config);

MeasurementSetup build_measurement(const ScenarioConfig& config);

/// Probability mass within length/32 of either edge of any axis.
double boundary_mass(const WaveFunction& psi);

/// Transverse coordinate at the first crossing of x_{axis} = position, by
/// linear interpolation between stored samples; empty if never crossed.
std::vector<std::optional<double>> screen_crossings(const std::vector<Trajectory>& trajectories,
                                                    std::size_t axis, double position,
                                                    std::size_t transverse);

/// Trajectories whose `axis` coordinate changes sign.
std::size_t axis_crossings(const std::vector<Trajectory>& trajectories, std::size_t axis);

struct PeakCriteria {
  /// Peaks must reach this fraction of the highest bin.
  double min_height = 0.5;
  /// Prominence floor as a fraction of the highest bin.
  double min_prominence = 0.1;
  /// Prominence must also exceed this many Poisson standard deviations of
  /// (peak + base).
  double significance = 4.0;
};

/// Local maxima of a histogram that pass the height and prominence criteria.
std::vector<std::size_t> histogram_peaks(const std::vector<std::size_t>& counts,
                                         const PeakCriteria& criteria = {});

struct SpinClusters {
  /// Up-going cluster first.
  std::array<std::size_t, 2> counts{0, 0};
  std::array<double, 2> weights{0.0, 0.0};
  std::array<double, 2> predicted{0.0, 0.0};
  std::array<double, 2> z_scores{0.0, 0.0};
  /// First snapshot time from which the component supports stay disjoint.
  double separation_time = 0.0;
  std::size_t gap_samples = 0;
  std::size_t samples_after_separation = 0;
  double gap_occupancy = 0.0;
  bool separated = false;
};

/// Clusters final positions by the gap between the spinor components'
/// supports and counts trajectory samples inside that gap after separation.
SpinClusters spin_clusters(const WaveFunctionHistory& history,
                           const std::vector<Trajectory>& trajectories, double support_tail);

struct NonlocalReport {
  double x1 = 0.0;
  double x2a = 0.0;
  double x2b = 0.0;
  double v1a = 0.0;
  double v1b = 0.0;
  double difference = 0.0;
};

/// Velocity of particle 1 at x1 for two positions of particle 2.
NonlocalReport nonlocal_velocity(const WaveFunction& psi, const ParticleSystem& system, double x1,
                                 double x2a, double x2b);

struct Verdict {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  /// "<=", ">=", "==", "<" or ">".
  std::string relation;
  bool passed = false;
};

Verdict make_verdict(std::string name, double value, std::string relation, double threshold);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_directory;
  std::optional<std::size_t> ensemble_size;
  std::size_t threads = 1;
  bool write_files = true;
};

struct ScenarioSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> files;
  nlohmann::ordered_json report;

  bool passed() const;
};

/// build -> evolve -> sample -> integrate -> analyze, writing
/// history_meta.json, trajectories.csv, screen_histogram.csv and report.json.
ScenarioSummary run_scenario(const PreparedScenario& prepared, const RunOptions& options = {});
ScenarioSummary run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

nlohmann::ordered_json to_json(const Verdict& verdict);
nlohmann::ordered_json to_json(const CollapseResult& result, bool with_trajectory);

}  // namespace bohm
