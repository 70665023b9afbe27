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

#include "bohm/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <optional>

#include "bohm/error.hpp"
#include "bohm/io.hpp"
#include "bohm/rng.hpp"
#include "bohm/scenarios.hpp"

namespace bohm {
namespace {

using ojson = nlohmann::ordered_json;

constexpr double kRatioLow = 3.5;
constexpr double kRatioHigh = 4.5;
constexpr double kExactTolerance = 1e-12;

// Errors raised while loading or preparing a config are the caller's fault.
struct ConfigPhaseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_table(std::ostream& out, const std::vector<Verdict>& verdicts) {
  char line[256];
  for (const auto& v : verdicts) {
    std::snprintf(line, sizeof line, "%-44s %14s %2s %-14s %s\n", v.name.c_str(), cell(v.value).c_str(),
                  v.relation.c_str(), cell(v.threshold).c_str(), v.passed ? "PASS" : "FAIL");
    out << line;
  }
}

bool all_passed(const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (!v.passed) return false;
  }
  return true;
}

struct Loaded {
  std::string text;
  PreparedScenario prepared;
};

Loaded load(const std::string& path) {
  try {
    Loaded l;
    l.text = read_file(path);
    l.prepared = prepare_scenario(parse_config_text(l.text));
    return l;
  } catch (const Error& e) {
    throw ConfigPhaseError(e.what());
  }
}

struct Manifest {
  std::string command;
  std::string config_path;
  std::string config_text;
  std::uint64_t seed = 0;
  std::string started_at;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> outputs;
};

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  ojson verdicts = ojson::array();
  for (const auto& v : m.verdicts) verdicts.push_back(to_json(v));
  ojson outputs = ojson::array();
  for (const auto& f : m.outputs) outputs.push_back(f.string());
  const ojson doc = {{"tool", "bohmlab"},
                     {"version", version()},
                     {"command", m.command},
                     {"config", m.config_path},
                     {"config_sha256", sha256_hex(m.config_text)},
                     {"seed", m.seed},
                     {"started_at", m.started_at},
                     {"finished_at", utc_now()},
                     {"passed", all_passed(m.verdicts)},
                     {"verdicts", std::move(verdicts)},
                     {"outputs", std::move(outputs)}};
  write_file_atomic(dir / "manifest.json", doc.dump(2) + "\n");
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::size_t threads = 1;
};

std::filesystem::path out_dir(const Common& c, const ScenarioConfig& config) {
  return c.out_dir ? std::filesystem::path(*c.out_dir) : config.output_directory;
}

int cmd_run(const Common& c, bool validate_only, std::ostream& out) {
  const std::string started = utc_now();
  Loaded l = load(c.config);
  const ScenarioConfig& cfg = l.prepared.config;
  if (validate_only) {
    out << "config ok: " << cfg.name << " (" << to_string(cfg.kind) << ")\n";
    return kExitOk;
  }
  RunOptions o;
  o.seed = c.seed;
  o.output_directory = out_dir(c, cfg);
  o.threads = c.threads;
  const ScenarioSummary s = run_scenario(l.prepared, o);
  out << "scenario " << s.scenario << " seed " << s.seed << "\n";
  print_table(out, s.verdicts);
  auto files = s.files;
  files.emplace_back("manifest.json");
  write_manifest(*o.output_directory, {"run", c.config, l.text, s.seed, started, s.verdicts, files});
  out << (s.passed() ? "PASS" : "FAIL") << "\n";
  return s.passed() ? kExitOk : kExitVerdictFailure;
}

int cmd_measure(const Common& c, std::size_t runs, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  Loaded l = load(c.config);
  const ScenarioConfig& cfg = l.prepared.config;
  if (!l.prepared.measurement) {
    err << "error: measure needs a measurement scenario, got " << to_string(cfg.kind) << "\n";
    return kExitConfigError;
  }
  if (runs == 0 || (runs > 1 && runs < 100)) {
    err << "error: --runs must be 1 or at least 100\n";
    return kExitConfigError;
  }
  const std::uint64_t seed = c.seed.value_or(cfg.seed);
  const std::filesystem::path dir = out_dir(c, cfg);
  if (runs == 1) {
    const MeasurementEngine engine(*l.prepared.measurement);
    const CollapseResult r = engine.run(derive_seed(seed, 0));
    out << to_json(r, false).dump(2) << "\n";
    const std::vector<Verdict> verdicts = {
        make_verdict("collapse.fidelity", r.fidelity, ">", kCollapseFidelity)};
    write_file_atomic(dir / "collapse_result.json", to_json(r, true).dump(2) + "\n");
    write_manifest(dir, {"measure", c.config, l.text, seed, started, verdicts,
                         {"collapse_result.json", "manifest.json"}});
    return all_passed(verdicts) ? kExitOk : kExitVerdictFailure;
  }
  RunOptions o;
  o.seed = seed;
  o.ensemble_size = runs;
  o.output_directory = dir;
  o.threads = c.threads;
  const ScenarioSummary s = run_scenario(l.prepared, o);
  out << "measurement " << s.scenario << " runs " << runs << " seed " << s.seed << "\n";
  print_table(out, s.verdicts);
  auto files = s.files;
  files.emplace_back("manifest.json");
  write_manifest(dir, {"measure", c.config, l.text, s.seed, started, s.verdicts, files});
  out << (s.passed() ? "PASS" : "FAIL") << "\n";
  return s.passed() ? kExitOk : kExitVerdictFailure;
}

std::size_t steps_of(double duration, double dt) {
  const double n = duration / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * n) {
    throw ConfigPhaseError("step " + format_double(dt) + " does not divide the interval " + format_double(duration));
  }
  return static_cast<std::size_t>(std::llround(n));
}

// Ladder ratios are compared after scaling to a halving step, so any
// decreasing ladder can be used.
void ladder_verdicts(const std::string& name, const std::vector<double>& dts, const std::vector<double>& errs,
                     std::vector<Verdict>& out) {
  for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
    const double q = dts[i] / dts[i + 1];
    const double ratio = errs[i] / errs[i + 1] * 4.0 / (q * q);
    const std::string label = name + ".ratio_" + std::to_string(i + 1);
    out.push_back(make_verdict(label + ".low", ratio, ">=", kRatioLow));
    out.push_back(make_verdict(label + ".high", ratio, "<=", kRatioHigh));
  }
}

std::vector<Verdict> verify_equivariance(const PreparedScenario& p, const Common& c, ojson& report) {
  const ScenarioConfig& cfg = p.config;
  EquivarianceOptions o;
  o.evolution.dt = cfg.schedule.dt;
  o.evolution.store_stride = cfg.schedule.snapshot_stride;
  o.dt_traj = cfg.schedule.trajectory_dt;
  o.boundary = BoundaryPolicy::kTerminate;
  o.threads = c.threads;
  const std::uint64_t seed = c.seed.value_or(cfg.seed);
  const EquivarianceReport r =
      equivariance_test(p.initial, *p.potential, p.system, cfg.schedule.duration, cfg.ensemble_size, seed, o);
  std::vector<Verdict> v;
  for (const auto& chk : r.checks) v.push_back(make_verdict(chk.name, chk.statistic, "<", chk.threshold));
  v.push_back(make_verdict("excluded", static_cast<double>(r.excluded), "==", 0.0));
  report["samples"] = r.samples;
  report["seed"] = seed;
  report["time"] = r.time;
  return v;
}

// Evaluated halfway through the run: the initial state of several scenarios is
// real, so it carries no current, and a switch-on at t = 0 would sit inside
// the centred difference.
std::vector<Verdict> verify_continuity(const PreparedScenario& p, ojson& report) {
  const ScenarioConfig& cfg = p.config;
  const double t = 0.5 * cfg.schedule.duration;
  EvolutionParams ep;
  ep.dt = cfg.schedule.dt;
  ep.store_stride = steps_of(t, cfg.schedule.dt);
  const WaveFunction mid = evolve(p.initial, *p.potential, p.system, 0.0, t, ep).snapshots.back();
  const auto& dts = cfg.accuracy.dt_ladder;
  std::vector<double> res;
  for (double dt : dts) res.push_back(continuity_residual(mid, *p.potential, p.system, dt));
  report["time"] = t;
  report["dt"] = dts;
  report["residual"] = res;
  std::vector<Verdict> v;
  ladder_verdicts("continuity", dts, res, v);
  return v;
}

std::vector<Verdict> verify_convergence(const PreparedScenario& p, ojson& report) {
  const ScenarioConfig& cfg = p.config;
  const double t = cfg.schedule.duration;
  auto evolve_to = [&](double dt) {
    EvolutionParams ep;
    ep.dt = dt;
    ep.store_stride = steps_of(t, dt);
    return evolve(p.initial, *p.potential, p.system, 0.0, t, ep).snapshots.back();
  };
  const auto& dts = cfg.accuracy.dt_ladder;
  const WaveFunction ref = evolve_to(dts.back() / 4.0);
  std::vector<double> errs;
  for (double dt : dts) {
    const WaveFunction psi = evolve_to(dt);
    errs.push_back(norm(linear_combination(1.0, psi, -1.0, ref)));
  }
  report["dt"] = dts;
  report["reference_dt"] = dts.back() / 4.0;
  report["error"] = errs;
  std::vector<Verdict> v;
  const double worst = *std::max_element(errs.begin(), errs.end());
  if (worst < kExactTolerance) {
    // Without a potential the split is exact and there is no ladder to measure.
    report["exact"] = true;
    v.push_back(make_verdict("convergence.max_error", worst, "<", kExactTolerance));
    return v;
  }
  report["exact"] = false;
  ladder_verdicts("convergence", dts, errs, v);
  return v;
}

int cmd_verify(const Common& c, const std::string& suite, std::ostream& out, std::ostream& err) {
  if (suite != "equivariance" && suite != "continuity" && suite != "convergence") {
    err << "error: unknown suite '" << suite << "' (expected equivariance, continuity or convergence)\n";
    return kExitConfigError;
  }
  const std::string started = utc_now();
  Loaded l = load(c.config);
  const PreparedScenario& p = l.prepared;
  if (p.measurement) {
    err << "error: verify needs a grid scenario, got measurement\n";
    return kExitConfigError;
  }
  ojson report = {{"suite", suite}, {"scenario", p.config.name}};
  std::vector<Verdict> v;
  if (suite == "equivariance") v = verify_equivariance(p, c, report);
  else if (suite == "continuity") v = verify_continuity(p, report);
  else v = verify_convergence(p, report);

  out << "suite " << suite << " on " << p.config.name << "\n";
  print_table(out, v);
  const bool ok = all_passed(v);
  out << (ok ? "PASS" : "FAIL") << "\n";

  ojson verdicts = ojson::array();
  for (const auto& x : v) verdicts.push_back(to_json(x));
  report["verdicts"] = std::move(verdicts);
  report["passed"] = ok;
  const std::filesystem::path dir = out_dir(c, p.config);
  const std::string name = "verify_" + suite + ".json";
  write_file_atomic(dir / name, report.dump(2) + "\n");
  write_manifest(dir, {"verify " + suite, c.config, l.text, c.seed.value_or(p.config.seed), started, v,
                       {name, "manifest.json"}});
  return ok ? kExitOk : kExitVerdictFailure;
}

void add_common(CLI::App* cmd, Common& c, bool with_config = true) {
  if (with_config) cmd->add_option("config", c.config, "Scenario config (JSON)")->required();
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out-dir", c.out_dir, "Output directory (default: output.directory of the config)");
  cmd->add_option("--threads", c.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
}

}  // namespace

std::string version() { return BOHMLAB_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"bohmlab: pilot-wave simulations on a grid"};
  app.set_version_flag("--version", "bohmlab " + version());
  app.require_subcommand(1);

  Common common;
  bool validate_only = false;
  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  add_common(run, common);
  run->add_flag("--validate-only", validate_only, "Check the config and exit");

  std::size_t runs = 0;
  auto* measure = app.add_subcommand("measure", "Repeat the measurement scenario");
  add_common(measure, common);
  measure->add_option("--runs", runs, "Number of runs (1, or at least 100)")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a check battery on a scenario");
  add_common(verify, common);
  verify->add_option("--suite", suite, "equivariance, continuity or convergence")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << "bohmlab " << version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(common, validate_only, out);
    if (measure->parsed()) return cmd_measure(common, runs, out, err);
    return cmd_verify(common, suite, out, err);
  } catch (const ConfigPhaseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kConfigError ? kExitConfigError : kExitRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace bohm
