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

#include "bohm/scenarios.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "bohm/error.hpp"
#include "bohm/rng.hpp"
#include "bohm/statistics.hpp"

namespace bohm {
namespace {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kUnitTolerance = 1e-9;
constexpr double kUnitarityTolerance = 1e-10;
constexpr double kIncompleteFraction = 1e-3;
constexpr double kGapOccupancy = 1e-3;
constexpr double kSpinSupportTail = 1e-6;
constexpr double kFactorizedTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-10;
constexpr double kMaxZ = 3.0;
constexpr std::size_t kFinalHistogramBins = 64;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfigError, "field '" + field + "': " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Field access that reports the dotted path of whatever is wrong.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "must be an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    std::set<std::string_view> ok(keys);
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) fail(join(path_, k), "unknown field");
    }
  }

  bool has(std::string_view key) const { return j_.contains(key); }

  const json& at(std::string_view key) const {
    if (!j_.contains(key)) fail(join(path_, key), "missing");
    return j_.at(std::string(key));
  }

  Node object(std::string_view key) const { return Node(at(key), join(path_, key)); }

  double number(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(join(path_, key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(join(path_, key), "must be finite");
    return x;
  }
  double number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

  double positive(std::string_view key) const {
    const double x = number(key);
    if (!(x > 0.0)) fail(join(path_, key), "must be positive");
    return x;
  }
  double positive(std::string_view key, double fallback) const { return has(key) ? positive(key) : fallback; }

  std::size_t count(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      fail(join(path_, key), "must be a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  std::size_t count(std::string_view key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }

  std::uint64_t seed(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail(join(path_, key), "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool flag(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(join(path_, key), "must be true or false");
    return v.get<bool>();
  }

  std::string text(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(join(path_, key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(join(path_, key), "must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(join(path_, key) + "[" + std::to_string(i) + "]", "must be a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // A complex number is [re, im] or a plain real number.
  std::vector<Complex> complexes(std::string_view key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(join(path_, key), "must be an array");
    std::vector<Complex> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string f = join(path_, key) + "[" + std::to_string(i) + "]";
      if (v[i].is_number()) {
        out.emplace_back(v[i].get<double>(), 0.0);
      } else if (v[i].is_array() && v[i].size() == 2 && v[i][0].is_number() && v[i][1].is_number()) {
        out.emplace_back(v[i][0].get<double>(), v[i][1].get<double>());
      } else {
        fail(f, "must be a number or [re, im]");
      }
    }
    return out;
  }

  AxisSpec axis(const json& v, const std::string& path) const {
    const Node a(v, path);
    a.allow({"n", "lower", "upper"});
    return AxisSpec{a.count("n"), a.number("lower"), a.number("upper")};
  }

  AxisSpec axis(std::string_view key) const { return axis(at(key), join(path_, key)); }

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

 private:
  const json& j_;
  std::string path_;
};

ScenarioKind parse_kind(const std::string& s) {
  for (ScenarioKind k : {ScenarioKind::kFreePacket, ScenarioKind::kHarmonic, ScenarioKind::kDoubleSlit,
                         ScenarioKind::kSpin, ScenarioKind::kEntangledPair, ScenarioKind::kMeasurement}) {
    if (to_string(k) == s) return k;
  }
  fail("scenario", "unknown scenario '" + s + "'");
}

void check_axis(const AxisSpec& a, const std::string& field) {
  if (a.n < 8 || (a.n & (a.n - 1)) != 0) fail(field + ".n", "must be a power of two >= 8");
  if (!(a.upper > a.lower)) fail(field, "upper must exceed lower");
}

void parse_grid(const Node& root, ScenarioConfig& c) {
  const json& g = root.at("grid");
  if (!g.is_array() || g.empty()) fail("grid", "must be a non-empty array of axes");
  for (std::size_t j = 0; j < g.size(); ++j) {
    const std::string f = "grid[" + std::to_string(j) + "]";
    c.grid.push_back(root.axis(g[j], f));
    check_axis(c.grid.back(), f);
  }
  const json& ps = root.at("particles");
  if (!ps.is_array() || ps.empty()) fail("particles", "must be a non-empty array");
  std::size_t dims = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const Node p(ps[i], "particles[" + std::to_string(i) + "]");
    p.allow({"mass", "dims", "spin"});
    Particle part;
    part.mass = p.positive("mass");
    part.dims = p.count("dims");
    if (part.dims == 0) fail(join(p.path(), "dims"), "must be >= 1");
    const double s = p.number("spin", 0.0);
    const double twice = 2.0 * s;
    if (s < 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
      fail(join(p.path(), "spin"), "must be a non-negative multiple of 1/2");
    }
    part.twice_spin = static_cast<unsigned>(std::lround(twice));
    dims += part.dims;
    c.particles.push_back(part);
  }
  if (dims != c.grid.size()) fail("particles", "dimensions must add up to the grid axis count");
}

void parse_schedule(const Node& root, ScenarioConfig& c) {
  const Node s = root.object("schedule");
  s.allow({"duration", "dt", "snapshot_stride", "trajectory_dt"});
  c.schedule.duration = s.positive("duration");
  c.schedule.dt = s.positive("dt");
  c.schedule.snapshot_stride = s.count("snapshot_stride");
  c.schedule.trajectory_dt = s.positive("trajectory_dt");
  if (c.schedule.snapshot_stride == 0) fail("schedule.snapshot_stride", "must be >= 1");
  const double steps = c.schedule.duration / c.schedule.dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
    fail("schedule.duration", "must be a whole number of steps dt");
  }
  if (static_cast<std::size_t>(rounded) % c.schedule.snapshot_stride != 0) {
    fail("schedule.snapshot_stride", "must divide the step count");
  }
  const double interval = c.schedule.dt * static_cast<double>(c.schedule.snapshot_stride);
  const double ratio = interval / c.schedule.trajectory_dt;
  const double r = ratio >= 1.0 ? ratio : 1.0 / ratio;
  if (std::abs(r - std::round(r)) > 1e-9 * r) {
    fail("schedule.trajectory_dt", "must divide the snapshot interval dt * snapshot_stride");
  }
}

void parse_accuracy(const Node& root, ScenarioConfig& c) {
  const Node a = root.object("accuracy");
  a.allow({"dt_ladder", "domain_margin"});
  c.accuracy.dt_ladder = a.numbers("dt_ladder");
  if (c.accuracy.dt_ladder.size() < 3) fail("accuracy.dt_ladder", "needs at least three rungs");
  for (std::size_t i = 0; i < c.accuracy.dt_ladder.size(); ++i) {
    const double dt = c.accuracy.dt_ladder[i];
    if (!(dt > 0.0) || (i > 0 && !(dt < c.accuracy.dt_ladder[i - 1]))) {
      fail("accuracy.dt_ladder", "must be positive and strictly decreasing");
    }
  }
  c.accuracy.domain_margin = a.positive("domain_margin");
  if (!(c.accuracy.domain_margin < 1.0)) fail("accuracy.domain_margin", "must be below 1");
}

void parse_potential(const Node& root, ScenarioConfig& c) {
  const Node p = root.object("potential");
  c.potential.family = p.text("family");
  const std::string& f = c.potential.family;
  if (f == "zero") {
    p.allow({"family"});
  } else if (f == "harmonic") {
    p.allow({"family", "omega"});
    c.potential.omega = p.positive("omega");
  } else if (f == "spin_gradient") {
    p.allow({"family", "gradient", "t_on", "t_off"});
    c.potential.gradient = p.number("gradient");
    c.potential.t_on = p.number("t_on");
    c.potential.t_off = p.number("t_off");
    if (!(c.potential.t_off > c.potential.t_on)) fail("potential.t_off", "must exceed t_on");
  } else {
    fail("potential.family", "unknown family '" + f + "'");
  }
}

void parse_initial(const Node& root, ScenarioConfig& c) {
  const Node s = root.object("initial_state");
  const std::string family = s.text("family");
  const std::size_t d = c.grid.size();
  auto expect = [&](const char* want) {
    if (family != want) {
      fail("initial_state.family", "scenario " + std::string(to_string(c.kind)) + " needs '" + want + "'");
    }
  };
  switch (c.kind) {
    case ScenarioKind::kFreePacket:
    case ScenarioKind::kHarmonic: {
      expect("gaussian");
      s.allow({"family", "center", "width", "momentum"});
      c.gaussian.center = s.numbers("center");
      c.gaussian.width = s.numbers("width");
      c.gaussian.momentum = s.numbers("momentum");
      for (const char* k : {"center", "width", "momentum"}) {
        const auto& v = std::string(k) == "center" ? c.gaussian.center
                        : std::string(k) == "width" ? c.gaussian.width
                                                    : c.gaussian.momentum;
        if (v.size() != d) fail(std::string("initial_state.") + k, "needs one entry per grid axis");
      }
      for (double w : c.gaussian.width) {
        if (!(w > 0.0)) fail("initial_state.width", "must be positive");
      }
      break;
    }
    case ScenarioKind::kDoubleSlit: {
      expect("double_slit");
      s.allow({"family", "separation", "slit_width", "packet_width", "momentum", "start", "single_slit"});
      auto& p = c.double_slit;
      p.separation = s.positive("separation");
      p.slit_width = s.positive("slit_width");
      p.packet_width = s.positive("packet_width");
      p.momentum = s.positive("momentum");
      p.start = s.number("start");
      p.single_slit = s.flag("single_slit", false);
      const Node sc = root.object("screen");
      sc.allow({"position", "bins", "lower", "upper", "min_fringes"});
      p.screen = sc.number("position");
      p.bins = sc.count("bins");
      p.screen_lower = sc.number("lower");
      p.screen_upper = sc.number("upper");
      p.min_fringes = sc.count("min_fringes");
      if (p.bins < 3) fail("screen.bins", "must be >= 3");
      if (!(p.screen_upper > p.screen_lower)) fail("screen.upper", "must exceed screen.lower");
      break;
    }
    case ScenarioKind::kSpin: {
      expect("spinor_gaussian");
      s.allow({"family", "center", "width", "spinor"});
      c.spin.center = s.number("center");
      c.spin.width = s.positive("width");
      const auto sp = s.complexes("spinor");
      if (sp.size() != 2) fail("initial_state.spinor", "needs two components");
      if (std::abs(std::norm(sp[0]) + std::norm(sp[1]) - 1.0) > kUnitTolerance) {
        fail("initial_state.spinor", "must satisfy |a|^2 + |b|^2 = 1");
      }
      c.spin.spinor = {sp[0], sp[1]};
      break;
    }
    case ScenarioKind::kEntangledPair: {
      expect("entangled_pair");
      s.allow({"family", "width", "momentum", "separation", "factorized"});
      c.pair.width = s.positive("width");
      c.pair.momentum = s.number("momentum");
      c.pair.separation = s.number("separation");
      c.pair.factorized = s.flag("factorized", false);
      const Node pr = root.object("probe");
      pr.allow({"x1", "epsilon"});
      c.pair.probe_x1 = pr.number("x1");
      c.pair.epsilon = pr.positive("epsilon");
      break;
    }
    case ScenarioKind::kMeasurement:
      break;
  }
}

void parse_measurement(const Node& root, ScenarioConfig& c) {
  const Node m = root.object("measurement");
  m.allow({"system_axis", "pointer_axis", "coefficients", "eigenvalues", "omega", "pointer_width",
           "coupling", "duration", "pointer_mass", "snapshot_dt", "trajectory_dt"});
  auto& s = c.measurement;
  s.system_axis = m.axis("system_axis");
  check_axis(s.system_axis, "measurement.system_axis");
  s.pointer_axis = m.axis("pointer_axis");
  check_axis(s.pointer_axis, "measurement.pointer_axis");
  s.coefficients = m.complexes("coefficients");
  s.eigenvalues = m.numbers("eigenvalues");
  if (s.coefficients.empty()) fail("measurement.coefficients", "must not be empty");
  if (s.eigenvalues.size() != s.coefficients.size()) {
    fail("measurement.eigenvalues", "needs one value per coefficient");
  }
  double total = 0.0;
  for (const auto& z : s.coefficients) total += std::norm(z);
  if (std::abs(total - 1.0) > kUnitTolerance) fail("measurement.coefficients", "must satisfy sum |c|^2 = 1");
  s.omega = m.positive("omega");
  s.pointer_width = m.positive("pointer_width");
  s.coupling = m.positive("coupling");
  s.duration = m.positive("duration");
  s.pointer_mass = m.positive("pointer_mass");
  s.snapshot_dt = m.positive("snapshot_dt");
  s.trajectory_dt = m.positive("trajectory_dt");
  const double r = s.snapshot_dt / s.trajectory_dt;
  if (r < 1.0 - 1e-12 || std::abs(r - std::round(r)) > 1e-9 * r) {
    fail("measurement.trajectory_dt", "must divide measurement.snapshot_dt");
  }
}

double gaussian_amplitude(double x, double center, double width) {
  const double u = x - center;
  return std::exp(-u * u / (4.0 * width * width));
}

// Density std of a free Gaussian after time t.
double spread(double width, double t, double hbar, double mass) {
  const double tau = hbar * t / (2.0 * mass * width * width);
  return width * std::sqrt(1.0 + tau * tau);
}

WaveFunction component_plane(const WaveFunction& psi, std::size_t c) {
  const auto plane = psi.component(c);
  return WaveFunction(psi.grid_ptr(), 1, std::vector<Complex>(plane.begin(), plane.end()), psi.time());
}

// Predicted counts per bin from the marginal of |psi|^2 along one axis.
std::vector<double> predicted_counts(const WaveFunction& psi, std::size_t axis,
                                     const std::vector<double>& edges, std::size_t n) {
  const DensityField rho = density(psi);
  const GridMarginalCdf cdf(psi.grid(), rho.rho, axis);
  const double total = cdf(cdf.upper());
  std::vector<double> out(edges.size() - 1);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    out[i] = static_cast<double>(n) * (cdf(edges[i + 1]) - cdf(edges[i])) / total;
  }
  return out;
}

ojson grid_json(const Grid& g) {
  ojson axes = ojson::array();
  for (std::size_t j = 0; j < g.dims(); ++j) {
    axes.push_back({{"n", g.extent(j)}, {"lower", g.lower(j)}, {"upper", g.upper(j)}});
  }
  return axes;
}

ojson equivariance_json(const EquivarianceReport& r) {
  ojson checks = ojson::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"statistic", c.statistic},
                      {"threshold", c.threshold},
                      {"p_value", c.p_value},
                      {"passed", c.passed}});
  }
  return {{"kind", r.kind},       {"time", r.time},         {"samples", r.samples},
          {"alpha", r.alpha},     {"passed", r.passed},     {"checks", std::move(checks)}};
}

std::filesystem::path output_dir(const PreparedScenario& p, const RunOptions& o) {
  return o.output_directory ? *o.output_directory : p.config.output_directory;
}

void finish(ScenarioSummary& s, const std::filesystem::path& dir, const RunOptions& o,
            std::vector<std::pair<std::string, std::string>> files) {
  ojson verdicts = ojson::array();
  for (const auto& v : s.verdicts) verdicts.push_back(to_json(v));
  s.report["verdicts"] = std::move(verdicts);
  s.report["passed"] = s.passed();
  files.emplace_back("report.json", s.report.dump(2) + "\n");
  for (const auto& [name, content] : files) {
    s.files.push_back(name);
    if (o.write_files) write_file_atomic(dir / name, content);
  }
}

ScenarioSummary run_measurement(const PreparedScenario& p, const RunOptions& o) {
  const ScenarioConfig& c = p.config;
  const std::uint64_t seed = o.seed.value_or(c.seed);
  const std::size_t runs = o.ensemble_size.value_or(c.ensemble_size);
  const MeasurementEngine engine(*p.measurement);
  const BornReport born = born_statistics(engine, runs, seed, o.threads);

  ScenarioSummary s;
  s.scenario = c.name;
  s.seed = seed;
  for (std::size_t a = 0; a < born.counts.size(); ++a) {
    s.verdicts.push_back(make_verdict("born.outcome_" + std::to_string(a) + ".abs_z",
                                      std::abs(born.z_scores[a]), "<=", kMaxZ));
  }
  s.verdicts.push_back(make_verdict("collapse.min_fidelity", born.min_fidelity, ">", kCollapseFidelity));

  const MeasurementSetup& setup = engine.setup();
  std::vector<Trajectory> exported;
  const std::size_t limit = std::min(c.export_limit, born.per_run.size());
  for (std::size_t i = 0; i < limit; ++i) exported.push_back(engine.run(born.per_run[i].seed).trajectory);

  std::vector<double> pointer(born.per_run.size());
  for (std::size_t i = 0; i < pointer.size(); ++i) pointer[i] = born.per_run[i].pointer_position;
  const Grid& yg = *setup.y_grid;
  Histogram h = make_histogram(pointer, yg.lower(0), yg.upper(0), 128);
  h.predicted = predicted_counts(engine.final_state(), 1, h.edges, pointer.size());

  ojson meta = {{"scenario", c.name},
                {"system_grid", grid_json(*setup.x_grid)},
                {"pointer_grid", grid_json(yg)},
                {"snapshot_interval", setup.snapshot_dt},
                {"start_time", 0.0},
                {"end_time", setup.duration},
                {"snapshots", static_cast<std::size_t>(std::llround(setup.duration / setup.snapshot_dt)) + 1}};

  ojson outcomes = ojson::array();
  for (std::size_t a = 0; a < born.counts.size(); ++a) {
    outcomes.push_back({{"eigenvalue", setup.eigenvalues[a]},
                        {"count", born.counts[a]},
                        {"frequency", born.frequencies[a]},
                        {"predicted", born.predictions[a]},
                        {"z", born.z_scores[a]},
                        {"support", {engine.supports()[a].lo, engine.supports()[a].hi}}});
  }
  s.report = {{"scenario", c.name},
              {"kind", to_string(c.kind)},
              {"seed", seed},
              {"runs", runs},
              {"outcomes", std::move(outcomes)},
              {"min_fidelity", born.min_fidelity}};
  finish(s, output_dir(p, o), o,
         {{"history_meta.json", meta.dump(2) + "\n"},
          {"trajectories.csv", trajectories_csv(exported, c.export_limit)},
          {"screen_histogram.csv", histogram_csv(h)}});
  return s;
}

double mirror_asymmetry(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  const std::size_t nx = g.extent(0);
  const std::size_t ny = g.extent(1);
  const DensityField rho = density(psi);
  // Grid point j sits at lower + j dy; its mirror image -y is point (n - j - 2 lower/dy) mod n.
  const double shift = -2.0 * g.lower(1) / g.spacing(1);
  const auto offset = static_cast<long long>(std::llround(shift));
  if (std::abs(shift - static_cast<double>(offset)) > 1e-9) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const auto m = static_cast<std::size_t>(
          ((offset - static_cast<long long>(j)) % static_cast<long long>(ny) + static_cast<long long>(ny)) %
          static_cast<long long>(ny));
      worst = std::max(worst, std::abs(rho.rho[i * ny + j] - rho.rho[i * ny + m]));
    }
  }
  return worst;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kFreePacket: return "free_packet";
    case ScenarioKind::kHarmonic: return "harmonic";
    case ScenarioKind::kDoubleSlit: return "double_slit";
    case ScenarioKind::kSpin: return "spin";
    case ScenarioKind::kEntangledPair: return "entangled_pair";
    case ScenarioKind::kMeasurement: return "measurement";
  }
  return "unknown";
}

ScenarioConfig parse_config(const json& doc) {
  const Node root(doc, "");
  ScenarioConfig c;
  c.kind = parse_kind(root.text("scenario"));
  c.name = root.has("name") ? root.text("name") : std::string(to_string(c.kind));

  const Node ens = root.object("ensemble");
  ens.allow({"size", "seed"});
  c.ensemble_size = ens.count("size");
  c.seed = ens.seed("seed");
  if (c.ensemble_size == 0) fail("ensemble.size", "must be >= 1");

  const Node out = root.object("output");
  out.allow({"directory", "trajectory_export_limit"});
  c.output_directory = out.text("directory");
  c.export_limit = out.count("trajectory_export_limit", c.export_limit);

  if (c.kind == ScenarioKind::kMeasurement) {
    root.allow({"scenario", "name", "measurement", "ensemble", "output"});
    parse_measurement(root, c);
    if (c.ensemble_size < 100) fail("ensemble.size", "Born statistics need at least 100 runs");
    return c;
  }

  std::vector<std::string_view> keys = {"scenario", "name",     "grid",     "particles", "hbar",
                                        "potential", "initial_state", "schedule", "accuracy",
                                        "ensemble", "output"};
  if (c.kind == ScenarioKind::kDoubleSlit) keys.push_back("screen");
  if (c.kind == ScenarioKind::kEntangledPair) keys.push_back("probe");
  for (const auto& [k, v] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(k, "unknown field");
  }
  c.hbar = root.positive("hbar", 1.0);
  parse_grid(root, c);
  parse_potential(root, c);
  parse_initial(root, c);
  parse_schedule(root, c);
  parse_accuracy(root, c);
  return c;
}

ScenarioConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfigError, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::filesystem::path& path) { return parse_config_text(read_file(path)); }

double margin_widths(double domain_margin) {
  return std::sqrt(2.0) * boost::math::erfc_inv(domain_margin);
}

WaveFunction build_double_slit(const ScenarioConfig& c) {
  const auto& p = c.double_slit;
  if (c.grid.size() != 2 || c.particles.size() != 1 || c.particles[0].twice_spin != 0) {
    throw Error(ErrorCode::kConfigError, "double slit needs one spinless particle on a 2D grid");
  }
  const Grid grid = make_grid(c.grid);
  const double m = c.particles[0].mass;
  const double t = c.schedule.duration;
  const double z = margin_widths(c.accuracy.domain_margin);

  const double sy = spread(p.slit_width, t, c.hbar, m);
  const double top = p.separation / 2.0 + z * sy;
  const double bottom = (p.single_slit ? p.separation / 2.0 : -p.separation / 2.0) - z * sy;
  if (top > grid.upper(1) || bottom < grid.lower(1)) {
    throw Error(ErrorCode::kDomainTooSmall,
                "fringe envelope at t=" + format_double(t) + " spans [" + format_double(bottom) + ", " +
                    format_double(top) + "], outside the transverse domain");
  }
  const double v = c.hbar * p.momentum / m;
  const double sx = spread(p.packet_width, t, c.hbar, m);
  if (p.start - z * p.packet_width < grid.lower(0) || p.start + v * t + z * sx > grid.upper(0)) {
    throw Error(ErrorCode::kDomainTooSmall, "packet leaves the longitudinal domain before t=" + format_double(t));
  }

  const double d = p.separation / 2.0;
  return normalize(WaveFunction::sample(grid, [&](std::span<const double> q) {
    double transverse = gaussian_amplitude(q[1], d, p.slit_width);
    if (!p.single_slit) transverse += gaussian_amplitude(q[1], -d, p.slit_width);
    return gaussian_amplitude(q[0], p.start, p.packet_width) * transverse *
           std::exp(Complex(0.0, p.momentum * q[0]));
  }));
}

SpinScenario build_spin_scenario(const ScenarioConfig& c) {
  if (c.grid.size() != 1 || c.particles.size() != 1 || c.particles[0].twice_spin != 1) {
    throw Error(ErrorCode::kConfigError, "spin scenario needs one spin-1/2 particle on a 1D grid");
  }
  if (c.potential.family != "spin_gradient") {
    throw Error(ErrorCode::kConfigError, "spin scenario needs the spin_gradient potential");
  }
  const Grid grid = make_grid(c.grid);
  const auto& s = c.spin;
  WaveFunction psi = normalize(WaveFunction::sample_spinor(
      grid, [&](std::span<const double> q) { return Complex(gaussian_amplitude(q[0], s.center, s.width)); },
      s.spinor));
  const double lambda = c.potential.gradient;
  Potential v = Potential::matrix(grid, 2, [&](std::span<const double> q) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = -lambda * q[0];
    m(1, 1) = lambda * q[0];
    return m;
  });
  return SpinScenario{std::move(psi), v.with_schedule(Schedule{c.potential.t_on, c.potential.t_off, 1.0})};
}

WaveFunction build_entangled_pair(const ScenarioConfig& c) {
  if (c.grid.size() != 2 || c.particles.size() != 2 || c.particles[0].dims != 1 ||
      c.particles[0].twice_spin != 0 || c.particles[1].twice_spin != 0) {
    throw Error(ErrorCode::kConfigError, "entangled pair needs two spinless 1D particles");
  }
  const Grid grid = make_grid(c.grid);
  const auto& p = c.pair;
  const Grid g1 = make_grid({grid.axis(0)});
  const Grid g2 = make_grid({grid.axis(1)});
  auto g = [&](double sign) {
    return WaveFunction::sample(g1, [&](std::span<const double> q) {
      return gaussian_amplitude(q[0], 0.0, p.width) * std::exp(Complex(0.0, sign * p.momentum * q[0]));
    });
  };
  auto h = [&](double sign) {
    return WaveFunction::sample(g2, [&](std::span<const double> q) {
      return Complex(gaussian_amplitude(q[0], sign * p.separation / 2.0, p.width));
    });
  };
  const WaveFunction g1p = g(1.0), g2m = g(-1.0), h1 = h(1.0), h2 = h(-1.0);
  // The control keeps both x2 packets so that both probe points carry density.
  if (p.factorized) return normalize(tensor_product(g1p, linear_combination(1.0, h1, 1.0, h2)));
  if (fidelity(g1p, g2m) > 1.0 - kFactorizedTolerance || fidelity(h1, h2) > 1.0 - kFactorizedTolerance) {
    throw Error(ErrorCode::kFactorizableSpec, "the two terms of the entangled state are proportional");
  }
  return normalize(linear_combination(1.0, tensor_product(g1p, h1), 1.0, tensor_product(g2m, h2)));
}

MeasurementSetup build_measurement(const ScenarioConfig& c) {
  const auto& m = c.measurement;
  MeasurementSetup s;
  s.x_grid = std::make_shared<const Grid>(make_grid({m.system_axis}));
  s.y_grid = std::make_shared<const Grid>(make_grid({m.pointer_axis}));
  // Normalized Hermite functions by the three-term recursion in xi = sqrt(m omega / hbar) x.
  const double scale = std::sqrt(m.omega);
  std::vector<std::vector<double>> phi;
  const std::size_t nx = s.x_grid->size();
  for (std::size_t n = 0; n < m.coefficients.size(); ++n) {
    std::vector<double> f(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      const double xi = scale * s.x_grid->coordinate(0, i);
      if (n == 0) {
        f[i] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
      } else {
        const double prev2 = n >= 2 ? phi[n - 2][i] : 0.0;
        f[i] = std::sqrt(2.0 / static_cast<double>(n)) * xi * phi[n - 1][i] -
               std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n)) * prev2;
      }
    }
    phi.push_back(f);
    std::vector<Complex> amps(f.begin(), f.end());
    s.eigenstates.push_back(normalize(WaveFunction(s.x_grid, 1, std::move(amps))));
  }
  s.eigenvalues = m.eigenvalues;
  s.coefficients = m.coefficients;
  s.pointer = normalize(WaveFunction::sample(*s.y_grid, [&](std::span<const double> q) {
    return Complex(gaussian_amplitude(q[0], 0.0, m.pointer_width));
  }));
  s.coupling = m.coupling;
  s.duration = m.duration;
  s.pointer_mass = m.pointer_mass;
  s.system_mass = 1.0;
  s.hbar = 1.0;
  s.snapshot_dt = m.snapshot_dt;
  s.trajectory_dt = m.trajectory_dt;
  return s;
}

double boundary_mass(const WaveFunction& psi) {
  const Grid& g = psi.grid();
  const DensityField rho = density(psi);
  const std::size_t d = g.dims();
  std::vector<std::size_t> band(d);
  for (std::size_t j = 0; j < d; ++j) band[j] = std::max<std::size_t>(1, g.extent(j) / 32);
  std::vector<std::size_t> idx(d);
  double edge = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    total += rho.rho[i];
    g.unflatten(i, idx);
    for (std::size_t j = 0; j < d; ++j) {
      if (idx[j] < band[j] || idx[j] >= g.extent(j) - band[j]) {
        edge += rho.rho[i];
        break;
      }
    }
  }
  return total > 0.0 ? edge / total : 0.0;
}

PreparedScenario prepare_scenario(const ScenarioConfig& c) {
  PreparedScenario p;
  p.config = c;
  if (c.kind == ScenarioKind::kMeasurement) {
    MeasurementSetup s = build_measurement(c);
    validate(s);
    p.measurement = std::move(s);
    return p;
  }
  try {
    p.grid = std::make_shared<const Grid>(make_grid(c.grid));
  } catch (const Error& e) {
    fail("grid", e.what());
  }
  p.system = ParticleSystem(c.particles, c.hbar);
  switch (c.kind) {
    case ScenarioKind::kFreePacket:
    case ScenarioKind::kHarmonic: {
      if (c.particles.size() != 1 || c.particles[0].twice_spin != 0) {
        fail("particles", "needs one spinless particle");
      }
      if ((c.kind == ScenarioKind::kHarmonic) != (c.potential.family == "harmonic")) {
        fail("potential.family", c.kind == ScenarioKind::kHarmonic ? "must be harmonic" : "must be zero");
      }
      const auto& gs = c.gaussian;
      p.initial = normalize(WaveFunction::sample(*p.grid, [&](std::span<const double> q) {
        Complex a(1.0);
        for (std::size_t j = 0; j < q.size(); ++j) {
          a *= gaussian_amplitude(q[j], gs.center[j], gs.width[j]) * std::exp(Complex(0.0, gs.momentum[j] * q[j]));
        }
        return a;
      }));
      if (c.potential.family == "harmonic") {
        const double w2 = c.potential.omega * c.potential.omega;
        const double mass = c.particles[0].mass;
        p.potential = Potential::scalar(*p.grid, [&](std::span<const double> q) {
          double r2 = 0.0;
          for (double x : q) r2 += x * x;
          return 0.5 * mass * w2 * r2;
        });
      } else {
        p.potential = Potential::zero(*p.grid);
      }
      break;
    }
    case ScenarioKind::kDoubleSlit:
      if (c.potential.family != "zero") fail("potential.family", "must be zero");
      p.initial = build_double_slit(c);
      p.potential = Potential::zero(*p.grid);
      break;
    case ScenarioKind::kSpin: {
      SpinScenario s = build_spin_scenario(c);
      p.initial = std::move(s.initial);
      p.potential = std::move(s.potential);
      break;
    }
    case ScenarioKind::kEntangledPair:
      if (c.potential.family != "zero") fail("potential.family", "must be zero");
      p.initial = build_entangled_pair(c);
      p.potential = Potential::zero(*p.grid);
      break;
    case ScenarioKind::kMeasurement:
      break;
  }
  p.initial = WaveFunction(p.grid, p.initial.components(),
                           std::vector<Complex>(p.initial.amplitudes().begin(), p.initial.amplitudes().end()),
                           0.0, true);
  const double edge = boundary_mass(p.initial);
  if (edge > c.accuracy.domain_margin) {
    throw Error(ErrorCode::kDomainTooSmall,
                "initial state has mass " + format_double(edge) + " within the boundary band");
  }
  return p;
}

std::vector<std::optional<double>> screen_crossings(const std::vector<Trajectory>& trajectories,
                                                    std::size_t axis, double position,
                                                    std::size_t transverse) {
  std::vector<std::optional<double>> out(trajectories.size());
  for (std::size_t m = 0; m < trajectories.size(); ++m) {
    const Trajectory& tr = trajectories[m];
    for (std::size_t i = 1; i < tr.sample_count(); ++i) {
      const auto a = tr.sample(i - 1);
      const auto b = tr.sample(i);
      if (a[axis] < position && b[axis] >= position) {
        const double w = (position - a[axis]) / (b[axis] - a[axis]);
        out[m] = a[transverse] + w * (b[transverse] - a[transverse]);
        break;
      }
    }
  }
  return out;
}

std::size_t axis_crossings(const std::vector<Trajectory>& trajectories, std::size_t axis) {
  std::size_t n = 0;
  for (const auto& tr : trajectories) {
    if (tr.sample_count() == 0) continue;
    const bool positive = tr.sample(0)[axis] > 0.0;
    for (std::size_t i = 1; i < tr.sample_count(); ++i) {
      if ((tr.sample(i)[axis] > 0.0) != positive) {
        ++n;
        break;
      }
    }
  }
  return n;
}

std::vector<std::size_t> histogram_peaks(const std::vector<std::size_t>& counts, const PeakCriteria& k) {
  std::vector<std::size_t> peaks;
  const std::size_t n = counts.size();
  if (n == 0) return peaks;
  const double top = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  if (top == 0.0) return peaks;
  auto h = [&](std::size_t i) { return static_cast<double>(counts[i]); };
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? h(i - 1) : -1.0;
    const double right = i + 1 < n ? h(i + 1) : -1.0;
    if (!(h(i) > left && h(i) >= right && h(i) >= k.min_height * top)) continue;
    // Walk outwards until a higher bin (an equal bin on the left counts as
    // higher, so a flat top yields one peak), tracking the lowest point.
    double left_min = h(i), right_min = h(i);
    for (std::size_t j = i; j > 0 && h(j - 1) < h(i); --j) left_min = std::min(left_min, h(j - 1));
    for (std::size_t j = i; j + 1 < n && h(j + 1) <= h(i); ++j) right_min = std::min(right_min, h(j + 1));
    const double base = std::max(left_min, right_min);
    const double prominence = h(i) - base;
    if (prominence > 0.0 && prominence >= k.min_prominence * top &&
        prominence >= k.significance * std::sqrt(h(i) + base)) {
      peaks.push_back(i);
    }
  }
  return peaks;
}

SpinClusters spin_clusters(const WaveFunctionHistory& history, const std::vector<Trajectory>& trajectories,
                           double support_tail) {
  SpinClusters out;
  const WaveFunction& last = history.snapshots.back();
  if (last.components() != 2 || last.grid().dims() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "spin clusters need a 1D two-component history");
  }
  const double total = norm_squared(last);
  for (std::size_t c = 0; c < 2; ++c) out.predicted[c] = norm_squared(component_plane(last, c)) / total;
  const bool both = out.predicted[0] > 1e-12 && out.predicted[1] > 1e-12;

  // Gap between the down (lower) and up (upper) supports at every snapshot.
  std::vector<std::optional<Interval>> gaps(history.size());
  if (both) {
    for (std::size_t j = 0; j < history.size(); ++j) {
      const Interval up = support_interval(component_plane(history.snapshots[j], 0), support_tail);
      const Interval down = support_interval(component_plane(history.snapshots[j], 1), support_tail);
      if (down.hi < up.lo) gaps[j] = Interval{down.hi, up.lo};
    }
    std::size_t first = history.size();
    while (first > 0 && gaps[first - 1]) --first;
    out.separated = first < history.size();
    if (!out.separated) {
      throw Error(ErrorCode::kSeparationTooSmall, "spinor components are not separated by the end of the run");
    }
    out.separation_time = history.snapshots[first].time();
    const double t0 = history.start_time();
    for (const auto& tr : trajectories) {
      if (tr.reason != TerminationReason::kCompleted) continue;
      for (std::size_t i = 0; i < tr.sample_count(); ++i) {
        const double t = tr.times[i];
        if (t < out.separation_time - 1e-12) continue;
        const auto j = static_cast<std::size_t>(std::llround((t - t0) / history.interval));
        if (j >= gaps.size() || std::abs(t0 + static_cast<double>(j) * history.interval - t) > 1e-9) continue;
        ++out.samples_after_separation;
        if (gaps[j] && gaps[j]->lo < tr.sample(i)[0] && tr.sample(i)[0] < gaps[j]->hi) ++out.gap_samples;
      }
    }
    if (out.samples_after_separation > 0) {
      out.gap_occupancy =
          static_cast<double>(out.gap_samples) / static_cast<double>(out.samples_after_separation);
    }
  }
  const double cut = both ? 0.5 * (gaps.back()->lo + gaps.back()->hi)
                          : (out.predicted[0] >= out.predicted[1] ? -std::numeric_limits<double>::infinity()
                                                                  : std::numeric_limits<double>::infinity());
  std::size_t n = 0;
  for (const auto& tr : trajectories) {
    if (tr.reason != TerminationReason::kCompleted) continue;
    ++n;
    ++out.counts[tr.final_position()[0] > cut ? 0 : 1];
  }
  for (std::size_t c = 0; c < 2; ++c) {
    out.weights[c] = n > 0 ? static_cast<double>(out.counts[c]) / static_cast<double>(n) : 0.0;
    out.z_scores[c] = binomial_z(out.weights[c], out.predicted[c], n);
  }
  return out;
}

NonlocalReport nonlocal_velocity(const WaveFunction& psi, const ParticleSystem& system, double x1,
                                 double x2a, double x2b) {
  if (psi.grid().dims() != 2 || system.particle_count() != 2) {
    throw Error(ErrorCode::kInvalidArgument, "nonlocal probe needs two 1D particles");
  }
  NonlocalReport r{x1, x2a, x2b};
  r.v1a = velocity_at(psi, Configuration{{x1, x2a}, psi.time()}, system)[0];
  r.v1b = velocity_at(psi, Configuration{{x1, x2b}, psi.time()}, system)[0];
  r.difference = std::abs(r.v1a - r.v1b);
  return r;
}

Verdict make_verdict(std::string name, double value, std::string relation, double threshold) {
  Verdict v{std::move(name), value, threshold, std::move(relation), false};
  if (v.relation == "<=") v.passed = value <= threshold;
  else if (v.relation == "<") v.passed = value < threshold;
  else if (v.relation == ">=") v.passed = value >= threshold;
  else if (v.relation == ">") v.passed = value > threshold;
  else if (v.relation == "==") v.passed = value == threshold;
  else throw Error(ErrorCode::kInvalidArgument, "unknown relation " + v.relation);
  return v;
}

bool ScenarioSummary::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

nlohmann::ordered_json to_json(const Verdict& v) {
  return {{"name", v.name}, {"value", v.value}, {"relation", v.relation},
          {"threshold", v.threshold}, {"passed", v.passed}};
}

nlohmann::ordered_json to_json(const CollapseResult& r, bool with_trajectory) {
  ojson j = {{"seed", r.seed},
             {"outcome", r.outcome},
             {"outcome_value", r.outcome_value},
             {"pointer_position", r.pointer_position},
             {"system_position", r.system_position},
             {"normalization_abs", r.normalization},
             {"fidelity", r.fidelity},
             {"discarded_mass", r.discarded_mass}};
  if (with_trajectory) {
    ojson samples = ojson::array();
    for (std::size_t i = 0; i < r.trajectory.sample_count(); ++i) {
      const auto q = r.trajectory.sample(i);
      samples.push_back({r.trajectory.times[i], q[0], q[1]});
    }
    j["trajectory"] = {{"columns", {"t", "x", "y"}}, {"samples", std::move(samples)}};
  }
  return j;
}

ScenarioSummary run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  return run_scenario(prepare_scenario(config), options);
}

ScenarioSummary run_scenario(const PreparedScenario& p, const RunOptions& o) {
  if (p.measurement) return run_measurement(p, o);
  const ScenarioConfig& c = p.config;
  const std::uint64_t seed = o.seed.value_or(c.seed);
  const std::size_t n = o.ensemble_size.value_or(c.ensemble_size);
  if (n == 0) throw Error(ErrorCode::kConfigError, "ensemble size must be >= 1");
  const Potential& v = *p.potential;

  EvolutionParams ep;
  ep.dt = c.schedule.dt;
  ep.store_stride = c.schedule.snapshot_stride;
  const WaveFunctionHistory history = evolve(p.initial, v, p.system, 0.0, c.schedule.duration, ep);

  ScenarioSummary s;
  s.scenario = c.name;
  s.seed = seed;

  double drift = 0.0, edge = 0.0;
  ojson snaps = ojson::array();
  for (const auto& w : history.snapshots) {
    const double nrm = norm(w);
    const double e = boundary_mass(w);
    drift = std::max(drift, std::abs(nrm - 1.0));
    edge = std::max(edge, e);
    snaps.push_back({{"t", w.time()}, {"norm", nrm}, {"boundary_mass", e}});
  }
  s.verdicts.push_back(make_verdict("unitarity.max_norm_drift", drift, "<", kUnitarityTolerance));
  s.verdicts.push_back(make_verdict("domain.max_boundary_mass", edge, "<=", c.accuracy.domain_margin));

  const GuidingHistory guide(history, o.threads);
  const Ensemble start = sample_density(p.initial, n, seed, o.threads);
  TrajectoryOptions topts;
  topts.dt = c.schedule.trajectory_dt;
  topts.output_stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(history.interval / topts.dt)));
  topts.boundary = BoundaryPolicy::kTerminate;
  std::vector<Trajectory> trajectories = integrate_ensemble(start, guide, p.system, topts, o.threads);
  for (auto& tr : trajectories) tr.scenario = c.name;

  std::size_t completed = 0;
  for (const auto& tr : trajectories) completed += tr.reason == TerminationReason::kCompleted;
  const double incomplete = static_cast<double>(n - completed) / static_cast<double>(n);
  s.verdicts.push_back(make_verdict("trajectories.incomplete_fraction", incomplete, "<=", kIncompleteFraction));

  const WaveFunction& last = history.snapshots.back();
  const Ensemble final = final_ensemble(trajectories, history.end_time());
  const EquivarianceReport eq = compare_to_density(final, last);
  for (const auto& chk : eq.checks) {
    s.verdicts.push_back(make_verdict("equivariance." + chk.name, chk.statistic, "<", chk.threshold));
  }

  s.report = {{"scenario", c.name},
              {"kind", to_string(c.kind)},
              {"seed", seed},
              {"ensemble_size", n},
              {"completed", completed},
              {"duration", c.schedule.duration},
              {"equivariance", equivariance_json(eq)}};

  const Grid& g = *p.grid;
  std::vector<double> xs;
  for (const auto& tr : trajectories) {
    if (tr.reason == TerminationReason::kCompleted) xs.push_back(tr.final_position()[0]);
  }
  Histogram hist;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> extra;

  switch (c.kind) {
    case ScenarioKind::kDoubleSlit: {
      const auto& ds = c.double_slit;
      const auto hits = screen_crossings(trajectories, 0, ds.screen, 1);
      std::vector<double> ys;
      std::vector<double> finals;
      for (std::size_t m = 0; m < trajectories.size(); ++m) {
        if (hits[m]) ys.push_back(*hits[m]);
        if (trajectories[m].reason == TerminationReason::kCompleted) {
          finals.push_back(trajectories[m].final_position()[1]);
        }
      }
      hist = make_histogram(ys, ds.screen_lower, ds.screen_upper, ds.bins);
      extra.emplace_back("final", make_histogram(finals, ds.screen_lower, ds.screen_upper, ds.bins).counts);
      hist.predicted = predicted_counts(last, 1, hist.edges, finals.size());
      const auto peaks = histogram_peaks(hist.counts);
      const std::size_t crossings = axis_crossings(trajectories, 1);
      double asym = 0.0;
      for (const auto& w : history.snapshots) asym = std::max(asym, mirror_asymmetry(w));
      ojson centres = ojson::array();
      for (auto i : peaks) centres.push_back(hist.center(i));
      s.report["screen"] = {{"position", ds.screen},
                            {"arrivals", ys.size()},
                            {"peaks", peaks.size()},
                            {"peak_centres", std::move(centres)},
                            {"axis_crossings", crossings}};
      if (ds.single_slit) {
        s.verdicts.push_back(make_verdict("screen.maxima", static_cast<double>(peaks.size()), "==", 1.0));
      } else {
        s.verdicts.push_back(make_verdict("screen.maxima", static_cast<double>(peaks.size()), ">=",
                                          static_cast<double>(ds.min_fringes)));
        s.verdicts.push_back(make_verdict("trajectories.axis_crossings", static_cast<double>(crossings), "==", 0.0));
        s.verdicts.push_back(make_verdict("symmetry.max_density_asymmetry", asym, "<=", kSymmetryTolerance));
      }
      s.verdicts.push_back(make_verdict("screen.arrival_fraction",
                                        static_cast<double>(ys.size()) / static_cast<double>(n), ">=",
                                        1.0 - kIncompleteFraction));
      break;
    }
    case ScenarioKind::kSpin: {
      const SpinClusters cl = spin_clusters(history, trajectories, kSpinSupportTail);
      s.report["clusters"] = {{"counts", cl.counts},
                              {"weights", cl.weights},
                              {"predicted", cl.predicted},
                              {"z", cl.z_scores},
                              {"separation_time", cl.separation_time},
                              {"gap_samples", cl.gap_samples},
                              {"samples_after_separation", cl.samples_after_separation},
                              {"gap_occupancy", cl.gap_occupancy}};
      s.verdicts.push_back(make_verdict("clusters.abs_z", std::abs(cl.z_scores[0]), "<=", kMaxZ));
      s.verdicts.push_back(make_verdict("clusters.gap_occupancy", cl.gap_occupancy, "<", kGapOccupancy));
      break;
    }
    case ScenarioKind::kEntangledPair: {
      const auto& pr = c.pair;
      const NonlocalReport nl =
          nonlocal_velocity(p.initial, p.system, pr.probe_x1, pr.separation / 2.0, -pr.separation / 2.0);
      s.report["nonlocality"] = {{"x1", nl.x1}, {"x2a", nl.x2a}, {"x2b", nl.x2b},
                                 {"v1a", nl.v1a}, {"v1b", nl.v1b}, {"difference", nl.difference}};
      if (pr.factorized) {
        s.verdicts.push_back(make_verdict("nonlocality.velocity_difference", nl.difference, "<", kFactorizedTolerance));
      } else {
        s.verdicts.push_back(make_verdict("nonlocality.velocity_difference", nl.difference, ">", pr.epsilon));
      }
      break;
    }
    default:
      break;
  }
  if (hist.bins() == 0) {
    hist = make_histogram(xs, g.lower(0), g.upper(0), kFinalHistogramBins);
    hist.predicted = predicted_counts(last, 0, hist.edges, xs.size());
  }

  ojson meta = {{"scenario", c.name},
                {"grid", grid_json(g)},
                {"components", p.initial.components()},
                {"dt", c.schedule.dt},
                {"snapshot_interval", history.interval},
                {"start_time", history.start_time()},
                {"end_time", history.end_time()},
                {"snapshots", std::move(snaps)}};
  finish(s, output_dir(p, o), o,
         {{"history_meta.json", meta.dump(2) + "\n"},
          {"trajectories.csv", trajectories_csv(trajectories, c.export_limit)},
          {"screen_histogram.csv", histogram_csv(hist, extra)}});
  return s;
}

}  // namespace bohm
