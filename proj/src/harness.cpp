#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "epd/harness.hpp"

namespace epd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_number(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  return v;
}

long parse_integer(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + value + "'");
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != value.size())
    throw ConfigError("config: '" + key + "' expects a nonnegative integer, got '" +
                      value + "'");
  return v;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* law_name(ControlLaw law) {
  switch (law) {
    case ControlLaw::EpdIntegrator:
    case ControlLaw::EpdChained:
      return "epd";
    case ControlLaw::EpdGeneric:
      return "epd-generic";
    case ControlLaw::Pomet:
      return "pomet";
    case ControlLaw::Astolfi:
      return "astolfi";
    case ControlLaw::None:
      return "none";
  }
  return "none";
}

std::string sanitize_filename(const std::string& name) {
  std::string out = name.empty() ? std::string("scenario") : name;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

}  // namespace

std::optional<std::string> validate_scenario(const ScenarioConfig& config) {
  const SystemModel& model = config.model;
  if (model.kind == SystemModel::Kind::Integrator && model.n != 3)
    throw ConfigError("config: the three-state model has fixed dimension 3, got n = " +
                      std::to_string(model.n));
  if (model.n < 3 || model.n > kMaxStateDim)
    throw ConfigError("config: state dimension n = " + std::to_string(model.n) +
                      " outside supported range [3, " + std::to_string(kMaxStateDim) +
                      "]");
  if (config.x0.size() != model.n)
    throw ConfigError("config: x0 has " + std::to_string(config.x0.size()) +
                      " entries but the model state dimension is " +
                      std::to_string(model.n));
  for (int i = 0; i < config.x0.size(); ++i)
    if (!std::isfinite(config.x0[i]))
      throw ConfigError("config: x0 entry " + std::to_string(i + 1) + " is not finite");

  const SolverSettings& sol = config.solver;
  if (!(sol.step > 0.0))
    throw ConfigError("config: step must be positive, got " + fmt_full(sol.step));
  if (!(sol.t_final > 0.0))
    throw ConfigError("config: t_final must be positive, got " + fmt_full(sol.t_final));
  if (sol.record_every < 1)
    throw ConfigError("config: record_every must be >= 1, got " +
                      std::to_string(sol.record_every));
  if (sol.step * sol.record_every > sol.t_final)
    throw ConfigError("config: recording stride step*record_every = " +
                      fmt_full(sol.step * sol.record_every) + " exceeds t_final = " +
                      fmt_full(sol.t_final));
  if (sol.method == SolverMethod::Rk45 && (!(sol.abs_tol > 0.0) || !(sol.rel_tol > 0.0)))
    throw ConfigError("config: rk45 tolerances must be positive");

  const NoiseSettings& noise = config.noise;
  if (noise.enabled) {
    if (noise.amplitude < 0.0)
      throw ConfigError("config: noise_amplitude must be nonnegative, got " +
                        fmt_full(noise.amplitude));
    if (!(noise.sample_time > 0.0))
      throw ConfigError("config: noise_sample_time must be positive, got " +
                        fmt_full(noise.sample_time));
  }

  const ControllerSpec& ctrl = config.controller;
  if ((ctrl.law == ControlLaw::EpdIntegrator || ctrl.law == ControlLaw::Pomet ||
       ctrl.law == ControlLaw::Astolfi) &&
      model.n != 3)
    throw ConfigError(std::string("config: controller '") + law_name(ctrl.law) +
                      "' is a three-state design; model has n = " +
                      std::to_string(model.n));
  if (ctrl.is_epd()) {
    if (!(ctrl.epd.gamma > 0.0))
      throw ConfigError("config: gamma must be positive, got " +
                        fmt_full(ctrl.epd.gamma));
    if (ctrl.epd.beta_ell < 0.0)
      throw ConfigError("config: beta_ell must be nonnegative, got " +
                        fmt_full(ctrl.epd.beta_ell));
    if (ctrl.epd.beta_ell == 0.0 && ctrl.epd.gamma != 1.0)
      throw ConfigError("config: state regulation (beta_ell = 0) requires gamma = 1, "
                        "got gamma = " + fmt_full(ctrl.epd.gamma));
    if (ctrl.epd.beta_ell == 0.0 && inadmissible_indicator(config.x0) == 0.0)
      return "warning: x0 lies in the excluded set ((x1^2+x2^2)*x3^2 = 0); "
             "convergence to the origin is not guaranteed from this start";
  }
  return std::nullopt;
}

// --- Config file I/O ----------------------------------------------------------

ScenarioConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = to_lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    if (!kv.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                        key + "'");
  }

  static const char* kKnown[] = {"name", "model", "n", "controller", "gamma",
                                 "beta_ell", "k", "p2", "p3", "x0", "t_final",
                                 "step", "method", "abs_tol", "rel_tol",
                                 "record_every", "noise", "noise_amplitude",
                                 "noise_sample_time", "seed"};
  for (const auto& [key, value] : kv) {
    (void)value;
    if (std::find_if(std::begin(kKnown), std::end(kKnown),
                     [&](const char* k) { return key == k; }) == std::end(kKnown))
      throw ConfigError("config: unknown key '" + key + "'");
  }

  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  ScenarioConfig c;
  if (const std::string* v = get("name")) c.name = *v;

  std::string model_s = "integrator";
  if (const std::string* v = get("model")) model_s = to_lower(*v);
  int n = model_s == "chained" ? 4 : 3;
  if (const std::string* v = get("n")) n = static_cast<int>(parse_integer("n", *v));
  if (model_s == "integrator") {
    if (n != 3)
      throw ConfigError("config: model 'integrator' has fixed dimension 3, got n = " +
                        std::to_string(n));
    c.model = SystemModel::integrator();
  } else if (model_s == "chained") {
    if (n < 3 || n > kMaxStateDim)
      throw ConfigError("config: 'n' must be in [3, " + std::to_string(kMaxStateDim) +
                        "], got " + std::to_string(n));
    c.model = SystemModel::chained(n);
  } else {
    throw ConfigError("config: unknown model '" + model_s +
                      "' (expected integrator|chained)");
  }

  std::string ctrl_s = "epd";
  if (const std::string* v = get("controller")) ctrl_s = to_lower(*v);
  if (ctrl_s == "epd")
    c.controller.law = c.model.kind == SystemModel::Kind::Chained
                           ? ControlLaw::EpdChained
                           : ControlLaw::EpdIntegrator;
  else if (ctrl_s == "epd-generic")
    c.controller.law = ControlLaw::EpdGeneric;
  else if (ctrl_s == "pomet")
    c.controller.law = ControlLaw::Pomet;
  else if (ctrl_s == "astolfi")
    c.controller.law = ControlLaw::Astolfi;
  else if (ctrl_s == "none")
    c.controller.law = ControlLaw::None;
  else
    throw ConfigError("config: unknown controller '" + ctrl_s +
                      "' (expected epd|epd-generic|pomet|astolfi|none)");

  if (const std::string* v = get("gamma")) c.controller.epd.gamma = parse_number("gamma", *v);
  if (const std::string* v = get("beta_ell"))
    c.controller.epd.beta_ell = parse_number("beta_ell", *v);
  if (const std::string* v = get("k")) c.controller.astolfi.k = parse_number("k", *v);
  if (const std::string* v = get("p2")) c.controller.astolfi.p2 = parse_number("p2", *v);
  if (const std::string* v = get("p3")) c.controller.astolfi.p3 = parse_number("p3", *v);

  const std::string* x0_s = get("x0");
  if (!x0_s) throw ConfigError("config: missing required key 'x0'");
  {
    std::istringstream xs(*x0_s);
    std::vector<double> entries;
    std::string tok;
    while (xs >> tok) entries.push_back(parse_number("x0", tok));
    c.x0.resize(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i)
      c.x0[static_cast<Eigen::Index>(i)] = entries[i];
  }

  if (const std::string* v = get("t_final")) c.solver.t_final = parse_number("t_final", *v);
  if (const std::string* v = get("step")) c.solver.step = parse_number("step", *v);
  if (const std::string* v = get("method")) {
    const std::string m = to_lower(*v);
    if (m == "rk4")
      c.solver.method = SolverMethod::Rk4;
    else if (m == "rk45")
      c.solver.method = SolverMethod::Rk45;
    else
      throw ConfigError("config: unknown method '" + m + "' (expected rk4|rk45)");
  }
  if (const std::string* v = get("abs_tol")) c.solver.abs_tol = parse_number("abs_tol", *v);
  if (const std::string* v = get("rel_tol")) c.solver.rel_tol = parse_number("rel_tol", *v);
  if (const std::string* v = get("record_every"))
    c.solver.record_every = static_cast<int>(parse_integer("record_every", *v));

  if (const std::string* v = get("noise")) {
    const std::string s = to_lower(*v);
    if (s == "on")
      c.noise.enabled = true;
    else if (s == "off")
      c.noise.enabled = false;
    else
      throw ConfigError("config: 'noise' expects on|off, got '" + s + "'");
  }
  if (const std::string* v = get("noise_amplitude"))
    c.noise.amplitude = parse_number("noise_amplitude", *v);
  if (const std::string* v = get("noise_sample_time"))
    c.noise.sample_time = parse_number("noise_sample_time", *v);
  if (const std::string* v = get("seed")) c.noise.seed = parse_seed("seed", *v);

  validate_scenario(c);  // throw on hard errors; warnings surface at run time
  return c;
}

void dump_config(const ScenarioConfig& config, std::ostream& out) {
  out << "name = " << config.name << '\n';
  out << "model = "
      << (config.model.kind == SystemModel::Kind::Chained ? "chained" : "integrator")
      << '\n';
  out << "n = " << config.model.n << '\n';
  out << "controller = " << law_name(config.controller.law) << '\n';
  if (config.controller.is_epd()) {
    out << "gamma = " << fmt_full(config.controller.epd.gamma) << '\n';
    out << "beta_ell = " << fmt_full(config.controller.epd.beta_ell) << '\n';
  }
  if (config.controller.law == ControlLaw::Astolfi) {
    out << "k = " << fmt_full(config.controller.astolfi.k) << '\n';
    out << "p2 = " << fmt_full(config.controller.astolfi.p2) << '\n';
    out << "p3 = " << fmt_full(config.controller.astolfi.p3) << '\n';
  }
  out << "x0 =";
  for (int i = 0; i < config.x0.size(); ++i) out << ' ' << fmt_full(config.x0[i]);
  out << '\n';
  out << "t_final = " << fmt_full(config.solver.t_final) << '\n';
  out << "step = " << fmt_full(config.solver.step) << '\n';
  out << "method = " << (config.solver.method == SolverMethod::Rk45 ? "rk45" : "rk4")
      << '\n';
  out << "abs_tol = " << fmt_full(config.solver.abs_tol) << '\n';
  out << "rel_tol = " << fmt_full(config.solver.rel_tol) << '\n';
  out << "record_every = " << config.solver.record_every << '\n';
  out << "noise = " << (config.noise.enabled ? "on" : "off") << '\n';
  out << "noise_amplitude = " << fmt_full(config.noise.amplitude) << '\n';
  out << "noise_sample_time = " << fmt_full(config.noise.sample_time) << '\n';
  out << "seed = " << config.noise.seed << '\n';
}

// --- Presets -------------------------------------------------------------------

namespace {

ScenarioConfig epd3_preset(const std::string& name, double gamma, double beta_ell) {
  ScenarioConfig c;
  c.name = name;
  c.model = SystemModel::integrator();
  c.controller.law = ControlLaw::EpdIntegrator;
  c.controller.epd = {beta_ell, gamma};
  c.x0 = make_state({3.0, 2.0, 2.0});
  c.solver.step = 1e-3;
  c.solver.t_final = 20.0;
  c.solver.record_every = 10;
  return c;
}

ScenarioConfig e4_preset(const std::string& name, double gamma, double x4) {
  ScenarioConfig c;
  c.name = name;
  c.model = SystemModel::chained(4);
  c.controller.law = ControlLaw::EpdChained;
  c.controller.epd = {0.5, gamma};
  c.x0 = make_state({0.5, 1.0, 0.1, x4});
  c.solver.step = 1e-3;
  c.solver.t_final = 100.0;
  c.solver.record_every = 10;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"E1", "E2", "E2-pomet", "E3", "E3-astolfi", "E4a", "E4b", "E4c", "E4d"};
}

std::vector<ScenarioConfig> preset_runs(const std::string& name) {
  if (name == "E1")
    return {epd3_preset("E1-beta0.5", 5.0, 0.5), epd3_preset("E1-beta2.0", 5.0, 2.0)};
  if (name == "E2") return {epd3_preset("E2", 1.0, 0.0)};
  if (name == "E2-pomet") {
    ScenarioConfig c = epd3_preset("E2-pomet", 1.0, 0.0);
    c.controller = ControllerSpec{};
    c.controller.law = ControlLaw::Pomet;
    return {c};
  }
  if (name == "E3") {
    // Measurement dither on top of the state-regulation run. The undithered
    // loop reaches |x| ~ 0.65 by t = 20 and crawls afterward (the late decay
    // is slower than exponential), so the horizon is stretched until the
    // "small neighborhood" end state is actually visible.
    ScenarioConfig c = epd3_preset("E3", 1.0, 0.0);
    c.solver.t_final = 200.0;
    c.noise.enabled = true;
    c.noise.amplitude = 0.1;
    c.noise.sample_time = 0.01;
    c.noise.seed = 1;
    return {c};
  }
  if (name == "E3-astolfi") {
    // Same dither applied to the division-based baseline. Escape is a rare
    // event per noise draw, so a long horizon is needed before most seeds
    // have blown up; terminated runs stop recording at the event.
    ScenarioConfig c = epd3_preset("E3-astolfi", 1.0, 0.0);
    c.controller = ControllerSpec{};
    c.controller.law = ControlLaw::Astolfi;
    c.solver.t_final = 2000.0;
    c.solver.record_every = 100;
    c.noise.enabled = true;
    c.noise.amplitude = 0.1;
    c.noise.sample_time = 0.01;
    c.noise.seed = 1;
    return {c};
  }
  if (name == "E4a") return {e4_preset("E4a", 0.5, 0.5)};
  if (name == "E4b") {
    // The larger x4(0) run heads to the undesired invariant set, but its x2
    // component dies off slowly; classification at the default horizon is
    // still ambiguous, so this run gets a long horizon with sparser samples.
    ScenarioConfig c = e4_preset("E4b", 0.5, 2.0);
    c.solver.t_final = 2500.0;
    c.solver.record_every = 100;
    return {c};
  }
  if (name == "E4c") return {e4_preset("E4c", 5.0, 1.0)};
  if (name == "E4d") return {e4_preset("E4d", 50.0, 1.0)};

  std::string names;
  for (const std::string& p : preset_names()) {
    if (!names.empty()) names += ", ";
    names += p;
  }
  throw ConfigError("unknown preset '" + name + "' (expected one of: " + names + ")");
}

// --- Critical-parameter search ---------------------------------------------------

double find_critical_x4(double gamma, double beta_ell, const Eigen::Vector3d& base_x0,
                        double lo, double hi, double tol) {
  if (!(lo < hi))
    throw ConfigError("bisection: need lo < hi, got [" + fmt_full(lo) + ", " +
                      fmt_full(hi) + "]");
  if (!(tol > 0.0)) throw ConfigError("bisection: tol must be positive");

  ScenarioConfig probe;
  probe.model = SystemModel::chained(4);
  probe.controller.law = ControlLaw::EpdChained;
  probe.controller.epd = {beta_ell, gamma};
  probe.solver.step = 1e-3;
  probe.solver.t_final = kClassificationHorizon;
  probe.solver.record_every = 1000;
  probe.x0 = make_state({base_x0[0], base_x0[1], base_x0[2], lo});
  validate_scenario(probe);

  auto classify = [&probe](double x4) {
    ScenarioConfig c = probe;
    c.x0[3] = x4;
    const Trajectory traj = integrate(c);
    return check_residual_set_membership(traj.final_state(), 4, c.controller.epd);
  };

  const SetClass class_lo = classify(lo);
  const SetClass class_hi = classify(hi);
  if (class_lo == class_hi)
    throw ConfigError(std::string("bisection: both bracket endpoints classify as ") +
                      set_class_name(class_lo) + "; bracket does not straddle a "
                      "set boundary");

  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (classify(mid) == class_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// --- Batch runner ----------------------------------------------------------------

std::vector<RunOutcome> run_scenarios(const std::vector<ScenarioConfig>& runs,
                                      const RunOptions& options) {
  std::vector<ScenarioConfig> configs = runs;
  std::vector<std::optional<std::string>> warnings(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ScenarioConfig& c = configs[i];
    if (options.seed) c.noise.seed = *options.seed;
    if (options.t_final) c.solver.t_final = *options.t_final;
    if (options.step) c.solver.step = *options.step;
    if (options.noise) c.noise.enabled = *options.noise;
    warnings[i] = validate_scenario(c);
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + options.out_dir +
                      "': " + ec.message());

  // Runs are independent and pure given their configs; integrate them
  // concurrently and write artifacts sequentially afterward.
  std::vector<std::future<Trajectory>> futures;
  futures.reserve(configs.size());
  for (const ScenarioConfig& c : configs)
    futures.push_back(std::async(std::launch::async, [&c] { return integrate(c); }));

  std::vector<RunOutcome> outcomes;
  outcomes.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ScenarioConfig& c = configs[i];
    const Trajectory traj = futures[i].get();

    RunOutcome o;
    o.name = c.name;
    o.termination = traj.termination;
    o.final_state = traj.final_state();
    o.final_diag = traj.diagnostics.back();
    o.warning = warnings[i];
    if (c.model.n >= 4 && c.controller.is_epd())
      o.classification =
          check_residual_set_membership(o.final_state, c.model.n, c.controller.epd);

    const std::string stem =
        (std::filesystem::path(options.out_dir) / sanitize_filename(c.name)).string();
    auto write_file = [&](const std::string& path, auto&& writer) {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw ConfigError("cannot open '" + path + "' for writing");
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("write failed for '" + path + "'");
      o.files.push_back(path);
    };

    write_file(stem + ".csv",
               [&](std::ostream& out) { export_csv(traj, c.model, out); });
    if (options.plots) {
      write_file(stem + "-states.svg", [&](std::ostream& out) {
        export_plot(traj, PlotKind::StatesVsTime, c.model, out);
      });
      write_file(stem + "-energy.svg", [&](std::ostream& out) {
        export_plot(traj, PlotKind::EnergyVsTime, c.model, out);
      });
      write_file(stem + "-phase.svg", [&](std::ostream& out) {
        export_plot(traj, PlotKind::Phase3dProjection, c.model, out);
      });
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

}  // namespace epd
