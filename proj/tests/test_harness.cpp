#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epd/harness.hpp"

using namespace epd;
namespace fs = std::filesystem;

namespace {

ScenarioConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

void check_same_config(const ScenarioConfig& a, const ScenarioConfig& b) {
  CHECK(a.name == b.name);
  CHECK(a.model.kind == b.model.kind);
  CHECK(a.model.n == b.model.n);
  CHECK(a.controller.law == b.controller.law);
  CHECK(a.controller.epd.beta_ell == b.controller.epd.beta_ell);
  CHECK(a.controller.epd.gamma == b.controller.epd.gamma);
  if (a.controller.law == ControlLaw::Astolfi) {
    CHECK(a.controller.astolfi.k == b.controller.astolfi.k);
    CHECK(a.controller.astolfi.p2 == b.controller.astolfi.p2);
    CHECK(a.controller.astolfi.p3 == b.controller.astolfi.p3);
  }
  REQUIRE(a.x0.size() == b.x0.size());
  CHECK((a.x0 - b.x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.solver.step == b.solver.step);
  CHECK(a.solver.t_final == b.solver.t_final);
  CHECK(a.solver.method == b.solver.method);
  CHECK(a.solver.abs_tol == b.solver.abs_tol);
  CHECK(a.solver.rel_tol == b.solver.rel_tol);
  CHECK(a.solver.record_every == b.solver.record_every);
  CHECK(a.noise.enabled == b.noise.enabled);
  CHECK(a.noise.amplitude == b.noise.amplitude);
  CHECK(a.noise.sample_time == b.noise.sample_time);
  CHECK(a.noise.seed == b.noise.seed);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  return dir;
}

Trajectory quick_e1_run(int record_every = 10, double t_final = 20.0) {
  ScenarioConfig c = preset_runs("E1").front();
  c.solver.record_every = record_every;
  c.solver.t_final = t_final;
  return integrate(c);
}

}  // namespace

TEST_CASE("preset catalog") {
  SUBCASE("every advertised name expands and validates") {
    const auto names = preset_names();
    CHECK(names.size() == 9);
    for (const std::string& name : names) {
      const auto runs = preset_runs(name);
      REQUIRE(!runs.empty());
      for (const ScenarioConfig& c : runs) CHECK_NOTHROW(validate_scenario(c));
    }
  }

  SUBCASE("unknown names list the catalog") {
    CHECK_THROWS_WITH_AS(preset_runs("E9"), doctest::Contains("unknown preset"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(preset_runs("E9"), doctest::Contains("E4d"), ConfigError);
  }

  SUBCASE("energy-regulation demo ships two target levels") {
    const auto runs = preset_runs("E1");
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].name == "E1-beta0.5");
    CHECK(runs[1].name == "E1-beta2.0");
    for (const ScenarioConfig& c : runs) {
      CHECK(c.model.kind == SystemModel::Kind::Integrator);
      CHECK(c.controller.law == ControlLaw::EpdIntegrator);
      CHECK(c.controller.epd.gamma == 5.0);
      CHECK(c.solver.t_final == 20.0);
      CHECK(c.solver.step == 1e-3);
      CHECK(c.solver.record_every == 10);
      CHECK(!c.noise.enabled);
      CHECK((c.x0 - make_state({3, 2, 2})).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(runs[0].controller.epd.beta_ell == 0.5);
    CHECK(runs[1].controller.epd.beta_ell == 2.0);
  }

  SUBCASE("state-regulation runs pin gamma = 1 and beta = 0") {
    for (const char* name : {"E2", "E2-pomet", "E3", "E3-astolfi"}) {
      const ScenarioConfig c = preset_runs(name).front();
      CHECK(c.model.n == 3);
      CHECK((c.x0 - make_state({3, 2, 2})).cwiseAbs().maxCoeff() == 0.0);
    }
    const ScenarioConfig e2 = preset_runs("E2").front();
    CHECK(e2.controller.law == ControlLaw::EpdIntegrator);
    CHECK(e2.controller.epd.beta_ell == 0.0);
    CHECK(e2.controller.epd.gamma == 1.0);
    CHECK(e2.solver.t_final == 20.0);
    CHECK(preset_runs("E2-pomet").front().controller.law == ControlLaw::Pomet);

    const ScenarioConfig e3 = preset_runs("E3").front();
    CHECK(e3.noise.enabled);
    CHECK(e3.noise.amplitude == 0.1);
    CHECK(e3.noise.sample_time == 0.01);
    CHECK(e3.noise.seed == 1);
    CHECK(e3.solver.t_final == 200.0);

    const ScenarioConfig ea = preset_runs("E3-astolfi").front();
    CHECK(ea.controller.law == ControlLaw::Astolfi);
    CHECK(ea.controller.astolfi.k == 1.0);
    CHECK(ea.controller.astolfi.p2 == -5.0);
    CHECK(ea.controller.astolfi.p3 == 9.0);
    CHECK(ea.noise.enabled);
    CHECK(ea.solver.t_final == 2000.0);
    CHECK(ea.solver.record_every == 100);
  }

  SUBCASE("four-state family shares the base state and target level") {
    const struct {
      const char* name;
      double gamma;
      double x4;
      double t_final;
    } rows[] = {{"E4a", 0.5, 0.5, 100.0},
                {"E4b", 0.5, 2.0, 2500.0},
                {"E4c", 5.0, 1.0, 100.0},
                {"E4d", 50.0, 1.0, 100.0}};
    for (const auto& row : rows) {
      const ScenarioConfig c = preset_runs(row.name).front();
      CHECK(c.model.kind == SystemModel::Kind::Chained);
      CHECK(c.model.n == 4);
      CHECK(c.controller.law == ControlLaw::EpdChained);
      CHECK(c.controller.epd.beta_ell == 0.5);
      CHECK(c.controller.epd.gamma == row.gamma);
      CHECK(c.x0[0] == 0.5);
      CHECK(c.x0[1] == 1.0);
      CHECK(c.x0[2] == 0.1);
      CHECK(c.x0[3] == row.x4);
      CHECK(c.solver.t_final == row.t_final);
    }
  }
}

TEST_CASE("config text round-trips through dump and parse") {
  for (const std::string& name : preset_names()) {
    for (const ScenarioConfig& c : preset_runs(name)) {
      std::ostringstream out;
      dump_config(c, out);
      check_same_config(c, parse_text(out.str()));
    }
  }

  SUBCASE("dump spells the law names") {
    std::ostringstream out;
    dump_config(preset_runs("E2-pomet").front(), out);
    CHECK(out.str().find("controller = pomet") != std::string::npos);
    const std::string e1 = [] {
      std::ostringstream o;
      dump_config(preset_runs("E1").front(), o);
      return o.str();
    }();
    CHECK(e1.find("controller = epd") != std::string::npos);
    CHECK(e1.find("gamma = 5") != std::string::npos);
  }
}

TEST_CASE("config parsing") {
  SUBCASE("minimal file relies on documented defaults") {
    const ScenarioConfig c = parse_text("x0 = 3 2 2\nbeta_ell = 0.5\n");
    CHECK(c.model.kind == SystemModel::Kind::Integrator);
    CHECK(c.model.n == 3);
    CHECK(c.controller.law == ControlLaw::EpdIntegrator);
    CHECK(c.controller.epd.gamma == 1.0);
    CHECK(c.controller.epd.beta_ell == 0.5);
    CHECK(c.solver.step == 1e-3);
    CHECK(c.solver.t_final == 20.0);
    CHECK(c.solver.record_every == 1);
    CHECK(c.solver.method == SolverMethod::Rk4);
    CHECK(!c.noise.enabled);
  }

  SUBCASE("comments, blank lines, and spacing are tolerated") {
    const ScenarioConfig c = parse_text(
        "# demo\n\n  name   =  spaced out  \nmodel=chained\nn = 5\n"
        "gamma = 2 # trailing comment\nbeta_ell=1\nx0 = 1 2 3 4 5\n");
    CHECK(c.name == "spaced out");
    CHECK(c.model.n == 5);
    CHECK(c.controller.law == ControlLaw::EpdChained);
    CHECK(c.controller.epd.gamma == 2.0);
    CHECK(c.x0[4] == 5.0);
  }

  SUBCASE("the epd law name binds to the model family") {
    CHECK(parse_text("model = chained\nn = 4\nbeta_ell = 0.5\nx0 = 1 1 1 1\n")
              .controller.law == ControlLaw::EpdChained);
    CHECK(parse_text("model = integrator\nbeta_ell = 0.5\nx0 = 1 1 1\n")
              .controller.law == ControlLaw::EpdIntegrator);
  }

  SUBCASE("rejections carry actionable messages") {
    CHECK_THROWS_WITH_AS(parse_text("beta_ell = 0.5\n"),
                         doctest::Contains("missing required key 'x0'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nwat = 7\n"),
                         doctest::Contains("unknown key 'wat'"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\ngamma = 1\ngamma = 2\n"),
                         doctest::Contains("duplicate key"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nnonsense line\n"),
                         doctest::Contains("config line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("model = unicycle\nx0 = 1 1 1\n"),
                         doctest::Contains("unknown model"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("model = integrator\nn = 4\nx0 = 1 1 1 1\n"),
                         doctest::Contains("fixed dimension 3"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("model = chained\nn = 2\nx0 = 1 1\n"),
                         doctest::Contains("'n' must be in [3, 16]"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("controller = fuzzy\nx0 = 1 1 1\n"),
                         doctest::Contains("unknown controller"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nmethod = euler\n"),
                         doctest::Contains("unknown method"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nnoise = maybe\n"),
                         doctest::Contains("expects on|off"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\ngamma = abc\n"),
                         doctest::Contains("expects a number"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nrecord_every = 2.5\n"),
                         doctest::Contains("expects an integer"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 one 1\n"),
                         doctest::Contains("expects a number"), ConfigError);
  }

  SUBCASE("cross-field validation") {
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1\n"), doctest::Contains("x0 has 2 entries"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 nan\n"), doctest::Contains("not finite"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\ngamma = -2\nbeta_ell = 1\n"),
                         doctest::Contains("gamma must be positive"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nbeta_ell = -0.5\n"),
                         doctest::Contains("beta_ell must be nonnegative"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\ngamma = 3\n"),
                         doctest::Contains("requires gamma = 1"), ConfigError);
    CHECK_THROWS_WITH_AS(
        parse_text("model = chained\nn = 4\ncontroller = astolfi\nx0 = 1 1 1 1\n"),
        doctest::Contains("three-state design"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nstep = 0\n"),
                         doctest::Contains("step must be positive"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nt_final = -1\n"),
                         doctest::Contains("t_final must be positive"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nrecord_every = 0\n"),
                         doctest::Contains("record_every"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nt_final = 1\nrecord_every = 2000\n"),
                         doctest::Contains("exceeds t_final"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nmethod = rk45\nabs_tol = 0\n"),
                         doctest::Contains("rk45 tolerances"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nnoise = on\nnoise_amplitude = -1\n"),
                         doctest::Contains("noise_amplitude"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("x0 = 1 1 1\nnoise = on\nnoise_sample_time = 0\n"),
                         doctest::Contains("noise_sample_time"), ConfigError);
  }

  SUBCASE("starting inside the excluded set is a warning, not an error") {
    const ScenarioConfig fine = parse_text("x0 = 3 2 2\n");
    CHECK(!validate_scenario(fine).has_value());

    const ScenarioConfig inside = parse_text("x0 = 0 0 5\n");
    const auto warning = validate_scenario(inside);
    REQUIRE(warning.has_value());
    CHECK(warning->find("excluded set") != std::string::npos);

    // Only the energy-regulating laws care about the indicator.
    ScenarioConfig pomet = inside;
    pomet.controller.law = ControlLaw::Pomet;
    CHECK(!validate_scenario(pomet).has_value());
  }
}

TEST_CASE("critical-parameter bisection input handling") {
  const Eigen::Vector3d base(0.5, 1.0, 0.1);

  SUBCASE("bracket ends that settle into the same set are rejected") {
    CHECK_THROWS_WITH_AS(find_critical_x4(5.0, 0.5, base, 0.5, 1.0),
                         doctest::Contains("both bracket endpoints classify as TargetSet"),
                         ConfigError);
  }
  SUBCASE("degenerate bracket and tolerance") {
    CHECK_THROWS_WITH_AS(find_critical_x4(0.5, 0.5, base, 2.0, 0.5),
                         doctest::Contains("need lo < hi"), ConfigError);
    CHECK_THROWS_WITH_AS(find_critical_x4(0.5, 0.5, base, 0.5, 2.0, -1.0),
                         doctest::Contains("tol must be positive"), ConfigError);
  }
  SUBCASE("invalid dynamics parameters are rejected up front") {
    CHECK_THROWS_WITH_AS(find_critical_x4(-1.0, 0.5, base, 0.5, 2.0),
                         doctest::Contains("gamma must be positive"), ConfigError);
  }
}

TEST_CASE("csv export and parse") {
  SUBCASE("header names every column in order") {
    Trajectory empty;
    std::ostringstream out;
    export_csv(empty, SystemModel::integrator(), out);
    CHECK(out.str() == "t,x1,x2,x3,u1,u2,H_ell,H_shift,H_zero,V,Q,termination\n");
  }

  SUBCASE("row count matches the recording grid") {
    const Trajectory traj = quick_e1_run();
    std::ostringstream out;
    export_csv(traj, SystemModel::integrator(), out);
    const std::string text = out.str();
    const long lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 2002);  // header + floor(20 / 0.01) + 1 samples
  }

  SUBCASE("values round-trip exactly and the outcome column repeats") {
    const Trajectory traj = quick_e1_run(10, 2.0);
    std::ostringstream out;
    export_csv(traj, SystemModel::integrator(), out);
    std::istringstream in(out.str());
    const CsvTable table = parse_csv(in);

    REQUIRE(table.columns.size() == 12);
    CHECK(table.columns.front() == "t");
    CHECK(table.columns.back() == "termination");
    REQUIRE(table.rows.size() == traj.times.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      REQUIRE(table.rows[i].size() == 11);
      CHECK(table.rows[i][0] == traj.times[i]);
      CHECK(table.rows[i][1] == traj.states[i][0]);
      CHECK(table.rows[i][3] == traj.states[i][2]);
      CHECK(table.rows[i][4] == traj.inputs[i][0]);
      CHECK(table.rows[i][6] == traj.diagnostics[i].h_ell);
      CHECK(table.rows[i][7] == traj.diagnostics[i].h_shift);
      CHECK(table.rows[i][9] == traj.diagnostics[i].v);
      CHECK(table.terminations[i] == "Completed");
    }
  }

  SUBCASE("four-state runs widen the state columns") {
    ScenarioConfig c = preset_runs("E4a").front();
    c.solver.t_final = 1.0;
    std::ostringstream out;
    export_csv(integrate(c), c.model, out);
    CHECK(out.str().rfind("t,x1,x2,x3,x4,u1,u2,", 0) == 0);
  }

  SUBCASE("parser rejects foreign headers and ragged rows") {
    std::istringstream foreign("a,b,c\n1,2,3\n");
    CHECK_THROWS_AS(parse_csv(foreign), std::runtime_error);
    std::istringstream ragged(
        "t,x1,x2,x3,u1,u2,H_ell,H_shift,H_zero,V,Q,termination\n1,2,3\n");
    CHECK_THROWS_AS(parse_csv(ragged), std::runtime_error);
  }
}

TEST_CASE("svg export") {
  const Trajectory traj = quick_e1_run(10, 2.0);
  const SystemModel model = SystemModel::integrator();

  SUBCASE("deterministic bytes for identical trajectories") {
    for (PlotKind kind : {PlotKind::StatesVsTime, PlotKind::EnergyVsTime,
                          PlotKind::Phase3dProjection}) {
      std::ostringstream a, b;
      export_plot(traj, kind, model, a);
      export_plot(traj, kind, model, b);
      CHECK(a.str() == b.str());
      CHECK(a.str().rfind("<svg", 0) == 0);
      CHECK(a.str().find("</svg>") != std::string::npos);
    }
  }

  SUBCASE("state plot draws one series per state, energy plot five") {
    std::ostringstream s, e, p;
    export_plot(traj, PlotKind::StatesVsTime, model, s);
    export_plot(traj, PlotKind::EnergyVsTime, model, e);
    export_plot(traj, PlotKind::Phase3dProjection, model, p);
    const auto count_polylines = [](const std::string& text) {
      std::size_t n = 0;
      for (std::size_t at = text.find("<polyline"); at != std::string::npos;
           at = text.find("<polyline", at + 1)) ++n;
      return n;
    };
    CHECK(count_polylines(s.str()) == 3);
    CHECK(count_polylines(e.str()) == 5);
    CHECK(count_polylines(p.str()) == 1);
    for (const char* label : {"H_ell", "H_shift", "H_zero", "V", "Q"}) {
      CHECK(e.str().find(label) != std::string::npos);
    }
    CHECK(s.str().find(">x1<") != std::string::npos);
    CHECK(s.str().find(">x3<") != std::string::npos);
  }

  SUBCASE("constant trajectories draw horizontal lines") {
    ScenarioConfig c;
    c.model = SystemModel::integrator();
    c.controller.law = ControlLaw::None;
    c.x0 = make_state({1, 1, 1});
    c.solver.t_final = 1.0;
    c.solver.record_every = 100;
    std::ostringstream out;
    export_plot(integrate(c), PlotKind::StatesVsTime, c.model, out);
    const std::string text = out.str();
    std::size_t at = text.find("points=\"");
    REQUIRE(at != std::string::npos);
    const std::size_t end = text.find('"', at + 8);
    std::istringstream pts(text.substr(at + 8, end - at - 8));
    std::string pair;
    std::string first_y;
    int count = 0;
    while (pts >> pair) {
      const std::string y = pair.substr(pair.find(',') + 1);
      if (first_y.empty()) first_y = y;
      CHECK(y == first_y);
      ++count;
    }
    CHECK(count >= 2);
  }

  SUBCASE("unknown kinds fail loudly") {
    std::ostringstream out;
    CHECK_THROWS_WITH_AS(export_plot(traj, static_cast<PlotKind>(42), model, out),
                         doctest::Contains("unknown plot kind"), std::runtime_error);
  }
}

TEST_CASE("batch runner") {
  SUBCASE("writes one csv and three plots per run") {
    const fs::path dir = fresh_dir("epdreg_batch_a");
    RunOptions options;
    options.out_dir = dir.string();
    options.t_final = 2.0;
    const auto outcomes = run_scenarios(preset_runs("E1"), options);
    REQUIRE(outcomes.size() == 2);
    for (const RunOutcome& o : outcomes) {
      CHECK(o.termination.kind == TerminationKind::Completed);
      CHECK(!o.classification.has_value());  // three-state runs are not classified
      CHECK(!o.warning.has_value());
      REQUIRE(o.files.size() == 4);
      for (const std::string& f : o.files) CHECK(fs::exists(f));
    }
    CHECK(fs::exists(dir / "E1-beta0.5.csv"));
    CHECK(fs::exists(dir / "E1-beta0.5-states.svg"));
    CHECK(fs::exists(dir / "E1-beta0.5-energy.svg"));
    CHECK(fs::exists(dir / "E1-beta0.5-phase.svg"));
    fs::remove_all(dir);
  }

  SUBCASE("plotless mode writes only the csv") {
    const fs::path dir = fresh_dir("epdreg_batch_b");
    RunOptions options;
    options.out_dir = dir.string();
    options.plots = false;
    options.t_final = 1.0;
    const auto outcomes = run_scenarios(preset_runs("E2"), options);
    REQUIRE(outcomes.size() == 1);
    CHECK(outcomes[0].files.size() == 1);
    CHECK(fs::exists(dir / "E2.csv"));
    CHECK(!fs::exists(dir / "E2-states.svg"));
    fs::remove_all(dir);
  }

  SUBCASE("four-state energy-regulated runs report their limit set") {
    const fs::path dir = fresh_dir("epdreg_batch_c");
    RunOptions options;
    options.out_dir = dir.string();
    options.plots = false;
    const auto outcomes = run_scenarios(preset_runs("E4a"), options);
    REQUIRE(outcomes.size() == 1);
    REQUIRE(outcomes[0].classification.has_value());
    CHECK(*outcomes[0].classification == SetClass::TargetSet);
    CHECK(outcomes[0].final_diag.h_ell ==
          doctest::Approx(0.5).epsilon(1e-2));
    fs::remove_all(dir);
  }

  SUBCASE("artifacts are byte-identical across repeated dithered runs") {
    ScenarioConfig c = preset_runs("E3").front();
    c.solver.t_final = 5.0;
    const fs::path dir_a = fresh_dir("epdreg_batch_d1");
    const fs::path dir_b = fresh_dir("epdreg_batch_d2");
    RunOptions options;
    options.out_dir = dir_a.string();
    const auto first = run_scenarios({c}, options);
    options.out_dir = dir_b.string();
    const auto second = run_scenarios({c}, options);
    REQUIRE(first[0].files.size() == second[0].files.size());
    for (std::size_t i = 0; i < first[0].files.size(); ++i) {
      CHECK(slurp(first[0].files[i]) == slurp(second[0].files[i]));
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
  }

  SUBCASE("overrides rewire noise, horizon, and seed") {
    ScenarioConfig c = preset_runs("E2").front();
    const fs::path dir = fresh_dir("epdreg_batch_e");
    RunOptions options;
    options.out_dir = dir.string();
    options.plots = false;
    options.t_final = 1.0;
    options.noise = true;
    options.seed = 9;
    const auto dithered = run_scenarios({c}, options);
    options.noise = false;
    const auto clean = run_scenarios({c}, options);
    CHECK((dithered[0].final_state - clean[0].final_state).cwiseAbs().maxCoeff() > 0.0);

    options.noise = true;
    options.seed = 10;
    const auto reseeded = run_scenarios({c}, options);
    CHECK((dithered[0].final_state - reseeded[0].final_state).cwiseAbs().maxCoeff() > 0.0);
    fs::remove_all(dir);
  }

  SUBCASE("excluded-set starts surface their warning in the outcome") {
    ScenarioConfig c = parse_text("x0 = 0 0 5\nname = excluded-start\n");
    const fs::path dir = fresh_dir("epdreg_batch_f");
    RunOptions options;
    options.out_dir = dir.string();
    options.plots = false;
    options.t_final = 1.0;
    const auto outcomes = run_scenarios({c}, options);
    REQUIRE(outcomes[0].warning.has_value());
    CHECK(outcomes[0].warning->find("excluded set") != std::string::npos);
    fs::remove_all(dir);
  }

  SUBCASE("unusable output directory is reported as a config error") {
    const fs::path blocker = fresh_dir("epdreg_batch_g");
    std::ofstream(blocker.string()) << "in the way";
    RunOptions options;
    options.out_dir = (blocker / "sub").string();
    options.t_final = 1.0;
    CHECK_THROWS_WITH_AS(run_scenarios(preset_runs("E2"), options),
                         doctest::Contains("cannot create output directory"), ConfigError);
    fs::remove_all(blocker);
  }
}
