// Command-line front end: scenario runs with CSV/SVG artifacts, structural
// verification sweeps, and the critical-x4 bisection search.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epd/harness.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int do_run(const std::string& target, const epd::RunOptions& options) {
  std::vector<epd::ScenarioConfig> runs;
  const std::vector<std::string> names = epd::preset_names();
  if (std::find(names.begin(), names.end(), target) != names.end()) {
    runs = epd::preset_runs(target);
  } else {
    std::ifstream in(target);
    if (!in)
      throw epd::ConfigError("'" + target +
                             "' is neither a preset name nor a readable config file");
    runs = {epd::parse_config(in)};
  }

  const std::vector<epd::RunOutcome> outcomes = epd::run_scenarios(runs, options);
  bool clean = true;
  for (const epd::RunOutcome& o : outcomes) {
    if (o.warning) std::cerr << o.name << ": " << *o.warning << "\n";
    std::cout << o.name << ": " << epd::termination_name(o.termination.kind)
              << " at t = " << fmt(o.termination.time)
              << ", |x| = " << fmt(o.final_state.norm())
              << ", H_ell = " << fmt(o.final_diag.h_ell)
              << ", H_shift = " << fmt(o.final_diag.h_shift)
              << ", x3 = " << fmt(o.final_state[2]);
    if (o.classification)
      std::cout << ", class = " << epd::set_class_name(*o.classification);
    std::cout << "\n";
    for (const std::string& f : o.files) std::cout << "  wrote " << f << "\n";
    if (o.termination.kind != epd::TerminationKind::Completed) clean = false;
  }
  return clean ? 0 : 2;
}

int do_verify(std::vector<int> dims, long samples, std::uint64_t seed) {
  if (dims.empty()) dims = {3, 4, 5, 6};
  bool all_pass = true;
  for (int n : dims) {
    const epd::VerificationReport report = epd::run_verification(n, samples, seed);
    epd::write_report(report, std::cout);
    std::cout << "\n";
    all_pass = all_pass && report.pass;
  }
  std::cout << (all_pass ? "verification PASS" : "verification FAIL") << "\n";
  return all_pass ? 0 : 3;
}

int do_bisect(double gamma, double beta_ell, double lo, double hi,
              const std::vector<double>& base, double tol) {
  const Eigen::Vector3d base_x0(base[0], base[1], base[2]);
  const double critical = epd::find_critical_x4(gamma, beta_ell, base_x0, lo, hi, tol);
  std::cout << "critical x4(0) = " << fmt(critical) << " (bracket width < " << fmt(tol)
            << ", probe horizon " << fmt(epd::kClassificationHorizon) << " s)\n";
  return 0;
}

int do_dump(const std::string& name) {
  const std::vector<epd::ScenarioConfig> runs = epd::preset_runs(name);
  bool first = true;
  for (const epd::ScenarioConfig& c : runs) {
    if (!first) std::cout << "\n# --- next run ---\n\n";
    first = false;
    epd::dump_config(c, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Energy pumping-and-damping regulation toolkit for two-input chained-form "
      "systems: simulation presets, structural verification, and critical-parameter "
      "search."};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand(
      "run", "simulate a preset or a config file; writes CSV and SVG artifacts");
  std::string target;
  run->add_option("target", target,
                  "preset name (see dump-preset) or path to a key = value config file")
      ->required();
  epd::RunOptions options;
  std::string noise_s;
  bool no_plots = false;
  run->add_option("--out-dir", options.out_dir, "artifact output directory")
      ->capture_default_str();
  run->add_option("--seed", options.seed, "override the dither seed");
  run->add_option("--t-final", options.t_final, "override the simulation horizon [s]");
  run->add_option("--step", options.step, "override the integration step [s]");
  run->add_option("--noise", noise_s, "force measurement dither on or off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_flag("--no-plots", no_plots, "write only CSV, skip SVG plots");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "audit closed-loop structural identities at random states");
  std::vector<int> dims;
  long samples = 10000;
  std::uint64_t vseed = 42;
  verify->add_option("n", dims, "state dimensions to audit (default: 3 4 5 6)");
  verify->add_option("--samples", samples, "random states per dimension")
      ->capture_default_str();
  verify->add_option("--seed", vseed, "sampling seed")->capture_default_str();

  // bisect-x4
  auto* bisect = app.add_subcommand(
      "bisect-x4", "bisect the fourth initial-state entry between residual-set classes");
  double gamma = 0.0, beta_ell = 0.0, lo = 0.0, hi = 0.0, tol = 0.05;
  std::vector<double> base = {0.5, 1.0, 0.1};
  bisect->add_option("gamma", gamma, "energy pumping-and-damping gain")->required();
  bisect->add_option("beta_ell", beta_ell, "energy target level")->required();
  bisect->add_option("lo", lo, "bracket lower end for x4(0)")->required();
  bisect->add_option("hi", hi, "bracket upper end for x4(0)")->required();
  bisect->add_option("--tol", tol, "bracket width to stop at")->capture_default_str();
  bisect->add_option("--base", base, "first three entries of x0")->expected(3);

  // dump-preset
  auto* dump = app.add_subcommand("dump-preset",
                                  "print a preset as a reusable config file");
  std::string preset;
  dump->add_option("name", preset, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) {
      if (!noise_s.empty()) options.noise = (noise_s == "on");
      options.plots = !no_plots;
      return do_run(target, options);
    }
    if (verify->parsed()) return do_verify(dims, samples, vseed);
    if (bisect->parsed()) return do_bisect(gamma, beta_ell, lo, hi, base, tol);
    if (dump->parsed()) return do_dump(preset);
  } catch (const epd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
