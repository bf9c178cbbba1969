#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epd/sim.hpp"
#include "epd/verify.hpp"

namespace epd {

// Invalid user input (config file, preset name, CLI argument). Maps to CLI
// exit code 1, as opposed to runtime events (divergence/singularity, exit 2)
// and verification failures (exit 3).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- Scenario configs -------------------------------------------------------

// Validates cross-field rules shared by presets, files, and CLI overrides:
// dimensions match, gamma > 0, beta_ell >= 0, and the state-regulation
// constraint (beta_ell == 0 forces gamma == 1 for the energy regulator).
// Returns a human-readable warning (not an error) when an energy-regulating
// scenario starts inside the excluded zero-indicator set.
std::optional<std::string> validate_scenario(const ScenarioConfig& config);

// Flat "key = value" text config; '#' starts a comment. dump_config writes
// the exact format parse_config reads, and every preset is dumpable.
ScenarioConfig parse_config(std::istream& in);
void dump_config(const ScenarioConfig& config, std::ostream& out);

// Named experiment presets. A preset name expands to one or more concrete
// runs (the energy-regulation demo ships two target levels side by side).
std::vector<std::string> preset_names();
std::vector<ScenarioConfig> preset_runs(const std::string& name);

// --- Critical-parameter search ----------------------------------------------

// Bisection over the fourth initial-state entry between a bracket whose ends
// settle into different residual sets. Each probe simulates the chained n=4
// closed loop and classifies the final state; the probe matching the lower
// endpoint's class moves that endpoint up, anything else moves the upper
// endpoint down. Throws ConfigError when the bracket does not straddle a
// boundary. Returns the bracket midpoint once hi - lo < tol.
double find_critical_x4(double gamma, double beta_ell,
                        const Eigen::Vector3d& base_x0, double lo, double hi,
                        double tol = 0.05);

// Probe horizon for find_critical_x4 and preset classification summaries:
// long enough for near-boundary trajectories to commit to one residual set
// under the slow late-stage dynamics at small gamma.
constexpr double kClassificationHorizon = 300.0;

// --- Exporters ---------------------------------------------------------------

// CSV with header t,x1,...,xn,u1,u2,H_ell,H_shift,H_zero,V,Q,termination.
// Values print with enough digits (%.17g) to round-trip doubles exactly; the
// termination column repeats the run outcome on every row.
void export_csv(const Trajectory& traj, const SystemModel& model,
                std::ostream& out);

// Parses export_csv output back; header must match the writer's schema.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // numeric columns only
  std::vector<std::string> terminations;
};
CsvTable parse_csv(std::istream& in);

enum class PlotKind { StatesVsTime, EnergyVsTime, Phase3dProjection };

// Self-contained deterministic SVG line plot; byte-identical output for
// identical trajectories. Phase3dProjection draws (x1, x2, x3) under a fixed
// oblique projection.
void export_plot(const Trajectory& traj, PlotKind kind, const SystemModel& model,
                 std::ostream& out);

// --- Batch runner -------------------------------------------------------------

struct RunOptions {
  std::string out_dir = "out";
  bool plots = true;
  std::optional<std::uint64_t> seed;    // overrides preset noise seed
  std::optional<double> t_final;        // overrides preset horizon
  std::optional<double> step;           // overrides preset step
  std::optional<bool> noise;            // force noise on/off
};

struct RunOutcome {
  std::string name;
  Termination termination;
  State final_state;
  EnergySnapshot final_diag;
  std::optional<SetClass> classification;  // n >= 4 energy-regulated runs only
  std::optional<std::string> warning;      // from validate_scenario
  std::vector<std::string> files;          // artifacts written
};

// Runs every run of a preset (or a parsed config file), writes CSV/SVG
// artifacts into out_dir, and returns per-run summaries.
std::vector<RunOutcome> run_scenarios(const std::vector<ScenarioConfig>& runs,
                                      const RunOptions& options);

}  // namespace epd
