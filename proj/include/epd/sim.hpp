#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "epd/controllers.hpp"
#include "epd/energy.hpp"
#include "epd/systems.hpp"

namespace epd {

enum class SolverMethod { Rk4, Rk45 };

struct SolverSettings {
  double step = 1e-3;      // fixed step for Rk4; output-grid spacing for Rk45
  double t_final = 20.0;
  SolverMethod method = SolverMethod::Rk4;
  double abs_tol = 1e-9;   // Rk45 only
  double rel_tol = 1e-9;   // Rk45 only
  int record_every = 1;    // keep every k-th grid sample
};

// Zero-order-hold dither on the measured state: per channel, a value drawn
// uniformly from [-amplitude, amplitude] held constant over each sample
// interval. Values are a pure hash of (seed, interval index, channel), so
// trajectories reproduce bit-for-bit across runs and platforms and the
// generator needs no mutable state.
struct NoiseSettings {
  bool enabled = false;
  double amplitude = 0.1;
  double sample_time = 0.01;
  std::uint64_t seed = 1;
};

double sample_noise(const NoiseSettings& settings, double t, int channel);

enum class TerminationKind { Completed, Diverged, ControllerSingularity };

struct Termination {
  TerminationKind kind = TerminationKind::Completed;
  double time = 0.0;  // event time; t_final when Completed
};

const char* termination_name(TerminationKind kind);

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Vec2> inputs;
  std::vector<EnergySnapshot> diagnostics;
  Termination termination;

  const State& final_state() const { return states.back(); }
  double final_time() const { return times.back(); }
};

struct ScenarioConfig {
  std::string name = "scenario";
  SystemModel model = SystemModel::integrator();
  ControllerSpec controller{};
  State x0;
  SolverSettings solver{};
  NoiseSettings noise{};
};

constexpr double kDivergenceBound = 1e6;  // catches blow-ups well before overflow

// One classical fourth-order Runge-Kutta update of xdot = f(t, x).
State rk4_step(const std::function<State(double, const State&)>& f,
               const State& x, double t, double h);

// Integrates xdot = S(x) * u(x + w(t), t): the dither perturbs only what the
// controller sees, never the true state update. Samples are recorded on the
// uniform grid t = k*step, keeping every record_every-th point; integration
// stops at t_final, when |x| exceeds the divergence bound (or goes
// non-finite), or when the controller raises a singularity.
Trajectory integrate(const ScenarioConfig& scenario);

// Same recording and stop semantics, but advancing an arbitrary field
// xdot = f(t, x) with no controller/noise involved; used for integrating the
// closed-loop structure form directly in cross-checks.
Trajectory integrate_field(const std::function<State(double, const State&)>& f,
                           const State& x0, const SolverSettings& solver);

}  // namespace epd
