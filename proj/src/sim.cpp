#include "epd/sim.hpp"

#include <cmath>
#include <limits>

namespace epd {

namespace {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

double sample_noise(const NoiseSettings& settings, double t, int channel) {
  if (!settings.enabled) return 0.0;
  // The small bias keeps grid times that land a hair below an interval
  // boundary (accumulated rounding in t = k*step) in the interval they
  // belong to; 1e-9 * sample_time is far below any step size in use.
  const auto interval =
      static_cast<std::uint64_t>(std::floor(t / settings.sample_time + 1e-9));
  std::uint64_t h = splitmix64(settings.seed);
  h = splitmix64(h ^ interval);
  h = splitmix64(h ^ static_cast<std::uint64_t>(channel));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return settings.amplitude * (2.0 * unit - 1.0);
}

const char* termination_name(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::Completed: return "Completed";
    case TerminationKind::Diverged: return "Diverged";
    case TerminationKind::ControllerSingularity: return "ControllerSingularity";
  }
  return "Unknown";
}

State rk4_step(const std::function<State(double, const State&)>& f,
               const State& x, double t, double h) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * h, x + (0.5 * h) * k1);
  const State k3 = f(t + 0.5 * h, x + (0.5 * h) * k2);
  const State k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Dormand-Prince 5(4) pair, used for cross-validation of the fixed-step
// results and for scenarios whose fields reward adaptive resolution.
constexpr double kC[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA2[] = {1.0 / 5};
constexpr double kA3[] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561,
                          -212.0 / 729};
constexpr double kA6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247,
                          49.0 / 176, -5103.0 / 18656};
constexpr double kB5[7] = {35.0 / 384,      0.0,          500.0 / 1113,
                           125.0 / 192,     -2187.0 / 6784, 11.0 / 84,
                           0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695,
                           393.0 / 640,     -92097.0 / 339200, 187.0 / 2100,
                           1.0 / 40};
constexpr const double* kARows[7] = {nullptr, kA2, kA3, kA4, kA5, kA6, kB5};
constexpr double kMinStep = 1e-12;

struct Dp45Step {
  State x;          // fifth-order update
  double err_norm;  // scaled RMS error estimate (<= 1 means acceptable)
  bool finite;
};

Dp45Step dp45_step(const std::function<State(double, const State&)>& f,
                   const State& x, double t, double h, double atol,
                   double rtol) {
  State k[7];
  k[0] = f(t, x);
  Dp45Step out;
  out.finite = k[0].allFinite();
  for (int i = 1; i < 7 && out.finite; ++i) {
    State xi = x;
    for (int j = 0; j < i; ++j) xi += (h * kARows[i][j]) * k[j];
    k[i] = f(t + kC[i] * h, xi);
    out.finite = k[i].allFinite();
  }
  if (!out.finite) {
    out.x = x;
    out.err_norm = 1e300;
    return out;
  }
  out.x = x;
  State err = State::Zero(x.size());
  for (int i = 0; i < 7; ++i) {
    out.x += (h * kB5[i]) * k[i];
    err += (h * (kB5[i] - kB4[i])) * k[i];
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(x[i]), std::abs(out.x[i]));
    const double r = err[i] / scale;
    acc += r * r;
  }
  out.err_norm = std::sqrt(acc / static_cast<double>(x.size()));
  if (!std::isfinite(out.err_norm)) out.err_norm = 1e300;
  return out;
}

// Shared recording/termination driver for both solvers. The field callback
// may throw SingularControlError tagged with the stage time.
class Recorder {
 public:
  Recorder(Trajectory& traj, const EnergyParams& params, const PartitionMap& p,
           const std::function<Vec2(double, const State&)>& input_at)
      : traj_(traj), params_(params), p_(p), input_at_(input_at) {}

  void record(double t, const State& x) {
    // If the controller is undefined exactly at a recorded state, the sample
    // still lands (with NaN inputs marking the undefined feedback) before the
    // singularity propagates, so a trajectory is never left empty.
    Vec2 u = Vec2::Zero();
    bool singular = false;
    SingularControlError pending(t);
    try {
      u = input_at_(t, x);
    } catch (const SingularControlError& e) {
      singular = true;
      pending = e;
      u = Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
    }
    traj_.times.push_back(t);
    traj_.states.push_back(x);
    traj_.inputs.push_back(u);
    traj_.diagnostics.push_back(energy_snapshot(x, params_, p_));
    if (singular) throw pending;
  }

  // Final sample for an early stop; skipped if time would not advance.
  void record_event(double t, const State& x) {
    if (!traj_.times.empty() && t <= traj_.times.back()) return;
    record(t, x);
  }

 private:
  Trajectory& traj_;
  EnergyParams params_;
  PartitionMap p_;
  std::function<Vec2(double, const State&)> input_at_;
};

Trajectory run_grid(const std::function<State(double, const State&)>& field,
                    const std::function<Vec2(double, const State&)>& input_at,
                    const State& x0, const SolverSettings& solver,
                    const EnergyParams& diag_params, const PartitionMap& p) {
  if (solver.step <= 0 || solver.t_final <= 0 || solver.record_every < 1) {
    throw std::invalid_argument("solver settings: step, t_final, record_every must be positive");
  }
  if (solver.step * solver.record_every > solver.t_final) {
    throw std::invalid_argument("solver settings: step * record_every exceeds t_final");
  }

  Trajectory traj;
  Recorder rec(traj, diag_params, p, input_at);

  const double h = solver.step;
  const long n_steps = static_cast<long>(std::floor(solver.t_final / h + 1e-9));
  const double leftover = solver.t_final - static_cast<double>(n_steps) * h;

  State x = x0;
  try {
    rec.record(0.0, x);

    if (solver.method == SolverMethod::Rk4) {
      for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const State xn = rk4_step(field, x, t, h);
        const double tn = static_cast<double>(k + 1) * h;
        if (!xn.allFinite()) {
          traj.termination = {TerminationKind::Diverged, tn};
          return traj;
        }
        x = xn;
        if (x.norm() > kDivergenceBound) {
          rec.record_event(tn, x);
          traj.termination = {TerminationKind::Diverged, tn};
          return traj;
        }
        if ((k + 1) % solver.record_every == 0) rec.record(tn, x);
      }
      if (leftover > 1e-12) {
        const State xn =
            rk4_step(field, x, static_cast<double>(n_steps) * h, leftover);
        if (!xn.allFinite()) {
          traj.termination = {TerminationKind::Diverged, solver.t_final};
          return traj;
        }
        x = xn;
        if (x.norm() > kDivergenceBound) {
          rec.record_event(solver.t_final, x);
          traj.termination = {TerminationKind::Diverged, solver.t_final};
          return traj;
        }
        rec.record_event(solver.t_final, x);
      }
    } else {
      // Adaptive pass over the same output grid: integrate up to each grid
      // time exactly so recorded samples are directly comparable with Rk4.
      double h_try = h;
      for (long k = 0; k < n_steps; ++k) {
        const double t_target = static_cast<double>(k + 1) * h;
        double t = static_cast<double>(k) * h;
        while (t < t_target - 1e-13) {
          const double h_step = std::min(h_try, t_target - t);
          const Dp45Step s = dp45_step(field, x, t, h_step, solver.abs_tol,
                                       solver.rel_tol);
          const bool forced = h_step <= kMinStep;
          if (forced && !s.finite) {
            // Field is non-finite at the smallest representable step: the
            // state has effectively escaped; report divergence rather than
            // spinning at the minimum step.
            traj.termination = {TerminationKind::Diverged, t};
            return traj;
          }
          if (s.err_norm <= 1.0 || forced) {
            t += h_step;
            x = s.x;
            if (!x.allFinite()) {
              traj.termination = {TerminationKind::Diverged, t};
              return traj;
            }
            if (x.norm() > kDivergenceBound) {
              rec.record_event(t, x);
              traj.termination = {TerminationKind::Diverged, t};
              return traj;
            }
          }
          const double fac =
              s.err_norm > 0 ? 0.9 * std::pow(s.err_norm, -0.2) : 5.0;
          h_try = std::max(h_step * std::clamp(fac, 0.2, 5.0), kMinStep);
        }
        if ((k + 1) % solver.record_every == 0) rec.record(t_target, x);
      }
      // Ragged tail beyond the last full grid step, if any.
      if (leftover > 1e-12) {
        double t = static_cast<double>(n_steps) * h;
        const double t_target = solver.t_final;
        double h_try2 = std::min(h_try, leftover);
        while (t < t_target - 1e-13) {
          const double h_step = std::min(h_try2, t_target - t);
          const Dp45Step s = dp45_step(field, x, t, h_step, solver.abs_tol,
                                       solver.rel_tol);
          if (h_step <= kMinStep && !s.finite) {
            traj.termination = {TerminationKind::Diverged, t};
            return traj;
          }
          if (s.err_norm <= 1.0 || h_step <= kMinStep) {
            t += h_step;
            x = s.x;
            if (!x.allFinite() || x.norm() > kDivergenceBound) {
              traj.termination = {TerminationKind::Diverged, t};
              return traj;
            }
          }
          const double fac =
              s.err_norm > 0 ? 0.9 * std::pow(s.err_norm, -0.2) : 5.0;
          h_try2 = std::max(h_step * std::clamp(fac, 0.2, 5.0), kMinStep);
        }
        rec.record_event(t_target, x);
      }
    }
  } catch (const SingularControlError& e) {
    traj.termination = {TerminationKind::ControllerSingularity, e.time};
    return traj;
  }

  traj.termination = {TerminationKind::Completed, solver.t_final};
  return traj;
}

}  // namespace

Trajectory integrate(const ScenarioConfig& scenario) {
  const SystemModel& model = scenario.model;
  if (scenario.x0.size() != model.n) {
    throw std::invalid_argument("integrate: x0 dimension " +
                                std::to_string(scenario.x0.size()) +
                                " does not match model n=" + std::to_string(model.n));
  }

  const PartitionMap p = partition_default(model);
  const EnergyParams diag_params =
      scenario.controller.is_epd() ? scenario.controller.epd : EnergyParams{0.0, 1.0};

  auto measure = [&](double t, const State& x) {
    State measured = x;
    if (scenario.noise.enabled) {
      for (int i = 0; i < model.n; ++i) {
        measured[i] += sample_noise(scenario.noise, t, i);
      }
    }
    return measured;
  };
  auto control = [&, measure](double t, const State& x) -> Vec2 {
    try {
      return scenario.controller.eval(model, measure(t, x), t);
    } catch (SingularControlError& e) {
      e.time = t;
      throw;
    }
  };
  auto field = [&, control](double t, const State& x) -> State {
    return vector_field(model, x, control(t, x));
  };

  return run_grid(field, control, scenario.x0, scenario.solver, diag_params, p);
}

Trajectory integrate_field(const std::function<State(double, const State&)>& f,
                           const State& x0, const SolverSettings& solver) {
  SystemModel model = SystemModel::chained(static_cast<int>(x0.size()));
  const PartitionMap p = partition_default(model);
  auto zero_input = [](double, const State&) { return Vec2::Zero().eval(); };
  return run_grid(f, zero_input, x0, solver, EnergyParams{0.0, 1.0}, p);
}

}  // namespace epd
