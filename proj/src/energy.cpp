#include "epd/energy.hpp"

namespace epd {

double h_ell(const State& x, const PartitionMap& p) {
  double acc = 0.0;
  for (int i : p.ell) acc += x[i] * x[i];
  return 0.5 * acc;
}

double h_zero(const State& x, const PartitionMap& p) {
  double acc = 0.0;
  for (int i : p.zero) acc += x[i] * x[i];
  return 0.5 * acc;
}

double h_shift(const State& x, const EnergyParams& params, const PartitionMap& p) {
  return h_ell(x, p) - params.beta_ell;
}

double lyapunov_v(const State& x, const EnergyParams& params, const PartitionMap& p) {
  const double hs = h_shift(x, params, p);
  return 0.5 * hs * hs + h_zero(x, p);
}

double q_function(const State& x, const EnergyParams& params, const PartitionMap& p) {
  const double hs = h_shift(x, params, p);
  const double x3 = x[p.zero.front()];
  return x[1] * x[1] * (x3 * x3 + params.gamma * hs * hs);
}

State grad_h(const State& x) { return x; }

EnergySnapshot energy_snapshot(const State& x, const EnergyParams& params,
                               const PartitionMap& p) {
  EnergySnapshot s;
  s.h_ell = h_ell(x, p);
  s.h_zero = h_zero(x, p);
  s.h_total = s.h_ell + s.h_zero;
  s.h_shift = s.h_ell - params.beta_ell;
  s.v = 0.5 * s.h_shift * s.h_shift + s.h_zero;
  s.q = q_function(x, params, p);
  return s;
}

}  // namespace epd
