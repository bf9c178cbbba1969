#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace epd {

// States stay small (n <= 6 in every shipped scenario), so give the dynamic
// vector a fixed capacity: the integrator hot loop then never touches the heap.
constexpr int kMaxStateDim = 16;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStateDim, 1>;
using Vec2 = Eigen::Vector2d;

// Two-input driftless chained family:
//   x1' = u1, x2' = u2, xk' = x_{k-1} u1  (k = 3..n).
// n == 3 is the classic nonholonomic integrator; Integrator and Chained(3)
// are behaviorally identical everywhere.
struct SystemModel {
  enum class Kind { Integrator, Chained };

  Kind kind = Kind::Integrator;
  int n = 3;
  static constexpr int m = 2;  // input dimension, fixed for the family

  static SystemModel integrator() { return {Kind::Integrator, 3}; }
  static SystemModel chained(int n);
};

// Ordered 0-based index sets splitting the state into the energy-regulated
// block (x1, x2, x4, ..., xn) and the residual block (x3).
struct PartitionMap {
  std::vector<int> ell;
  std::vector<int> zero;
};

// Input matrix S(x): column 1 = (1, 0, x2, x3, ..., x_{n-1}), column 2 = e2.
Eigen::MatrixXd s_matrix(const SystemModel& model, const State& x);

// S(x)*u without forming S; this is the integration hot path.
State vector_field(const SystemModel& model, const State& x, const Vec2& u);

// Velocity-constraint residual A(x)^T xdot with annihilator rows
// x_{k-1}*xdot_1 - xdot_k for k = 3..n (1-based); identically zero on the
// range of S(x), so any nonzero entry flags a velocity outside the
// admissible distribution.
Eigen::VectorXd constraint_residual(const SystemModel& model, const State& x,
                                    const State& xdot);

PartitionMap partition_default(const SystemModel& model);

// Builds a state from an initializer-style list; test/CLI convenience.
State make_state(std::initializer_list<double> entries);

}  // namespace epd
