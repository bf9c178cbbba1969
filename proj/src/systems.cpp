#include "epd/systems.hpp"

namespace epd {

SystemModel SystemModel::chained(int n) {
  if (n < 3 || n > kMaxStateDim) {
    throw std::invalid_argument("chained model requires 3 <= n <= " +
                                std::to_string(kMaxStateDim) + ", got " +
                                std::to_string(n));
  }
  return {Kind::Chained, n};
}

static void require_dim(const SystemModel& model, const State& x, const char* what) {
  if (x.size() != model.n) {
    throw std::invalid_argument(std::string(what) + ": state has dimension " +
                                std::to_string(x.size()) + ", model expects " +
                                std::to_string(model.n));
  }
}

Eigen::MatrixXd s_matrix(const SystemModel& model, const State& x) {
  require_dim(model, x, "s_matrix");
  const int n = model.n;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, 2);
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  for (int k = 2; k < n; ++k) s(k, 0) = x[k - 1];
  return s;
}

State vector_field(const SystemModel& model, const State& x, const Vec2& u) {
  require_dim(model, x, "vector_field");
  const int n = model.n;
  State f(n);
  f[0] = u[0];
  f[1] = u[1];
  for (int k = 2; k < n; ++k) f[k] = x[k - 1] * u[0];
  return f;
}

Eigen::VectorXd constraint_residual(const SystemModel& model, const State& x,
                                    const State& xdot) {
  require_dim(model, x, "constraint_residual");
  if (xdot.size() != model.n) {
    throw std::invalid_argument("constraint_residual: xdot dimension mismatch");
  }
  const int n = model.n;
  Eigen::VectorXd r(n - 2);
  for (int k = 2; k < n; ++k) r[k - 2] = x[k - 1] * xdot[0] - xdot[k];
  return r;
}

PartitionMap partition_default(const SystemModel& model) {
  PartitionMap p;
  p.ell = {0, 1};
  for (int k = 3; k < model.n; ++k) p.ell.push_back(k);
  p.zero = {2};
  return p;
}

State make_state(std::initializer_list<double> entries) {
  State x(static_cast<Eigen::Index>(entries.size()));
  Eigen::Index i = 0;
  for (double v : entries) x[i++] = v;
  return x;
}

}  // namespace epd
