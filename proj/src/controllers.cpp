#include "epd/controllers.hpp"

#include <cmath>

namespace epd {

Vec2 epd_control_integrator(const State& x, const EpdParams& params) {
  const double hs = 0.5 * (x[0] * x[0] + x[1] * x[1]) - params.beta_ell;
  return {-x[1] * x[2], x[0] * x[2] - params.gamma * hs * x[1]};
}

Vec2 epd_control_chained(const State& x, const EpdParams& params) {
  const int n = static_cast<int>(x.size());
  double sq = x[0] * x[0] + x[1] * x[1];
  for (int k = 3; k < n; ++k) sq += x[k] * x[k];
  const double hs = 0.5 * sq - params.beta_ell;
  // Coupling sum x3*x4 + x4*x5 + ... + x_{n-1}*xn (empty for n == 3).
  double couple = 0.0;
  for (int k = 2; k + 1 < n; ++k) couple += x[k] * x[k + 1];
  return {-x[1] * x[2],
          x[0] * x[2] + x[2] * couple - params.gamma * hs * x[1]};
}

Vec2 pomet_control(const State& x, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {-(x[1] + x[2] * c) * x[1] * c - (x[1] * x[2] + x[0]),
          x[2] * s - (x[1] + x[0] * c)};
}

Vec2 astolfi_control(const State& x, const AstolfiParams& params) {
  if (x[0] == 0.0) throw SingularControlError(0.0);
  return {-params.k * x[0], params.p2 * x[1] + params.p3 * x[2] / x[0]};
}

StructureMatrices epd_structure_matrices(const SystemModel& model,
                                         const EpdParams& params) {
  const PartitionMap p = partition_default(model);
  const int nl = static_cast<int>(p.ell.size());
  const double gamma = params.gamma;
  const double beta = params.beta_ell;

  StructureMatrices m;
  m.j_ell = [p, nl](const State& x) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(nl, nl);
    const double x3 = x[2];
    j(0, 1) = -x3;
    j(1, 0) = x3;
    // Rows/columns for x4..xn couple through x3 times the preceding state:
    // entry (x2-row, xk-col) = x3 * x_{k-1}, mirrored skew-symmetrically.
    for (int jcol = 2; jcol < nl; ++jcol) {
      const int orig = p.ell[jcol];  // 0-based original index of x_{k}
      j(1, jcol) = x3 * x[orig - 1];
      j(jcol, 1) = -x3 * x[orig - 1];
    }
    return j;
  };
  m.r_ell = [p, nl, gamma, beta](const State& x) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(nl, nl);
    double sq = 0.0;
    for (int i : p.ell) sq += x[i] * x[i];
    r(1, 1) = gamma * (0.5 * sq - beta);
    return r;
  };
  m.j_zero = [](const State&) { return Eigen::MatrixXd::Zero(1, 1); };
  m.r_zero = [](const State& x) {
    Eigen::MatrixXd r(1, 1);
    r(0, 0) = x[1] * x[1];
    return r;
  };
  return m;
}

State ph_target_field(const State& x, const StructureMatrices& mats,
                      const PartitionMap& p) {
  const int nl = static_cast<int>(p.ell.size());
  const int nz = static_cast<int>(p.zero.size());

  Eigen::VectorXd gl(nl), gz(nz);
  for (int i = 0; i < nl; ++i) gl[i] = x[p.ell[i]];   // gradient block = state block
  for (int i = 0; i < nz; ++i) gz[i] = x[p.zero[i]];

  const Eigen::VectorXd fl = (mats.j_ell(x) - mats.r_ell(x)) * gl;
  const Eigen::VectorXd fz = (mats.j_zero(x) - mats.r_zero(x)) * gz;

  State f(x.size());
  for (int i = 0; i < nl; ++i) f[p.ell[i]] = fl[i];
  for (int i = 0; i < nz; ++i) f[p.zero[i]] = fz[i];
  return f;
}

Vec2 epd_control_generic(const SystemModel& model, const State& x,
                         const StructureMatrices& mats, const PartitionMap& p) {
  const State target = ph_target_field(x, mats, p);
  const Eigen::MatrixXd s = s_matrix(model, x);
  const Eigen::Matrix2d gram = s.transpose() * s;
  // gram = diag(1 + x2^2 + ... + x_{n-1}^2, 1) >= I for this family, but a
  // malformed S would make it singular; fail loudly instead of dividing by ~0.
  if (std::abs(gram.determinant()) < 1e-12) {
    throw std::runtime_error("epd_control_generic: singular input Gram matrix");
  }
  const Eigen::Vector2d u = gram.ldlt().solve(s.transpose() * target);
  return u;
}

double inadmissible_indicator(const State& x) {
  return (x[0] * x[0] + x[1] * x[1]) * x[2] * x[2];
}

Vec2 ControllerSpec::eval(const SystemModel& model, const State& measured,
                          double t) const {
  switch (law) {
    case ControlLaw::EpdIntegrator:
      return epd_control_integrator(measured, epd);
    case ControlLaw::EpdChained:
      return epd_control_chained(measured, epd);
    case ControlLaw::EpdGeneric: {
      const StructureMatrices mats = epd_structure_matrices(model, epd);
      return epd_control_generic(model, measured, mats, partition_default(model));
    }
    case ControlLaw::Pomet:
      return pomet_control(measured, t);
    case ControlLaw::Astolfi:
      return astolfi_control(measured, astolfi);
    case ControlLaw::None:
      return Vec2::Zero();
  }
  throw std::logic_error("unreachable controller dispatch");
}

}  // namespace epd
