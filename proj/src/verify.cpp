#include "epd/verify.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "epd/sim.hpp"

namespace epd {

double check_matching_pde(const SystemModel& model, const StructureMatrices& mats,
                          const PartitionMap& p, const std::vector<State>& samples) {
  double worst = 0.0;
  for (const State& x : samples) {
    const State f = ph_target_field(x, mats, p);
    const Eigen::VectorXd r = constraint_residual(model, x, f);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::pair<double, double> check_skew_and_epd(const StructureMatrices& mats,
                                             const PartitionMap& p,
                                             const EpdParams& params,
                                             const std::vector<State>& samples) {
  double max_skew = 0.0;
  double min_quad = std::numeric_limits<double>::infinity();
  for (const State& x : samples) {
    const Eigen::MatrixXd jl = mats.j_ell(x);
    const Eigen::MatrixXd jz = mats.j_zero(x);
    max_skew = std::max(max_skew, (jl + jl.transpose()).cwiseAbs().maxCoeff());
    max_skew = std::max(max_skew, (jz + jz.transpose()).cwiseAbs().maxCoeff());

    const Eigen::MatrixXd rl = mats.r_ell(x);
    const double hs = h_shift(x, params, p);
    const Eigen::MatrixXd quad = (rl + rl.transpose()) * hs;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(quad);
    min_quad = std::min(min_quad, eig.eigenvalues().minCoeff());
  }
  if (samples.empty()) min_quad = 0.0;
  return {max_skew, min_quad};
}

double check_closed_loop_equivalence(
    const SystemModel& model,
    const std::function<Vec2(const State&)>& control,
    const StructureMatrices& mats, const PartitionMap& p,
    const std::vector<State>& samples) {
  double worst = 0.0;
  for (const State& x : samples) {
    const State lhs = vector_field(model, x, control(x));
    const State rhs = ph_target_field(x, mats, p);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

const char* set_class_name(SetClass c) {
  switch (c) {
    case SetClass::TargetSet: return "TargetSet";
    case SetClass::UndesiredSet: return "UndesiredSet";
    case SetClass::Neither: return "Neither";
  }
  return "Unknown";
}

SetClass check_residual_set_membership(const State& x, int n,
                                       const EpdParams& params, double tol) {
  const SystemModel model = SystemModel::chained(n);
  const PartitionMap p = partition_default(model);
  const double hs = h_shift(x, params, p);
  const double x3 = x[2];

  if (std::abs(hs) <= tol && std::abs(x3) <= tol) return SetClass::TargetSet;

  if (n >= 4) {
    double anchor = x[0];
    for (int k = 2; k + 1 < n; ++k) anchor += x[k] * x[k + 1];
    if (std::abs(x[1]) <= tol && std::abs(anchor) <= tol &&
        std::abs(x3) > tol && std::abs(hs) > tol) {
      return SetClass::UndesiredSet;
    }
  }
  return SetClass::Neither;
}

std::vector<State> verification_samples(int n, long count, std::uint64_t seed) {
  std::vector<State> samples;
  samples.reserve(static_cast<std::size_t>(count));
  NoiseSettings hash;
  hash.enabled = true;
  hash.amplitude = 10.0;  // uniform on [-10, 10]
  hash.sample_time = 1.0;
  hash.seed = seed;
  for (long i = 0; i < count; ++i) {
    State x(n);
    for (int c = 0; c < n; ++c) {
      x[c] = sample_noise(hash, static_cast<double>(i), c);
    }
    samples.push_back(std::move(x));
  }
  return samples;
}

VerificationReport run_verification(int n, long sample_count, std::uint64_t seed,
                                    const EpdParams& params) {
  const SystemModel model = SystemModel::chained(n);
  const PartitionMap p = partition_default(model);
  const StructureMatrices mats = epd_structure_matrices(model, params);
  const std::vector<State> samples = verification_samples(n, sample_count, seed);

  VerificationReport report;
  report.n = n;
  report.sample_count = sample_count;
  report.max_matching_residual = check_matching_pde(model, mats, p, samples);
  auto [skew, quad] = check_skew_and_epd(mats, p, params, samples);
  report.max_skew_residual = skew;
  report.min_epd_quadratic = quad;
  report.max_ph_equiv_residual = check_closed_loop_equivalence(
      model, [&](const State& x) { return epd_control_chained(x, params); },
      mats, p, samples);
  report.pass = report.max_matching_residual <= kVerifyTolerance &&
                report.max_ph_equiv_residual <= kVerifyTolerance &&
                report.max_skew_residual <= kVerifyTolerance &&
                report.min_epd_quadratic >= -kVerifyTolerance;
  return report;
}

void write_report(const VerificationReport& report, std::ostream& out) {
  out << "n = " << report.n << "\n";
  char buf[64];
  const auto put = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << key << " = " << buf << "\n";
  };
  put("max_matching_residual", report.max_matching_residual);
  put("max_ph_equiv_residual", report.max_ph_equiv_residual);
  put("max_skew_residual", report.max_skew_residual);
  put("min_epd_quadratic", report.min_epd_quadratic);
  out << "sample_count = " << report.sample_count << "\n";
  out << "pass = " << (report.pass ? "true" : "false") << "\n";
}

}  // namespace epd
