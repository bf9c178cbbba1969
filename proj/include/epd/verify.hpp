#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "epd/controllers.hpp"

namespace epd {

// Pointwise structural audit of the closed loop at sampled states: the
// constraint-compatibility identity, skew-symmetry of the interconnection
// blocks, the signed-damping inequality, and agreement between the assembled
// field and the closed-form feedback.
struct VerificationReport {
  int n = 0;
  double max_matching_residual = 0.0;
  double max_ph_equiv_residual = 0.0;
  double max_skew_residual = 0.0;
  double min_epd_quadratic = 0.0;
  long sample_count = 0;
  bool pass = false;
};

// Residual tolerance for identities that hold analytically; nonzero only to
// absorb floating-point rounding in the matrix products.
constexpr double kVerifyTolerance = 1e-12;

// max over samples of |A(x)^T * target_field(x)|_inf: the assembled
// closed-loop field must satisfy the velocity constraint exactly.
double check_matching_pde(const SystemModel& model, const StructureMatrices& mats,
                          const PartitionMap& p, const std::vector<State>& samples);

// (max skew residual of j blocks, min eigenvalue of (r_ell + r_ell^T) * h_shift)
// over the samples. The first must vanish; the second must be >= 0 — damping
// may change sign, but only together with the shifted energy.
std::pair<double, double> check_skew_and_epd(const StructureMatrices& mats,
                                             const PartitionMap& p,
                                             const EpdParams& params,
                                             const std::vector<State>& samples);

// max over samples of |S(x) u(x) - target_field(x)|_inf for a given feedback;
// zero (to rounding) exactly when the feedback realizes the structured form.
double check_closed_loop_equivalence(
    const SystemModel& model,
    const std::function<Vec2(const State&)>& control,
    const StructureMatrices& mats, const PartitionMap& p,
    const std::vector<State>& samples);

enum class SetClass { TargetSet, UndesiredSet, Neither };

const char* set_class_name(SetClass c);

// Classifies a final state against the two invariant residual sets:
//   TargetSet:    |h_shift| <= tol and |x3| <= tol
//   UndesiredSet: |x2| <= tol, |x1 + x3*x4 + ... + x_{n-1}*xn| <= tol,
//                 |x3| > tol, |h_shift| > tol        (defined for n >= 4)
constexpr double kSetMembershipTolerance = 1e-3;
SetClass check_residual_set_membership(const State& x, int n, const EpdParams& params,
                                       double tol = kSetMembershipTolerance);

// Deterministic sample states, uniform over [-10,10]^n (covers every shipped
// initial condition with margin); hash-based so results reproduce everywhere.
std::vector<State> verification_samples(int n, long count, std::uint64_t seed);

// Full audit for the chained family of dimension n.
VerificationReport run_verification(int n, long sample_count = 10000,
                                    std::uint64_t seed = 42,
                                    const EpdParams& params = {0.5, 2.0});

// key = value lines, one per report field.
void write_report(const VerificationReport& report, std::ostream& out);

}  // namespace epd
