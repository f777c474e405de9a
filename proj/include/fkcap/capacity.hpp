#pragma once

#include <cstdint>
#include <vector>

#include "fkcap/cpmap.hpp"

namespace fkcap {

// det(eta(b)) / det(b) for positive definite b, evaluated in log space.
// Scale-invariant in b; returns 0 when eta(b) fails to be definite (which
// certifies vanishing capacity, since b has full rank).
double capacity_objective(const KrausTuple& eta, const cmat& b);

enum class Side { left, right };

// One operator-Sinkhorn trajectory.  `current` is the running scaled tuple;
// the accumulators track log |det c1|^2 and log |det c2|^2 of the absorbed
// normalizers, so that at every step
//   log cap(original) = log cap(current) - acc_log_left - acc_log_right.
// right_product is the ordered product of the right normalizers (oldest
// first, since later normalizers act on the already-scaled tuple), and
// witness_b = right_product right_product^* is the candidate minimizer of
// the original objective.
struct ScalingState {
  KrausTuple current;
  double acc_log_left = 0.0;
  double acc_log_right = 0.0;
  cmat right_product;
  cmat witness_b;
  std::vector<double> ds_history;
  long iterations = 0;
};

ScalingState make_scaling_state(const KrausTuple& eta);

// One normalization step.  left:  multiply Kraus by eta(1)^{-1/2} on the
// left (afterwards eta(1) = 1 exactly); right: by (eta*(1))^{-1/2} on the
// right.  Throws SingularError when the normalizer is singular at working
// precision, which is the rank-decreasing signature.
ScalingState sinkhorn_step(const ScalingState& state, Side side);

enum class CapStatus { converged, rank_decreasing_suspected, iteration_budget_exhausted };

struct CapacityReport {
  double cap_estimate = 0.0;  // exp(-acc_left - acc_right), clamped by cap_upper
  double cap_upper = 0.0;     // best objective over all visited witnesses (rigorous)
  double ds_final = 0.0;
  CapStatus status = CapStatus::iteration_budget_exhausted;
  long iterations = 0;
  cmat witness_b;  // determinant-normalized
};

const char* to_string(CapStatus s);

// 200 m^2 (1 + total bit size of the entries when the tuple is integral).
long default_iteration_budget(const KrausTuple& eta);

// Alternating Sinkhorn scaling, starting with a right step, until
// ds < tol or the budget runs out.  max_iters < 0 means the default budget.
CapacityReport estimate_capacity(const KrausTuple& eta, double tol = 1e-8,
                                 long max_iters = -1);

enum class RankVerdict { nondecreasing, decreasing, inconclusive };

const char* to_string(RankVerdict v);

// Scaling-based decision procedure: nondecreasing as soon as some iterate
// has ds < 1/(m+1); decreasing on a singular normalizer, or (for integral
// tuples) when the budget is exhausted with ds still above threshold;
// inconclusive otherwise.  budget < 0 means the default budget.
RankVerdict decide_rank_nondecreasing(const KrausTuple& eta, long budget = -1);

struct BruteForceResult {
  double value = 0.0;
  bool certified = false;  // best value came from a start that met the gradient test
};

// Direct minimization of det eta(b) over det b = 1, b > 0, in the Cholesky
// parametrization b = L L^* (lower triangular, positive diagonal), with
// multi-start Armijo gradient descent and determinant normalization after
// each accepted step.  Desk-scale oracle: m <= 4.
BruteForceResult brute_force_capacity(const KrausTuple& eta, long budget = 2000,
                                      int starts = 16,
                                      std::uint64_t seed = 0x5eed0cab);

struct IntegerBoundReport {
  RankVerdict verdict = RankVerdict::inconclusive;
  CapacityReport capacity;
  bool bound_checked = false;  // verdict was nondecreasing, so the bound applies
  bool bound_holds = false;    // cap_upper >= 1 - 1e-6
};

// For an integral tuple: decide rank behaviour, estimate the capacity, and
// check the "capacity at least one" lower bound when it applies.
IntegerBoundReport check_integer_bound(const KrausTuple& eta);

}  // namespace fkcap
