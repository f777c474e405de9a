#include "fkcap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fkcap/parallel.hpp"
#include "fkcap/randmat.hpp"

namespace fkcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Eigendecomposition with the definiteness check shared by the normalizers.
struct PdPieces {
  rvec lam;
  cmat u;
  double logdet;
};

PdPieces pd_pieces(const cmat& b, const char* who) {
  auto [lam, u] = herm_eig(b);
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  double floor = 1e-12 * std::max(1.0, scale);
  if (lam(0) <= floor)
    throw SingularError(std::string(who) + ": normalizer is singular", lam(0));
  return {lam, u, lam.array().log().sum()};
}

cmat inv_sqrt_from(const PdPieces& p) {
  rvec w = p.lam.array().rsqrt();
  cmat r = p.u * w.asDiagonal() * p.u.adjoint();
  return 0.5 * (r + r.adjoint());
}

double objective_log(const KrausTuple& eta, const cmat& b, double logdet_b) {
  cmat eb = fkcap::apply(eta, b);
  auto [lam, u] = herm_eig(eb);
  (void)u;
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  double floor = 1e-12 * std::max(1.0, scale);
  if (lam(0) <= floor) return -kInf;  // eta(b) singular => objective 0
  return lam.array().log().sum() - logdet_b;
}

}  // namespace

double capacity_objective(const KrausTuple& eta, const cmat& b) {
  const int m = eta.dim();
  if (b.rows() != m || b.cols() != m)
    throw DomainError("capacity_objective: b must be m x m");
  if (!is_hermitian(b, 1e-10))
    throw DomainError("capacity_objective: b must be hermitian");
  auto [lam, u] = herm_eig(b);
  (void)u;
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  if (lam(0) <= 1e-12 * std::max(1.0, scale))
    throw DomainError("capacity_objective: b must be positive definite");
  double v = objective_log(eta, b, lam.array().log().sum());
  return v == -kInf ? 0.0 : std::exp(v);
}

ScalingState make_scaling_state(const KrausTuple& eta) {
  cmat one = cmat::Identity(eta.dim(), eta.dim());
  ScalingState s{eta, 0.0, 0.0, one, one, {}, 0};
  return s;
}

ScalingState sinkhorn_step(const ScalingState& state, Side side) {
  const KrausTuple& eta = state.current;
  cmat one = cmat::Identity(eta.dim(), eta.dim());
  ScalingState next = state;
  if (side == Side::left) {
    PdPieces p = pd_pieces(fkcap::apply(eta, one), "sinkhorn_step");
    cmat c1 = inv_sqrt_from(p);
    next.current = scale(eta, c1, one);
    next.acc_log_left += -p.logdet;  // log |det c1|^2
  } else {
    PdPieces p = pd_pieces(apply_dual(eta, one), "sinkhorn_step");
    cmat c2 = inv_sqrt_from(p);
    next.current = scale(eta, one, c2);
    next.acc_log_right += -p.logdet;  // log |det c2|^2
    // c2 acts on the current tuple, so it composes on the inside of the
    // accumulated product; the reversed order would miss the minimizer.
    next.right_product = state.right_product * c2;
    cmat w = next.right_product * next.right_product.adjoint();
    next.witness_b = 0.5 * (w + w.adjoint());
  }
  next.iterations = state.iterations + 1;
  return next;
}

const char* to_string(CapStatus s) {
  switch (s) {
    case CapStatus::converged: return "converged";
    case CapStatus::rank_decreasing_suspected: return "rank_decreasing_suspected";
    case CapStatus::iteration_budget_exhausted: return "iteration_budget_exhausted";
  }
  return "unknown";
}

const char* to_string(RankVerdict v) {
  switch (v) {
    case RankVerdict::nondecreasing: return "nondecreasing";
    case RankVerdict::decreasing: return "decreasing";
    case RankVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

long default_iteration_budget(const KrausTuple& eta) {
  long bits = 0;
  if (eta.integer_entries())
    for (const cmat& a : eta.ops())
      for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
          bits += static_cast<long>(
              std::ceil(std::log2(1.0 + std::abs(a(i, j).real()))));
  long m = eta.dim();
  return 200 * m * m * (1 + bits);
}

CapacityReport estimate_capacity(const KrausTuple& eta, double tol, long max_iters) {
  if (!(tol > 0.0)) throw DomainError("estimate_capacity: tol must be positive");
  if (max_iters < 0) max_iters = default_iteration_budget(eta);

  ScalingState state = make_scaling_state(eta);
  double best_upper;
  try {
    best_upper = capacity_objective(eta, state.witness_b);
  } catch (const DomainError&) {
    best_upper = kInf;  // unreachable for the identity witness; defensive
  }

  CapStatus status = CapStatus::iteration_budget_exhausted;
  Side side = Side::right;  // alternation starts on the right
  double d = 0.0;
  for (;;) {
    d = ds(state.current);
    state.ds_history.push_back(d);
    if (d < tol) {
      status = CapStatus::converged;
      break;
    }
    if (state.iterations >= max_iters) {
      status = CapStatus::iteration_budget_exhausted;
      break;
    }
    try {
      state = sinkhorn_step(state, side);
    } catch (const SingularError&) {
      status = CapStatus::rank_decreasing_suspected;
      break;
    }
    if (side == Side::right) {
      try {
        best_upper =
            std::min(best_upper, capacity_objective(eta, state.witness_b));
      } catch (const DomainError&) {
        // witness too ill-conditioned to evaluate; keep the bound we have
      }
    }
    side = (side == Side::right) ? Side::left : Side::right;
  }

  CapacityReport rep;
  rep.status = status;
  rep.ds_final = d;
  rep.iterations = state.iterations;
  rep.cap_upper = best_upper;
  if (status == CapStatus::rank_decreasing_suspected) {
    rep.cap_estimate = 0.0;
  } else {
    // exp(-acc) is the capacity of the doubly stochastic limit pulled back
    // through the accumulated scalings; the witness objective is a rigorous
    // upper bound, so it caps the estimate.
    rep.cap_estimate =
        std::min(std::exp(-state.acc_log_left - state.acc_log_right), best_upper);
  }
  // Report the witness at determinant one (the objective is scale-free).
  rep.witness_b = state.witness_b;
  try {
    double ld = logdet_pd(state.witness_b);
    rep.witness_b = state.witness_b * std::exp(-ld / eta.dim());
  } catch (const SingularError&) {
    // leave the raw accumulated witness in place
  }
  return rep;
}

RankVerdict decide_rank_nondecreasing(const KrausTuple& eta, long budget) {
  if (budget < 0) budget = default_iteration_budget(eta);
  const double threshold = 1.0 / (eta.dim() + 1.0);
  ScalingState state = make_scaling_state(eta);
  Side side = Side::right;
  for (;;) {
    if (ds(state.current) < threshold) return RankVerdict::nondecreasing;
    if (state.iterations >= budget)
      return eta.integer_entries() ? RankVerdict::decreasing
                                   : RankVerdict::inconclusive;
    try {
      state = sinkhorn_step(state, side);
    } catch (const SingularError&) {
      return RankVerdict::decreasing;
    }
    side = (side == Side::right) ? Side::left : Side::right;
  }
}

namespace {

struct DescentOutcome {
  double log_value = kInf;
  bool converged = false;
};

// Objective in the Cholesky parametrization b = L L^*, det-normalized:
// f(L) = log det eta(L L^*) - 2 sum_i log L_ii.
DescentOutcome descend(const KrausTuple& eta, cmat L, long budget) {
  const int m = eta.dim();

  auto normalize = [&](cmat& l) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += std::log(l(i, i).real());
    l *= std::exp(-s / m);
  };

  auto eval = [&](const cmat& l) -> double {
    cmat b = l * l.adjoint();
    double logdet_b = 0.0;
    for (int i = 0; i < m; ++i) logdet_b += 2.0 * std::log(l(i, i).real());
    return objective_log(eta, b, logdet_b);
  };

  normalize(L);
  double f = eval(L);
  if (f == -kInf) return {-kInf, true};  // objective hits zero at an interior b

  double step = 1.0;
  bool converged = false;
  for (long it = 0; it < budget; ++it) {
    if (f == -kInf) return {-kInf, true};
    cmat b = L * L.adjoint();
    cmat eb = fkcap::apply(eta, b);
    // gradient of f at b: eta^*(eta(b)^{-1}) - b^{-1}; chain rule through
    // b = L L^* gives 2 tril(G L) with a real diagonal.
    cmat gb = apply_dual(eta, eb.inverse()) - b.inverse();
    cmat grad = 2.0 * (gb * L);
    for (int j = 0; j < m; ++j) {
      grad(j, j) = cd(grad(j, j).real(), 0.0);
      for (int i = 0; i < j; ++i) grad(i, j) = cd(0.0, 0.0);
    }
    double g2 = grad.squaredNorm();
    if (std::sqrt(g2) <= 1e-11 * std::max(1.0, std::abs(f))) {
      converged = true;
      break;
    }
    bool accepted = false;
    for (int back = 0; back < 60; ++back) {
      cmat trial = L - step * grad;
      bool ok = true;
      for (int i = 0; i < m; ++i)
        if (!(trial(i, i).real() > 0.0)) { ok = false; break; }
      if (ok) {
        normalize(trial);
        double ft = eval(trial);
        if (ft <= f - 1e-4 * step * g2) {
          L = trial;
          f = ft;
          accepted = true;
          step = std::min(step * 1.5, 1e3);
          break;
        }
      }
      step *= 0.5;
      if (step < 1e-18) break;
    }
    if (!accepted) break;  // line search stalled
  }
  return {f, converged};
}

}  // namespace

BruteForceResult brute_force_capacity(const KrausTuple& eta, long budget,
                                      int starts, std::uint64_t seed) {
  const int m = eta.dim();
  if (m > 4)
    throw DomainError("brute_force_capacity: desk-scale oracle, m <= 4 only");
  if (starts < 1) throw DomainError("brute_force_capacity: starts must be >= 1");

  std::vector<DescentOutcome> outcomes(static_cast<size_t>(starts));
  parallel_for(starts, 0, [&](long s) {
    cmat L0 = cmat::Identity(m, m);
    if (s > 0) {
      Rng rng(derive_stream(seed, static_cast<std::uint64_t>(s)));
      for (int i = 0; i < m; ++i) {
        L0(i, i) = std::exp(0.5 * rng.normal());
        for (int j = 0; j < i; ++j)
          L0(i, j) = 0.4 * cd(rng.normal(), rng.normal());
      }
    }
    outcomes[static_cast<size_t>(s)] = descend(eta, L0, budget);
  });

  size_t best = 0;
  for (size_t s = 1; s < outcomes.size(); ++s)
    if (outcomes[s].log_value < outcomes[best].log_value) best = s;
  BruteForceResult res;
  res.value = std::exp(outcomes[best].log_value);
  res.certified = outcomes[best].converged;
  return res;
}

IntegerBoundReport check_integer_bound(const KrausTuple& eta) {
  if (!eta.integer_entries())
    throw DomainError("check_integer_bound: tuple does not have integer entries");
  IntegerBoundReport rep;
  rep.verdict = decide_rank_nondecreasing(eta);
  rep.capacity = estimate_capacity(eta);
  rep.bound_checked = (rep.verdict == RankVerdict::nondecreasing);
  rep.bound_holds = rep.bound_checked && rep.capacity.cap_upper >= 1.0 - 1e-6;
  return rep;
}

}  // namespace fkcap
