#include "fkcap/fkdet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fkcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// integral of (a + b E) log E over [lo, hi], 0 < lo <= hi
double cell_log_integral(double a, double b, double lo, double hi) {
  auto antider = [&](double e) {
    return a * (e * std::log(e) - e) + b * (0.5 * e * e * std::log(e) - 0.25 * e * e);
  };
  return antider(hi) - antider(lo);
}

// integral of log|E| times the linear interpolant of the density over the
// part of the cell [x0, x1] outside the window (-w, w)
double windowed_cell(double x0, double x1, double d0, double d1, double w) {
  const double slope = (d1 - d0) / (x1 - x0);
  const double a = d0 - slope * x0;  // density(E) = a + slope E
  double total = 0.0;
  if (x0 < -w) {  // reflected piece: u = -E, density = a - slope u
    double lo = std::max(w, -x1), hi = -x0;
    if (hi > lo) total += cell_log_integral(a, -slope, lo, hi);
  }
  if (x1 > w) {
    double lo = std::max(x0, w), hi = x1;
    if (hi > lo) total += cell_log_integral(a, slope, lo, hi);
  }
  return total;
}

}  // namespace

double fk_det_matrix(const cmat& b) {
  if (b.rows() != b.cols()) throw DomainError("fk_det_matrix: matrix must be square");
  if (b.rows() == 0) throw DomainError("fk_det_matrix: matrix must be nonempty");
  double lad = logabsdet(b);
  if (lad == -kInf) return 0.0;
  return std::exp(lad / static_cast<double>(b.rows()));
}

FkResult fk_det_capacity(const KrausTuple& eta, double tol, long max_iters) {
  FkResult res;
  res.route = FkRoute::capacity;
  res.capacity = estimate_capacity(eta, tol, max_iters);
  const double m = eta.dim();
  if (res.capacity.status == CapStatus::rank_decreasing_suspected ||
      res.capacity.cap_estimate == 0.0) {
    res.value = 0.0;
    res.log_det = -kInf;
    res.atom_flag = true;  // zero capacity means an atom at zero
    res.certified = res.capacity.status != CapStatus::iteration_budget_exhausted;
    return res;
  }
  res.log_det = std::log(res.capacity.cap_estimate) / (2.0 * m) - 0.5;
  res.value = std::exp(res.log_det);
  res.certified = res.capacity.status == CapStatus::converged;
  return res;
}

FkResult fk_det_spectral(const KrausTuple& eta, const SpectralParams& params) {
  if (params.eps_schedule.size() < 3)
    throw DomainError("fk_det_spectral: the epsilon schedule needs at least 3 entries");
  for (double e : params.eps_schedule)
    if (!(e > 0.0)) throw DomainError("fk_det_spectral: epsilons must be positive");

  FkResult res;
  res.route = FkRoute::spectral;

  res.atom_mass = atom_at_zero(eta);
  res.atom_flag = res.atom_mass > params.atom_threshold;
  if (res.atom_flag) {
    // An atom at zero kills the determinant outright.
    res.value = 0.0;
    res.log_det = -kInf;
    res.certified = false;
    return res;
  }

  std::vector<double> eps_sorted = params.eps_schedule;
  std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<double>());
  if (eps_sorted[eps_sorted.size() - 3] == eps_sorted.back())
    throw DomainError("fk_det_spectral: epsilon schedule must end in distinct values");

  for (double eps : eps_sorted) {
    SpectralGrid grid = density(eta, params.grid_points, eps, params.threads);
    // The window around zero is dominated by the eps-broadening, not by the
    // measure; drop it and let the extrapolation recover the limit.  The
    // density is interpolated linearly per cell and multiplied by log|E|
    // in closed form, so the window boundary never hits a grid artifact.
    const double w = 10.0 * eps;
    double integral = 0.0;
    for (Eigen::Index i = 0; i + 1 < grid.energies.size(); ++i)
      integral += windowed_cell(grid.energies(i), grid.energies(i + 1),
                                grid.density(i), grid.density(i + 1), w);
    res.eps_values.push_back(eps);
    res.log_integrals.push_back(integral);
  }

  // The windowed integral behaves like I0 + a eps + b eps log eps: the
  // excluded window contributes O(eps log eps) and the Lorentz broadening
  // O(eps).  Fit all three coefficients on the tail of the schedule and
  // keep the limit I0.
  const size_t n = res.eps_values.size();
  Eigen::Matrix3d design;
  Eigen::Vector3d rhs;
  for (int r = 0; r < 3; ++r) {
    double e = res.eps_values[n - 3 + static_cast<size_t>(r)];
    design(r, 0) = 1.0;
    design(r, 1) = e;
    design(r, 2) = e * std::log(e);
    rhs(r) = res.log_integrals[n - 3 + static_cast<size_t>(r)];
  }
  res.log_det = design.fullPivLu().solve(rhs)(0);
  res.value = std::exp(res.log_det);
  res.certified = false;
  return res;
}

CorollaryReport corollary_bound_check(const KrausTuple& eta) {
  if (!eta.integer_entries())
    throw DomainError("corollary_bound_check: tuple must have integer entries");
  CorollaryReport rep;
  rep.threshold = std::exp(-0.5) * (1.0 - 1e-2);
  rep.verdict = decide_rank_nondecreasing(eta);
  rep.checked = rep.verdict == RankVerdict::nondecreasing;
  if (!rep.checked) return rep;
  rep.value_capacity = fk_det_capacity(eta).value;
  rep.value_spectral = fk_det_spectral(eta).value;
  rep.holds = rep.value_capacity >= rep.threshold && rep.value_spectral >= rep.threshold;
  return rep;
}

}  // namespace fkcap
