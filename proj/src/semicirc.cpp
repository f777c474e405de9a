#include "fkcap/semicirc.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fkcap/parallel.hpp"

namespace fkcap {

double support_radius(const KrausTuple& eta) {
  return 2.0 * std::sqrt(cp_norm(hermitize(eta)));
}

namespace {

constexpr long kMdeDefaultBudget = 400000;

double residual_norm(const KrausTuple& eta_h, cd z, const cmat& g, cmat& f_out) {
  const int d = eta_h.dim();
  cmat a = z * cmat::Identity(d, d) - fkcap::apply(eta_h, g);
  f_out = a.inverse();
  return (g - f_out).norm();
}

}  // namespace

MdeResult mde_solve_ex(const KrausTuple& eta_h, cd z, double tol, long max_iters,
                       const cmat* warm_start, std::vector<double>* residual_history) {
  if (!(z.imag() > 0.0))
    throw DomainError("mde_solve: z must lie in the upper half-plane");
  if (!eta_h.selfadjoint_kraus())
    throw DomainError(
        "mde_solve: Kraus matrices must be selfadjoint; hermitize the tuple first");
  if (!(tol > 0.0)) throw DomainError("mde_solve: tol must be positive");

  const int d = eta_h.dim();
  cmat g = warm_start ? *warm_start : cmat((1.0 / z) * cmat::Identity(d, d));
  cmat f(d, d);
  double res = 0.0;
  for (long it = 0; it <= max_iters; ++it) {
    res = residual_norm(eta_h, z, g, f);
    if (residual_history) residual_history->push_back(res);
    if (res <= tol) return {g, it, res};
    g = 0.5 * g + 0.5 * f;  // damped fixed-point update
  }
  throw ConvergenceError("mde_solve: fixed point not reached within budget", res);
}

cmat mde_solve(const KrausTuple& eta_h, cd z, double tol) {
  return mde_solve_ex(eta_h, z, tol, kMdeDefaultBudget).G;
}

SpectralGrid density(const KrausTuple& eta, int n_points, double epsilon, int threads) {
  if (n_points < 2) throw DomainError("density: need at least two grid points");
  if (!(epsilon > 0.0)) throw DomainError("density: epsilon must be positive");

  KrausTuple h = hermitize(eta);
  const int d = h.dim();
  const double r = support_radius(eta) + 1.0;

  SpectralGrid grid;
  grid.epsilon = epsilon;
  grid.energies.resize(n_points);
  grid.density = rvec::Zero(n_points);
  const double step = 2.0 * r / (n_points - 1);
  for (int i = 0; i < n_points; ++i) grid.energies(i) = -r + i * step;

  // The hermitized distribution is symmetric and the grid mirrors onto
  // itself (energies[i] = -energies[n-1-i]), so only E >= 0 is solved.
  std::vector<int> upper;
  for (int i = 0; i < n_points; ++i)
    if (grid.energies(i) > -0.5 * step) upper.push_back(i);

  // Fixed-size tiles, each swept with warm starts from its own cold start,
  // keep results independent of the thread count.
  constexpr int kTile = 64;
  const long n_tiles = (static_cast<long>(upper.size()) + kTile - 1) / kTile;
  std::vector<std::vector<int>> failures(static_cast<size_t>(n_tiles));

  parallel_for(n_tiles, threads, [&](long t) {
    size_t lo = static_cast<size_t>(t) * kTile;
    size_t hi = std::min(lo + kTile, upper.size());
    cmat warm;
    bool have_warm = false;
    for (size_t k = lo; k < hi; ++k) {
      int idx = upper[k];
      cd z(grid.energies(idx), epsilon);
      try {
        MdeResult sol = mde_solve_ex(h, z, 1e-9, kMdeDefaultBudget,
                                     have_warm ? &warm : nullptr);
        double rho = -sol.G.trace().imag() / d / std::numbers::pi;
        grid.density(idx) = std::max(rho, 0.0);
        warm = sol.G;
        have_warm = true;
      } catch (const ConvergenceError&) {
        failures[static_cast<size_t>(t)].push_back(idx);
        have_warm = false;
      }
    }
  });

  for (int i = 0; i < n_points; ++i)
    if (grid.energies(i) <= -0.5 * step)
      grid.density(i) = grid.density(n_points - 1 - i);

  for (auto& tile : failures)
    for (int idx : tile) {
      grid.failed_points.push_back(idx);
      int mirror = n_points - 1 - idx;
      if (mirror != idx) grid.failed_points.push_back(mirror);
    }
  std::sort(grid.failed_points.begin(), grid.failed_points.end());

  grid.mass = trapezoid(grid.energies, grid.density);
  return grid;
}

double atom_at_zero(const KrausTuple& eta) {
  KrausTuple h = hermitize(eta);
  const int d = h.dim();
  const std::vector<double> schedule = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> eps_used, a_vals;
  for (double eps : schedule) {
    // G(i eps) scales like atom/eps, so the residual target scales with it.
    double tol = 1e-10 * (1.0 + 1.0 / eps);
    cmat g = mde_solve(h, cd(0.0, eps), tol);
    eps_used.push_back(eps);
    a_vals.push_back(eps * (-g.trace().imag() / d));
  }
  // Linear-in-eps extrapolation over the three smallest epsilons.
  size_t n = eps_used.size(), k = std::min<size_t>(3, n);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = n - k; i < n; ++i) {
    sx += eps_used[i];
    sy += a_vals[i];
    sxx += eps_used[i] * eps_used[i];
    sxy += eps_used[i] * a_vals[i];
  }
  double det = k * sxx - sx * sx;
  double a0 = (sxx * sy - sx * sxy) / det;
  return std::clamp(a0, 0.0, 1.0);
}

namespace {

std::vector<Pairing> pairings_of(const std::vector<int>& points) {
  if (points.empty()) return {Pairing{}};
  std::vector<Pairing> out;
  // The first point pairs at an odd offset so that both sides stay even.
  for (size_t j = 1; j < points.size(); j += 2) {
    std::vector<int> inside(points.begin() + 1, points.begin() + j);
    std::vector<int> outside(points.begin() + j + 1, points.end());
    for (const Pairing& pi : pairings_of(inside))
      for (const Pairing& po : pairings_of(outside)) {
        Pairing p;
        p.reserve(1 + pi.size() + po.size());
        p.emplace_back(points[0], points[j]);
        p.insert(p.end(), pi.begin(), pi.end());
        p.insert(p.end(), po.begin(), po.end());
        out.push_back(std::move(p));
      }
  }
  return out;
}

}  // namespace

const std::vector<Pairing>& enumerate_nc2(int two_k) {
  if (two_k < 0 || two_k % 2 != 0)
    throw DomainError("enumerate_nc2: the number of points must be even");
  if (two_k > 20)
    throw DomainError("enumerate_nc2: enumeration is capped at 20 points");
  static std::mutex mu;
  static std::map<int, std::vector<Pairing>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(two_k);
  if (it == cache.end()) {
    std::vector<int> points(static_cast<size_t>(two_k));
    for (int i = 0; i < two_k; ++i) points[static_cast<size_t>(i)] = i + 1;
    it = cache.emplace(two_k, pairings_of(points)).first;
  }
  return it->second;
}

double catalan(int k) {
  if (k < 0) throw DomainError("catalan: k must be nonnegative");
  // Exact in integer arithmetic for every k usable here.
  unsigned long long c = 1;
  for (int i = 0; i < k; ++i)
    c = c * 2ULL * static_cast<unsigned long long>(2 * i + 1) /
        static_cast<unsigned long long>(i + 2);
  return static_cast<double>(c);
}

double moment(const KrausTuple& eta, int k) {
  if (!eta.selfadjoint_kraus())
    throw DomainError(
        "moment: Kraus matrices must be selfadjoint; hermitize the tuple first");
  if (k < 0 || k > 10) throw DomainError("moment: k must lie in [0, 10]");
  if (k == 0) return 1.0;

  const int m = eta.dim();
  const cmat one = cmat::Identity(m, m);
  double total = 0.0;
  for (const Pairing& pairing : enumerate_nc2(2 * k)) {
    // Contract the leftmost nearest-neighbor pair (p, p+1): the slot
    // between its legs passes through eta and merges with its neighbors.
    std::vector<cmat> slots(static_cast<size_t>(2 * k + 1), one);
    Pairing pairs = pairing;
    while (!pairs.empty()) {
      size_t chosen = pairs.size();
      int p = 0;
      for (size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].second == pairs[i].first + 1 &&
            (chosen == pairs.size() || pairs[i].first < p)) {
          chosen = i;
          p = pairs[i].first;
        }
      }
      cmat merged = slots[static_cast<size_t>(p - 1)] *
                    fkcap::apply(eta, slots[static_cast<size_t>(p)]) *
                    slots[static_cast<size_t>(p + 1)];
      slots.erase(slots.begin() + (p - 1), slots.begin() + (p + 2));
      slots.insert(slots.begin() + (p - 1), std::move(merged));
      pairs.erase(pairs.begin() + static_cast<long>(chosen));
      for (auto& pr : pairs) {
        if (pr.first > p) pr.first -= 2;
        if (pr.second > p) pr.second -= 2;
      }
    }
    total += slots[0].trace().real() / m;
  }
  return total;
}

double semicircle_deviation_bound(const KrausTuple& eta, int k) {
  if (k < 0) throw DomainError("semicircle_deviation_bound: k must be nonnegative");
  const int m = eta.dim();
  cmat one = cmat::Identity(m, m);
  auto [lam, u] = herm_eig(fkcap::apply(eta, one) - one);
  (void)u;
  double dev = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  double norm = cp_norm(eta);
  double geom = 0.0, pw = 1.0;
  for (int j = 0; j < k; ++j) {
    geom += pw;
    pw *= norm;
  }
  return catalan(k) * geom * dev;
}

MomentTable moment_table(const KrausTuple& eta, int k_max) {
  if (k_max < 0 || k_max > 10)
    throw DomainError("moment_table: k_max must lie in [0, 10]");
  MomentTable t;
  t.k_max = k_max;
  for (int k = 0; k <= k_max; ++k) {
    t.moments.push_back(moment(eta, k));
    t.bounds.push_back(semicircle_deviation_bound(eta, k));
  }
  return t;
}

double trapezoid(const rvec& x, const rvec& y) {
  if (x.size() != y.size()) throw DomainError("trapezoid: size mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i)
    s += 0.5 * (y(i) + y(i + 1)) * (x(i + 1) - x(i));
  return s;
}

}  // namespace fkcap
