#pragma once

#include <utility>
#include <vector>

#include "fkcap/cpmap.hpp"

namespace fkcap {

// Upper bound 2 ||hermitize(eta)||^{1/2} on the spectral radius of the
// (hermitized) semicircular element of the tuple.
double support_radius(const KrausTuple& eta);

struct MdeResult {
  cmat G;
  long iterations = 0;
  double residual = 0.0;
};

// Matrix Dyson equation G = (z 1 - eta(G))^{-1} for a selfadjoint-Kraus
// tuple and Im z > 0, solved by damped fixed-point iteration (damping 1/2,
// cold start G0 = (1/z) 1).  The returned G satisfies
// ||G - (z - eta(G))^{-1}||_F <= tol.  Throws ConvergenceError when the
// budget runs out and DomainError for Im z <= 0 or non-selfadjoint Kraus.
cmat mde_solve(const KrausTuple& eta_h, cd z, double tol = 1e-10);

// Same iteration with diagnostics: optional warm start and a residual
// history (one entry per iterate, including the accepted one).
MdeResult mde_solve_ex(const KrausTuple& eta_h, cd z, double tol, long max_iters,
                       const cmat* warm_start = nullptr,
                       std::vector<double>* residual_history = nullptr);

struct SpectralGrid {
  rvec energies;
  rvec density;
  double epsilon = 0.0;
  double mass = 0.0;                // trapezoid integral of density
  std::vector<int> failed_points;   // grid indices where the solver gave up
};

// Broadened spectral density E -> -(1/pi) Im tr G(E + i eps) of the
// hermitized tuple on a uniform grid over [-R-1, R+1], R = support_radius.
// The distribution is symmetric, so only E >= 0 is solved and the rest is
// mirrored.  threads = 0 uses all available cores.
SpectralGrid density(const KrausTuple& eta, int n_points = 2000,
                     double epsilon = 1e-3, int threads = 0);

// Mass of the atom at zero, from eps * (-Im tr G(i eps)) extrapolated
// linearly in eps over the tail of the schedule {1e-1, ..., 1e-3};
// clamped to [0, 1].
double atom_at_zero(const KrausTuple& eta);

using Pairing = std::vector<std::pair<int, int>>;

// All non-crossing pair partitions of {1, ..., two_k}; cached per two_k.
// two_k <= 20 (Catalan growth).
const std::vector<Pairing>& enumerate_nc2(int two_k);

double catalan(int k);

// tr E[S^{2k}] for the selfadjoint semicircular element S of a
// selfadjoint-Kraus tuple, summed over non-crossing pairings with each
// pairing evaluated by repeatedly contracting the leftmost nearest-neighbor
// pair through eta.  k <= 10.
double moment(const KrausTuple& eta, int k);

// C_k (sum_{j<k} ||eta||^j) ||eta(1) - 1||: how far the 2k-th moment can sit
// from the Catalan number C_k.
double semicircle_deviation_bound(const KrausTuple& eta, int k);

struct MomentTable {
  int k_max = 0;
  std::vector<double> moments;  // index k = 0..k_max
  std::vector<double> bounds;
};

MomentTable moment_table(const KrausTuple& eta, int k_max);

// Trapezoid rule on a sampled function.
double trapezoid(const rvec& x, const rvec& y);

}  // namespace fkcap
