#pragma once

#include <vector>

#include "fkcap/capacity.hpp"
#include "fkcap/semicirc.hpp"

namespace fkcap {

// Fuglede-Kadison determinant of a finite matrix with respect to the
// normalized trace: |det b|^{1/m} = exp(logabsdet(b)/m); zero for exactly
// singular b.
double fk_det_matrix(const cmat& b);

enum class FkRoute { capacity, spectral };

struct FkResult {
  double value = 0.0;
  FkRoute route = FkRoute::capacity;
  bool certified = false;

  // capacity route
  CapacityReport capacity;

  // spectral route
  bool atom_flag = false;
  double atom_mass = 0.0;
  std::vector<double> eps_values;
  std::vector<double> log_integrals;  // windowed log integral per epsilon
  double log_det = 0.0;               // extrapolated value of the log integral
};

// Capacity route: Delta(S) = cap(eta)^{1/2m} e^{-1/2}.  Rank-decreasing
// tuples give 0; only a budget-exhausted capacity run leaves the result
// uncertified.
FkResult fk_det_capacity(const KrausTuple& eta, double tol = 1e-8,
                         long max_iters = -1);

struct SpectralParams {
  std::vector<double> eps_schedule = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  int grid_points = 2000;
  double atom_threshold = 0.05;
  int threads = 0;
};

// Spectral route: exp of the log-modulus integral of the hermitized density.
// The window |t| < 10 eps is excluded from each broadened integral; the
// excluded mass and the Lorentz bias vanish like eps log eps and eps, so the
// tail of the schedule is extrapolated with that model and the constant term
// is kept.  An atom at zero above the threshold short-circuits to 0.
FkResult fk_det_spectral(const KrausTuple& eta, const SpectralParams& params = {});

struct CorollaryReport {
  RankVerdict verdict = RankVerdict::inconclusive;
  bool checked = false;  // verdict was nondecreasing
  bool holds = false;
  double value_capacity = 0.0;
  double value_spectral = 0.0;
  double threshold = 0.0;  // e^{-1/2} (1 - 1e-2)
};

// For an integral tuple: if it is rank nondecreasing, both determinant
// routes must clear e^{-1/2} up to 1% slack.
CorollaryReport corollary_bound_check(const KrausTuple& eta);

}  // namespace fkcap
