#pragma once

#include <vector>

#include "fkcap/matkernel.hpp"

namespace fkcap {

// A completely positive map b -> sum_i a_i b a_i^* held by its Kraus
// matrices.  All a_i are m x m; the tuple is immutable once built.
class KrausTuple {
 public:
  explicit KrausTuple(std::vector<cmat> ops);

  int dim() const { return m_; }
  int terms() const { return static_cast<int>(ops_.size()); }
  const cmat& op(int i) const { return ops_[static_cast<size_t>(i)]; }
  const std::vector<cmat>& ops() const { return ops_; }

  // True iff every entry of every Kraus matrix is exactly a real integer.
  // Decided once, at construction, by exact comparison.
  bool integer_entries() const { return integer_; }

  // True iff every Kraus matrix is hermitian (so the associated
  // semicircular element is selfadjoint).
  bool selfadjoint_kraus() const;

 private:
  friend KrausTuple depolarize(const KrausTuple&, double);

  std::vector<cmat> ops_;
  int m_ = 0;
  bool integer_ = false;
};

struct ChoiMatrix {
  int m = 0;
  cmat mat;  // m^2 x m^2
};

// eta(b) = sum_i a_i b a_i^*
cmat apply(const KrausTuple& eta, const cmat& b);

// eta^*(b) = sum_i a_i^* b a_i  (trace-dual of eta)
cmat apply_dual(const KrausTuple& eta, const cmat& b);

// Distance-to-doubly-stochastic: Tr (eta(1)-1)^2 + Tr (eta*(1)-1)^2,
// unnormalized trace.  Zero exactly when eta(1) = eta*(1) = 1.
double ds(const KrausTuple& eta);

// Two-sided scaling {c1 a_i c2}; as a map, b -> c1 eta(c2^* b c2) c1^*.
KrausTuple scale(const KrausTuple& eta, const cmat& c1, const cmat& c2);

// eta + t * (b -> tr_m(b) 1_m), realized by appending the m^2 matrix-unit
// Kraus terms sqrt(t/m) E_ij.  t = 0 returns eta unchanged; t > 0 clears
// the integer flag.
KrausTuple depolarize(const KrausTuple& eta, double t);

// ||eta|| for completely positive eta: the largest eigenvalue of eta(1).
double cp_norm(const KrausTuple& eta);

// Size-2m tuple with Kraus blocks [[0, a_i], [a_i^*, 0]]; selfadjoint by
// construction.  Reduces every spectral question about the tuple to the
// selfadjoint case without changing the Fuglede-Kadison determinant.
KrausTuple hermitize(const KrausTuple& eta);

// Choi matrix sum_ij E_ij (x) eta(E_ij).
ChoiMatrix choi(const KrausTuple& eta);

// Kraus tuple recovered from a PSD Choi matrix by eigendecomposition;
// eigenvalues below 1e-10 * ||C|| are dropped.
KrausTuple kraus_from_choi(const ChoiMatrix& c);

}  // namespace fkcap
