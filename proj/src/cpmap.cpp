#include "fkcap/cpmap.hpp"

#include <cmath>
#include <utility>

namespace fkcap {

KrausTuple::KrausTuple(std::vector<cmat> ops) : ops_(std::move(ops)) {
  if (ops_.empty())
    throw DomainError("KrausTuple: at least one Kraus matrix is required");
  m_ = static_cast<int>(ops_[0].rows());
  if (m_ < 1) throw DomainError("KrausTuple: matrices must be at least 1 x 1");
  for (const cmat& a : ops_)
    if (a.rows() != m_ || a.cols() != m_)
      throw DomainError("KrausTuple: all Kraus matrices must be m x m");

  integer_ = true;
  for (const cmat& a : ops_)
    for (Eigen::Index j = 0; j < a.cols() && integer_; ++j)
      for (Eigen::Index i = 0; i < a.rows() && integer_; ++i) {
        cd v = a(i, j);
        if (v.imag() != 0.0 || v.real() != std::nearbyint(v.real()))
          integer_ = false;
      }
}

bool KrausTuple::selfadjoint_kraus() const {
  for (const cmat& a : ops_)
    if (!is_hermitian(a, 1e-12)) return false;
  return true;
}

cmat apply(const KrausTuple& eta, const cmat& b) {
  if (b.rows() != eta.dim() || b.cols() != eta.dim())
    throw DomainError("apply: argument dimension does not match the tuple");
  cmat out = cmat::Zero(eta.dim(), eta.dim());
  for (const cmat& a : eta.ops()) out.noalias() += a * b * a.adjoint();
  return out;
}

cmat apply_dual(const KrausTuple& eta, const cmat& b) {
  if (b.rows() != eta.dim() || b.cols() != eta.dim())
    throw DomainError("apply_dual: argument dimension does not match the tuple");
  cmat out = cmat::Zero(eta.dim(), eta.dim());
  for (const cmat& a : eta.ops()) out.noalias() += a.adjoint() * b * a;
  return out;
}

double ds(const KrausTuple& eta) {
  cmat one = cmat::Identity(eta.dim(), eta.dim());
  return (fkcap::apply(eta, one) - one).squaredNorm() +
         (apply_dual(eta, one) - one).squaredNorm();
}

KrausTuple scale(const KrausTuple& eta, const cmat& c1, const cmat& c2) {
  const int m = eta.dim();
  if (c1.rows() != m || c1.cols() != m || c2.rows() != m || c2.cols() != m)
    throw DomainError("scale: scaling matrices must be m x m");
  std::vector<cmat> ops;
  ops.reserve(eta.ops().size());
  for (const cmat& a : eta.ops()) ops.push_back(c1 * a * c2);
  return KrausTuple(std::move(ops));
}

KrausTuple depolarize(const KrausTuple& eta, double t) {
  if (!(t >= 0.0)) throw DomainError("depolarize: t must be nonnegative");
  if (t == 0.0) return eta;
  const int m = eta.dim();
  std::vector<cmat> ops = eta.ops();
  double s = std::sqrt(t / m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      cmat e = cmat::Zero(m, m);
      e(i, j) = s;
      ops.push_back(std::move(e));
    }
  KrausTuple out(std::move(ops));
  // A depolarized tuple never claims integer structure, even when sqrt(t/m)
  // happens to land on an integer.
  out.integer_ = false;
  return out;
}

double cp_norm(const KrausTuple& eta) {
  cmat one = cmat::Identity(eta.dim(), eta.dim());
  auto [lam, u] = herm_eig(fkcap::apply(eta, one));
  (void)u;
  return lam(lam.size() - 1);
}

KrausTuple hermitize(const KrausTuple& eta) {
  const int m = eta.dim();
  std::vector<cmat> ops;
  ops.reserve(eta.ops().size());
  for (const cmat& a : eta.ops()) {
    cmat h = cmat::Zero(2 * m, 2 * m);
    h.block(0, m, m, m) = a;
    h.block(m, 0, m, m) = a.adjoint();
    ops.push_back(std::move(h));
  }
  return KrausTuple(std::move(ops));
}

ChoiMatrix choi(const KrausTuple& eta) {
  const int m = eta.dim();
  const int mm = m * m;
  cmat c = cmat::Zero(mm, mm);
  // C = sum_k vec(a_k) vec(a_k)^*, column-major vec, which coincides with
  // sum_ij E_ij (x) eta(E_ij).
  for (const cmat& a : eta.ops()) {
    Eigen::Map<const cvec> v(a.data(), mm);
    c.noalias() += v * v.adjoint();
  }
  return ChoiMatrix{m, std::move(c)};
}

KrausTuple kraus_from_choi(const ChoiMatrix& c) {
  const int m = c.m;
  if (m < 1) throw DomainError("kraus_from_choi: m must be positive");
  const int mm = m * m;
  if (c.mat.rows() != mm || c.mat.cols() != mm)
    throw DomainError("kraus_from_choi: Choi matrix must be m^2 x m^2");
  if (!is_hermitian(c.mat, 1e-10))
    throw DomainError("kraus_from_choi: Choi matrix is not hermitian");
  auto [lam, u] = herm_eig(c.mat);
  double norm = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  if (lam(0) < -1e-10 * std::max(1.0, norm))
    throw DomainError("kraus_from_choi: Choi matrix is not PSD (eigenvalue " +
                      std::to_string(lam(0)) + ")");
  double cutoff = 1e-10 * norm;
  std::vector<cmat> ops;
  for (Eigen::Index r = lam.size() - 1; r >= 0; --r) {
    if (lam(r) <= cutoff) break;  // ascending order: the rest is smaller
    cvec v = std::sqrt(lam(r)) * u.col(r);
    ops.push_back(Eigen::Map<const cmat>(v.data(), m, m));
  }
  if (ops.empty())
    throw DomainError("kraus_from_choi: Choi matrix is numerically zero");
  return KrausTuple(std::move(ops));
}

}  // namespace fkcap
