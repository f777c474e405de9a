#include "fkcap/matkernel.hpp"

#include <cmath>
#include <limits>

namespace fkcap {

bool is_hermitian(const cmat& b, double rtol) {
  if (b.rows() != b.cols()) return false;
  return (b - b.adjoint()).norm() <= rtol * b.norm();
}

bool is_psd(const cmat& b) {
  if (!is_hermitian(b, 1e-10)) return false;
  Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (b + b.adjoint()),
                                         Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return false;
  const rvec& lam = es.eigenvalues();
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  return lam(0) >= -1e-10 * std::max(1.0, scale);
}

double psd_floor(const cmat& b) {
  Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (b + b.adjoint()),
                                         Eigen::EigenvaluesOnly);
  const rvec& lam = es.eigenvalues();
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  return 1e-12 * std::max(1.0, scale);
}

std::pair<rvec, cmat> herm_eig(const cmat& b) {
  if (b.rows() != b.cols())
    throw DomainError("herm_eig: matrix must be square");
  if (!is_hermitian(b))
    throw DomainError("herm_eig: matrix is not hermitian");
  Eigen::SelfAdjointEigenSolver<cmat> es(0.5 * (b + b.adjoint()));
  if (es.info() != Eigen::Success)
    throw ConvergenceError("herm_eig: eigensolver did not converge",
                           std::numeric_limits<double>::quiet_NaN());
  return {es.eigenvalues(), es.eigenvectors()};
}

namespace {

// Floor computed from eigenvalues that are already at hand.
double floor_from(const rvec& lam) {
  double scale = std::max(std::abs(lam(0)), std::abs(lam(lam.size() - 1)));
  return 1e-12 * std::max(1.0, scale);
}

}  // namespace

cmat inv_sqrt_psd(const cmat& b) {
  auto [lam, u] = herm_eig(b);
  double floor = floor_from(lam);
  if (lam(0) <= floor)
    throw SingularError("inv_sqrt_psd: matrix is not positive definite", lam(0));
  rvec w = lam.array().rsqrt();
  cmat r = u * w.asDiagonal() * u.adjoint();
  return 0.5 * (r + r.adjoint());
}

double logdet_pd(const cmat& b) {
  auto [lam, u] = herm_eig(b);
  (void)u;
  double floor = floor_from(lam);
  if (lam(0) <= floor)
    throw SingularError("logdet_pd: matrix is not positive definite", lam(0));
  return lam.array().log().sum();
}

double logabsdet(const cmat& b) {
  if (b.rows() != b.cols())
    throw DomainError("logabsdet: matrix must be square");
  if (b.rows() == 0) return 0.0;
  Eigen::ColPivHouseholderQR<cmat> qr(b);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    double r = std::abs(qr.matrixQR()(i, i));
    if (r == 0.0) return -std::numeric_limits<double>::infinity();
    sum += std::log(r);
  }
  return sum;
}

}  // namespace fkcap
