#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

#include "fkcap/errors.hpp"

namespace fkcap {

using cd = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rvec = Eigen::VectorXd;

// Hermiticity test: ||b - b*||_F <= rtol * ||b||_F.
bool is_hermitian(const cmat& b, double rtol = 1e-12);

// Positive semidefiniteness with the numerical slack used throughout:
// min eigenvalue >= -1e-10 * max(1, ||b||).
bool is_psd(const cmat& b);

// Everything below this counts as zero in positive-definite contexts.
// Relative to the largest eigenvalue magnitude of (hermitian) b.
double psd_floor(const cmat& b);

// Eigendecomposition of a hermitian matrix; eigenvalues ascending.
// Inputs are symmetrized to (b + b*)/2 before decomposing, after the
// hermiticity of b itself has been checked.
std::pair<rvec, cmat> herm_eig(const cmat& b);

// b^{-1/2} for positive definite b.  The result r is hermitian and
// satisfies r * b * r = 1 to high accuracy.  Throws SingularError
// (carrying the offending eigenvalue) when b is not definite.
cmat inv_sqrt_psd(const cmat& b);

// log det b for positive definite b, as a sum of eigenvalue logarithms.
double logdet_pd(const cmat& b);

// log |det b| via column-pivoted Householder QR.  Stable for nearly
// singular b; returns -infinity when a pivot is exactly zero.
double logabsdet(const cmat& b);

}  // namespace fkcap
