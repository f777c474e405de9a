#pragma once

#include <vector>

#include "fkcap/cpmap.hpp"
#include "fkcap/randmat.hpp"

namespace testutil {

using fkcap::cd;
using fkcap::cmat;
using fkcap::KrausTuple;

inline KrausTuple identity_tuple(int m) {
  return KrausTuple({cmat::Identity(m, m)});
}

// {1_2, diag(1,-1)} -- capacity 4
inline KrausTuple sign_pair() {
  cmat d = cmat::Identity(2, 2);
  d(1, 1) = -1.0;
  return KrausTuple({cmat::Identity(2, 2), d});
}

// {E_12, E_21} -- doubly stochastic, capacity exactly 1
inline KrausTuple shift_pair() {
  cmat a = cmat::Zero(2, 2), b = cmat::Zero(2, 2);
  a(0, 1) = 1.0;
  b(1, 0) = 1.0;
  return KrausTuple({a, b});
}

// {diag(1,2)} -- capacity 4
inline KrausTuple diag12() {
  cmat a = cmat::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  return KrausTuple({a});
}

// {E_11} -- rank decreasing, atom of mass 1/2 at zero
inline KrausTuple corner() {
  cmat a = cmat::Zero(2, 2);
  a(0, 0) = 1.0;
  return KrausTuple({a});
}

inline cmat random_complex(int rows, int cols, fkcap::Rng& rng, double scale = 1.0) {
  cmat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = scale * cd(rng.normal(), rng.normal());
  return a;
}

inline cmat random_hermitian(int m, fkcap::Rng& rng, double scale = 1.0) {
  cmat a = random_complex(m, m, rng, scale);
  return ((a + a.adjoint()) / 2.0).eval();
}

inline cmat random_pd(int m, fkcap::Rng& rng) {
  cmat a = random_complex(m, m, rng, 0.5);
  return (a * a.adjoint() + 0.2 * cmat::Identity(m, m)).eval();
}

inline KrausTuple random_tuple(int m, int n, fkcap::Rng& rng, double scale = 0.7) {
  std::vector<cmat> ops;
  ops.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ops.push_back(random_complex(m, m, rng, scale));
  return KrausTuple(std::move(ops));
}

inline KrausTuple random_selfadjoint_tuple(int m, int n, fkcap::Rng& rng,
                                           double scale = 0.7) {
  std::vector<cmat> ops;
  ops.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) ops.push_back(random_hermitian(m, rng, scale));
  return KrausTuple(std::move(ops));
}

// well-conditioned scaling factor: identity plus a modest perturbation
inline cmat random_factor(int m, fkcap::Rng& rng) {
  return (cmat::Identity(m, m) + random_complex(m, m, rng, 0.25)).eval();
}

inline KrausTuple random_integer_tuple(int m, int n, fkcap::Rng& rng) {
  std::vector<cmat> ops;
  ops.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    cmat a(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        a(r, c) = std::floor(rng.uniform() * 5.0) - 2.0;  // {-2,...,2}
    ops.push_back(std::move(a));
  }
  return KrausTuple(std::move(ops));
}

}  // namespace testutil
