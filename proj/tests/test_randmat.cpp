#include <doctest.h>

#include <cmath>
#include <set>

#include "fkcap/randmat.hpp"
#include "fkcap/matkernel.hpp"
#include "helpers.hpp"

using namespace fkcap;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(derive_stream(7, 0));
  Rng b(derive_stream(7, 0));
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  Rng c(derive_stream(7, 1));
  Rng d(derive_stream(8, 0));
  bool differs_c = false, differs_d = false;
  Rng a2(derive_stream(7, 0));
  for (int i = 0; i < 16; ++i) {
    double x = a2.normal();
    differs_c |= (x != c.normal());
    differs_d |= (x != d.normal());
  }
  CHECK(differs_c);
  CHECK(differs_d);

  std::set<std::uint64_t> streams;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t t = 0; t < 64; ++t) streams.insert(derive_stream(s, t));
  CHECK(streams.size() == 4 * 64);
}

TEST_CASE("uniform lands in (0, 1] and normal has the right moments") {
  Rng rng(derive_stream(55, 0));
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);

  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum2 += x * x;
    sum4 += x * x * x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);          // mean 0, se ~ 0.002
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("gue samples are hermitian with the matching variance profile") {
  Rng rng(derive_stream(56, 0));
  const int N = 200;
  cmat x = sample_gue(N, rng);
  CHECK((x - x.adjoint()).norm() == 0.0);  // exact by construction
  for (int i = 0; i < N; ++i) CHECK(x(i, i).imag() == 0.0);

  // tr X^2 / N concentrates on 1
  double second = (x * x).trace().real() / N;
  CHECK(second == doctest::Approx(1.0).epsilon(0.05));

  double diag2 = 0.0, off2 = 0.0;
  for (int i = 0; i < N; ++i) diag2 += x(i, i).real() * x(i, i).real();
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) off2 += std::norm(x(i, j));
  CHECK(diag2 / N == doctest::Approx(1.0 / N).epsilon(0.35));
  CHECK(off2 / (N * (N - 1) / 2.0) == doctest::Approx(1.0 / N).epsilon(0.05));

  CHECK_THROWS_AS(sample_gue(0, rng), DomainError);
}

TEST_CASE("block assembly places coefficients against samples") {
  Rng rng(derive_stream(57, 0));
  cmat x = sample_gue(8, rng);

  cmat a_id = cmat::Identity(1, 1);
  cmat got = assemble_block(KrausTuple({a_id}), {x});
  CHECK((got - x).norm() == 0.0);

  // corner coefficient: X lands in the top-left block, the rest stays zero
  cmat assembled = assemble_block(testutil::corner(), {x});
  CHECK(assembled.rows() == 16);
  CHECK((assembled.block(0, 0, 8, 8) - x).norm() == 0.0);
  CHECK(assembled.block(8, 8, 8, 8).norm() == 0.0);
  CHECK(assembled.block(0, 8, 8, 8).norm() == 0.0);

  CHECK_THROWS_AS(assemble_block(testutil::corner(), {x, x}), DomainError);
  CHECK_THROWS_AS(
      assemble_block(KrausTuple({cmat::Identity(1, 1)}), {cmat::Zero(2, 3)}),
      DomainError);
}

TEST_CASE("corner tuple draws are singular every time") {
  McConfig cfg;
  cfg.N = 20;
  cfg.trials = 8;
  McReport rep = run_experiment(testutil::corner(), cfg);
  CHECK(rep.singular_count == 8);
  CHECK(rep.mean == -std::numeric_limits<double>::infinity());
  for (double v : rep.per_trial_logdelta)
    CHECK(v == -std::numeric_limits<double>::infinity());
}

TEST_CASE("identity tuple matches the closed-form prediction") {
  McConfig cfg;
  cfg.N = 100;
  cfg.trials = 50;
  cfg.seed = 11;
  McReport rep = run_experiment(testutil::identity_tuple(1), cfg);
  CHECK(rep.prediction == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(rep.singular_count == 0);
  CHECK(std::abs(rep.mean - rep.prediction) <= 0.03);
  CHECK(rep.std_error > 0.0);
  CHECK(rep.std_error < 0.01);
  REQUIRE(rep.per_trial_logdelta.size() == 50);

  // sanity on the summary arithmetic
  double acc = 0.0;
  for (double v : rep.per_trial_logdelta) acc += v;
  CHECK(rep.mean == doctest::Approx(acc / 50).epsilon(1e-14));
}

TEST_CASE("reports are bitwise reproducible and schedule-independent") {
  McConfig cfg;
  cfg.N = 24;
  cfg.trials = 6;
  cfg.seed = 3;
  McReport r1 = run_experiment(testutil::sign_pair(), cfg, 1);
  McReport r2 = run_experiment(testutil::sign_pair(), cfg, 3);
  McReport r3 = run_experiment(testutil::sign_pair(), cfg);
  REQUIRE(r1.per_trial_logdelta.size() == 6);
  for (size_t i = 0; i < 6; ++i) {
    CHECK(r1.per_trial_logdelta[i] == r2.per_trial_logdelta[i]);
    CHECK(r1.per_trial_logdelta[i] == r3.per_trial_logdelta[i]);
  }
  CHECK(r1.mean == r2.mean);
  CHECK(r1.std_error == r2.std_error);

  McConfig other = cfg;
  other.seed = 4;
  McReport r4 = run_experiment(testutil::sign_pair(), other, 1);
  CHECK(r4.per_trial_logdelta[0] != r1.per_trial_logdelta[0]);
}
