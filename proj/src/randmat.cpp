#include "fkcap/randmat.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fkcap/fkdet.hpp"
#include "fkcap/matkernel.hpp"
#include "fkcap/parallel.hpp"

namespace fkcap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t stream_seed) : state_(stream_seed) {}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  return mix64(state_);
}

double Rng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double r = std::sqrt(-2.0 * std::log(uniform()));
  double t = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed + 0x9E3779B97F4A7C15ULL * (index + 1)));
}

cmat sample_gue(int N, Rng& rng) {
  if (N < 1) throw DomainError("sample_gue: N must be positive");
  cmat x(N, N);
  const double diag_sd = 1.0 / std::sqrt(static_cast<double>(N));
  const double off_sd = 1.0 / std::sqrt(2.0 * N);
  for (int i = 0; i < N; ++i) {
    x(i, i) = diag_sd * rng.normal();
    for (int j = i + 1; j < N; ++j) {
      cd v(off_sd * rng.normal(), off_sd * rng.normal());
      x(i, j) = v;
      x(j, i) = std::conj(v);
    }
  }
  return x;
}

cmat assemble_block(const KrausTuple& eta, const std::vector<cmat>& samples) {
  if (static_cast<int>(samples.size()) != eta.terms())
    throw DomainError("assemble_block: one sample per Kraus matrix is required");
  if (samples.empty()) throw DomainError("assemble_block: empty sample list");
  const int m = eta.dim();
  const Eigen::Index N = samples[0].rows();
  for (const cmat& x : samples)
    if (x.rows() != N || x.cols() != N)
      throw DomainError("assemble_block: samples must share one square shape");

  cmat a = cmat::Zero(m * N, m * N);
  for (int i = 0; i < eta.terms(); ++i) {
    const cmat& coeff = eta.op(i);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) {
        cd c = coeff(p, q);
        if (c != cd(0.0, 0.0)) a.block(p * N, q * N, N, N) += c * samples[i];
      }
  }
  return a;
}

McReport run_experiment(const KrausTuple& eta, const McConfig& config, int threads) {
  if (config.N < 1) throw DomainError("run_experiment: N must be positive");
  if (config.trials < 1) throw DomainError("run_experiment: trials must be positive");

  const double m = eta.dim();
  McReport rep;
  rep.per_trial_logdelta.assign(static_cast<size_t>(config.trials), 0.0);

  parallel_for(config.trials, threads, [&](long t) {
    Rng rng(derive_stream(config.seed, static_cast<std::uint64_t>(t)));
    std::vector<cmat> samples;
    samples.reserve(static_cast<size_t>(eta.terms()));
    for (int i = 0; i < eta.terms(); ++i) samples.push_back(sample_gue(config.N, rng));
    double lad = logabsdet(assemble_block(eta, samples));
    rep.per_trial_logdelta[static_cast<size_t>(t)] =
        lad == -kInf ? -kInf : lad / (m * config.N);
  });

  double sum = 0.0;
  long finite = 0;
  for (double v : rep.per_trial_logdelta) {
    if (v == -kInf)
      ++rep.singular_count;
    else {
      sum += v;
      ++finite;
    }
  }
  if (finite == 0) {
    rep.mean = -kInf;
    rep.std_error = 0.0;
  } else {
    rep.mean = sum / static_cast<double>(finite);
    double ss = 0.0;
    for (double v : rep.per_trial_logdelta)
      if (v != -kInf) ss += (v - rep.mean) * (v - rep.mean);
    rep.std_error = finite > 1
                        ? std::sqrt(ss / static_cast<double>(finite - 1) /
                                    static_cast<double>(finite))
                        : 0.0;
  }
  rep.prediction = fk_det_capacity(eta).log_det;
  return rep;
}

}  // namespace fkcap
