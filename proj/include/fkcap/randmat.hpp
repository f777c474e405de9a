#pragma once

#include <cstdint>
#include <vector>

#include "fkcap/cpmap.hpp"

namespace fkcap {

// Deterministic per-stream Gaussian source.  Streams are derived with the
// SplitMix64 finalizer, so (seed, trial) pairs give independent,
// platform-stable sequences regardless of how trials are scheduled.
class Rng {
 public:
  explicit Rng(std::uint64_t stream_seed);

  double normal();    // standard normal, Box-Muller on 53-bit uniforms
  double uniform();   // (0, 1]

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;

  std::uint64_t next_u64();
};

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

// N x N GUE matrix: hermitian, E|X_ij|^2 = 1/N off the diagonal, real
// N(0, 1/N) on it.  Empirical spectra approach the standard semicircle.
cmat sample_gue(int N, Rng& rng);

// A = sum_i a_i (x) X_i, an mN x mN block matrix.
cmat assemble_block(const KrausTuple& eta, const std::vector<cmat>& samples);

struct McConfig {
  int N = 100;
  int trials = 50;
  std::uint64_t seed = 1;
};

struct McReport {
  std::vector<double> per_trial_logdelta;  // log Delta(A) = logabsdet(A)/(mN)
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(trials)
  long singular_count = 0; // trials with logabsdet = -infinity
  double prediction = 0.0; // log of the capacity-route determinant
};

// Monte Carlo study of Delta(A_N) against the capacity prediction.
// Trial t draws its GUE samples from stream derive_stream(seed, t), so the
// report is independent of scheduling.  threads = 0 uses all cores.
McReport run_experiment(const KrausTuple& eta, const McConfig& config,
                        int threads = 0);

}  // namespace fkcap
