#pragma once

// Monte Carlo random walks with per-prime residue tracking, combinatorial
// ball/sphere enumeration, and density estimation.
//
// Reproducibility contract: a sample is a pure function of (master seed,
// sample index). Workers partition the index range in fixed-size chunks, so
// any worker count produces the same multiset of samples, and per-chunk
// aggregation keeps derived statistics bit-identical.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gsieve/matgroup.hpp"

namespace gsieve {

struct WalkConfig {
  GroupSpec spec;
  int length = 0;                        // n
  std::vector<uint64_t> tracked_primes;  // distinct, each prime
  bool track_exact = false;
  bool keep_words = false;
  uint64_t samples = 1;  // m
  uint64_t master_seed = 0;
  int workers = 1;

  void validate() const;
};

struct WalkSample {
  uint64_t index = 0;
  Word word;                      // retained only when keep_words is set
  std::vector<ModMatrix> residues;  // one per tracked prime, config order
  std::optional<IntegerMatrix> exact;
};

/// Streams all samples of the batch. The sink may be called concurrently
/// from worker threads; sample content depends only on (seed, index).
void for_each_walk_sample(const WalkConfig& cfg,
                          const std::function<void(const WalkSample&)>& sink);

struct DensityEstimate {
  uint64_t hits = 0;
  uint64_t trials = 0;
  double estimate = 0.0;
  double ci_low = 0.0;   // 95% Wilson interval
  double ci_high = 0.0;
  uint64_t master_seed = 0;
};

/// Wilson 95% score interval for `hits` successes in `trials`.
DensityEstimate wilson_interval(uint64_t hits, uint64_t trials, uint64_t seed);

/// Monte Carlo estimate of P(gamma_n in X) for a pure predicate.
DensityEstimate estimate_density(const WalkConfig& cfg,
                                 const std::function<bool(const WalkSample&)>& predicate);

/// Writes "index,code_p1,code_p2,..." rows in ascending sample order.
void stream_samples_csv(const WalkConfig& cfg, std::ostream& os);

enum class BallMode {
  WithMultiplicity,  // all |S|^T words of length exactly T (sphere, counted with multiplicity)
  Deduplicated,      // distinct group elements of word-length <= T (ball; exact arithmetic)
};

struct BallEntry {
  std::vector<uint64_t> codes;  // per tracked prime; empty when none tracked
  std::optional<IntegerMatrix> exact;
  uint64_t multiplicity = 1;
};

struct BallTable {
  BallMode mode;
  int radius = 0;
  uint64_t total_words = 0;  // sum of multiplicities (WithMultiplicity) / element count
  std::vector<BallEntry> entries;
};

/// Enumerates the sphere of radius T with word multiplicities, or the
/// deduplicated ball of radius T. Throws BudgetExceeded when |S|^T would
/// pass `word_budget`.
BallTable ball_enumerate(const GroupSpec& spec, int radius, BallMode mode,
                         std::span<const uint64_t> tracked_primes,
                         uint64_t word_budget = 100'000'000);

}  // namespace gsieve
