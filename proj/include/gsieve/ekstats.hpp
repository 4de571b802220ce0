#pragma once

// Erdos-Kac statistics for f along the walk: the truncated prime-divisor
// count, the centered and normalized statistic, the independent-Bernoulli
// model it is compared against, and moment/KS comparisons between the two.
//
// The acceptance target is the Bernoulli model, not the normal limit:
// convergence to the normal law is O(1/sqrt(log n)) and out of reach at desk
// scale, while the moment match against the independent model is testable.

#include <cstdint>
#include <span>
#include <vector>

#include "gsieve/sieve.hpp"
#include "gsieve/walker.hpp"

namespace gsieve {

struct EKConfig {
  WalkConfig walk;            // walk.length = n >= 2, tracked = window primes
  const SieveFamily* family;  // PolyZero family with materialized omegas
  uint64_t q_truncation = 0;  // Q; counted primes are tracked p <= Q
  double kappa = 1.0;         // sieve dimension for the centering
  double a_base = 1.0;        // A with Q = A^n (diagnostics only)
  double growth_c = 1.0;      // C_f with |f(gamma_n)| <= C_f^n

  void validate() const;
};

/// #{tracked p <= Q, p non-exceptional : f(pi_p(gamma_n)) = 0 mod p},
/// computed from residues alone.
uint32_t truncated_omega(const WalkSample& sample, const SieveFamily& family,
                         const WalkConfig& cfg, uint64_t q_truncation);

struct EKSampleStat {
  uint64_t index = 0;
  uint32_t truncated_count = 0;
  double statistic = 0.0;  // (omega_f - kappa log n) / sqrt(kappa log n)
  bool value_is_zero = false;     // exact f(gamma_n) = 0 (paper convention omega_f = 0)
  double a2_upper = 0.0;          // upper estimate of A2 = omega(f) - truncated count
  bool a2_exact = false;          // rough cofactor fully resolved (1 or prime)
};

struct EKBatchReport {
  std::vector<EKSampleStat> stats;
  double a3 = 0.0;            // sum delta_p - kappa log n
  double a2_bound = 0.0;      // log C / log A
  double max_a2_upper = 0.0;
  uint64_t zero_values = 0;   // samples with f(gamma_n) = 0 exactly
};

/// Streams the per-sample statistic. With exact tracking the f = 0 test is
/// exact; without it, a sample whose tracked residues of f all vanish throws
/// ZeroAmbiguity (the convention cannot be applied honestly). A2 diagnostics
/// need exact tracking and are skipped otherwise.
EKBatchReport ek_statistic_batch(const EKConfig& cfg);

/// m samples of sum_p Y_p for independent Bernoulli Y_p with P(Y_p = 1) =
/// delta_p. Deterministic in (seed, sample index).
std::vector<uint32_t> bernoulli_oracle_batch(const std::vector<Rational>& deltas, uint64_t m,
                                             uint64_t seed);

struct MomentRow {
  int order;
  double walk_moment;     // raw moment of the walk stream
  double oracle_moment;   // raw moment of the oracle stream
  double joint_se;        // sqrt(se_walk^2 + se_oracle^2)
  double delta;           // walk - oracle
  double normal_target;   // E[N(0,1)^k] for reference
};

struct MomentReport {
  std::vector<MomentRow> rows;
  double walk_mean = 0, oracle_mean = 0, mean_joint_se = 0;
  double walk_variance = 0, oracle_variance = 0, variance_joint_se = 0;
  double ks_distance = 0;  // two-sample Kolmogorov-Smirnov
};

MomentReport distribution_compare(std::span<const double> walk_stream,
                                  std::span<const double> oracle_stream,
                                  std::span<const int> orders);

}  // namespace gsieve
