#pragma once

// Experiment configuration: a flat key = value text format with [sections],
// parsed with line/column-anchored diagnostics. Unknown keys, duplicate
// keys, and constraint violations are all rejected before anything runs.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gsieve/matgroup.hpp"

namespace gsieve {

struct GroupConfig {
  std::string preset = "lubotzky";  // lubotzky | sl2 | symplectic | zline | custom
  long k = 3;
  int genus = 1;
  bool identity = false;
  // custom groups only:
  int rank = 2;
  std::string ambient = "sl";  // sl | sp
  std::vector<std::vector<std::vector<long>>> generators;
  std::set<uint64_t> exceptional;

  GroupSpec build() const;
};

struct ExperimentConfig {
  GroupConfig group;

  std::string experiment;  // enumerate|spectrum|audit|bounded|small|large|ek|baseline|ball
  uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  std::string out = "experiment";
  uint64_t cap = 50'000'000;
  double tol = 1e-10;

  // sieve section
  std::string family = "polyzero";  // polyzero | nonsquare | irreducible | lagrangian
  std::string poly = "a^2+d^2";
  int entry_i = 0, entry_j = 0;
  int family_genus = 1;
  std::vector<uint64_t> primes;  // explicit list for enumerate/spectrum/audit/bounded
  uint64_t p_start = 2;
  double a_base = 0.0;  // 0 = default rule
  double delta_floor = 0.3;
  double kappa = 0.0;  // 0 = fit from the dimension profile
  uint64_t prime_lo = 0, prime_hi = 0;  // kappa profile window

  // walk section
  int n = 0;
  int n_lo = 0, n_hi = 0, n_step = 1;
  uint64_t m = 10'000;
  bool track_exact = false;
  uint64_t q_truncation = 0;

  // ball section
  int radius = 0;
  std::string ball_mode = "multiplicity";  // multiplicity | dedup
  uint64_t word_budget = 100'000'000;

  // baseline section
  uint64_t baseline_n = 0;
  uint64_t baseline_q = 0;
  std::vector<int64_t> shifts = {0};

  /// Canonical text form; parsing it back reproduces this config.
  std::string canonical_text() const;
  uint64_t digest() const;
};

/// Parses the config text. Throws ConfigError with a 1-based line (and
/// column where meaningful) on syntax errors, unknown or duplicate keys,
/// and value-type mismatches.
ExperimentConfig parse_config(const std::string& text);

/// Cross-field semantic checks (experiment-specific required keys, prime
/// validity, exceptional primes inside sieve windows, ...). Throws
/// ConfigError naming the offending key.
void validate_config(const ExperimentConfig& cfg);

}  // namespace gsieve
