#pragma once

// Sieve families Omega_p with exact densities, sifted-set membership along
// walks, dimension (kappa) profiles, and the bounded / small / large sieve
// experiments, plus the classical integer baseline.
//
// Density exactness: every delta_p = |Omega_p| / |Gamma_p| is an exact
// rational obtained by exhausting the quotient, either by scanning an
// enumerated quotient or by streaming the full parametrization of
// SL_2(F_p) when the quotient is declared surjective. Nothing is sampled.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsieve/quotients.hpp"
#include "gsieve/spectra.hpp"
#include "gsieve/walker.hpp"

namespace gsieve {

struct Rational {
  uint64_t num = 0;
  uint64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational& o) const {
    return static_cast<unsigned __int128>(num) * o.den ==
           static_cast<unsigned __int128>(o.num) * den;
  }
};

enum class FamilyKind {
  PolyZero,              // f(g) = 0 mod p
  NonSquareEntry,        // entry (i,j) is not a square mod p (0 counts as a square)
  IrreducibleCharPoly,   // characteristic polynomial irreducible over F_p
  LagrangianSpan,        // <J_p, g J_p> = F_p^{2g} for J = span(e_1..e_g); symplectic only
  Explicit,              // caller-provided element lists
};

std::string_view family_kind_name(FamilyKind k);

struct OmegaSet {
  uint64_t p = 0;
  uint64_t group_order = 0;
  Rational density;             // |Omega_p| / |Gamma_p|, exact
  bool materialized = false;    // codes present (census counts may skip them)
  std::vector<uint64_t> codes;  // sorted element encodings

  bool contains_code(uint64_t code) const;
};

class SieveFamily {
 public:
  static SieveFamily poly_zero(PolynomialFunction f);
  static SieveFamily non_square_entry(int i, int j);
  static SieveFamily irreducible_char_poly();
  static SieveFamily lagrangian_span(int genus);
  static SieveFamily explicit_sets(std::map<uint64_t, OmegaSet> omegas);

  FamilyKind kind() const { return kind_; }
  const PolynomialFunction& poly() const;
  int genus() const { return genus_; }
  std::string describe() const;

  /// Direct predicate; used to build the cached sets and by oracle tests.
  bool element_in_omega(const ModMatrix& g) const;

  /// Exhaustive scan of an enumerated single-prime quotient.
  const OmegaSet& build_from_quotient(const FiniteQuotient& q);

  /// Streaming exhaustive scan of the full SL_2(F_p) parametrization (valid
  /// when the quotient mod p is surjective). Supplies codes when
  /// `materialize`; otherwise only the exact count. Throws CapExceeded when
  /// the p^3 stream would pass `stream_budget`.
  const OmegaSet& build_by_census(uint64_t p, bool materialize,
                                  uint64_t stream_budget = 200'000'000);

  /// Cached set for p, or nullptr.
  const OmegaSet* find(uint64_t p) const;
  const std::map<uint64_t, OmegaSet>& omegas() const { return omegas_; }

  void insert(OmegaSet omega);

 private:
  SieveFamily() = default;

  FamilyKind kind_ = FamilyKind::Explicit;
  std::optional<PolynomialFunction> poly_;
  int entry_i_ = 0, entry_j_ = 0;
  int genus_ = 1;
  std::map<uint64_t, OmegaSet> omegas_;
};

/// Builds (or reuses) Omega_p for every prime in `primes`, choosing the
/// enumerate-and-scan route when the quotient fits `enum_limit`, and the
/// SL_2 census route (requires rank 2, special linear, declared surjective)
/// otherwise.
void ensure_omegas(SieveFamily& family, const GroupSpec& spec, std::span<const uint64_t> primes,
                   bool materialize, uint64_t enum_limit = 50'000,
                   uint64_t cap = kDefaultCap);

// ---------------------------------------------------------------------------

struct DimensionReport {
  std::vector<uint64_t> primes;
  std::vector<Rational> delta_p;
  std::vector<double> kappa_p;       // p * delta_p
  std::vector<double> partial_sums;  // sum_{q <= p} delta_q log q
  double kappa_fit = 0.0;            // least-squares slope of partial sums vs log X
  double fit_intercept = 0.0;
  double fit_rms_residual = 0.0;
  double kappa_running_avg = 0.0;  // (1/pi(X)) sum kappa_p
};

/// Dimension profile over the non-exceptional primes in [lo, hi].
DimensionReport kappa_profile(SieveFamily& family, const GroupSpec& spec, uint64_t lo,
                              uint64_t hi, uint64_t cap = kDefaultCap);

/// Comparison of a measured spanning density against the closed formula
/// 1 - prod_{j=1..g} 1/(1 + p^-j) quoted for this family in the literature.
/// The exhaustive count wins; `discrepant` records that the two disagree
/// (they do: for g = 1 the measured spanning fraction is p/(p+1), the
/// quoted complement is 1/(p+1)).
struct LagrangianFormulaCheck {
  uint64_t p = 0;
  double measured = 0.0;
  double displayed = 0.0;
  bool discrepant = false;
};
LagrangianFormulaCheck lagrangian_formula_check(int genus, uint64_t p, const Rational& density);

// ---------------------------------------------------------------------------

/// A resolved sieve window: family + primes, bound to the tracked primes of
/// a walk config. Construction validates that every window prime is tracked
/// and non-exceptional and that Omega_p is materialized.
class SiftedSetSpec {
 public:
  SiftedSetSpec(const SieveFamily& family, std::vector<uint64_t> primes, const WalkConfig& cfg);

  const std::vector<uint64_t>& primes() const { return primes_; }

  /// Number of window primes with pi_p(sample) in Omega_p (the proof's X),
  /// restricted to primes <= q_limit (0 = no limit).
  uint32_t omega_hits(const WalkSample& sample, uint64_t q_limit = 0) const;
  bool in_sifted_set(const WalkSample& sample) const { return omega_hits(sample) == 0; }

 private:
  const SieveFamily* family_;
  std::vector<uint64_t> primes_;
  std::vector<size_t> track_of_prime_;
};

// ---------------------------------------------------------------------------
// Experiments

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  size_t points = 0;
};

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y);

struct BoundedSieveRow {
  int n;
  double mu_exact;  // exact mass of the sifted set at step n
  double bound;     // |Gamma_I| * rho_I^n
  bool pass;        // |mu - limit| <= bound
};

struct BoundedSieveReport {
  std::vector<uint64_t> primes;
  std::vector<Rational> delta_p;
  double limit = 1.0;  // prod (1 - delta_p)
  SpectrumReport spectrum;
  std::vector<BoundedSieveRow> rows;
  bool all_pass = true;
};

/// Exact bounded-sieve check on an enumerated product quotient.
BoundedSieveReport bounded_sieve_experiment(const FiniteQuotient& q, SieveFamily& family,
                                            int n_max, double tol = 1e-10, int workers = 1);

struct SmallSieveRow {
  int n;
  double q_window;          // A^n
  uint64_t window_size;     // primes in the window
  uint64_t hits;            // sifted survivors among m samples
  double estimate;
  double ci_low, ci_high;
  double heuristic_product;  // prod_{p <= Q_n} (1 - delta_p)
};

struct SmallSieveReport {
  double a_base = 0.0;
  double kappa = 0.0;        // from the dimension profile
  LinearFit loglog_fit;      // log estimate vs log n; slope ~ -kappa
  std::vector<SmallSieveRow> rows;
};

SmallSieveReport small_sieve_experiment(const WalkConfig& cfg, SieveFamily& family,
                                        double a_base, int n_lo, int n_hi, int n_step,
                                        double kappa);

struct LargeSieveRow {
  int n;
  double q_window;        // A^n
  uint64_t window_size;
  uint64_t hits;
  double estimate;        // empirical P(X = 0)
  double std_error;
  double expected_x;      // exact E[X] = sum of per-prime masses
  double sum_delta;       // sum delta_p (the main term)
  double max_abs_w;       // max |W(p,q)| over pairs in the window, exact
  double var_bound;       // Q + Q^2 max|W|
  double cheb_bound;      // var_bound / E[X]^2 (inf when E = 0)
  bool pass;              // estimate <= cheb_bound + 3 se
};

struct LargeSieveReport {
  double a_base = 0.0;
  double delta_floor = 0.0;
  std::vector<uint64_t> window_primes;  // primes at the widest window
  std::vector<Rational> delta_p;
  std::vector<LargeSieveRow> rows;
  LinearFit decay_fit;  // log estimate vs n
  double rho_bar = 0.0; // max measured spectral radius (singles + measured pairs)
  std::vector<std::pair<uint64_t, uint64_t>> rho_pairs_measured;
  double proof_constraint = 0.0;  // Q^{2+2B} rho_bar^n at the widest row
  bool all_pass = true;
};

/// Large-sieve decay experiment with cfg.samples Monte Carlo draws per n.
/// The Chebyshev bound is assembled from the exact per-prime masses and the
/// exact pair correlations W(p,q) measured on the product index space.
/// Throws Error naming the first prime whose density falls below
/// `delta_floor`, and when a window pair fails the independence check.
LargeSieveReport large_sieve_experiment(const WalkConfig& cfg, SieveFamily& family,
                                        double a_base, int n_lo, int n_hi,
                                        double delta_floor, uint64_t p_start,
                                        uint64_t pair_rho_limit = 1'000'000,
                                        uint64_t cap = kDefaultCap);

/// Largest A such that every single and pair quotient for window primes
/// [p_start, A^{n_hi}] fits under `cap` (midpoint between the last feasible
/// prime and the next one, taken to the 1/n_hi power).
double default_large_sieve_base(const GroupSpec& spec, int n_hi, uint64_t p_start,
                                uint64_t cap = kDefaultCap);

// ---------------------------------------------------------------------------
// Classical baseline and almost-primes

struct BaselineReport {
  uint64_t n_limit = 0;
  uint64_t q_limit = 0;
  std::vector<int64_t> shifts;
  std::vector<uint64_t> survivors;
};

/// Survivors n in [1, N] such that n + s has no prime factor <= Q for every
/// shift s, computed through the generic residue path (Gamma = Z embedded in
/// SL_2, Gamma_p = Z/pZ).
BaselineReport classical_integer_sieve(uint64_t n_limit, uint64_t q_limit,
                                       const std::vector<int64_t>& shifts);

/// For a sifted sample with exact tracking: all prime factors of f(gamma_n)
/// exceed Q, so their count (with multiplicity) is at most
/// floor(log |f| / log Q). Returns that bound; sets *unit when |f| = 1.
/// Throws ZeroValue when f(gamma_n) = 0.
int almost_prime_bound(const WalkSample& sample, const PolynomialFunction& f, uint64_t q_limit,
                       bool* unit = nullptr);

}  // namespace gsieve
