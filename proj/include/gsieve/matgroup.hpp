#pragma once

// Exact integer and modular matrix arithmetic for finitely generated matrix
// groups, polynomial functions of matrix entries, and the preset generating
// sets used throughout the experiments.
//
// Conventions:
//  - integer matrices carry arbitrary-precision entries (GMP), so products of
//    long generator words never overflow;
//  - modular matrices store residues in [0, p) for a prime modulus p;
//  - a group spec holds a symmetric generating set S (every generator's
//    inverse is in the list) of determinant-one matrices, optionally with the
//    identity appended for lazy walks.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "gsieve/errors.hpp"

namespace gsieve {

using BigInt = mpz_class;

/// Deterministic Miller-Rabin, complete for all n < 2^64.
bool is_prime_u64(uint64_t n);

/// All primes in [lo, hi], ascending.
std::vector<uint64_t> primes_in_range(uint64_t lo, uint64_t hi);

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m);
uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m);

// ---------------------------------------------------------------------------

class IntegerMatrix {
 public:
  explicit IntegerMatrix(int dim);
  static IntegerMatrix identity(int dim);
  static IntegerMatrix from_rows(const std::vector<std::vector<long>>& rows);

  int dim() const { return dim_; }
  const BigInt& at(int i, int j) const { return e_[static_cast<size_t>(i) * dim_ + j]; }
  BigInt& at(int i, int j) { return e_[static_cast<size_t>(i) * dim_ + j]; }

  bool is_identity() const;
  bool operator==(const IntegerMatrix& o) const { return dim_ == o.dim_ && e_ == o.e_; }
  bool operator!=(const IntegerMatrix& o) const { return !(*this == o); }

  IntegerMatrix operator*(const IntegerMatrix& o) const;

  /// Exact determinant (cofactor expansion; dims here are tiny).
  BigInt determinant() const;

  /// Inverse of a matrix with determinant +-1, via the adjugate.
  IntegerMatrix inverse_unimodular() const;

  IntegerMatrix transpose() const;
  BigInt max_abs_entry() const;
  std::string to_string() const;

  /// Canonical serialization used for hashing and digests.
  std::string serialize() const;

 private:
  int dim_;
  std::vector<BigInt> e_;
};

// ---------------------------------------------------------------------------

class ModMatrix {
 public:
  ModMatrix(int dim, uint64_t p);  // zero matrix
  static ModMatrix identity(int dim, uint64_t p);

  int dim() const { return dim_; }
  uint64_t modulus() const { return p_; }
  uint64_t at(int i, int j) const { return e_[static_cast<size_t>(i) * dim_ + j]; }
  uint64_t& at(int i, int j) { return e_[static_cast<size_t>(i) * dim_ + j]; }

  bool operator==(const ModMatrix& o) const {
    return dim_ == o.dim_ && p_ == o.p_ && e_ == o.e_;
  }

  ModMatrix operator*(const ModMatrix& o) const;
  void mul_into(const ModMatrix& rhs, ModMatrix& out) const;  // out = *this * rhs
  uint64_t determinant() const;

  /// Row-major base-p digits packed into one integer; entry (0,0) is the
  /// least significant digit. Throws if p^(dim^2) does not fit in 64 bits.
  uint64_t encode() const;
  static ModMatrix decode(uint64_t code, int dim, uint64_t p);

  /// Whether codes for dim x dim matrices mod p fit in a uint64_t.
  static bool encodable(int dim, uint64_t p);

 private:
  int dim_;
  uint64_t p_;
  std::vector<uint64_t> e_;
};

/// Entrywise reduction into [0, p); validates that p is prime.
ModMatrix reduce_mod(const IntegerMatrix& g, uint64_t p);

// ---------------------------------------------------------------------------

enum class Ambient { SpecialLinear, Symplectic };

std::string_view ambient_name(Ambient a);

/// The standard symplectic form [[0, I], [-I, 0]] on Z^dim (dim even).
IntegerMatrix standard_symplectic_form(int dim);

struct GroupSpec {
  int rank = 0;
  std::vector<IntegerMatrix> generators;
  bool includes_identity = false;
  Ambient ambient = Ambient::SpecialLinear;
  std::set<uint64_t> exceptional_primes;
  std::string name;

  /// Validates all invariants and appends the identity when requested.
  static GroupSpec make(int rank, std::vector<IntegerMatrix> gens, bool include_identity,
                        Ambient ambient, std::set<uint64_t> exceptional = {},
                        std::string name = {});

  /// Throws InvalidGroupSpec on any violated invariant.
  void validate() const;

  size_t generator_count() const { return generators.size(); }

  /// FNV-1a digest of the canonical serialization; keys the quotient cache.
  uint64_t digest() const;

  /// Growth constant C with ||g|| <= C^{word length} (max generator inf-norm).
  double growth_constant() const;
};

struct Word {
  std::vector<uint32_t> letters;

  size_t length() const { return letters.size(); }
  void validate(const GroupSpec& spec) const;
};

IntegerMatrix evaluate_word_exact(const GroupSpec& spec, const Word& w);
std::vector<ModMatrix> evaluate_word_mod(const GroupSpec& spec, const Word& w,
                                         std::span<const uint64_t> primes);

// ---------------------------------------------------------------------------

/// Integer-coefficient polynomial in the entries of an r x r matrix.
/// Each term is a coefficient together with a multiset of entry positions.
class PolynomialFunction {
 public:
  struct Term {
    BigInt coeff;
    std::vector<std::pair<int, int>> positions;  // sorted, with repetition
  };

  PolynomialFunction() = default;
  PolynomialFunction(int rank, std::vector<Term> terms, std::string name);

  int rank() const { return rank_; }
  const std::string& name() const { return name_; }
  const std::vector<Term>& terms() const { return terms_; }

  BigInt eval(const IntegerMatrix& g) const;
  uint64_t eval(const ModMatrix& g) const;

  /// True when every referenced position lies on the main diagonal.
  bool diagonal_only() const;

  int max_degree() const;
  BigInt coeff_abs_sum() const;

  /// Growth constant C_f with |f(g)| <= C_f^{word length}, derived from the
  /// group's generator growth constant.
  double growth_constant(const GroupSpec& spec) const;

  PolynomialFunction operator*(const PolynomialFunction& o) const;
  PolynomialFunction operator+(const PolynomialFunction& o) const;

  static PolynomialFunction constant(int rank, long c);
  static PolynomialFunction entry(int rank, int i, int j);
  /// Sum of squares of the diagonal entries (a^2 + d^2 for rank 2).
  static PolynomialFunction diagonal_squares(int rank);
  static PolynomialFunction product_of_entries(int rank);

  /// Parses sums of integer monomials in entries, e.g. "a^2+d^2",
  /// "a*b*c*d", "e00*e11 - 2*e01", "b^2+2*b". Letters a,b,c,d alias the
  /// entries of a 2x2 matrix; eIJ addresses entry (I,J) for any rank.
  static PolynomialFunction parse(int rank, std::string_view expr);

 private:
  void normalize();

  int rank_ = 0;
  std::vector<Term> terms_;
  std::string name_;
};

// ---------------------------------------------------------------------------
// Presets

/// Elementary generators [[1,+-k],[0,1]], [[1,0],[+-k,1]]. Exceptional primes
/// are the primes dividing k. k = 3 is the sparse (infinite-index) example.
GroupSpec preset_lubotzky(long k, bool include_identity);

/// Elementary generators with k = 1; generates all of SL_2(Z).
GroupSpec preset_sl2_standard(bool include_identity);

/// Symplectic elementary generators for genus g in {1, 2}: the unipotents
/// [[I,S],[0,I]] over a basis of symmetric S, their inverses, and the
/// form-rotation J. Generates Sp_2g(Z); reduction mod p is onto for all p.
GroupSpec preset_symplectic_elementary(int genus, bool include_identity);

/// Z embedded in SL_2(Z) as [[1,n],[0,1]]; generators are n = +-1.
/// Used by the classical integer baseline.
GroupSpec preset_integer_line();

/// Resolve a preset by name: "lubotzky" (uses k), "sl2" / "sl2standard",
/// "symplectic" (uses genus), "zline".
GroupSpec preset_group(std::string_view preset, long k, int genus, bool include_identity);

}  // namespace gsieve
