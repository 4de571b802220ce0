#pragma once

// Congruence quotients by breadth-first closure. A quotient mod a set of
// primes I stores one residue matrix per prime for every reachable element,
// in BFS discovery order, together with the full right-translation table of
// the generators. Element keys are the packed base-p encodings of the
// residue matrices, one 64-bit code per prime.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gsieve/matgroup.hpp"

namespace gsieve {

inline constexpr uint64_t kDefaultCap = 50'000'000;

struct CodeKey {
  std::array<uint64_t, 4> v{};
  uint8_t n = 0;
  bool operator==(const CodeKey& o) const {
    if (n != o.n) return false;
    for (uint8_t i = 0; i < n; ++i)
      if (v[i] != o.v[i]) return false;
    return true;
  }
};

struct CodeKeyHash {
  size_t operator()(const CodeKey& k) const {
    uint64_t h = 0x9e3779b97f4a7c15ull ^ k.n;
    for (uint8_t i = 0; i < k.n; ++i) {
      h ^= k.v[i] + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<size_t>(h ^ (h >> 33));
  }
};

class FiniteQuotient {
 public:
  FiniteQuotient() = default;

  const GroupSpec& spec() const { return spec_; }
  const std::vector<uint64_t>& primes() const { return primes_; }
  uint64_t q_modulus() const;  // q_I, the product of the primes
  uint64_t order() const { return order_; }
  size_t tracks() const { return primes_.size(); }
  size_t generator_count() const { return spec_.generators.size(); }
  uint32_t identity_index() const { return 0; }

  /// Index of element e right-translated by generator g.
  uint32_t act(uint32_t e, uint32_t g) const {
    return action_[static_cast<size_t>(e) * generator_count() + g];
  }
  std::span<const uint32_t> action_table() const { return action_; }

  uint64_t code_of(uint32_t e, size_t track) const {
    return codes_[static_cast<size_t>(e) * tracks() + track];
  }
  ModMatrix matrix_of(uint32_t e, size_t track) const;

  /// Look up an element by its residue codes (one per prime, in order).
  std::optional<uint32_t> index_of(std::span<const uint64_t> codes) const;

 private:
  friend FiniteQuotient enumerate_quotient(const GroupSpec&, std::vector<uint64_t>, uint64_t);
  friend std::optional<FiniteQuotient> load_quotient(const GroupSpec&,
                                                     std::span<const uint64_t>,
                                                     const std::filesystem::path&);
  friend void save_quotient(const FiniteQuotient&, const std::filesystem::path&);

  void rebuild_index();

  GroupSpec spec_;
  std::vector<uint64_t> primes_;
  uint64_t order_ = 0;
  std::vector<uint64_t> codes_;    // order x tracks, row-major
  std::vector<uint32_t> action_;   // order x generators, row-major
  std::unordered_map<CodeKey, uint32_t, CodeKeyHash> index_;
};

/// BFS closure from the identity under right multiplication by every
/// generator, reducing mod each prime simultaneously. Deterministic element
/// order (discovery order); throws CapExceeded when the closure would pass
/// `cap` elements.
FiniteQuotient enumerate_quotient(const GroupSpec& spec, std::vector<uint64_t> primes,
                                  uint64_t cap = kDefaultCap);

/// |SL_r(F_p)| or |Sp_2g(F_p)| by the classical order formulas. `dim` is the
/// matrix dimension (r, or 2g).
uint64_t classical_group_order(Ambient ambient, int dim, uint64_t p);

struct SurjectivityRow {
  uint64_t p;
  uint64_t order_found;
  uint64_t ambient_order;
  bool surjective;
};

std::vector<SurjectivityRow> surjectivity_report(const GroupSpec& spec,
                                                 std::span<const uint64_t> primes,
                                                 uint64_t cap = kDefaultCap);

struct IndependenceResult {
  bool independent;  // |G_{p,q}| == |G_p| * |G_q|
  uint64_t order_p;
  uint64_t order_q;
  uint64_t order_pair;
};

/// Goursat surjectivity for the pair (p, q): closes the diagonal subgroup of
/// G_p x G_q on the product index space (no pair table is materialized).
IndependenceResult independence_check(const GroupSpec& spec, uint64_t p, uint64_t q,
                                      uint64_t cap = kDefaultCap);

// Disk cache. Little-endian binary layout:
//   magic "GSQT" u32 | version u32 | spec digest u64 | track count u32 |
//   generator count u32 | primes u64[tracks] | order u64 |
//   codes u64[order*tracks] | action u32[order*generators]
// A digest or prime mismatch invalidates the cache (load returns nullopt).
void save_quotient(const FiniteQuotient& q, const std::filesystem::path& path);
std::optional<FiniteQuotient> load_quotient(const GroupSpec& spec,
                                            std::span<const uint64_t> primes,
                                            const std::filesystem::path& path);

}  // namespace gsieve
