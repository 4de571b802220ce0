#include "gsieve/quotients.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

namespace gsieve {

uint64_t FiniteQuotient::q_modulus() const {
  uint64_t q = 1;
  for (uint64_t p : primes_) q *= p;
  return q;
}

ModMatrix FiniteQuotient::matrix_of(uint32_t e, size_t track) const {
  return ModMatrix::decode(code_of(e, track), spec_.rank, primes_[track]);
}

std::optional<uint32_t> FiniteQuotient::index_of(std::span<const uint64_t> codes) const {
  if (codes.size() != tracks()) return std::nullopt;
  CodeKey key;
  key.n = static_cast<uint8_t>(codes.size());
  for (size_t i = 0; i < codes.size(); ++i) key.v[i] = codes[i];
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void FiniteQuotient::rebuild_index() {
  index_.clear();
  index_.reserve(order_);
  size_t t = tracks();
  for (uint64_t e = 0; e < order_; ++e) {
    CodeKey key;
    key.n = static_cast<uint8_t>(t);
    for (size_t i = 0; i < t; ++i) key.v[i] = codes_[e * t + i];
    index_.emplace(key, static_cast<uint32_t>(e));
  }
}

FiniteQuotient enumerate_quotient(const GroupSpec& spec, std::vector<uint64_t> primes,
                                  uint64_t cap) {
  spec.validate();
  if (spec.generators.empty()) throw InvalidGroupSpec("generating set is empty");
  if (primes.empty()) throw Error("quotient needs at least one prime");
  if (cap < 1) throw Error("cap must be at least 1");
  std::sort(primes.begin(), primes.end());
  for (size_t i = 0; i < primes.size(); ++i) {
    if (!is_prime_u64(primes[i]))
      throw NotPrime("modulus " + std::to_string(primes[i]) + " is not prime");
    if (i > 0 && primes[i] == primes[i - 1])
      throw Error("duplicate prime " + std::to_string(primes[i]) + " in quotient");
    if (!ModMatrix::encodable(spec.rank, primes[i]))
      throw Error("prime " + std::to_string(primes[i]) + " too large to encode at rank " +
                  std::to_string(spec.rank));
  }
  if (primes.size() > 4) throw Error("at most 4 primes per quotient are supported");

  const size_t t = primes.size();
  const size_t ngen = spec.generators.size();

  std::vector<std::vector<ModMatrix>> gen_mod(t);
  for (size_t k = 0; k < t; ++k) {
    gen_mod[k].reserve(ngen);
    for (const auto& g : spec.generators) gen_mod[k].push_back(reduce_mod(g, primes[k]));
  }

  FiniteQuotient q;
  q.spec_ = spec;
  q.primes_ = primes;

  auto key_of = [&](const uint64_t* codes) {
    CodeKey key;
    key.n = static_cast<uint8_t>(t);
    for (size_t i = 0; i < t; ++i) key.v[i] = codes[i];
    return key;
  };

  std::vector<uint64_t> id_codes(t);
  for (size_t k = 0; k < t; ++k)
    id_codes[k] = ModMatrix::identity(spec.rank, primes[k]).encode();

  q.codes_.insert(q.codes_.end(), id_codes.begin(), id_codes.end());
  q.index_.emplace(key_of(id_codes.data()), 0u);

  std::vector<ModMatrix> cur(t, ModMatrix(spec.rank, primes[0]));
  ModMatrix prod(spec.rank, primes[0]);
  std::vector<uint64_t> ncodes(t);

  // Frontier is implicit: elements are processed in discovery order.
  for (uint64_t e = 0; e * t < q.codes_.size(); ++e) {
    for (size_t k = 0; k < t; ++k)
      cur[k] = ModMatrix::decode(q.codes_[e * t + k], spec.rank, primes[k]);
    for (size_t g = 0; g < ngen; ++g) {
      for (size_t k = 0; k < t; ++k) {
        ModMatrix next(spec.rank, primes[k]);
        cur[k].mul_into(gen_mod[k][g], next);
        ncodes[k] = next.encode();
      }
      CodeKey key = key_of(ncodes.data());
      auto [it, inserted] = q.index_.emplace(key, static_cast<uint32_t>(q.codes_.size() / t));
      if (inserted) {
        if (q.codes_.size() / t >= cap)
          throw CapExceeded("quotient order exceeds cap " + std::to_string(cap), cap);
        q.codes_.insert(q.codes_.end(), ncodes.begin(), ncodes.end());
      }
      q.action_.push_back(it->second);
    }
  }
  q.order_ = q.codes_.size() / t;
  return q;
}

uint64_t classical_group_order(Ambient ambient, int dim, uint64_t p) {
  if (!is_prime_u64(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
  auto checked_mul = [](uint64_t a, uint64_t b) {
    unsigned __int128 r = static_cast<unsigned __int128>(a) * b;
    if (r > UINT64_MAX) throw Error("classical group order overflows 64 bits");
    return static_cast<uint64_t>(r);
  };
  auto pow_u64 = [&](uint64_t base, int exp) {
    uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
    return r;
  };
  if (ambient == Ambient::SpecialLinear) {
    int r = dim;
    if (r < 2) throw Error("SL_r needs r >= 2");
    uint64_t order = pow_u64(p, r * (r - 1) / 2);
    for (int k = 2; k <= r; ++k) order = checked_mul(order, pow_u64(p, k) - 1);
    return order;
  }
  if (dim % 2 != 0) throw Error("Sp needs even dimension");
  int g = dim / 2;
  uint64_t order = pow_u64(p, g * g);
  for (int k = 1; k <= g; ++k) order = checked_mul(order, pow_u64(p, 2 * k) - 1);
  return order;
}

std::vector<SurjectivityRow> surjectivity_report(const GroupSpec& spec,
                                                 std::span<const uint64_t> primes,
                                                 uint64_t cap) {
  std::vector<SurjectivityRow> rows;
  rows.reserve(primes.size());
  for (uint64_t p : primes) {
    FiniteQuotient q = enumerate_quotient(spec, {p}, cap);
    SurjectivityRow row;
    row.p = p;
    row.order_found = q.order();
    row.ambient_order = classical_group_order(spec.ambient, spec.rank, p);
    row.surjective = row.order_found == row.ambient_order;
    rows.push_back(row);
  }
  return rows;
}

IndependenceResult independence_check(const GroupSpec& spec, uint64_t p, uint64_t q,
                                      uint64_t cap) {
  if (p == q) throw Error("independence check needs distinct primes");
  FiniteQuotient qp = enumerate_quotient(spec, {p}, cap);
  FiniteQuotient qq = enumerate_quotient(spec, {q}, cap);
  uint64_t product = qp.order() * qq.order();
  if (product > cap)
    throw CapExceeded("pair quotient would exceed cap " + std::to_string(cap), cap);

  // Close the diagonal subgroup on the product index space; only a visited
  // bitmap and a frontier are needed.
  const uint64_t nq = qq.order();
  const size_t ngen = spec.generators.size();
  std::vector<uint64_t> visited((product + 63) / 64, 0);
  auto test_and_set = [&](uint64_t idx) {
    uint64_t word = idx >> 6, bit = 1ull << (idx & 63);
    bool was = visited[word] & bit;
    visited[word] |= bit;
    return was;
  };
  std::vector<uint64_t> frontier, next;
  frontier.push_back(0);
  test_and_set(0);
  uint64_t count = 1;
  while (!frontier.empty()) {
    next.clear();
    for (uint64_t idx : frontier) {
      uint32_t i = static_cast<uint32_t>(idx / nq);
      uint32_t j = static_cast<uint32_t>(idx % nq);
      for (size_t g = 0; g < ngen; ++g) {
        uint64_t nidx = static_cast<uint64_t>(qp.act(i, static_cast<uint32_t>(g))) * nq +
                        qq.act(j, static_cast<uint32_t>(g));
        if (!test_and_set(nidx)) {
          ++count;
          next.push_back(nidx);
        }
      }
    }
    frontier.swap(next);
  }
  return {count == product, qp.order(), qq.order(), count};
}

// ---------------------------------------------------------------------------
// Disk cache

namespace {
constexpr uint32_t kCacheMagic = 0x47535154;  // "GSQT"
constexpr uint32_t kCacheVersion = 1;

template <class T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool read_pod(std::ifstream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return bool(is);
}
}  // namespace

void save_quotient(const FiniteQuotient& q, const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open cache file " + tmp.string());
    write_pod(os, kCacheMagic);
    write_pod(os, kCacheVersion);
    write_pod(os, q.spec().digest());
    write_pod(os, static_cast<uint32_t>(q.tracks()));
    write_pod(os, static_cast<uint32_t>(q.generator_count()));
    for (uint64_t p : q.primes()) write_pod(os, p);
    write_pod(os, q.order());
    os.write(reinterpret_cast<const char*>(q.codes_.data()),
             static_cast<std::streamsize>(q.codes_.size() * sizeof(uint64_t)));
    os.write(reinterpret_cast<const char*>(q.action_.data()),
             static_cast<std::streamsize>(q.action_.size() * sizeof(uint32_t)));
    if (!os) throw Error("short write to cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<FiniteQuotient> load_quotient(const GroupSpec& spec,
                                            std::span<const uint64_t> primes,
                                            const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  uint32_t magic = 0, version = 0, tracks = 0, ngen = 0;
  uint64_t digest = 0, order = 0;
  if (!read_pod(is, magic) || magic != kCacheMagic) return std::nullopt;
  if (!read_pod(is, version) || version != kCacheVersion) return std::nullopt;
  if (!read_pod(is, digest) || digest != spec.digest()) return std::nullopt;
  if (!read_pod(is, tracks) || !read_pod(is, ngen)) return std::nullopt;
  if (tracks != primes.size() || ngen != spec.generators.size()) return std::nullopt;
  std::vector<uint64_t> file_primes(tracks);
  for (auto& p : file_primes)
    if (!read_pod(is, p)) return std::nullopt;
  std::vector<uint64_t> want(primes.begin(), primes.end());
  std::sort(want.begin(), want.end());
  if (file_primes != want) return std::nullopt;
  if (!read_pod(is, order)) return std::nullopt;

  FiniteQuotient q;
  q.spec_ = spec;
  q.primes_ = std::move(file_primes);
  q.order_ = order;
  q.codes_.resize(order * tracks);
  q.action_.resize(order * ngen);
  is.read(reinterpret_cast<char*>(q.codes_.data()),
          static_cast<std::streamsize>(q.codes_.size() * sizeof(uint64_t)));
  is.read(reinterpret_cast<char*>(q.action_.data()),
          static_cast<std::streamsize>(q.action_.size() * sizeof(uint32_t)));
  if (!is) return std::nullopt;
  q.rebuild_index();
  return q;
}

}  // namespace gsieve
