#include "gsieve/matgroup.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace gsieve {

// ---------------------------------------------------------------------------
// Primality

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

uint64_t powmod_u64(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod_u64(r, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return r;
}

bool is_prime_u64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Witness set proven complete below 3.3 * 10^24 > 2^64.
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod_u64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod_u64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<uint64_t> primes_in_range(uint64_t lo, uint64_t hi) {
  std::vector<uint64_t> out;
  if (hi < 2 || hi < lo) return out;
  if (lo < 2) lo = 2;
  if (hi - lo < 2000 || hi < 1u << 20) {
    for (uint64_t n = lo; n <= hi; ++n)
      if (is_prime_u64(n)) out.push_back(n);
    return out;
  }
  // Plain sieve; desk-scale callers stay far below this branch anyway.
  std::vector<uint8_t> composite(hi + 1, 0);
  for (uint64_t i = 2; i * i <= hi; ++i)
    if (!composite[i])
      for (uint64_t j = i * i; j <= hi; j += i) composite[j] = 1;
  for (uint64_t n = lo; n <= hi; ++n)
    if (!composite[n]) out.push_back(n);
  return out;
}

// ---------------------------------------------------------------------------
// IntegerMatrix

IntegerMatrix::IntegerMatrix(int dim) : dim_(dim), e_(static_cast<size_t>(dim) * dim) {
  if (dim < 1) throw DimensionMismatch("matrix dimension must be positive");
}

IntegerMatrix IntegerMatrix::identity(int dim) {
  IntegerMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1;
  return m;
}

IntegerMatrix IntegerMatrix::from_rows(const std::vector<std::vector<long>>& rows) {
  int dim = static_cast<int>(rows.size());
  IntegerMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    if (static_cast<int>(rows[i].size()) != dim)
      throw DimensionMismatch("row length does not match matrix dimension");
    for (int j = 0; j < dim; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

bool IntegerMatrix::is_identity() const {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (at(i, j) != ((i == j) ? 1 : 0)) return false;
  return true;
}

IntegerMatrix IntegerMatrix::operator*(const IntegerMatrix& o) const {
  if (dim_ != o.dim_) throw DimensionMismatch("matrix product dimension mismatch");
  IntegerMatrix r(dim_);
  BigInt acc, tmp;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      acc = 0;
      for (int k = 0; k < dim_; ++k) {
        tmp = at(i, k) * o.at(k, j);
        acc += tmp;
      }
      r.at(i, j) = acc;
    }
  }
  return r;
}

BigInt IntegerMatrix::determinant() const {
  if (dim_ == 1) return at(0, 0);
  if (dim_ == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  BigInt det = 0;
  IntegerMatrix minor(dim_ - 1);
  for (int c = 0; c < dim_; ++c) {
    for (int i = 1; i < dim_; ++i) {
      int jj = 0;
      for (int j = 0; j < dim_; ++j) {
        if (j == c) continue;
        minor.at(i - 1, jj++) = at(i, j);
      }
    }
    BigInt cof = at(0, c) * minor.determinant();
    if (c % 2 == 0)
      det += cof;
    else
      det -= cof;
  }
  return det;
}

IntegerMatrix IntegerMatrix::inverse_unimodular() const {
  BigInt det = determinant();
  if (det != 1 && det != -1)
    throw Error("inverse_unimodular requires determinant +-1, got " + det.get_str());
  IntegerMatrix inv(dim_);
  if (dim_ == 1) {
    inv.at(0, 0) = det;  // det = a = +-1
    return inv;
  }
  IntegerMatrix minor(dim_ - 1);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      int ii2 = 0;
      for (int ii = 0; ii < dim_; ++ii) {
        if (ii == i) continue;
        int jj2 = 0;
        for (int jj = 0; jj < dim_; ++jj) {
          if (jj == j) continue;
          minor.at(ii2, jj2++) = at(ii, jj);
        }
        ++ii2;
      }
      BigInt cof = minor.determinant();
      if ((i + j) % 2 == 1) cof = -cof;
      // adjugate transposes the cofactor matrix; inverse = adjugate / det
      inv.at(j, i) = (det == 1) ? cof : BigInt(-cof);
    }
  }
  return inv;
}

IntegerMatrix IntegerMatrix::transpose() const {
  IntegerMatrix t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t.at(j, i) = at(i, j);
  return t;
}

BigInt IntegerMatrix::max_abs_entry() const {
  BigInt m = 0;
  for (const BigInt& v : e_) {
    BigInt a = abs(v);
    if (a > m) m = a;
  }
  return m;
}

std::string IntegerMatrix::to_string() const {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < dim_; ++i) {
    os << "[";
    for (int j = 0; j < dim_; ++j) {
      os << at(i, j).get_str();
      if (j + 1 < dim_) os << ",";
    }
    os << "]";
    if (i + 1 < dim_) os << ",";
  }
  os << "]";
  return os.str();
}

std::string IntegerMatrix::serialize() const {
  std::ostringstream os;
  os << dim_;
  for (const BigInt& v : e_) os << ":" << v.get_str();
  return os.str();
}

// ---------------------------------------------------------------------------
// ModMatrix

ModMatrix::ModMatrix(int dim, uint64_t p) : dim_(dim), p_(p), e_(static_cast<size_t>(dim) * dim) {
  if (dim < 1) throw DimensionMismatch("matrix dimension must be positive");
}

ModMatrix ModMatrix::identity(int dim, uint64_t p) {
  ModMatrix m(dim, p);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1 % p;
  return m;
}

ModMatrix ModMatrix::operator*(const ModMatrix& o) const {
  ModMatrix r(dim_, p_);
  mul_into(o, r);
  return r;
}

void ModMatrix::mul_into(const ModMatrix& rhs, ModMatrix& out) const {
  if (dim_ != rhs.dim_ || p_ != rhs.p_ || out.dim_ != dim_ || out.p_ != p_)
    throw DimensionMismatch("modular product dimension/modulus mismatch");
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      unsigned __int128 acc = 0;
      for (int k = 0; k < dim_; ++k)
        acc += static_cast<unsigned __int128>(at(i, k)) * rhs.at(k, j);
      out.at(i, j) = static_cast<uint64_t>(acc % p_);
    }
  }
}

uint64_t ModMatrix::determinant() const {
  if (dim_ == 1) return e_[0] % p_;
  if (dim_ == 2) {
    uint64_t pos = mulmod_u64(at(0, 0), at(1, 1), p_);
    uint64_t neg = mulmod_u64(at(0, 1), at(1, 0), p_);
    return (pos + p_ - neg) % p_;
  }
  uint64_t det = 0;
  ModMatrix minor(dim_ - 1, p_);
  for (int c = 0; c < dim_; ++c) {
    for (int i = 1; i < dim_; ++i) {
      int jj = 0;
      for (int j = 0; j < dim_; ++j) {
        if (j == c) continue;
        minor.at(i - 1, jj++) = at(i, j);
      }
    }
    uint64_t cof = mulmod_u64(at(0, c), minor.determinant(), p_);
    det = (c % 2 == 0) ? (det + cof) % p_ : (det + p_ - cof) % p_;
  }
  return det;
}

bool ModMatrix::encodable(int dim, uint64_t p) {
  unsigned __int128 bound = 1;
  for (int i = 0; i < dim * dim; ++i) {
    bound *= p;
    if (bound > static_cast<unsigned __int128>(UINT64_MAX)) return false;
  }
  return true;
}

uint64_t ModMatrix::encode() const {
  if (!encodable(dim_, p_))
    throw Error("element encoding does not fit in 64 bits (dim " + std::to_string(dim_) +
                ", p " + std::to_string(p_) + ")");
  uint64_t code = 0;
  for (size_t k = e_.size(); k-- > 0;) code = code * p_ + e_[k];
  return code;
}

ModMatrix ModMatrix::decode(uint64_t code, int dim, uint64_t p) {
  ModMatrix m(dim, p);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      m.at(i, j) = code % p;
      code /= p;
    }
  return m;
}

ModMatrix reduce_mod(const IntegerMatrix& g, uint64_t p) {
  if (!is_prime_u64(p)) throw NotPrime("modulus " + std::to_string(p) + " is not prime");
  ModMatrix m(g.dim(), p);
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j)
      m.at(i, j) = mpz_fdiv_ui(g.at(i, j).get_mpz_t(), p);  // non-negative remainder
  return m;
}

// ---------------------------------------------------------------------------
// GroupSpec

std::string_view ambient_name(Ambient a) {
  return a == Ambient::SpecialLinear ? "special_linear" : "symplectic";
}

IntegerMatrix standard_symplectic_form(int dim) {
  if (dim % 2 != 0) throw DimensionMismatch("symplectic form needs even dimension");
  int g = dim / 2;
  IntegerMatrix j(dim);
  for (int i = 0; i < g; ++i) {
    j.at(i, g + i) = 1;
    j.at(g + i, i) = -1;
  }
  return j;
}

GroupSpec GroupSpec::make(int rank, std::vector<IntegerMatrix> gens, bool include_identity,
                          Ambient ambient, std::set<uint64_t> exceptional, std::string name) {
  GroupSpec spec;
  spec.rank = rank;
  spec.generators = std::move(gens);
  spec.ambient = ambient;
  spec.exceptional_primes = std::move(exceptional);
  spec.name = std::move(name);
  bool has_identity = false;
  for (const auto& g : spec.generators)
    if (g.is_identity()) has_identity = true;
  if (include_identity && !has_identity) {
    spec.generators.push_back(IntegerMatrix::identity(rank));
    has_identity = true;
  }
  spec.includes_identity = has_identity;
  spec.validate();
  return spec;
}

void GroupSpec::validate() const {
  if (rank < 1) throw InvalidGroupSpec("rank must be positive");
  if (generators.empty()) throw InvalidGroupSpec("generating set is empty");
  for (uint64_t p : exceptional_primes)
    if (!is_prime_u64(p))
      throw InvalidGroupSpec("exceptional prime " + std::to_string(p) + " is not prime");

  IntegerMatrix form(1);
  if (ambient == Ambient::Symplectic) form = standard_symplectic_form(rank);

  bool has_identity = false;
  for (const auto& g : generators) {
    if (g.dim() != rank) throw InvalidGroupSpec("generator dimension does not match rank");
    if (g.is_identity()) has_identity = true;
    if (ambient == Ambient::SpecialLinear) {
      if (g.determinant() != 1)
        throw InvalidGroupSpec("generator determinant is not 1: " + g.to_string());
    } else {
      if (g.transpose() * form * g != form)
        throw InvalidGroupSpec("generator does not preserve the symplectic form: " +
                               g.to_string());
    }
    // S = S^{-1}, checked exactly.
    IntegerMatrix inv = g.inverse_unimodular();
    bool found = false;
    for (const auto& h : generators)
      if (h == inv) {
        found = true;
        break;
      }
    if (!found)
      throw InvalidGroupSpec("generating set is not symmetric: missing inverse of " +
                             g.to_string());
  }
  if (includes_identity != has_identity)
    throw InvalidGroupSpec("includes_identity flag does not match the generator list");
}

uint64_t GroupSpec::digest() const {
  std::ostringstream os;
  os << rank << "|" << ambient_name(ambient) << "|" << includes_identity << "|";
  for (const auto& g : generators) os << g.serialize() << ";";
  os << "|";
  for (uint64_t p : exceptional_primes) os << p << ",";
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : os.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

double GroupSpec::growth_constant() const {
  double c = 1.0;
  for (const auto& g : generators) {
    for (int i = 0; i < rank; ++i) {
      BigInt row = 0;
      for (int j = 0; j < rank; ++j) row += abs(g.at(i, j));
      c = std::max(c, row.get_d());
    }
  }
  return c;
}

void Word::validate(const GroupSpec& spec) const {
  for (uint32_t idx : letters)
    if (idx >= spec.generators.size())
      throw Error("word letter " + std::to_string(idx) + " out of range");
}

IntegerMatrix evaluate_word_exact(const GroupSpec& spec, const Word& w) {
  w.validate(spec);
  IntegerMatrix acc = IntegerMatrix::identity(spec.rank);
  for (uint32_t idx : w.letters) acc = acc * spec.generators[idx];
  return acc;
}

std::vector<ModMatrix> evaluate_word_mod(const GroupSpec& spec, const Word& w,
                                         std::span<const uint64_t> primes) {
  w.validate(spec);
  std::vector<std::vector<ModMatrix>> gen_mod;
  gen_mod.reserve(primes.size());
  for (uint64_t p : primes) {
    std::vector<ModMatrix> track;
    track.reserve(spec.generators.size());
    for (const auto& g : spec.generators) track.push_back(reduce_mod(g, p));
    gen_mod.push_back(std::move(track));
  }
  std::vector<ModMatrix> acc;
  acc.reserve(primes.size());
  for (uint64_t p : primes) acc.push_back(ModMatrix::identity(spec.rank, p));
  for (uint32_t idx : w.letters) {
    for (size_t t = 0; t < primes.size(); ++t) {
      // residue tracks update one step at a time; the big integer is never formed
      acc[t] = acc[t] * gen_mod[t][idx];
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// PolynomialFunction

PolynomialFunction::PolynomialFunction(int rank, std::vector<Term> terms, std::string name)
    : rank_(rank), terms_(std::move(terms)), name_(std::move(name)) {
  for (auto& t : terms_) {
    for (auto& [i, j] : t.positions)
      if (i < 0 || i >= rank_ || j < 0 || j >= rank_)
        throw DimensionMismatch("polynomial references entry outside the matrix");
    std::sort(t.positions.begin(), t.positions.end());
  }
  normalize();
}

void PolynomialFunction::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.positions < b.positions; });
  std::vector<Term> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().positions == t.positions)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0; });
  terms_ = std::move(merged);
}

BigInt PolynomialFunction::eval(const IntegerMatrix& g) const {
  if (g.dim() != rank_) throw DimensionMismatch("polynomial rank does not match matrix");
  BigInt sum = 0, mono;
  for (const auto& t : terms_) {
    mono = t.coeff;
    for (auto [i, j] : t.positions) mono *= g.at(i, j);
    sum += mono;
  }
  return sum;
}

uint64_t PolynomialFunction::eval(const ModMatrix& g) const {
  if (g.dim() != rank_) throw DimensionMismatch("polynomial rank does not match matrix");
  uint64_t p = g.modulus();
  uint64_t sum = 0;
  for (const auto& t : terms_) {
    uint64_t mono = mpz_fdiv_ui(t.coeff.get_mpz_t(), p);
    for (auto [i, j] : t.positions) mono = mulmod_u64(mono, g.at(i, j), p);
    sum = (sum + mono) % p;
  }
  return sum;
}

bool PolynomialFunction::diagonal_only() const {
  for (const auto& t : terms_)
    for (auto [i, j] : t.positions)
      if (i != j) return false;
  return true;
}

int PolynomialFunction::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, static_cast<int>(t.positions.size()));
  return d;
}

BigInt PolynomialFunction::coeff_abs_sum() const {
  BigInt s = 0;
  for (const auto& t : terms_) s += abs(t.coeff);
  return s;
}

double PolynomialFunction::growth_constant(const GroupSpec& spec) const {
  // |entry| <= C^n along words, so |f(g)| <= K * C^{D n} <= (K C^D)^n for n >= 1.
  double c = spec.growth_constant();
  double k = std::max(1.0, coeff_abs_sum().get_d());
  return k * std::pow(c, max_degree());
}

PolynomialFunction PolynomialFunction::operator*(const PolynomialFunction& o) const {
  if (rank_ != o.rank_) throw DimensionMismatch("polynomial rank mismatch");
  std::vector<Term> out;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      Term t;
      t.coeff = a.coeff * b.coeff;
      t.positions = a.positions;
      t.positions.insert(t.positions.end(), b.positions.begin(), b.positions.end());
      std::sort(t.positions.begin(), t.positions.end());
      out.push_back(std::move(t));
    }
  return PolynomialFunction(rank_, std::move(out), name_ + "*" + o.name_);
}

PolynomialFunction PolynomialFunction::operator+(const PolynomialFunction& o) const {
  if (rank_ != o.rank_) throw DimensionMismatch("polynomial rank mismatch");
  std::vector<Term> out = terms_;
  out.insert(out.end(), o.terms_.begin(), o.terms_.end());
  return PolynomialFunction(rank_, std::move(out), name_ + "+" + o.name_);
}

PolynomialFunction PolynomialFunction::constant(int rank, long c) {
  std::vector<Term> t;
  if (c != 0) t.push_back({BigInt(c), {}});
  return PolynomialFunction(rank, std::move(t), std::to_string(c));
}

PolynomialFunction PolynomialFunction::entry(int rank, int i, int j) {
  return PolynomialFunction(rank, {{BigInt(1), {{i, j}}}},
                            "e" + std::to_string(i) + std::to_string(j));
}

PolynomialFunction PolynomialFunction::diagonal_squares(int rank) {
  std::vector<Term> terms;
  for (int i = 0; i < rank; ++i) terms.push_back({BigInt(1), {{i, i}, {i, i}}});
  return PolynomialFunction(rank, std::move(terms), rank == 2 ? "a^2+d^2" : "diag_squares");
}

PolynomialFunction PolynomialFunction::product_of_entries(int rank) {
  Term t;
  t.coeff = 1;
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) t.positions.push_back({i, j});
  return PolynomialFunction(rank, {std::move(t)}, "product_of_entries");
}

namespace {

struct PolyParser {
  std::string_view s;
  size_t pos = 0;
  int rank;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("polynomial parse error at offset " + std::to_string(pos) + ": " + msg);
  }
  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool peek(char c) {
    skip_ws();
    return pos < s.size() && s[pos] == c;
  }
  bool eat(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  long parse_uint() {
    skip_ws();
    if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected integer");
    long v = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      v = v * 10 + (s[pos] - '0');
      if (v > 1000000000L) fail("integer literal too large");
      ++pos;
    }
    return v;
  }

  // atom := uint | 'a'..'d' | 'e' digit digit ; returns (constant, positions)
  void parse_atom(BigInt& coeff, std::vector<std::pair<int, int>>& positions) {
    skip_ws();
    if (pos >= s.size()) fail("expected factor");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      long v = parse_uint();
      long e = parse_power();
      BigInt b(v);
      BigInt r(1);
      for (long t = 0; t < e; ++t) r *= b;
      coeff *= r;
      return;
    }
    std::pair<int, int> ij;
    if (c == 'e') {
      ++pos;
      if (pos + 1 >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])) ||
          !std::isdigit(static_cast<unsigned char>(s[pos + 1])))
        fail("entry variable needs two digits, e.g. e01");
      ij = {s[pos] - '0', s[pos + 1] - '0'};
      pos += 2;
    } else if (c >= 'a' && c <= 'd' && rank == 2) {
      ij = {(c - 'a') / 2, (c - 'a') % 2};
      ++pos;
    } else {
      fail(std::string("unexpected character '") + c + "'");
    }
    if (ij.first >= rank || ij.second >= rank) fail("entry index outside matrix");
    long e = parse_power();
    for (long t = 0; t < e; ++t) positions.push_back(ij);
  }

  long parse_power() {
    if (eat('^')) {
      long e = parse_uint();
      if (e < 0 || e > 64) fail("exponent out of range");
      return e;
    }
    return 1;
  }

  PolynomialFunction::Term parse_monomial(bool negative) {
    PolynomialFunction::Term t;
    t.coeff = negative ? -1 : 1;
    parse_atom(t.coeff, t.positions);
    while (eat('*')) parse_atom(t.coeff, t.positions);
    return t;
  }

  std::vector<PolynomialFunction::Term> parse_sum() {
    std::vector<PolynomialFunction::Term> terms;
    bool neg = false;
    if (eat('-'))
      neg = true;
    else
      (void)eat('+');
    terms.push_back(parse_monomial(neg));
    while (true) {
      skip_ws();
      if (pos >= s.size()) break;
      if (eat('+'))
        terms.push_back(parse_monomial(false));
      else if (eat('-'))
        terms.push_back(parse_monomial(true));
      else
        fail("expected '+' or '-'");
    }
    return terms;
  }
};

}  // namespace

PolynomialFunction PolynomialFunction::parse(int rank, std::string_view expr) {
  PolyParser p{expr, 0, rank};
  auto terms = p.parse_sum();
  return PolynomialFunction(rank, std::move(terms), std::string(expr));
}

// ---------------------------------------------------------------------------
// Presets

GroupSpec preset_lubotzky(long k, bool include_identity) {
  if (k < 1) throw InvalidGroupSpec("lubotzky preset needs k >= 1");
  std::vector<IntegerMatrix> gens = {
      IntegerMatrix::from_rows({{1, k}, {0, 1}}),
      IntegerMatrix::from_rows({{1, -k}, {0, 1}}),
      IntegerMatrix::from_rows({{1, 0}, {k, 1}}),
      IntegerMatrix::from_rows({{1, 0}, {-k, 1}}),
  };
  std::set<uint64_t> exceptional;
  long rest = k;
  for (long p = 2; p * p <= rest; ++p)
    while (rest % p == 0) {
      exceptional.insert(static_cast<uint64_t>(p));
      rest /= p;
    }
  if (rest > 1) exceptional.insert(static_cast<uint64_t>(rest));
  return GroupSpec::make(2, std::move(gens), include_identity, Ambient::SpecialLinear,
                         std::move(exceptional), "lubotzky(" + std::to_string(k) + ")");
}

GroupSpec preset_sl2_standard(bool include_identity) {
  GroupSpec spec = preset_lubotzky(1, include_identity);
  spec.name = "sl2_standard";
  return spec;
}

GroupSpec preset_symplectic_elementary(int genus, bool include_identity) {
  if (genus != 1 && genus != 2)
    throw InvalidGroupSpec("symplectic preset supports genus 1 and 2 only");
  int dim = 2 * genus;
  std::vector<IntegerMatrix> gens;
  // Basis of symmetric g x g integer matrices.
  std::vector<std::vector<std::vector<long>>> basis;
  for (int i = 0; i < genus; ++i)
    for (int j = i; j < genus; ++j) {
      std::vector<std::vector<long>> S(genus, std::vector<long>(genus, 0));
      S[i][j] = 1;
      S[j][i] = 1;
      basis.push_back(std::move(S));
    }
  for (const auto& S : basis) {
    for (int sign : {1, -1}) {
      IntegerMatrix u = IntegerMatrix::identity(dim);
      for (int i = 0; i < genus; ++i)
        for (int j = 0; j < genus; ++j) u.at(i, genus + j) = sign * S[i][j];
      gens.push_back(std::move(u));
    }
  }
  // The rotation J and its inverse -J.
  IntegerMatrix j(dim);
  for (int i = 0; i < genus; ++i) {
    j.at(i, genus + i) = 1;
    j.at(genus + i, i) = -1;
  }
  gens.push_back(j);
  gens.push_back(j.inverse_unimodular());
  return GroupSpec::make(dim, std::move(gens), include_identity, Ambient::Symplectic, {},
                         "symplectic_elementary(" + std::to_string(genus) + ")");
}

GroupSpec preset_integer_line() {
  std::vector<IntegerMatrix> gens = {
      IntegerMatrix::from_rows({{1, 1}, {0, 1}}),
      IntegerMatrix::from_rows({{1, -1}, {0, 1}}),
  };
  return GroupSpec::make(2, std::move(gens), false, Ambient::SpecialLinear, {}, "zline");
}

GroupSpec preset_group(std::string_view preset, long k, int genus, bool include_identity) {
  if (preset == "lubotzky") return preset_lubotzky(k, include_identity);
  if (preset == "sl2" || preset == "sl2standard") return preset_sl2_standard(include_identity);
  if (preset == "symplectic") return preset_symplectic_elementary(genus, include_identity);
  if (preset == "zline") return preset_integer_line();
  throw InvalidGroupSpec("unknown preset '" + std::string(preset) + "'");
}

}  // namespace gsieve
