#include "gsieve/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "gsieve/rng.hpp"
#include "parallel.hpp"

namespace gsieve {

namespace {

// --- dense polynomials over F_p (for characteristic-polynomial tests) ------

using FpPoly = std::vector<uint64_t>;  // coefficients, low degree first

void fp_trim(FpPoly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

FpPoly fp_mul(const FpPoly& a, const FpPoly& b, uint64_t p) {
  if (a.empty() || b.empty()) return {};
  FpPoly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j)
      c[i + j] = (c[i + j] + mulmod_u64(a[i], b[j], p)) % p;
  fp_trim(c);
  return c;
}

// a mod f, f monic
FpPoly fp_mod(FpPoly a, const FpPoly& f, uint64_t p) {
  fp_trim(a);
  size_t d = f.size() - 1;
  while (a.size() > d) {
    uint64_t lead = a.back();
    size_t shift = a.size() - 1 - d;
    if (lead != 0)
      for (size_t i = 0; i < f.size(); ++i) {
        uint64_t sub = mulmod_u64(lead, f[i], p);
        a[shift + i] = (a[shift + i] + p - sub) % p;
      }
    fp_trim(a);
    if (a.empty()) break;
  }
  return a;
}

FpPoly fp_powmod_x(uint64_t exp_base, int exp_pow, const FpPoly& f, uint64_t p) {
  // x^(exp_base^exp_pow) mod f, by exp_pow rounds of x -> x^exp_base
  FpPoly x = fp_mod({0, 1}, f, p);
  FpPoly acc = x;
  for (int round = 0; round < exp_pow; ++round) {
    // acc -> acc^exp_base mod f by square-and-multiply
    FpPoly result = {1};
    FpPoly base = acc;
    uint64_t e = exp_base;
    while (e) {
      if (e & 1) result = fp_mod(fp_mul(result, base, p), f, p);
      base = fp_mod(fp_mul(base, base, p), f, p);
      e >>= 1;
    }
    acc = result;
  }
  return acc;
}

uint64_t fp_inv(uint64_t a, uint64_t p) { return powmod_u64(a, p - 2, p); }

FpPoly fp_gcd(FpPoly a, FpPoly b, uint64_t p) {
  fp_trim(a);
  fp_trim(b);
  while (!b.empty()) {
    uint64_t lead = fp_inv(b.back(), p);
    FpPoly bm = b;
    for (auto& c : bm) c = mulmod_u64(c, lead, p);  // monic divisor
    a = fp_mod(std::move(a), bm, p);
    std::swap(a, b);
  }
  return a;
}

/// Monic characteristic polynomial of g over F_p, low degree first.
FpPoly char_poly(const ModMatrix& g) {
  const int d = g.dim();
  const uint64_t p = g.modulus();
  // det(xI - g) by cofactor expansion with polynomial entries; d <= 4 keeps
  // this tiny.
  struct PolyMat {
    int d;
    std::vector<FpPoly> e;
    FpPoly& at(int i, int j) { return e[static_cast<size_t>(i) * d + j]; }
  };
  std::function<FpPoly(PolyMat&, std::vector<int>&, std::vector<int>&)> det =
      [&](PolyMat& m, std::vector<int>& rows, std::vector<int>& cols) -> FpPoly {
    if (rows.size() == 1) return m.at(rows[0], cols[0]);
    FpPoly acc;
    int r0 = rows[0];
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (size_t c = 0; c < cols.size(); ++c) {
      std::vector<int> sub_cols;
      for (size_t k = 0; k < cols.size(); ++k)
        if (k != c) sub_cols.push_back(cols[k]);
      FpPoly term = fp_mul(m.at(r0, cols[c]), det(m, sub_rows, sub_cols), p);
      if (acc.size() < term.size()) acc.resize(term.size(), 0);
      for (size_t i = 0; i < term.size(); ++i)
        acc[i] = (c % 2 == 0) ? (acc[i] + term[i]) % p : (acc[i] + p - term[i]) % p;
    }
    fp_trim(acc);
    return acc;
  };
  PolyMat m{d, {}};
  m.e.resize(static_cast<size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      FpPoly entry;
      uint64_t neg = (p - g.at(i, j) % p) % p;
      if (i == j)
        entry = {neg, 1};
      else
        entry = {neg};
      fp_trim(entry);
      m.at(i, j) = std::move(entry);
    }
  std::vector<int> rows(d), cols(d);
  for (int i = 0; i < d; ++i) rows[i] = cols[i] = i;
  FpPoly f = det(m, rows, cols);
  f.resize(static_cast<size_t>(d) + 1, 0);
  return f;
}

/// Rabin irreducibility test for a monic polynomial over F_p.
bool fp_irreducible(const FpPoly& f, uint64_t p) {
  int d = static_cast<int>(f.size()) - 1;
  if (d <= 0) return false;
  if (d == 1) return true;
  // x^(p^d) == x mod f
  FpPoly xpd = fp_powmod_x(p, d, f, p);
  FpPoly x = fp_mod({0, 1}, f, p);
  if (xpd != x) return false;
  // gcd(x^(p^(d/e)) - x, f) must be constant for every prime e | d
  std::vector<int> prime_divs;
  int rest = d;
  for (int e = 2; e <= rest; ++e)
    if (rest % e == 0) {
      prime_divs.push_back(e);
      while (rest % e == 0) rest /= e;
    }
  for (int e : prime_divs) {
    FpPoly xk = fp_powmod_x(p, d / e, f, p);
    // xk - x
    FpPoly diff = xk;
    if (diff.size() < 2) diff.resize(2, 0);
    diff[1] = (diff[1] + p - 1) % p;
    fp_trim(diff);
    FpPoly g = fp_gcd(f, diff, p);
    if (g.size() > 1) return false;
  }
  return true;
}

/// Rank of the lower-left g x g block of a 2g x 2g matrix mod p;
/// <J, gamma J> spans F_p^{2g} exactly when this block is invertible.
bool lagrangian_spans(const ModMatrix& g, int genus) {
  const uint64_t p = g.modulus();
  const int n = genus;
  std::vector<uint64_t> block(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) block[static_cast<size_t>(i) * n + j] = g.at(genus + i, j);
  int rank = 0;
  for (int col = 0; col < n && rank < n; ++col) {
    int pivot = -1;
    for (int row = rank; row < n; ++row)
      if (block[static_cast<size_t>(row) * n + col] != 0) {
        pivot = row;
        break;
      }
    if (pivot < 0) continue;
    for (int j = 0; j < n; ++j)
      std::swap(block[static_cast<size_t>(pivot) * n + j],
                block[static_cast<size_t>(rank) * n + j]);
    uint64_t inv = fp_inv(block[static_cast<size_t>(rank) * n + col], p);
    for (int row = 0; row < n; ++row) {
      if (row == rank) continue;
      uint64_t factor = mulmod_u64(block[static_cast<size_t>(row) * n + col], inv, p);
      if (factor == 0) continue;
      for (int j = 0; j < n; ++j) {
        uint64_t sub = mulmod_u64(factor, block[static_cast<size_t>(rank) * n + j], p);
        auto& cell = block[static_cast<size_t>(row) * n + j];
        cell = (cell + p - sub) % p;
      }
    }
    ++rank;
  }
  return rank == genus;
}

bool is_square_mod(uint64_t x, uint64_t p) {
  if (p == 2) return true;  // both residues are squares mod 2
  x %= p;
  if (x == 0) return true;  // 0 counts as a square
  return powmod_u64(x, (p - 1) / 2, p) == 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// OmegaSet / SieveFamily

std::string_view family_kind_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::PolyZero: return "poly_zero";
    case FamilyKind::NonSquareEntry: return "non_square_entry";
    case FamilyKind::IrreducibleCharPoly: return "irreducible_char_poly";
    case FamilyKind::LagrangianSpan: return "lagrangian_span";
    case FamilyKind::Explicit: return "explicit";
  }
  return "unknown";
}

bool OmegaSet::contains_code(uint64_t code) const {
  if (!materialized) throw Error("omega set for p=" + std::to_string(p) + " is count-only");
  return std::binary_search(codes.begin(), codes.end(), code);
}

SieveFamily SieveFamily::poly_zero(PolynomialFunction f) {
  SieveFamily fam;
  fam.kind_ = FamilyKind::PolyZero;
  fam.poly_ = std::move(f);
  return fam;
}

SieveFamily SieveFamily::non_square_entry(int i, int j) {
  SieveFamily fam;
  fam.kind_ = FamilyKind::NonSquareEntry;
  fam.entry_i_ = i;
  fam.entry_j_ = j;
  return fam;
}

SieveFamily SieveFamily::irreducible_char_poly() {
  SieveFamily fam;
  fam.kind_ = FamilyKind::IrreducibleCharPoly;
  return fam;
}

SieveFamily SieveFamily::lagrangian_span(int genus) {
  if (genus < 1) throw FamilyMismatch("genus must be positive");
  SieveFamily fam;
  fam.kind_ = FamilyKind::LagrangianSpan;
  fam.genus_ = genus;
  return fam;
}

SieveFamily SieveFamily::explicit_sets(std::map<uint64_t, OmegaSet> omegas) {
  SieveFamily fam;
  fam.kind_ = FamilyKind::Explicit;
  fam.omegas_ = std::move(omegas);
  return fam;
}

const PolynomialFunction& SieveFamily::poly() const {
  if (!poly_) throw Error("family carries no polynomial");
  return *poly_;
}

std::string SieveFamily::describe() const {
  switch (kind_) {
    case FamilyKind::PolyZero: return "poly_zero(" + poly().name() + ")";
    case FamilyKind::NonSquareEntry:
      return "non_square_entry(" + std::to_string(entry_i_) + "," + std::to_string(entry_j_) + ")";
    case FamilyKind::IrreducibleCharPoly: return "irreducible_char_poly";
    case FamilyKind::LagrangianSpan: return "lagrangian_span(g=" + std::to_string(genus_) + ")";
    case FamilyKind::Explicit: return "explicit";
  }
  return "unknown";
}

bool SieveFamily::element_in_omega(const ModMatrix& g) const {
  switch (kind_) {
    case FamilyKind::PolyZero:
      return poly().eval(g) == 0;
    case FamilyKind::NonSquareEntry:
      return !is_square_mod(g.at(entry_i_, entry_j_), g.modulus());
    case FamilyKind::IrreducibleCharPoly:
      return fp_irreducible(char_poly(g), g.modulus());
    case FamilyKind::LagrangianSpan:
      if (g.dim() != 2 * genus_)
        throw FamilyMismatch("lagrangian family genus does not match matrix dimension");
      return lagrangian_spans(g, genus_);
    case FamilyKind::Explicit: {
      const OmegaSet* o = find(g.modulus());
      if (!o) throw Error("explicit family has no set for p=" + std::to_string(g.modulus()));
      return o->contains_code(g.encode());
    }
  }
  return false;
}

const OmegaSet& SieveFamily::build_from_quotient(const FiniteQuotient& q) {
  if (q.tracks() != 1) throw Error("omega sets are built one prime at a time");
  uint64_t p = q.primes()[0];
  auto it = omegas_.find(p);
  if (it != omegas_.end() && it->second.materialized) return it->second;
  if (kind_ == FamilyKind::LagrangianSpan) {
    if (q.spec().ambient != Ambient::Symplectic)
      throw FamilyMismatch("lagrangian family requires a symplectic group");
    if (q.spec().rank != 2 * genus_)
      throw FamilyMismatch("lagrangian family genus does not match group rank");
  }
  if (kind_ == FamilyKind::PolyZero && poly().rank() != q.spec().rank)
    throw FamilyMismatch("polynomial rank does not match group rank");

  OmegaSet omega;
  omega.p = p;
  omega.group_order = q.order();
  omega.materialized = true;
  for (uint64_t e = 0; e < q.order(); ++e) {
    ModMatrix m = q.matrix_of(static_cast<uint32_t>(e), 0);
    if (element_in_omega(m)) omega.codes.push_back(q.code_of(static_cast<uint32_t>(e), 0));
  }
  std::sort(omega.codes.begin(), omega.codes.end());
  omega.density = {omega.codes.size(), q.order()};
  return omegas_[p] = std::move(omega);
}

const OmegaSet& SieveFamily::build_by_census(uint64_t p, bool materialize,
                                             uint64_t stream_budget) {
  auto it = omegas_.find(p);
  if (it != omegas_.end() && (it->second.materialized || !materialize)) return it->second;
  if (!is_prime_u64(p)) throw NotPrime("census modulus " + std::to_string(p) + " is not prime");
  if (kind_ == FamilyKind::Explicit) throw Error("explicit families cannot run a census");
  if (kind_ == FamilyKind::LagrangianSpan && genus_ != 1)
    throw FamilyMismatch("SL_2 census covers genus 1 only");

  OmegaSet omega;
  omega.p = p;
  omega.group_order = classical_group_order(Ambient::SpecialLinear, 2, p);
  uint64_t count = 0;

  // Fast exact path for polynomials in the diagonal entries: enumerate
  // (a, d) and weight by the number of (b, c) completions of ad - bc = 1.
  if (!materialize && kind_ == FamilyKind::PolyZero && poly().diagonal_only()) {
    ModMatrix m(2, p);
    for (uint64_t a = 0; a < p; ++a) {
      m.at(0, 0) = a;
      for (uint64_t d = 0; d < p; ++d) {
        m.at(1, 1) = d;
        if (poly().eval(m) != 0) continue;
        uint64_t t = (mulmod_u64(a, d, p) + p - 1) % p;  // bc = ad - 1
        count += (t == 0) ? 2 * p - 1 : p - 1;
      }
    }
    omega.density = {count, omega.group_order};
    omega.materialized = false;
    return omegas_[p] = std::move(omega);
  }

  unsigned __int128 volume = static_cast<unsigned __int128>(p) * p * p;
  if (volume > stream_budget)
    throw CapExceeded("census stream p^3 exceeds budget " + std::to_string(stream_budget),
                      stream_budget);

  std::vector<uint64_t> inv(p, 0);
  for (uint64_t x = 1; x < p; ++x) inv[x] = fp_inv(x, p);

  ModMatrix m(2, p);
  auto visit = [&](uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    m.at(0, 0) = a;
    m.at(0, 1) = b;
    m.at(1, 0) = c;
    m.at(1, 1) = d;
    if (element_in_omega(m)) {
      ++count;
      if (materialize) omega.codes.push_back(m.encode());
    }
  };
  for (uint64_t a = 1; a < p; ++a)
    for (uint64_t b = 0; b < p; ++b)
      for (uint64_t c = 0; c < p; ++c)
        visit(a, b, c, mulmod_u64((1 + mulmod_u64(b, c, p)) % p, inv[a], p));
  for (uint64_t b = 1; b < p; ++b)
    for (uint64_t d = 0; d < p; ++d)
      visit(0, b, (p - inv[b]) % p, d);

  std::sort(omega.codes.begin(), omega.codes.end());
  omega.density = {count, omega.group_order};
  omega.materialized = materialize;
  return omegas_[p] = std::move(omega);
}

const OmegaSet* SieveFamily::find(uint64_t p) const {
  auto it = omegas_.find(p);
  return it == omegas_.end() ? nullptr : &it->second;
}

void SieveFamily::insert(OmegaSet omega) {
  uint64_t p = omega.p;
  omegas_[p] = std::move(omega);
}

void ensure_omegas(SieveFamily& family, const GroupSpec& spec, std::span<const uint64_t> primes,
                   bool materialize, uint64_t enum_limit, uint64_t cap) {
  for (uint64_t p : primes) {
    const OmegaSet* have = family.find(p);
    if (have && (have->materialized || !materialize)) continue;
    if (spec.exceptional_primes.count(p))
      throw Error("prime " + std::to_string(p) + " is exceptional for this group");
    bool census_ok = spec.rank == 2 && family.kind() != FamilyKind::Explicit;
    uint64_t full_order = census_ok ? classical_group_order(Ambient::SpecialLinear, 2, p) : 0;
    // Count-only requests stream the census whenever the quotient is the
    // full SL_2(F_p); materialized sets prefer the enumerated quotient while
    // it is small (experiments reuse those quotients anyway).
    if (census_ok && (!materialize || full_order > enum_limit)) {
      family.build_by_census(p, materialize);
    } else {
      FiniteQuotient q = enumerate_quotient(spec, {p}, cap);
      family.build_from_quotient(q);
    }
  }
}

// ---------------------------------------------------------------------------
// Dimension profile

LinearFit least_squares_fit(std::span<const double> x, std::span<const double> y) {
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  return fit;
}

DimensionReport kappa_profile(SieveFamily& family, const GroupSpec& spec, uint64_t lo,
                              uint64_t hi, uint64_t cap) {
  DimensionReport rep;
  for (uint64_t p : primes_in_range(lo, hi)) {
    if (spec.exceptional_primes.count(p)) continue;
    rep.primes.push_back(p);
  }
  ensure_omegas(family, spec, rep.primes, /*materialize=*/false, 50'000, cap);
  double partial = 0.0;
  double kappa_sum = 0.0;
  std::vector<double> logx;
  for (uint64_t p : rep.primes) {
    const OmegaSet* o = family.find(p);
    double delta = o->density.value();
    rep.delta_p.push_back(o->density);
    rep.kappa_p.push_back(static_cast<double>(p) * delta);
    kappa_sum += rep.kappa_p.back();
    partial += delta * std::log(static_cast<double>(p));
    rep.partial_sums.push_back(partial);
    logx.push_back(std::log(static_cast<double>(p)));
  }
  if (!rep.primes.empty()) {
    LinearFit fit = least_squares_fit(logx, rep.partial_sums);
    rep.kappa_fit = fit.slope;
    rep.fit_intercept = fit.intercept;
    rep.fit_rms_residual = fit.rms_residual;
    rep.kappa_running_avg = kappa_sum / static_cast<double>(rep.primes.size());
  }
  return rep;
}

LagrangianFormulaCheck lagrangian_formula_check(int genus, uint64_t p, const Rational& density) {
  LagrangianFormulaCheck check;
  check.p = p;
  check.measured = density.value();
  double prod = 1.0;
  for (int j = 1; j <= genus; ++j)
    prod *= 1.0 / (1.0 + std::pow(static_cast<double>(p), -static_cast<double>(j)));
  check.displayed = 1.0 - prod;
  check.discrepant = std::fabs(check.measured - check.displayed) > 1e-12;
  return check;
}

// ---------------------------------------------------------------------------
// Sifting

SiftedSetSpec::SiftedSetSpec(const SieveFamily& family, std::vector<uint64_t> primes,
                             const WalkConfig& cfg)
    : family_(&family), primes_(std::move(primes)) {
  std::sort(primes_.begin(), primes_.end());
  for (uint64_t p : primes_) {
    if (cfg.spec.exceptional_primes.count(p))
      throw Error("prime " + std::to_string(p) + " is exceptional for this group");
    const OmegaSet* o = family_->find(p);
    if (!o || !o->materialized)
      throw Error("omega set for prime " + std::to_string(p) + " is not materialized");
    auto it = std::find(cfg.tracked_primes.begin(), cfg.tracked_primes.end(), p);
    if (it == cfg.tracked_primes.end())
      throw Error("sieve prime " + std::to_string(p) + " is not tracked by the walk");
    track_of_prime_.push_back(static_cast<size_t>(it - cfg.tracked_primes.begin()));
  }
}

uint32_t SiftedSetSpec::omega_hits(const WalkSample& sample, uint64_t q_limit) const {
  uint32_t hits = 0;
  for (size_t i = 0; i < primes_.size(); ++i) {
    uint64_t p = primes_[i];
    if (q_limit && p > q_limit) break;  // primes_ ascending
    const OmegaSet* o = family_->find(p);
    if (o->contains_code(sample.residues[track_of_prime_[i]].encode())) ++hits;
  }
  return hits;
}

// ---------------------------------------------------------------------------
// Bounded sieve

BoundedSieveReport bounded_sieve_experiment(const FiniteQuotient& q, SieveFamily& family,
                                            int n_max, double tol, int workers) {
  BoundedSieveReport rep;
  rep.primes = q.primes();
  ensure_omegas(family, q.spec(), rep.primes, /*materialize=*/true);
  double limit = 1.0;
  for (uint64_t p : rep.primes) {
    const OmegaSet* o = family.find(p);
    rep.delta_p.push_back(o->density);
    limit *= 1.0 - o->density.value();
  }
  rep.limit = limit;

  std::vector<uint8_t> sifted(q.order(), 1);
  for (uint64_t e = 0; e < q.order(); ++e)
    for (size_t t = 0; t < q.tracks(); ++t)
      if (family.find(q.primes()[t])->contains_code(q.code_of(static_cast<uint32_t>(e), t))) {
        sifted[e] = 0;
        break;
      }

  rep.spectrum = spectral_radius(q, tol, 100000, workers);
  if (!rep.spectrum.converged)
    throw NoConvergence("spectral radius did not converge", rep.spectrum.spectral_radius,
                        rep.spectrum.residual);

  DistributionVector dist = point_mass(q, q.identity_index());
  std::vector<double> scratch(q.order());
  double bound = static_cast<double>(q.order());
  for (int n = 0; n <= n_max; ++n) {
    double mu = detail::chunked_sum(q.order(), detail::kChunk, workers, [&](uint64_t i) {
      return sifted[i] ? dist.values[i] : 0.0;
    });
    BoundedSieveRow row;
    row.n = n;
    row.mu_exact = mu;
    row.bound = bound;
    row.pass = std::fabs(mu - limit) <= bound;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
    bound *= rep.spectrum.spectral_radius;
    markov_apply(q, dist.values, scratch, workers);
    dist.values.swap(scratch);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Small sieve

namespace {

uint64_t batch_seed(uint64_t master, int n, uint64_t tag) {
  return splitmix64(master ^ splitmix64(static_cast<uint64_t>(n) * 0x9e37 + tag));
}

}  // namespace

SmallSieveReport small_sieve_experiment(const WalkConfig& cfg, SieveFamily& family,
                                        double a_base, int n_lo, int n_hi, int n_step,
                                        double kappa) {
  if (a_base <= 1.0) throw Error("growth base A must exceed 1");
  if (n_lo < 1 || n_hi < n_lo || n_step < 1) throw Error("bad n grid");
  SmallSieveReport rep;
  rep.a_base = a_base;
  rep.kappa = kappa;

  double q_max = std::pow(a_base, n_hi);
  std::vector<uint64_t> window;
  for (uint64_t p : cfg.tracked_primes)
    if (static_cast<double>(p) <= q_max && !cfg.spec.exceptional_primes.count(p))
      window.push_back(p);
  std::sort(window.begin(), window.end());
  ensure_omegas(family, cfg.spec, window, /*materialize=*/true);
  SiftedSetSpec sift(family, window, cfg);

  std::vector<double> log_n, log_est;
  for (int n = n_lo; n <= n_hi; n += n_step) {
    double q_n = std::pow(a_base, n);
    WalkConfig batch = cfg;
    batch.length = n;
    batch.master_seed = batch_seed(cfg.master_seed, n, 0x536d);
    uint64_t nchunks = (batch.samples + 4095) / 4096;
    std::vector<uint64_t> hits_by_chunk(nchunks, 0);
    for_each_walk_sample(batch, [&](const WalkSample& s) {
      if (sift.omega_hits(s, static_cast<uint64_t>(q_n)) == 0) ++hits_by_chunk[s.index / 4096];
    });
    uint64_t hits = 0;
    for (uint64_t h : hits_by_chunk) hits += h;
    DensityEstimate est = wilson_interval(hits, batch.samples, batch.master_seed);

    SmallSieveRow row;
    row.n = n;
    row.q_window = q_n;
    row.window_size = 0;
    row.heuristic_product = 1.0;
    for (uint64_t p : window) {
      if (static_cast<double>(p) > q_n) break;
      ++row.window_size;
      row.heuristic_product *= 1.0 - family.find(p)->density.value();
    }
    row.hits = hits;
    row.estimate = est.estimate;
    row.ci_low = est.ci_low;
    row.ci_high = est.ci_high;
    rep.rows.push_back(row);
    if (est.estimate > 0) {
      log_n.push_back(std::log(static_cast<double>(n)));
      log_est.push_back(std::log(est.estimate));
    }
  }
  rep.loglog_fit = least_squares_fit(log_n, log_est);
  return rep;
}

// ---------------------------------------------------------------------------
// Large sieve

double default_large_sieve_base(const GroupSpec& spec, int n_hi, uint64_t p_start,
                                uint64_t cap) {
  if (n_hi < 1) throw Error("n_hi must be positive");
  uint64_t best = 0, prev_order = 0;
  uint64_t candidate = p_start;
  for (;;) {
    while (!is_prime_u64(candidate)) ++candidate;
    if (spec.exceptional_primes.count(candidate)) {
      ++candidate;
      continue;
    }
    uint64_t order;
    try {
      order = classical_group_order(spec.ambient, spec.rank, candidate);
    } catch (const Error&) {
      break;
    }
    if (order > cap) break;
    if (prev_order && static_cast<unsigned __int128>(order) * prev_order > cap) break;
    best = candidate;
    prev_order = order;
    ++candidate;
  }
  if (best == 0) throw Error("no feasible sieve prime under the cap");
  uint64_t next = best + 1;
  while (!is_prime_u64(next)) ++next;
  double midpoint = (static_cast<double>(best) + static_cast<double>(next)) / 2.0;
  return std::pow(midpoint, 1.0 / static_cast<double>(n_hi));
}

LargeSieveReport large_sieve_experiment(const WalkConfig& cfg, SieveFamily& family,
                                        double a_base, int n_lo, int n_hi, double delta_floor,
                                        uint64_t p_start, uint64_t pair_rho_limit,
                                        uint64_t cap) {
  if (a_base <= 1.0) throw Error("growth base A must exceed 1");
  if (n_lo < 0 || n_hi < n_lo) throw Error("bad n range");
  LargeSieveReport rep;
  rep.a_base = a_base;
  rep.delta_floor = delta_floor;

  double q_max = std::pow(a_base, n_hi);
  std::vector<uint64_t> window;
  for (uint64_t p : cfg.tracked_primes)
    if (p >= p_start && static_cast<double>(p) <= q_max &&
        !cfg.spec.exceptional_primes.count(p))
      window.push_back(p);
  std::sort(window.begin(), window.end());
  if (window.empty()) throw Error("large sieve window contains no primes");
  rep.window_primes = window;

  ensure_omegas(family, cfg.spec, window, /*materialize=*/true);
  for (uint64_t p : window) {
    const OmegaSet* o = family.find(p);
    rep.delta_p.push_back(o->density);
    if (o->density.value() < delta_floor)
      throw Error("family is not large at prime " + std::to_string(p) +
                  ": density " + std::to_string(o->density.value()) + " < floor " +
                  std::to_string(delta_floor));
  }
  SiftedSetSpec sift(family, window, cfg);

  // Single-prime quotients, omega masks, exact mass trajectories.
  const size_t nw = window.size();
  std::vector<FiniteQuotient> singles;
  singles.reserve(nw);
  std::vector<std::vector<uint8_t>> masks(nw);
  std::vector<std::vector<double>> mass(nw);  // mass[i][n]
  for (size_t i = 0; i < nw; ++i) {
    singles.push_back(enumerate_quotient(cfg.spec, {window[i]}, cap));
    const FiniteQuotient& q = singles.back();
    const OmegaSet* o = family.find(window[i]);
    masks[i].assign(q.order(), 0);
    for (uint64_t e = 0; e < q.order(); ++e)
      masks[i][e] = o->contains_code(q.code_of(static_cast<uint32_t>(e), 0)) ? 1 : 0;
    DistributionVector dist = point_mass(q, q.identity_index());
    std::vector<double> scratch(q.order());
    std::vector<double>& traj = mass[i];
    for (int n = 0; n <= n_hi; ++n) {
      double m = 0;
      for (uint64_t e = 0; e < q.order(); ++e)
        if (masks[i][e]) m += dist.values[e];
      traj.push_back(m);
      markov_apply(q, dist.values, scratch, cfg.workers);
      dist.values.swap(scratch);
    }
  }

  // Pairwise independence (Goursat) and exact pair correlations.
  std::vector<std::vector<std::vector<double>>> w_abs(nw);  // w_abs[i][j<i][n]
  for (size_t i = 0; i < nw; ++i) {
    w_abs[i].resize(i);
    for (size_t j = 0; j < i; ++j) {
      uint64_t product = singles[i].order() * singles[j].order();
      if (product > cap)
        throw CapExceeded("pair quotient " + std::to_string(window[j]) + "," +
                              std::to_string(window[i]) + " exceeds cap",
                          cap);
      IndependenceResult ind = independence_check(cfg.spec, window[j], window[i], cap);
      if (!ind.independent)
        throw Error("independence fails for pair (" + std::to_string(window[j]) + "," +
                    std::to_string(window[i]) + ")");
      std::vector<double> joint = product_walk_masses(singles[i], singles[j], masks[i],
                                                      masks[j], n_hi, cfg.workers);
      std::vector<double>& w = w_abs[i][j];
      w.resize(static_cast<size_t>(n_hi) + 1);
      for (int n = 0; n <= n_hi; ++n)
        w[n] = std::fabs(joint[n] - mass[i][n] * mass[j][n]);
    }
  }

  // Spectral radii: all singles, pairs up to the product budget.
  rep.rho_bar = 0.0;
  for (size_t i = 0; i < nw; ++i) {
    SpectrumReport sr = spectral_radius(singles[i], 1e-8, 100000, cfg.workers);
    rep.rho_bar = std::max(rep.rho_bar, sr.spectral_radius);
  }
  for (size_t i = 0; i < nw; ++i)
    for (size_t j = 0; j < i; ++j) {
      if (singles[i].order() * singles[j].order() > pair_rho_limit) continue;
      SpectrumReport sr =
          product_spectral_radius(singles[i], singles[j], 1e-8, 100000, cfg.workers);
      rep.rho_bar = std::max(rep.rho_bar, sr.spectral_radius);
      rep.rho_pairs_measured.push_back({window[j], window[i]});
    }

  // Per-n rows: Monte Carlo estimate plus the exact Chebyshev assembly.
  for (int n = n_lo; n <= n_hi; ++n) {
    double q_n = std::pow(a_base, n);
    LargeSieveRow row;
    row.n = n;
    row.q_window = q_n;
    row.window_size = 0;
    row.expected_x = 0.0;
    row.sum_delta = 0.0;
    row.max_abs_w = 0.0;
    for (size_t i = 0; i < nw; ++i) {
      if (static_cast<double>(window[i]) > q_n) break;
      ++row.window_size;
      row.expected_x += mass[i][n];
      row.sum_delta += family.find(window[i])->density.value();
      for (size_t j = 0; j < i; ++j)
        row.max_abs_w = std::max(row.max_abs_w, w_abs[i][j][n]);
    }
    row.var_bound = q_n + q_n * q_n * row.max_abs_w;
    row.cheb_bound = row.expected_x > 0
                         ? row.var_bound / (row.expected_x * row.expected_x)
                         : std::numeric_limits<double>::infinity();

    WalkConfig batch = cfg;
    batch.length = n;
    batch.master_seed = batch_seed(cfg.master_seed, n, 0x4c61);
    uint64_t nchunks = (batch.samples + 4095) / 4096;
    std::vector<uint64_t> hits_by_chunk(nchunks, 0);
    for_each_walk_sample(batch, [&](const WalkSample& s) {
      if (sift.omega_hits(s, static_cast<uint64_t>(q_n)) == 0) ++hits_by_chunk[s.index / 4096];
    });
    uint64_t hits = 0;
    for (uint64_t h : hits_by_chunk) hits += h;
    row.hits = hits;
    row.estimate = static_cast<double>(hits) / static_cast<double>(batch.samples);
    row.std_error =
        std::sqrt(row.estimate * (1.0 - row.estimate) / static_cast<double>(batch.samples));
    row.pass = row.estimate <= row.cheb_bound + 3.0 * row.std_error;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : rep.rows)
    if (row.estimate > 0) {
      xs.push_back(static_cast<double>(row.n));
      ys.push_back(std::log(row.estimate));
    }
  rep.decay_fit = least_squares_fit(xs, ys);
  int b_exponent = cfg.spec.rank * cfg.spec.rank;
  rep.proof_constraint =
      std::pow(q_max, 2.0 + 2.0 * b_exponent) * std::pow(rep.rho_bar, n_hi);
  return rep;
}

// ---------------------------------------------------------------------------
// Classical baseline

BaselineReport classical_integer_sieve(uint64_t n_limit, uint64_t q_limit,
                                       const std::vector<int64_t>& shifts) {
  if (n_limit < 2 || q_limit < 2) throw Error("baseline needs N, Q >= 2");
  if (shifts.empty()) throw Error("baseline needs at least one shift");
  BaselineReport rep;
  rep.n_limit = n_limit;
  rep.q_limit = q_limit;
  rep.shifts = shifts;

  GroupSpec zline = preset_integer_line();
  // f(g) = prod_s (g_{0,1} + s); its zeros mod p are the residues -s.
  PolynomialFunction f = PolynomialFunction::constant(2, 1);
  for (int64_t s : shifts) {
    PolynomialFunction factor =
        PolynomialFunction::entry(2, 0, 1) + PolynomialFunction::constant(2, s);
    f = f * factor;
  }
  SieveFamily family = SieveFamily::poly_zero(std::move(f));

  std::vector<uint64_t> primes = primes_in_range(2, q_limit);
  // Residue membership tables through the generic quotient path.
  std::vector<std::vector<uint8_t>> forbidden(primes.size());
  for (size_t i = 0; i < primes.size(); ++i) {
    uint64_t p = primes[i];
    FiniteQuotient q = enumerate_quotient(zline, {p});
    if (q.order() != p) throw Error("integer-line quotient has unexpected order");
    const OmegaSet& omega = family.build_from_quotient(q);
    forbidden[i].assign(p, 0);
    for (uint64_t j = 0; j < p; ++j) {
      ModMatrix m = ModMatrix::identity(2, p);
      m.at(0, 1) = j;
      forbidden[i][j] = omega.contains_code(m.encode()) ? 1 : 0;
    }
  }

  std::vector<uint64_t> residue(primes.size(), 0);
  for (uint64_t n = 1; n <= n_limit; ++n) {
    bool survives = true;
    for (size_t i = 0; i < primes.size(); ++i) {
      residue[i] = (residue[i] + 1) % primes[i];  // n mod p
      if (forbidden[i][residue[i]]) survives = false;
    }
    if (survives) rep.survivors.push_back(n);
  }
  return rep;
}

int almost_prime_bound(const WalkSample& sample, const PolynomialFunction& f, uint64_t q_limit,
                       bool* unit) {
  if (!sample.exact) throw Error("almost-prime bound needs an exact-tracked sample");
  if (q_limit < 2) throw Error("Q must be at least 2");
  BigInt v = f.eval(*sample.exact);
  if (v == 0) throw ZeroValue("f(gamma_n) = 0 has no factor count");
  BigInt a = abs(v);
  if (unit) *unit = (a == 1);
  if (a == 1) return 0;
  // Largest k with Q^k <= |v|; all prime factors exceed Q for sifted samples.
  int k = 0;
  BigInt power(q_limit);
  while (power <= a) {
    ++k;
    power *= q_limit;
  }
  return k;
}

}  // namespace gsieve
