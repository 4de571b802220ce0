#include <doctest.h>

#include <cmath>

#include "gsieve/ekstats.hpp"
#include "oracles.hpp"

using namespace gsieve;

namespace {

WalkConfig ek_walk(int n, uint64_t m, uint64_t seed, uint64_t q_max, bool exact) {
  WalkConfig cfg;
  cfg.spec = preset_lubotzky(3, true);
  cfg.length = n;
  cfg.samples = m;
  cfg.master_seed = seed;
  cfg.track_exact = exact;
  cfg.workers = 2;
  for (uint64_t p : primes_in_range(2, q_max))
    if (p != 3) cfg.tracked_primes.push_back(p);
  return cfg;
}

OmegaSet full_omega(uint64_t p, const FiniteQuotient& q) {
  OmegaSet o;
  o.p = p;
  o.group_order = q.order();
  for (uint32_t e = 0; e < q.order(); ++e) o.codes.push_back(q.code_of(e, 0));
  std::sort(o.codes.begin(), o.codes.end());
  o.density = {q.order(), q.order()};
  o.materialized = true;
  return o;
}

}  // namespace

TEST_CASE("truncated omega: zeros everywhere, units nowhere") {
  WalkConfig cfg = ek_walk(2, 1, 0, 13, false);
  SieveFamily prod = SieveFamily::poly_zero(PolynomialFunction::product_of_entries(2));
  ensure_omegas(prod, cfg.spec, cfg.tracked_primes, true);

  WalkSample id;
  for (uint64_t p : cfg.tracked_primes) id.residues.push_back(ModMatrix::identity(2, p));
  // f(1) = 0, divisible by every prime
  CHECK(truncated_omega(id, prod, cfg, 13) == cfg.tracked_primes.size());
  CHECK(truncated_omega(id, prod, cfg, 7) == 3);  // primes 2, 5, 7

  // f = a: value 1 on the identity, so no prime counts
  SieveFamily unit = SieveFamily::poly_zero(PolynomialFunction::entry(2, 0, 0));
  ensure_omegas(unit, cfg.spec, cfg.tracked_primes, true);
  CHECK(truncated_omega(id, unit, cfg, 13) == 0);
}

TEST_CASE("truncated omega agrees with big-integer divisibility") {
  WalkConfig cfg = ek_walk(18, 1000, 42, 13, true);
  SieveFamily fam = SieveFamily::poly_zero(PolynomialFunction::diagonal_squares(2));
  ensure_omegas(fam, cfg.spec, cfg.tracked_primes, true);
  uint64_t seen = 0;
  for_each_walk_sample(cfg, [&](const WalkSample& s) {
    BigInt v = fam.poly().eval(*s.exact);
    uint32_t direct = 0;
    for (uint64_t p : cfg.tracked_primes)
      if (mpz_divisible_ui_p(v.get_mpz_t(), p)) ++direct;
    CHECK(truncated_omega(s, fam, cfg, 13) == direct);
    ++seen;
  });
  CHECK(seen == 1000);
}

TEST_CASE("bernoulli oracle: degenerate and statistical behavior") {
  std::vector<Rational> zeros = {{0, 1}, {0, 5}, {0, 7}};
  for (uint32_t c : bernoulli_oracle_batch(zeros, 500, 1)) CHECK(c == 0);

  std::vector<Rational> ones = {{1, 1}, {5, 5}, {7, 7}};
  for (uint32_t c : bernoulli_oracle_batch(ones, 500, 2)) CHECK(c == 3);

  std::vector<Rational> deltas = {{36, 120}, {6, 336}, {1, 2}};
  double mean_target = 36.0 / 120 + 6.0 / 336 + 0.5;
  const uint64_t m = 1'000'000;
  auto draws = bernoulli_oracle_batch(deltas, m, 3);
  double sum = 0;
  for (uint32_t c : draws) sum += c;
  double mean = sum / static_cast<double>(m);
  double var = 0;
  for (const Rational& d : deltas) var += d.value() * (1 - d.value());
  double se = std::sqrt(var / static_cast<double>(m));
  CHECK(std::fabs(mean - mean_target) <= 4 * se);

  // deterministic in (seed, index)
  auto again = bernoulli_oracle_batch(deltas, 1000, 3);
  for (size_t i = 0; i < again.size(); ++i) CHECK(again[i] == draws[i]);
}

TEST_CASE("distribution_compare: self-comparison and normal targets") {
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(std::sin(i * 0.7) * 2.0);
  std::vector<int> orders = {1, 2, 3, 4};
  MomentReport rep = distribution_compare(xs, xs, orders);
  for (const MomentRow& row : rep.rows) CHECK(row.delta == 0.0);
  CHECK(rep.ks_distance == 0.0);
  CHECK(rep.rows[0].normal_target == 0.0);
  CHECK(rep.rows[1].normal_target == 1.0);
  CHECK(rep.rows[2].normal_target == 0.0);
  CHECK(rep.rows[3].normal_target == 3.0);
  CHECK_THROWS_AS(distribution_compare({}, xs, orders), Error);
}

TEST_CASE("ek statistic: exact centering when the count is forced") {
  // One tracked prime with Omega = the whole quotient forces count = 1;
  // kappa = 1/log 2 at n = 2 centers the statistic at zero.
  GroupSpec l3 = preset_lubotzky(3, true);
  FiniteQuotient q5 = enumerate_quotient(l3, {5});
  SieveFamily full = SieveFamily::explicit_sets({{5, full_omega(5, q5)}});

  EKConfig cfg;
  cfg.walk.spec = l3;
  cfg.walk.length = 2;
  cfg.walk.samples = 64;
  cfg.walk.tracked_primes = {5};
  cfg.walk.track_exact = true;
  cfg.family = &full;
  cfg.q_truncation = 5;
  cfg.kappa = 1.0 / std::log(2.0);
  cfg.a_base = std::sqrt(5.0);
  cfg.growth_c = 32.0;
  EKBatchReport rep = ek_statistic_batch(cfg);
  for (const EKSampleStat& s : rep.stats) {
    if (s.value_is_zero) continue;
    CHECK(s.truncated_count == 1);
    CHECK(s.statistic == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("ek batch: diagnostics within the proof bounds") {
  WalkConfig walk = ek_walk(20, 3000, 2024, 11, true);
  SieveFamily fam = SieveFamily::poly_zero(PolynomialFunction::diagonal_squares(2));
  ensure_omegas(fam, walk.spec, walk.tracked_primes, true);

  EKConfig cfg;
  cfg.walk = walk;
  cfg.family = &fam;
  cfg.q_truncation = 11;
  cfg.kappa = 1.0;
  cfg.a_base = std::pow(11.0, 1.0 / 20.0);
  cfg.growth_c = fam.poly().growth_constant(walk.spec);
  EKBatchReport rep = ek_statistic_batch(cfg);

  double sum_delta = 0;
  for (uint64_t p : walk.tracked_primes) sum_delta += fam.find(p)->density.value();
  CHECK(rep.a3 == doctest::Approx(sum_delta - std::log(20.0)).epsilon(1e-12));
  CHECK(rep.a2_bound == doctest::Approx(std::log(32.0) / std::log(cfg.a_base)));
  CHECK(rep.max_a2_upper <= rep.a2_bound);
  for (const EKSampleStat& s : rep.stats)
    if (!s.value_is_zero) CHECK(s.a2_upper <= rep.a2_bound);
}

TEST_CASE("ek batch: exact zero detection and the ambiguity error") {
  GroupSpec l3 = preset_lubotzky(3, true);
  SieveFamily prod = SieveFamily::poly_zero(PolynomialFunction::product_of_entries(2));
  ensure_omegas(prod, l3, std::vector<uint64_t>{5}, true);

  EKConfig cfg;
  cfg.walk.spec = l3;
  cfg.walk.length = 2;
  cfg.walk.samples = 500;
  cfg.walk.tracked_primes = {5};
  cfg.walk.master_seed = 11;
  cfg.walk.track_exact = true;
  cfg.family = &prod;
  cfg.q_truncation = 5;
  cfg.kappa = 1.0;
  cfg.a_base = std::sqrt(5.0);
  cfg.growth_c = prod.growth_constant(l3);

  EKBatchReport rep = ek_statistic_batch(cfg);
  CHECK(rep.zero_values > 0);  // the identity (and friends) hit f = 0 at n = 2
  double center = std::log(2.0);
  for (const EKSampleStat& s : rep.stats)
    if (s.value_is_zero)
      CHECK(s.statistic == doctest::Approx(-center / std::sqrt(center)));

  // same run without exact tracking: residues of f vanish somewhere with a
  // single tracked prime, which is indistinguishable from f = 0
  cfg.walk.track_exact = false;
  CHECK_THROWS_AS(ek_statistic_batch(cfg), ZeroAmbiguity);
}

TEST_CASE("walk counts track the bernoulli model at moderate n") {
  WalkConfig walk = ek_walk(25, 30000, 777, 11, false);
  SieveFamily fam = SieveFamily::poly_zero(PolynomialFunction::diagonal_squares(2));
  ensure_omegas(fam, walk.spec, walk.tracked_primes, true);

  std::vector<double> counts(walk.samples);
  for_each_walk_sample(walk, [&](const WalkSample& s) {
    counts[s.index] = truncated_omega(s, fam, walk, 11);
  });
  std::vector<Rational> deltas;
  for (uint64_t p : walk.tracked_primes) deltas.push_back(fam.find(p)->density);
  auto oracle_counts = bernoulli_oracle_batch(deltas, walk.samples, 778);
  std::vector<double> oracle(oracle_counts.begin(), oracle_counts.end());

  std::vector<int> orders = {1, 2};
  MomentReport rep = distribution_compare(counts, oracle, orders);
  CHECK(std::fabs(rep.walk_mean - rep.oracle_mean) <= 4 * rep.mean_joint_se);
  CHECK(std::fabs(rep.walk_variance - rep.oracle_variance) <= 4 * rep.variance_joint_se);
  CHECK(rep.ks_distance < 0.05);
}
