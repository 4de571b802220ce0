#include "gsieve/ekstats.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "gsieve/rng.hpp"
#include "parallel.hpp"

namespace gsieve {

void EKConfig::validate() const {
  walk.validate();
  if (!family || family->kind() != FamilyKind::PolyZero)
    throw Error("erdos-kac runs need a poly_zero family");
  if (walk.length < 2) throw Error("erdos-kac statistic needs n >= 2");
  if (q_truncation < 2) throw Error("truncation Q must be at least 2");
  if (kappa <= 0) throw Error("kappa must be positive");
  for (uint64_t p : walk.tracked_primes) {
    if (p > q_truncation) continue;
    const OmegaSet* o = family->find(p);
    if (!o || !o->materialized)
      throw Error("omega set for tracked prime " + std::to_string(p) + " is missing");
  }
}

uint32_t truncated_omega(const WalkSample& sample, const SieveFamily& family,
                         const WalkConfig& cfg, uint64_t q_truncation) {
  uint32_t count = 0;
  for (size_t t = 0; t < cfg.tracked_primes.size(); ++t) {
    uint64_t p = cfg.tracked_primes[t];
    if (p > q_truncation) continue;
    if (cfg.spec.exceptional_primes.count(p)) continue;
    const OmegaSet* o = family.find(p);
    if (!o || !o->materialized)
      throw Error("omega set for tracked prime " + std::to_string(p) + " is missing");
    if (o->contains_code(sample.residues[t].encode())) ++count;
  }
  return count;
}

namespace {

// Upper estimate of A2 = omega(f(gamma_n)) - truncated count: divide out all
// primes <= Q, then count the rough cofactor exactly when it is 1 or a
// (probable) prime, and otherwise bound it by log |rough| / log(next prime
// above Q). Primes <= Q that are untracked (exceptional) enter the estimate
// through trial division, exactly.
struct A2Estimate {
  double upper = 0.0;
  bool exact = false;
};

A2Estimate a2_upper_estimate(const BigInt& value, const WalkConfig& cfg, uint64_t q_truncation) {
  A2Estimate est;
  BigInt rough = abs(value);
  if (rough == 0) throw ZeroValue("A2 undefined for f = 0");
  uint32_t untracked_small = 0;
  for (uint64_t p : primes_in_range(2, q_truncation)) {
    bool tracked = std::find(cfg.tracked_primes.begin(), cfg.tracked_primes.end(), p) !=
                   cfg.tracked_primes.end();
    bool divides = mpz_divisible_ui_p(rough.get_mpz_t(), p) != 0;
    if (divides) {
      if (!tracked || cfg.spec.exceptional_primes.count(p)) ++untracked_small;
      while (mpz_divisible_ui_p(rough.get_mpz_t(), p))
        mpz_divexact_ui(rough.get_mpz_t(), rough.get_mpz_t(), p);
    }
  }
  if (rough == 1) {
    est.upper = untracked_small;
    est.exact = true;
    return est;
  }
  if (mpz_probab_prime_p(rough.get_mpz_t(), 32) > 0) {
    est.upper = untracked_small + 1;
    est.exact = true;
    return est;
  }
  uint64_t next = q_truncation + 1;
  while (!is_prime_u64(next)) ++next;
  int k = 0;
  BigInt power(static_cast<unsigned long>(next));
  while (power <= rough) {
    ++k;
    power *= static_cast<unsigned long>(next);
  }
  est.upper = untracked_small + k;
  est.exact = false;
  return est;
}

}  // namespace

EKBatchReport ek_statistic_batch(const EKConfig& cfg) {
  cfg.validate();
  EKBatchReport rep;
  const double center = cfg.kappa * std::log(static_cast<double>(cfg.walk.length));
  const double scale = std::sqrt(center);

  double sum_delta = 0.0;
  for (uint64_t p : cfg.walk.tracked_primes) {
    if (p > cfg.q_truncation || cfg.walk.spec.exceptional_primes.count(p)) continue;
    sum_delta += cfg.family->find(p)->density.value();
  }
  rep.a3 = sum_delta - center;
  rep.a2_bound = std::log(cfg.growth_c) / std::log(cfg.a_base);

  rep.stats.resize(cfg.walk.samples);
  std::mutex mtx;
  std::vector<std::string> ambiguity;  // deferred so workers do not throw
  for_each_walk_sample(cfg.walk, [&](const WalkSample& s) {
    EKSampleStat stat;
    stat.index = s.index;
    stat.truncated_count = truncated_omega(s, *cfg.family, cfg.walk, cfg.q_truncation);
    double omega_f = stat.truncated_count;
    if (s.exact) {
      BigInt v = cfg.family->poly().eval(*s.exact);
      if (v == 0) {
        stat.value_is_zero = true;
        omega_f = 0.0;  // omega_f(gamma_n) = 0 when f(gamma_n) = 0
      } else {
        A2Estimate a2 = a2_upper_estimate(v, cfg.walk, cfg.q_truncation);
        stat.a2_upper = a2.upper;
        stat.a2_exact = a2.exact;
      }
    } else {
      // Without the exact value, all residues vanishing is indistinguishable
      // from f = 0; surface it instead of guessing.
      size_t counted = 0, vanished = 0;
      for (size_t t = 0; t < cfg.walk.tracked_primes.size(); ++t) {
        uint64_t p = cfg.walk.tracked_primes[t];
        if (p > cfg.q_truncation || cfg.walk.spec.exceptional_primes.count(p)) continue;
        ++counted;
        if (cfg.family->poly().eval(s.residues[t]) == 0) ++vanished;
      }
      if (counted > 0 && vanished == counted) {
        std::lock_guard<std::mutex> lock(mtx);
        ambiguity.push_back("sample " + std::to_string(s.index));
      }
    }
    stat.statistic = (omega_f - center) / scale;
    rep.stats[s.index] = stat;
  });
  if (!ambiguity.empty())
    throw ZeroAmbiguity("all tracked residues of f vanish without exact tracking (" +
                        ambiguity.front() + ")");
  for (const auto& stat : rep.stats) {
    if (stat.value_is_zero) ++rep.zero_values;
    rep.max_a2_upper = std::max(rep.max_a2_upper, stat.a2_upper);
  }
  return rep;
}

std::vector<uint32_t> bernoulli_oracle_batch(const std::vector<Rational>& deltas, uint64_t m,
                                             uint64_t seed) {
  // Exact thresholds: Y_p = 1 iff draw < floor(delta_p * 2^64).
  std::vector<uint64_t> thresholds;
  thresholds.reserve(deltas.size());
  for (const Rational& d : deltas) {
    if (d.num > d.den) throw Error("bernoulli probability above 1");
    if (d.num == d.den) {
      thresholds.push_back(UINT64_MAX);
      continue;
    }
    unsigned __int128 scaled = (static_cast<unsigned __int128>(d.num) << 64) / d.den;
    thresholds.push_back(static_cast<uint64_t>(scaled));
  }
  std::vector<uint32_t> out(m, 0);
  detail::for_each_chunk(m, 4096, 1, [&](uint64_t, uint64_t lo, uint64_t hi) {
    for (uint64_t i = lo; i < hi; ++i) {
      uint32_t sum = 0;
      for (size_t k = 0; k < thresholds.size(); ++k) {
        uint64_t draw = counter_rand(seed, i, k);
        if (thresholds[k] == UINT64_MAX || draw < thresholds[k]) ++sum;
      }
      out[i] = sum;
    }
  });
  return out;
}

namespace {

double raw_moment(std::span<const double> xs, int k) {
  double s = 0;
  for (double x : xs) s += std::pow(x, k);
  return s / static_cast<double>(xs.size());
}

double moment_se(std::span<const double> xs, int k) {
  // SE of the empirical k-th raw moment: sqrt(Var(X^k) / m).
  double m1 = 0, m2 = 0;
  for (double x : xs) {
    double v = std::pow(x, k);
    m1 += v;
    m2 += v * v;
  }
  double n = static_cast<double>(xs.size());
  m1 /= n;
  m2 /= n;
  return std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
}

double normal_moment(int k) {
  // E[N(0,1)^k] = 0 for odd k, (k-1)!! for even k.
  if (k % 2 == 1) return 0.0;
  double v = 1.0;
  for (int i = k - 1; i > 1; i -= 2) v *= i;
  return v;
}

double variance_of(std::span<const double> xs) {
  double mean = raw_moment(xs, 1);
  double s = 0;
  for (double x : xs) s += (x - mean) * (x - mean);
  return s / static_cast<double>(xs.size());
}

double variance_se(std::span<const double> xs) {
  // Asymptotic SE of the sample variance: sqrt((mu4 - mu2^2) / m).
  double mean = raw_moment(xs, 1);
  double mu2 = 0, mu4 = 0;
  for (double x : xs) {
    double d = x - mean;
    mu2 += d * d;
    mu4 += d * d * d * d;
  }
  double n = static_cast<double>(xs.size());
  mu2 /= n;
  mu4 /= n;
  return std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / n);
}

}  // namespace

MomentReport distribution_compare(std::span<const double> walk_stream,
                                  std::span<const double> oracle_stream,
                                  std::span<const int> orders) {
  if (walk_stream.empty() || oracle_stream.empty())
    throw Error("distribution comparison needs non-empty streams");
  MomentReport rep;
  for (int k : orders) {
    MomentRow row;
    row.order = k;
    row.walk_moment = raw_moment(walk_stream, k);
    row.oracle_moment = raw_moment(oracle_stream, k);
    double se_w = moment_se(walk_stream, k);
    double se_o = moment_se(oracle_stream, k);
    row.joint_se = std::sqrt(se_w * se_w + se_o * se_o);
    row.delta = row.walk_moment - row.oracle_moment;
    row.normal_target = normal_moment(k);
    rep.rows.push_back(row);
  }
  rep.walk_mean = raw_moment(walk_stream, 1);
  rep.oracle_mean = raw_moment(oracle_stream, 1);
  {
    double se_w = moment_se(walk_stream, 1);
    double se_o = moment_se(oracle_stream, 1);
    rep.mean_joint_se = std::sqrt(se_w * se_w + se_o * se_o);
  }
  rep.walk_variance = variance_of(walk_stream);
  rep.oracle_variance = variance_of(oracle_stream);
  {
    double se_w = variance_se(walk_stream);
    double se_o = variance_se(oracle_stream);
    rep.variance_joint_se = std::sqrt(se_w * se_w + se_o * se_o);
  }
  // Two-sample KS distance.
  std::vector<double> a(walk_stream.begin(), walk_stream.end());
  std::vector<double> b(oracle_stream.begin(), oracle_stream.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::fabs(fa - fb));
  }
  rep.ks_distance = d;
  return rep;
}

}  // namespace gsieve
