#include "gsieve/walker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "gsieve/quotients.hpp"
#include "gsieve/rng.hpp"
#include "parallel.hpp"

namespace gsieve {

void WalkConfig::validate() const {
  spec.validate();
  if (length < 0) throw Error("walk length must be non-negative");
  if (samples < 1) throw Error("sample count must be at least 1");
  std::vector<uint64_t> sorted = tracked_primes;
  std::sort(sorted.begin(), sorted.end());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (!is_prime_u64(sorted[i]))
      throw NotPrime("tracked modulus " + std::to_string(sorted[i]) + " is not prime");
    if (i > 0 && sorted[i] == sorted[i - 1])
      throw Error("duplicate tracked prime " + std::to_string(sorted[i]));
  }
}

void for_each_walk_sample(const WalkConfig& cfg,
                          const std::function<void(const WalkSample&)>& sink) {
  cfg.validate();
  const size_t t = cfg.tracked_primes.size();
  const auto nletters = static_cast<uint32_t>(cfg.spec.generators.size());

  std::vector<std::vector<ModMatrix>> gen_mod(t);
  for (size_t k = 0; k < t; ++k) {
    gen_mod[k].reserve(nletters);
    for (const auto& g : cfg.spec.generators)
      gen_mod[k].push_back(reduce_mod(g, cfg.tracked_primes[k]));
  }

  detail::for_each_chunk(cfg.samples, 4096, cfg.workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
    WalkSample sample;
    ModMatrix scratch(cfg.spec.rank, 2);
    for (uint64_t idx = lo; idx < hi; ++idx) {
      sample.index = idx;
      sample.residues.clear();
      for (size_t k = 0; k < t; ++k)
        sample.residues.push_back(ModMatrix::identity(cfg.spec.rank, cfg.tracked_primes[k]));
      sample.exact.reset();
      if (cfg.track_exact) sample.exact = IntegerMatrix::identity(cfg.spec.rank);
      sample.word.letters.clear();
      for (int step = 0; step < cfg.length; ++step) {
        uint32_t letter =
            uniform_index(counter_rand(cfg.master_seed, idx, static_cast<uint64_t>(step)),
                          nletters);
        if (cfg.keep_words) sample.word.letters.push_back(letter);
        for (size_t k = 0; k < t; ++k) {
          scratch = sample.residues[k];
          scratch.mul_into(gen_mod[k][letter], sample.residues[k]);
        }
        if (cfg.track_exact) *sample.exact = *sample.exact * cfg.spec.generators[letter];
      }
      sink(sample);
    }
  });
}

DensityEstimate wilson_interval(uint64_t hits, uint64_t trials, uint64_t seed) {
  DensityEstimate d;
  d.hits = hits;
  d.trials = trials;
  d.master_seed = seed;
  if (trials == 0) return d;
  const double z = 1.959963984540054;  // 97.5% normal quantile
  double n = static_cast<double>(trials);
  double phat = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (phat + z2 / (2.0 * n)) / denom;
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  d.estimate = phat;
  d.ci_low = hits == 0 ? 0.0 : std::max(0.0, center - half);
  d.ci_high = hits == trials ? 1.0 : std::min(1.0, center + half);
  return d;
}

DensityEstimate estimate_density(const WalkConfig& cfg,
                                 const std::function<bool(const WalkSample&)>& predicate) {
  uint64_t nchunks = (cfg.samples + 4095) / 4096;
  std::vector<uint64_t> hits_by_chunk(nchunks, 0);
  for_each_walk_sample(cfg, [&](const WalkSample& s) {
    if (predicate(s)) ++hits_by_chunk[s.index / 4096];
  });
  uint64_t hits = 0;
  for (uint64_t h : hits_by_chunk) hits += h;
  return wilson_interval(hits, cfg.samples, cfg.master_seed);
}

void stream_samples_csv(const WalkConfig& cfg, std::ostream& os) {
  // Collect per chunk, then emit in index order.
  uint64_t nchunks = (cfg.samples + 4095) / 4096;
  std::vector<std::string> blocks(nchunks);
  std::vector<std::ostringstream> streams(nchunks);
  for_each_walk_sample(cfg, [&](const WalkSample& s) {
    auto& line = streams[s.index / 4096];
    line << s.index;
    for (const auto& m : s.residues) line << "," << m.encode();
    line << "\n";
  });
  os << "index";
  for (uint64_t p : cfg.tracked_primes) os << ",code_mod_" << p;
  os << "\n";
  for (auto& ss : streams) os << ss.str();
}

// ---------------------------------------------------------------------------
// Combinatorial balls

namespace {

uint64_t checked_pow(uint64_t base, int exp, uint64_t budget) {
  uint64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > budget / std::max<uint64_t>(base, 1)) return budget + 1;
    r *= base;
  }
  return r;
}

}  // namespace

BallTable ball_enumerate(const GroupSpec& spec, int radius, BallMode mode,
                         std::span<const uint64_t> tracked_primes, uint64_t word_budget) {
  spec.validate();
  if (radius < 0) throw Error("radius must be non-negative");
  const auto nletters = static_cast<uint32_t>(spec.generators.size());
  uint64_t words = checked_pow(nletters, radius, word_budget);
  if (words > word_budget)
    throw BudgetExceeded("|S|^T exceeds the word budget " + std::to_string(word_budget),
                         word_budget);
  for (uint64_t p : tracked_primes)
    if (!is_prime_u64(p)) throw NotPrime("tracked modulus " + std::to_string(p) + " is not prime");

  BallTable table;
  table.mode = mode;
  table.radius = radius;

  const size_t t = tracked_primes.size();
  const bool need_exact = mode == BallMode::Deduplicated || t == 0;

  std::vector<std::vector<ModMatrix>> gen_mod(t);
  for (size_t k = 0; k < t; ++k)
    for (const auto& g : spec.generators) gen_mod[k].push_back(reduce_mod(g, tracked_primes[k]));

  if (mode == BallMode::WithMultiplicity) {
    // DFS over all words of length exactly `radius`; multiplicity per key.
    struct Level {
      std::vector<ModMatrix> residues;
      IntegerMatrix exact{1};
    };
    std::vector<Level> stack(static_cast<size_t>(radius) + 1);
    for (auto& level : stack) {
      for (size_t k = 0; k < t; ++k)
        level.residues.push_back(ModMatrix::identity(spec.rank, tracked_primes[k]));
      if (need_exact) level.exact = IntegerMatrix::identity(spec.rank);
    }
    std::unordered_map<CodeKey, uint64_t, CodeKeyHash> mult_by_code;
    std::map<std::string, std::pair<IntegerMatrix, uint64_t>> mult_by_exact;
    std::vector<uint32_t> word(static_cast<size_t>(radius), 0);
    int depth = 0;
    auto record = [&](const Level& leaf) {
      ++table.total_words;
      if (t > 0) {
        CodeKey key;
        key.n = static_cast<uint8_t>(t);
        for (size_t k = 0; k < t; ++k) key.v[k] = leaf.residues[k].encode();
        ++mult_by_code[key];
      } else {
        auto it = mult_by_exact.try_emplace(leaf.exact.serialize(),
                                            std::make_pair(leaf.exact, 0ull)).first;
        ++it->second.second;
      }
    };
    if (radius == 0) {
      record(stack[0]);
    } else {
      while (true) {
        while (depth < radius) {
          uint32_t letter = word[depth];
          Level& src = stack[depth];
          Level& dst = stack[depth + 1];
          for (size_t k = 0; k < t; ++k) src.residues[k].mul_into(gen_mod[k][letter], dst.residues[k]);
          if (need_exact) dst.exact = src.exact * spec.generators[letter];
          ++depth;
        }
        record(stack[depth]);
        // advance the word odometer; recompute products from the changed letter
        while (depth > 0 && word[depth - 1] + 1 == nletters) {
          word[depth - 1] = 0;
          --depth;
        }
        if (depth == 0) break;
        ++word[depth - 1];
        --depth;
      }
    }
    if (t > 0) {
      for (const auto& [key, mult] : mult_by_code) {
        BallEntry e;
        e.codes.assign(key.v.begin(), key.v.begin() + key.n);
        e.multiplicity = mult;
        table.entries.push_back(std::move(e));
      }
      std::sort(table.entries.begin(), table.entries.end(),
                [](const BallEntry& a, const BallEntry& b) { return a.codes < b.codes; });
    } else {
      for (const auto& [skey, v] : mult_by_exact) {
        BallEntry e;
        e.exact = v.first;
        e.multiplicity = v.second;
        table.entries.push_back(std::move(e));
      }
    }
    return table;
  }

  // Deduplicated ball: BFS layers of distinct exact group elements.
  std::map<std::string, IntegerMatrix> seen;
  std::vector<IntegerMatrix> frontier, next;
  IntegerMatrix id = IntegerMatrix::identity(spec.rank);
  seen.emplace(id.serialize(), id);
  frontier.push_back(id);
  for (int layer = 0; layer < radius; ++layer) {
    next.clear();
    for (const auto& m : frontier) {
      for (const auto& g : spec.generators) {
        IntegerMatrix prod = m * g;
        auto [it, fresh] = seen.emplace(prod.serialize(), prod);
        if (fresh) next.push_back(prod);
      }
    }
    frontier.swap(next);
  }
  for (const auto& [skey, m] : seen) {
    BallEntry e;
    e.exact = m;
    for (size_t k = 0; k < t; ++k) e.codes.push_back(reduce_mod(m, tracked_primes[k]).encode());
    e.multiplicity = 1;
    table.entries.push_back(std::move(e));
  }
  table.total_words = table.entries.size();
  return table;
}

}  // namespace gsieve
