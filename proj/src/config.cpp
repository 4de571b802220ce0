#include "gsieve/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace gsieve {

GroupSpec GroupConfig::build() const {
  if (preset == "custom") {
    std::vector<IntegerMatrix> gens;
    gens.reserve(generators.size());
    for (const auto& rows : generators) gens.push_back(IntegerMatrix::from_rows(rows));
    Ambient amb = ambient == "sp" ? Ambient::Symplectic : Ambient::SpecialLinear;
    return GroupSpec::make(rank, std::move(gens), identity, amb, exceptional, "custom");
  }
  return preset_group(preset, k, genus, identity);
}

namespace {

struct Line {
  int number;
  std::string section;
  std::string key;
  std::string value;
  int key_column;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    // allow comma-separated lists too
    std::string cur;
    for (char c : tok) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) {
    std::istringstream is(text);
    std::string raw;
    int number = 0;
    std::string section;
    while (std::getline(is, raw)) {
      ++number;
      std::string stripped = raw;
      size_t hash = stripped.find('#');
      if (hash != std::string::npos) stripped = stripped.substr(0, hash);
      std::string line = trim(stripped);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("unterminated section header", number,
                            static_cast<int>(raw.find('[')) + 1);
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty()) throw ConfigError("empty section name", number, 1);
        continue;
      }
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("expected key = value", number, 1);
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError("missing key before '='", number, 1);
      int col = static_cast<int>(stripped.find(key)) + 1;
      std::string full = section.empty() ? key : section + "." + key;
      if (seen_.count(full))
        throw ConfigError("duplicate key '" + full + "'", number, col);
      seen_.insert(full);
      lines_.push_back({number, section, key, value, col});
    }
  }

  const std::vector<Line>& lines() const { return lines_; }

 private:
  std::vector<Line> lines_;
  std::set<std::string> seen_;
};

long to_long(const Line& l) {
  long v = 0;
  auto [p, ec] = std::from_chars(l.value.data(), l.value.data() + l.value.size(), v);
  if (ec != std::errc() || p != l.value.data() + l.value.size())
    throw ConfigError("key '" + l.key + "' needs an integer, got '" + l.value + "'", l.number,
                      l.key_column);
  return v;
}

uint64_t to_u64(const Line& l) {
  long v = to_long(l);
  if (v < 0)
    throw ConfigError("key '" + l.key + "' must be non-negative", l.number, l.key_column);
  return static_cast<uint64_t>(v);
}

double to_double(const Line& l) {
  try {
    size_t used = 0;
    double v = std::stod(l.value, &used);
    if (used != l.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + l.key + "' needs a number, got '" + l.value + "'", l.number,
                      l.key_column);
  }
}

bool to_bool(const Line& l) {
  if (l.value == "true" || l.value == "1" || l.value == "yes") return true;
  if (l.value == "false" || l.value == "0" || l.value == "no") return false;
  throw ConfigError("key '" + l.key + "' needs true/false, got '" + l.value + "'", l.number,
                    l.key_column);
}

std::vector<uint64_t> to_u64_list(const Line& l) {
  std::vector<uint64_t> out;
  for (const std::string& tok : split_ws(l.value)) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || v < 0)
      throw ConfigError("list item '" + tok + "' in key '" + l.key + "' is not a non-negative integer",
                        l.number, l.key_column);
    out.push_back(static_cast<uint64_t>(v));
  }
  return out;
}

std::vector<int64_t> to_i64_list(const Line& l) {
  std::vector<int64_t> out;
  for (const std::string& tok : split_ws(l.value)) {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ConfigError("list item '" + tok + "' in key '" + l.key + "' is not an integer",
                        l.number, l.key_column);
    out.push_back(v);
  }
  return out;
}

// Matrix list literal: [[1,3],[0,1]] [[1,-3],[0,1]] ...
std::vector<std::vector<std::vector<long>>> to_matrices(const Line& l) {
  std::vector<std::vector<std::vector<long>>> mats;
  const std::string& s = l.value;
  size_t i = 0;
  auto skip = [&] { while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i; };
  auto fail = [&](const std::string& msg) -> void {
    throw ConfigError("key '" + l.key + "': " + msg, l.number, l.key_column);
  };
  skip();
  while (i < s.size()) {
    if (s[i] != '[') fail("expected '[' to open a matrix");
    ++i;
    std::vector<std::vector<long>> rows;
    skip();
    while (i < s.size() && s[i] == '[') {
      ++i;
      std::vector<long> row;
      skip();
      while (i < s.size() && s[i] != ']') {
        size_t start = i;
        if (s[i] == '-' || s[i] == '+') ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == start) fail("expected integer entry");
        row.push_back(std::stol(s.substr(start, i - start)));
        skip();
      }
      if (i >= s.size()) fail("unterminated row");
      ++i;  // ']'
      rows.push_back(std::move(row));
      skip();
    }
    if (i >= s.size() || s[i] != ']') fail("expected ']' to close the matrix");
    ++i;
    mats.push_back(std::move(rows));
    skip();
  }
  if (mats.empty()) fail("no matrices given");
  return mats;
}

const std::set<std::string> kExperiments = {"enumerate", "spectrum", "audit",   "bounded",
                                            "small",     "large",    "ek",      "baseline",
                                            "ball",      "kappa"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ConfigReader reader(text);
  ExperimentConfig cfg;
  for (const Line& l : reader.lines()) {
    const std::string& sec = l.section;
    const std::string& key = l.key;
    if (sec == "group") {
      if (key == "preset") cfg.group.preset = l.value;
      else if (key == "k") cfg.group.k = to_long(l);
      else if (key == "genus") cfg.group.genus = static_cast<int>(to_long(l));
      else if (key == "identity") cfg.group.identity = to_bool(l);
      else if (key == "rank") cfg.group.rank = static_cast<int>(to_long(l));
      else if (key == "ambient") cfg.group.ambient = l.value;
      else if (key == "generators") cfg.group.generators = to_matrices(l);
      else if (key == "exceptional") {
        auto list = to_u64_list(l);
        cfg.group.exceptional.insert(list.begin(), list.end());
      } else
        throw ConfigError("unknown key '" + key + "' in [group]", l.number, l.key_column);
    } else if (sec == "run") {
      if (key == "experiment") cfg.experiment = l.value;
      else if (key == "seed") cfg.seed = to_u64(l);
      else if (key == "workers") cfg.workers = static_cast<int>(to_long(l));
      else if (key == "out") cfg.out = l.value;
      else if (key == "cap") cfg.cap = to_u64(l);
      else if (key == "tol") cfg.tol = to_double(l);
      else
        throw ConfigError("unknown key '" + key + "' in [run]", l.number, l.key_column);
    } else if (sec == "sieve") {
      if (key == "family") cfg.family = l.value;
      else if (key == "poly") cfg.poly = l.value;
      else if (key == "entry") {
        auto list = to_u64_list(l);
        if (list.size() != 2)
          throw ConfigError("key 'entry' needs two indices", l.number, l.key_column);
        cfg.entry_i = static_cast<int>(list[0]);
        cfg.entry_j = static_cast<int>(list[1]);
      } else if (key == "genus") cfg.family_genus = static_cast<int>(to_long(l));
      else if (key == "primes") cfg.primes = to_u64_list(l);
      else if (key == "p-start") cfg.p_start = to_u64(l);
      else if (key == "a-base") cfg.a_base = to_double(l);
      else if (key == "delta-floor") cfg.delta_floor = to_double(l);
      else if (key == "kappa") cfg.kappa = to_double(l);
      else if (key == "p-lo") cfg.prime_lo = to_u64(l);
      else if (key == "p-hi") cfg.prime_hi = to_u64(l);
      else
        throw ConfigError("unknown key '" + key + "' in [sieve]", l.number, l.key_column);
    } else if (sec == "walk") {
      if (key == "n") cfg.n = static_cast<int>(to_long(l));
      else if (key == "n-lo") cfg.n_lo = static_cast<int>(to_long(l));
      else if (key == "n-hi") cfg.n_hi = static_cast<int>(to_long(l));
      else if (key == "n-step") cfg.n_step = static_cast<int>(to_long(l));
      else if (key == "m") cfg.m = to_u64(l);
      else if (key == "track-exact") cfg.track_exact = to_bool(l);
      else if (key == "q") cfg.q_truncation = to_u64(l);
      else
        throw ConfigError("unknown key '" + key + "' in [walk]", l.number, l.key_column);
    } else if (sec == "ball") {
      if (key == "radius") cfg.radius = static_cast<int>(to_long(l));
      else if (key == "mode") cfg.ball_mode = l.value;
      else if (key == "word-budget") cfg.word_budget = to_u64(l);
      else
        throw ConfigError("unknown key '" + key + "' in [ball]", l.number, l.key_column);
    } else if (sec == "baseline") {
      if (key == "n-limit") cfg.baseline_n = to_u64(l);
      else if (key == "q-limit") cfg.baseline_q = to_u64(l);
      else if (key == "shifts") cfg.shifts = to_i64_list(l);
      else
        throw ConfigError("unknown key '" + key + "' in [baseline]", l.number, l.key_column);
    } else {
      throw ConfigError("unknown section [" + sec + "]", l.number, 1);
    }
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  auto reject = [](const std::string& msg) { throw ConfigError(msg, 0, 0); };

  if (!kExperiments.count(cfg.experiment))
    reject("key 'experiment' must be one of enumerate/spectrum/audit/bounded/small/large/ek/"
           "baseline/ball/kappa, got '" + cfg.experiment + "'");

  const std::set<std::string> presets = {"lubotzky", "sl2", "sl2standard", "symplectic",
                                         "zline", "custom"};
  if (!presets.count(cfg.group.preset))
    reject("key 'preset' has unknown value '" + cfg.group.preset + "'");
  if (cfg.group.preset == "custom" && cfg.group.generators.empty())
    reject("custom groups need key 'generators'");

  const std::set<std::string> families = {"polyzero", "nonsquare", "irreducible", "lagrangian"};
  if (!families.count(cfg.family))
    reject("key 'family' has unknown value '" + cfg.family + "'");

  // Build the group once to know the exceptional set; config errors beat
  // run-time surprises.
  GroupSpec spec = cfg.group.build();

  // The primes list is a sieve window for the bounded sieve and must avoid
  // the exceptional set there; quotient experiments may enumerate any prime.
  bool primes_are_sieve_window = cfg.experiment == "bounded";
  for (uint64_t p : cfg.primes) {
    if (!is_prime_u64(p)) reject("key 'primes' contains non-prime " + std::to_string(p));
    if (primes_are_sieve_window && spec.exceptional_primes.count(p))
      reject("sieve window contains prime " + std::to_string(p) +
             ", which is exceptional for this group");
  }
  std::vector<uint64_t> sorted = cfg.primes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    reject("key 'primes' contains duplicates");

  bool needs_primes = cfg.experiment == "enumerate" || cfg.experiment == "spectrum" ||
                      cfg.experiment == "audit" || cfg.experiment == "bounded";
  if (needs_primes && cfg.primes.empty() && cfg.experiment != "bounded")
    reject("experiment '" + cfg.experiment + "' needs key 'primes'");

  if (cfg.experiment == "audit" || cfg.experiment == "bounded") {
    if (cfg.n_hi < 1) reject("experiment '" + cfg.experiment + "' needs key 'n-hi' >= 1");
  }
  if (cfg.experiment == "small" || cfg.experiment == "large") {
    if (cfg.n_lo < 1 || cfg.n_hi < cfg.n_lo) reject("bad n-lo/n-hi grid");
    if (cfg.m < 1) reject("key 'm' must be at least 1");
  }
  if (cfg.experiment == "small" && cfg.a_base <= 1.0)
    reject("small sieve needs key 'a-base' > 1");
  if (cfg.experiment == "kappa") {
    if (cfg.prime_hi < cfg.prime_lo || cfg.prime_hi < 2) reject("kappa needs p-lo/p-hi window");
  }
  if (cfg.experiment == "ek") {
    if (cfg.n < 2) reject("ek needs key 'n' >= 2");
    if (cfg.q_truncation < 2) reject("ek needs key 'q' >= 2");
    if (cfg.m < 1) reject("key 'm' must be at least 1");
    if (spec.exceptional_primes.count(cfg.q_truncation))
      reject("key 'q' is an exceptional prime for this group");
  }
  if (cfg.experiment == "baseline") {
    if (cfg.baseline_n < 2 || cfg.baseline_q < 2) reject("baseline needs n-limit and q-limit >= 2");
    if (cfg.shifts.empty()) reject("baseline needs key 'shifts'");
  }
  if (cfg.experiment == "ball") {
    if (cfg.radius < 0) reject("ball needs key 'radius' >= 0");
    if (cfg.ball_mode != "multiplicity" && cfg.ball_mode != "dedup")
      reject("key 'mode' must be multiplicity or dedup");
  }
  if (cfg.family == "polyzero") {
    try {
      PolynomialFunction::parse(spec.rank, cfg.poly);
    } catch (const Error& e) {
      reject("key 'poly' rejected: " + std::string(e.what()));
    }
  }
  if (cfg.family == "lagrangian" && spec.ambient != Ambient::Symplectic)
    reject("family 'lagrangian' needs a symplectic group");
  if (cfg.family == "nonsquare" &&
      (cfg.entry_i < 0 || cfg.entry_i >= spec.rank || cfg.entry_j < 0 || cfg.entry_j >= spec.rank))
    reject("key 'entry' is outside the matrix");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "[group]\n";
  os << "preset = " << group.preset << "\n";
  os << "k = " << group.k << "\n";
  os << "genus = " << group.genus << "\n";
  os << "identity = " << (group.identity ? "true" : "false") << "\n";
  if (group.preset == "custom") {
    os << "rank = " << group.rank << "\n";
    os << "ambient = " << group.ambient << "\n";
    os << "generators =";
    for (const auto& m : group.generators) {
      os << " [";
      for (size_t i = 0; i < m.size(); ++i) {
        os << "[";
        for (size_t j = 0; j < m[i].size(); ++j)
          os << m[i][j] << (j + 1 < m[i].size() ? "," : "");
        os << "]";
      }
      os << "]";
    }
    os << "\n";
    if (!group.exceptional.empty()) {
      os << "exceptional =";
      for (uint64_t p : group.exceptional) os << " " << p;
      os << "\n";
    }
  }
  os << "\n[run]\n";
  os << "experiment = " << experiment << "\n";
  os << "seed = " << seed << "\n";
  os << "workers = " << workers << "\n";
  os << "out = " << out << "\n";
  os << "cap = " << cap << "\n";
  os << "tol = " << tol << "\n";
  os << "\n[sieve]\n";
  os << "family = " << family << "\n";
  os << "poly = " << poly << "\n";
  os << "entry = " << entry_i << " " << entry_j << "\n";
  os << "genus = " << family_genus << "\n";
  if (!primes.empty()) {
    os << "primes =";
    for (uint64_t p : primes) os << " " << p;
    os << "\n";
  }
  os << "p-start = " << p_start << "\n";
  os << "a-base = " << a_base << "\n";
  os << "delta-floor = " << delta_floor << "\n";
  os << "kappa = " << kappa << "\n";
  if (prime_hi) {
    os << "p-lo = " << prime_lo << "\n";
    os << "p-hi = " << prime_hi << "\n";
  }
  os << "\n[walk]\n";
  os << "n = " << n << "\n";
  os << "n-lo = " << n_lo << "\n";
  os << "n-hi = " << n_hi << "\n";
  os << "n-step = " << n_step << "\n";
  os << "m = " << m << "\n";
  os << "track-exact = " << (track_exact ? "true" : "false") << "\n";
  os << "q = " << q_truncation << "\n";
  os << "\n[ball]\n";
  os << "radius = " << radius << "\n";
  os << "mode = " << ball_mode << "\n";
  os << "word-budget = " << word_budget << "\n";
  os << "\n[baseline]\n";
  os << "n-limit = " << baseline_n << "\n";
  os << "q-limit = " << baseline_q << "\n";
  os << "shifts =";
  for (int64_t s : shifts) os << " " << s;
  os << "\n";
  return os.str();
}

uint64_t ExperimentConfig::digest() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace gsieve
