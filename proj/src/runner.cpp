#include "gsieve/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gsieve/ekstats.hpp"
#include "gsieve/rng.hpp"
#include "gsieve/sieve.hpp"
#include "gsieve/spectra.hpp"

namespace gsieve {

using nlohmann::json;

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json rational_json(const Rational& r) {
  return json{{"num", r.num}, {"den", r.den}, {"value", r.value()}};
}

json spectrum_json(const SpectrumReport& s) {
  return json{{"primes", s.primes},
              {"spectral_radius", s.spectral_radius},
              {"iterations", s.iterations},
              {"residual", s.residual},
              {"tolerance", s.tolerance},
              {"converged", s.converged},
              {"bipartite", s.bipartite},
              {"trivial", s.trivial}};
}

json fit_json(const LinearFit& f) {
  return json{{"slope", f.slope},
              {"intercept", f.intercept},
              {"rms_residual", f.rms_residual},
              {"points", f.points}};
}

SieveFamily family_from_config(const ExperimentConfig& cfg, const GroupSpec& spec) {
  if (cfg.family == "polyzero")
    return SieveFamily::poly_zero(PolynomialFunction::parse(spec.rank, cfg.poly));
  if (cfg.family == "nonsquare") return SieveFamily::non_square_entry(cfg.entry_i, cfg.entry_j);
  if (cfg.family == "irreducible") return SieveFamily::irreducible_char_poly();
  if (cfg.family == "lagrangian") return SieveFamily::lagrangian_span(cfg.family_genus);
  throw Error("unknown family '" + cfg.family + "'");
}

struct Emitter {
  json results = json::object();
  std::ostringstream csv;
};

// --- experiment bodies ------------------------------------------------------

void run_enumerate(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  FiniteQuotient q = enumerate_quotient(spec, cfg.primes, cfg.cap);
  out.results["primes"] = q.primes();
  out.results["order"] = q.order();
  out.results["q_modulus"] = q.q_modulus();
  json rows = json::array();
  out.csv << "# schema=gsieve.enumerate.v1\np,order_found,ambient_order,surjective\n";
  for (const SurjectivityRow& row : surjectivity_report(spec, q.primes(), cfg.cap)) {
    rows.push_back(json{{"p", row.p},
                        {"order_found", row.order_found},
                        {"ambient_order", row.ambient_order},
                        {"surjective", row.surjective}});
    out.csv << row.p << "," << row.order_found << "," << row.ambient_order << ","
            << (row.surjective ? 1 : 0) << "\n";
  }
  out.results["surjectivity"] = rows;
  if (q.primes().size() == 2) {
    IndependenceResult ind =
        independence_check(spec, q.primes()[0], q.primes()[1], cfg.cap);
    out.results["independence"] = json{{"independent", ind.independent},
                                       {"order_p", ind.order_p},
                                       {"order_q", ind.order_q},
                                       {"order_pair", ind.order_pair}};
  }
}

void run_spectrum(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  FiniteQuotient q = enumerate_quotient(spec, cfg.primes, cfg.cap);
  SpectrumReport s = spectral_radius(q, cfg.tol, 100000, cfg.workers);
  out.results["order"] = q.order();
  out.results["spectrum"] = spectrum_json(s);
  out.csv << "# schema=gsieve.spectrum.v1\nq_modulus,order,rho,iterations,residual,bipartite,"
             "converged\n";
  out.csv << q.q_modulus() << "," << q.order() << "," << s.spectral_radius << ","
          << s.iterations << "," << s.residual << "," << (s.bipartite ? 1 : 0) << ","
          << (s.converged ? 1 : 0) << "\n";
}

void run_audit(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  FiniteQuotient q = enumerate_quotient(spec, cfg.primes, cfg.cap);
  SpectrumReport s = spectral_radius(q, cfg.tol, 100000, cfg.workers);
  auto rows = equidistribution_audit(q, cfg.n_hi, s, cfg.workers);
  out.results["order"] = q.order();
  out.results["spectrum"] = spectrum_json(s);
  bool all_pass = true;
  json jrows = json::array();
  out.csv << "# schema=gsieve.audit.v1\nn,max_deviation,bound,pass\n";
  for (const AuditRow& row : rows) {
    all_pass = all_pass && row.pass;
    jrows.push_back(json{{"n", row.n},
                         {"max_deviation", row.max_deviation},
                         {"bound", row.bound},
                         {"pass", row.pass}});
    out.csv << row.n << "," << row.max_deviation << "," << row.bound << ","
            << (row.pass ? 1 : 0) << "\n";
  }
  out.results["rows"] = jrows;
  out.results["all_pass"] = all_pass;
}

void run_bounded(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  out.csv << "# schema=gsieve.bounded.v1\nn,mu_exact,limit,bound,pass\n";
  if (cfg.primes.empty()) {
    // Vacuous sieve: mu_n(S) = 1 for every n.
    out.results["primes"] = json::array();
    out.results["limit"] = 1.0;
    out.results["all_pass"] = true;
    json jrows = json::array();
    for (int n = 0; n <= cfg.n_hi; ++n) {
      jrows.push_back(json{{"n", n}, {"mu_exact", 1.0}, {"bound", 0.0}, {"pass", true}});
      out.csv << n << ",1,1,0,1\n";
    }
    out.results["rows"] = jrows;
    return;
  }
  FiniteQuotient q = enumerate_quotient(spec, cfg.primes, cfg.cap);
  SieveFamily family = family_from_config(cfg, spec);
  BoundedSieveReport rep = bounded_sieve_experiment(q, family, cfg.n_hi, cfg.tol, cfg.workers);
  out.results["primes"] = rep.primes;
  json deltas = json::array();
  for (const Rational& d : rep.delta_p) deltas.push_back(rational_json(d));
  out.results["delta_p"] = deltas;
  out.results["limit"] = rep.limit;
  out.results["spectrum"] = spectrum_json(rep.spectrum);
  out.results["all_pass"] = rep.all_pass;
  json jrows = json::array();
  for (const BoundedSieveRow& row : rep.rows) {
    jrows.push_back(json{{"n", row.n},
                         {"mu_exact", row.mu_exact},
                         {"bound", row.bound},
                         {"pass", row.pass}});
    out.csv << row.n << "," << row.mu_exact << "," << rep.limit << "," << row.bound << ","
            << (row.pass ? 1 : 0) << "\n";
  }
  out.results["rows"] = jrows;
}

WalkConfig walk_for_window(const ExperimentConfig& cfg, const GroupSpec& spec, double q_max) {
  WalkConfig walk;
  walk.spec = spec;
  walk.samples = cfg.m;
  walk.master_seed = cfg.seed;
  walk.workers = cfg.workers;
  for (uint64_t p : primes_in_range(2, static_cast<uint64_t>(q_max)))
    if (!spec.exceptional_primes.count(p)) walk.tracked_primes.push_back(p);
  return walk;
}

void run_small(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  double q_max = std::pow(cfg.a_base, cfg.n_hi);
  WalkConfig walk = walk_for_window(cfg, spec, q_max);
  SieveFamily family = family_from_config(cfg, spec);
  double kappa = cfg.kappa;
  if (kappa == 0.0) {
    DimensionReport dim = kappa_profile(family, spec, 2, static_cast<uint64_t>(q_max), cfg.cap);
    kappa = dim.kappa_running_avg;
  }
  SmallSieveReport rep =
      small_sieve_experiment(walk, family, cfg.a_base, cfg.n_lo, cfg.n_hi, cfg.n_step, kappa);
  out.results["a_base"] = rep.a_base;
  out.results["kappa"] = rep.kappa;
  out.results["loglog_fit"] = fit_json(rep.loglog_fit);
  out.results["fitted_exponent"] = rep.loglog_fit.slope;
  json jrows = json::array();
  out.csv << "# schema=gsieve.small.v1\nn,q_window,window_size,hits,m,estimate,ci_low,ci_high,"
             "heuristic_product\n";
  for (const SmallSieveRow& row : rep.rows) {
    jrows.push_back(json{{"n", row.n},
                         {"q_window", row.q_window},
                         {"window_size", row.window_size},
                         {"hits", row.hits},
                         {"estimate", row.estimate},
                         {"ci_low", row.ci_low},
                         {"ci_high", row.ci_high},
                         {"heuristic_product", row.heuristic_product}});
    out.csv << row.n << "," << row.q_window << "," << row.window_size << "," << row.hits << ","
            << cfg.m << "," << row.estimate << "," << row.ci_low << "," << row.ci_high << ","
            << row.heuristic_product << "\n";
  }
  out.results["rows"] = jrows;
}

void run_large(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  double a_base = cfg.a_base;
  if (a_base == 0.0) a_base = default_large_sieve_base(spec, cfg.n_hi, cfg.p_start, cfg.cap);
  double q_max = std::pow(a_base, cfg.n_hi);
  WalkConfig walk = walk_for_window(cfg, spec, q_max);
  SieveFamily family = family_from_config(cfg, spec);
  LargeSieveReport rep = large_sieve_experiment(walk, family, a_base, cfg.n_lo, cfg.n_hi,
                                                cfg.delta_floor, cfg.p_start, 1'000'000,
                                                cfg.cap);
  out.results["a_base"] = rep.a_base;
  out.results["delta_floor"] = rep.delta_floor;
  out.results["window_primes"] = rep.window_primes;
  json deltas = json::array();
  for (const Rational& d : rep.delta_p) deltas.push_back(rational_json(d));
  out.results["delta_p"] = deltas;
  out.results["decay_fit"] = fit_json(rep.decay_fit);
  out.results["rho_bar"] = rep.rho_bar;
  json pairs = json::array();
  for (auto [p, q] : rep.rho_pairs_measured) pairs.push_back(json::array({p, q}));
  out.results["rho_pairs_measured"] = pairs;
  out.results["proof_constraint_q2b_rho_n"] = rep.proof_constraint;
  out.results["all_pass"] = rep.all_pass;
  json jrows = json::array();
  out.csv << "# schema=gsieve.large.v1\nn,q_window,window_size,hits,m,estimate,std_error,"
             "expected_x,sum_delta,max_abs_w,var_bound,cheb_bound,pass\n";
  for (const LargeSieveRow& row : rep.rows) {
    jrows.push_back(json{{"n", row.n},
                         {"q_window", row.q_window},
                         {"window_size", row.window_size},
                         {"hits", row.hits},
                         {"estimate", row.estimate},
                         {"std_error", row.std_error},
                         {"expected_x", row.expected_x},
                         {"sum_delta", row.sum_delta},
                         {"max_abs_w", row.max_abs_w},
                         {"var_bound", row.var_bound},
                         {"cheb_bound", row.cheb_bound},
                         {"pass", row.pass}});
    out.csv << row.n << "," << row.q_window << "," << row.window_size << "," << row.hits << ","
            << cfg.m << "," << row.estimate << "," << row.std_error << "," << row.expected_x
            << "," << row.sum_delta << "," << row.max_abs_w << "," << row.var_bound << ","
            << row.cheb_bound << "," << (row.pass ? 1 : 0) << "\n";
  }
  out.results["rows"] = jrows;
}

void run_kappa(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  SieveFamily family = family_from_config(cfg, spec);
  DimensionReport rep = kappa_profile(family, spec, cfg.prime_lo, cfg.prime_hi, cfg.cap);
  out.results["kappa_fit"] = rep.kappa_fit;
  out.results["fit_intercept"] = rep.fit_intercept;
  out.results["fit_rms_residual"] = rep.fit_rms_residual;
  out.results["kappa_running_avg"] = rep.kappa_running_avg;
  out.results["prime_count"] = rep.primes.size();
  if (family.kind() == FamilyKind::LagrangianSpan) {
    // the measured spanning fractions disagree with the closed formula
    // quoted in the literature; record both sides
    json checks = json::array();
    for (size_t i = 0; i < rep.primes.size(); ++i) {
      LagrangianFormulaCheck c =
          lagrangian_formula_check(cfg.family_genus, rep.primes[i], rep.delta_p[i]);
      checks.push_back(json{{"p", c.p},
                            {"measured", c.measured},
                            {"displayed_formula", c.displayed},
                            {"discrepant", c.discrepant}});
    }
    out.results["lagrangian_formula_checks"] = checks;
  }
  out.csv << "# schema=gsieve.kappa.v1\np,omega_size,group_order,delta,kappa_p,partial_sum\n";
  for (size_t i = 0; i < rep.primes.size(); ++i) {
    out.csv << rep.primes[i] << "," << rep.delta_p[i].num << "," << rep.delta_p[i].den << ","
            << rep.delta_p[i].value() << "," << rep.kappa_p[i] << "," << rep.partial_sums[i]
            << "\n";
  }
}

void run_ek(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  SieveFamily family = family_from_config(cfg, spec);
  EKConfig ek;
  ek.walk.spec = spec;
  ek.walk.length = cfg.n;
  ek.walk.samples = cfg.m;
  ek.walk.master_seed = cfg.seed;
  ek.walk.workers = cfg.workers;
  ek.walk.track_exact = cfg.track_exact;
  for (uint64_t p : primes_in_range(2, cfg.q_truncation))
    if (!spec.exceptional_primes.count(p)) ek.walk.tracked_primes.push_back(p);
  ensure_omegas(family, spec, ek.walk.tracked_primes, /*materialize=*/true);
  ek.family = &family;
  ek.q_truncation = cfg.q_truncation;
  ek.kappa = cfg.kappa;
  if (ek.kappa == 0.0) {
    DimensionReport dim = kappa_profile(family, spec, 2, cfg.q_truncation, cfg.cap);
    ek.kappa = dim.kappa_running_avg;
  }
  ek.a_base = std::pow(static_cast<double>(cfg.q_truncation),
                       1.0 / static_cast<double>(cfg.n));
  PolynomialFunction f = PolynomialFunction::parse(spec.rank, cfg.poly);
  ek.growth_c = f.growth_constant(spec);

  EKBatchReport batch = ek_statistic_batch(ek);

  std::vector<Rational> deltas;
  for (uint64_t p : ek.walk.tracked_primes)
    if (p <= cfg.q_truncation) deltas.push_back(family.find(p)->density);
  std::vector<uint32_t> oracle =
      bernoulli_oracle_batch(deltas, cfg.m, splitmix64(cfg.seed ^ 0xbe47u));

  std::vector<double> walk_counts, oracle_counts;
  walk_counts.reserve(batch.stats.size());
  for (const EKSampleStat& s : batch.stats) walk_counts.push_back(s.truncated_count);
  oracle_counts.reserve(oracle.size());
  for (uint32_t c : oracle) oracle_counts.push_back(c);
  std::vector<int> orders = {1, 2, 3, 4};
  MomentReport cmp = distribution_compare(walk_counts, oracle_counts, orders);

  out.results["n"] = cfg.n;
  out.results["q_truncation"] = cfg.q_truncation;
  out.results["kappa"] = ek.kappa;
  out.results["a_base"] = ek.a_base;
  out.results["growth_c"] = ek.growth_c;
  out.results["a2_bound"] = batch.a2_bound;
  out.results["max_a2_upper"] = batch.max_a2_upper;
  out.results["a3"] = batch.a3;
  out.results["zero_values"] = batch.zero_values;
  out.results["walk_mean"] = cmp.walk_mean;
  out.results["oracle_mean"] = cmp.oracle_mean;
  out.results["mean_joint_se"] = cmp.mean_joint_se;
  out.results["walk_variance"] = cmp.walk_variance;
  out.results["oracle_variance"] = cmp.oracle_variance;
  out.results["variance_joint_se"] = cmp.variance_joint_se;
  out.results["ks_distance"] = cmp.ks_distance;
  json jm = json::array();
  for (const MomentRow& row : cmp.rows)
    jm.push_back(json{{"order", row.order},
                      {"walk_moment", row.walk_moment},
                      {"oracle_moment", row.oracle_moment},
                      {"joint_se", row.joint_se},
                      {"delta", row.delta},
                      {"normal_target", row.normal_target}});
  out.results["moments"] = jm;
  out.csv << "# schema=gsieve.ek.v1\nindex,truncated_count,statistic,value_is_zero,a2_upper\n";
  for (const EKSampleStat& s : batch.stats)
    out.csv << s.index << "," << s.truncated_count << "," << s.statistic << ","
            << (s.value_is_zero ? 1 : 0) << "," << s.a2_upper << "\n";
}

void run_baseline(const ExperimentConfig& cfg, const GroupSpec&, Emitter& out) {
  BaselineReport rep = classical_integer_sieve(cfg.baseline_n, cfg.baseline_q, cfg.shifts);
  out.results["n_limit"] = rep.n_limit;
  out.results["q_limit"] = rep.q_limit;
  out.results["shifts"] = rep.shifts;
  out.results["survivor_count"] = rep.survivors.size();
  out.results["survivors"] = rep.survivors;
  out.csv << "# schema=gsieve.baseline.v1\nsurvivor\n";
  for (uint64_t n : rep.survivors) out.csv << n << "\n";
}

void run_ball(const ExperimentConfig& cfg, const GroupSpec& spec, Emitter& out) {
  BallMode mode =
      cfg.ball_mode == "dedup" ? BallMode::Deduplicated : BallMode::WithMultiplicity;
  BallTable table = ball_enumerate(spec, cfg.radius, mode, cfg.primes, cfg.word_budget);
  out.results["radius"] = table.radius;
  out.results["mode"] = cfg.ball_mode;
  out.results["total_words"] = table.total_words;
  out.results["distinct_entries"] = table.entries.size();
  out.csv << "# schema=gsieve.ball.v1\nmultiplicity,codes,exact\n";
  for (const BallEntry& e : table.entries) {
    out.csv << e.multiplicity << ",";
    for (size_t i = 0; i < e.codes.size(); ++i)
      out.csv << (i ? " " : "") << e.codes[i];
    out.csv << ",";
    if (e.exact) out.csv << e.exact->to_string();
    out.csv << "\n";
  }
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open output file " + tmp.string());
    os << content;
    if (!os) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, bool write_files) {
  RunResult result;
  try {
    validate_config(cfg);
    GroupSpec spec = cfg.group.build();
    Emitter out;
    if (cfg.experiment == "enumerate") run_enumerate(cfg, spec, out);
    else if (cfg.experiment == "spectrum") run_spectrum(cfg, spec, out);
    else if (cfg.experiment == "audit") run_audit(cfg, spec, out);
    else if (cfg.experiment == "bounded") run_bounded(cfg, spec, out);
    else if (cfg.experiment == "small") run_small(cfg, spec, out);
    else if (cfg.experiment == "large") run_large(cfg, spec, out);
    else if (cfg.experiment == "kappa") run_kappa(cfg, spec, out);
    else if (cfg.experiment == "ek") run_ek(cfg, spec, out);
    else if (cfg.experiment == "baseline") run_baseline(cfg, spec, out);
    else if (cfg.experiment == "ball") run_ball(cfg, spec, out);
    else throw ConfigError("unknown experiment '" + cfg.experiment + "'", 0, 0);

    json report;
    report["experiment"] = cfg.experiment;
    report["library_version"] = kLibraryVersion;
    report["seed"] = cfg.seed;
    report["config_digest"] = cfg.digest();
    report["config_text"] = cfg.canonical_text();
    report["timestamp"] = iso_timestamp();
    report["results"] = out.results;
    result.report_json = report.dump(2) + "\n";
    result.rows_csv = out.csv.str();
    if (write_files) {
      std::filesystem::path base(cfg.out);
      if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
      result.report_path = cfg.out + ".report.json";
      result.csv_path = cfg.out + ".rows.csv";
      write_atomically(result.report_path, result.report_json);
      write_atomically(result.csv_path, result.rows_csv);
    }
    result.exit_code = 0;
  } catch (const ConfigError& e) {
    result.exit_code = 2;
    result.message = std::string("config error") +
                     (e.line > 0 ? " (line " + std::to_string(e.line) +
                                       (e.column > 0 ? ", column " + std::to_string(e.column) : "") +
                                       ")"
                                 : "") +
                     ": " + e.what();
  } catch (const CapExceeded& e) {
    result.exit_code = 1;
    result.message = std::string("infeasible: ") + e.what();
  } catch (const BudgetExceeded& e) {
    result.exit_code = 1;
    result.message = std::string("infeasible: ") + e.what();
  } catch (const Error& e) {
    result.exit_code = 1;
    result.message = e.what();
  }
  return result;
}

}  // namespace gsieve
