// gsieve: a laboratory for sieve experiments in finitely generated matrix
// groups. Subcommands mirror the experiment kinds; every run emits a JSON
// report plus a CSV row table, both reproducible from the embedded config.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gsieve/config.hpp"
#include "gsieve/runner.hpp"

namespace {

using gsieve::ExperimentConfig;

void add_group_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--group", cfg.group.preset, "group preset: lubotzky|sl2|symplectic|zline")
      ->capture_default_str();
  cmd->add_option("--k", cfg.group.k, "parameter k for the lubotzky preset")
      ->capture_default_str();
  cmd->add_option("--genus", cfg.group.genus, "genus for the symplectic preset")
      ->capture_default_str();
  cmd->add_flag("--identity", cfg.group.identity, "append the identity to S (lazy walk)");
}

void add_run_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  cmd->add_option("--workers", cfg.workers, "worker threads (0 = hardware)")
      ->capture_default_str();
  cmd->add_option("--out", cfg.out, "output path prefix")->capture_default_str();
  cmd->add_option("--cap", cfg.cap, "quotient enumeration cap")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "power-iteration tolerance")->capture_default_str();
}

void add_family_options(CLI::App* cmd, ExperimentConfig& cfg) {
  cmd->add_option("--family", cfg.family, "polyzero|nonsquare|irreducible|lagrangian")
      ->capture_default_str();
  cmd->add_option("--poly", cfg.poly, "polynomial, e.g. 'a^2+d^2' or 'a*b*c*d'")
      ->capture_default_str();
  cmd->add_option("--entry", [&cfg](const std::vector<std::string>& vals) {
        if (vals.size() != 2) return false;
        cfg.entry_i = std::stoi(vals[0]);
        cfg.entry_j = std::stoi(vals[1]);
        return true;
      },
      "entry indices i j for the nonsquare family")
      ->expected(2);
  cmd->add_option("--family-genus", cfg.family_genus, "genus for the lagrangian family")
      ->capture_default_str();
}

int finish(const gsieve::RunResult& result) {
  if (result.exit_code != 0) {
    std::cerr << "gsieve: " << result.message << "\n";
    return result.exit_code;
  }
  if (!result.report_path.empty())
    std::cout << "report: " << result.report_path.string() << "\nrows:   "
              << result.csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sieve experiments in finitely generated matrix groups"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string config_path;
  std::string sieve_mode = "bounded";

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "config file path")->required();

  auto* enumerate = app.add_subcommand("enumerate", "enumerate a congruence quotient");
  enumerate->add_option("--primes", cfg.primes, "primes of the quotient")->required();
  add_group_options(enumerate, cfg);
  add_run_options(enumerate, cfg);

  auto* spectrum = app.add_subcommand("spectrum", "spectral radius of the Markov operator");
  spectrum->add_option("--primes", cfg.primes, "primes of the quotient")->required();
  add_group_options(spectrum, cfg);
  add_run_options(spectrum, cfg);

  auto* audit = app.add_subcommand("audit", "equidistribution audit against rho^n");
  audit->add_option("--primes", cfg.primes, "primes of the quotient")->required();
  audit->add_option("--n-max", cfg.n_hi, "audit steps")->required();
  add_group_options(audit, cfg);
  add_run_options(audit, cfg);

  auto* sieve = app.add_subcommand("sieve", "bounded/small/large sieve experiments");
  sieve->add_option("--mode", sieve_mode, "bounded|small|large")->required();
  sieve->add_option("--primes", cfg.primes, "primes (bounded mode)");
  sieve->add_option("--n-max", cfg.n_hi, "horizon (bounded mode)");
  sieve->add_option("--n-lo", cfg.n_lo, "first n of the grid");
  sieve->add_option("--n-hi", cfg.n_hi, "last n of the grid");
  sieve->add_option("--n-step", cfg.n_step, "grid step")->capture_default_str();
  sieve->add_option("--m", cfg.m, "Monte Carlo samples per n")->capture_default_str();
  sieve->add_option("--a-base", cfg.a_base, "window base A (0 = default rule)")
      ->capture_default_str();
  sieve->add_option("--p-start", cfg.p_start, "first sieve prime")->capture_default_str();
  sieve->add_option("--delta-floor", cfg.delta_floor, "large-sieve density floor")
      ->capture_default_str();
  sieve->add_option("--kappa", cfg.kappa, "sieve dimension (0 = fit)")->capture_default_str();
  add_family_options(sieve, cfg);
  add_group_options(sieve, cfg);
  add_run_options(sieve, cfg);

  auto* kappa = app.add_subcommand("kappa", "dimension profile over a prime window");
  kappa->add_option("--p-lo", cfg.prime_lo, "window start")->required();
  kappa->add_option("--p-hi", cfg.prime_hi, "window end")->required();
  add_family_options(kappa, cfg);
  add_group_options(kappa, cfg);
  add_run_options(kappa, cfg);

  auto* ek = app.add_subcommand("ek", "Erdos-Kac statistics against the Bernoulli model");
  ek->add_option("--n", cfg.n, "walk length")->required();
  ek->add_option("--q", cfg.q_truncation, "truncation Q")->required();
  ek->add_option("--m", cfg.m, "samples")->capture_default_str();
  ek->add_option("--kappa", cfg.kappa, "sieve dimension (0 = fit)")->capture_default_str();
  ek->add_flag("--track-exact", cfg.track_exact, "carry exact integer matrices");
  add_family_options(ek, cfg);
  add_group_options(ek, cfg);
  add_run_options(ek, cfg);

  auto* baseline = app.add_subcommand("baseline", "classical integer sieve (Gamma = Z)");
  baseline->add_option("--n-limit", cfg.baseline_n, "sieve integers 1..N")->required();
  baseline->add_option("--q-limit", cfg.baseline_q, "sieve primes up to Q")->required();
  baseline->add_option("--shifts", cfg.shifts, "shift list, e.g. 0 2")->capture_default_str();
  add_run_options(baseline, cfg);

  auto* ball = app.add_subcommand("ball", "combinatorial ball/sphere enumeration");
  ball->add_option("--radius", cfg.radius, "word-length radius")->required();
  ball->add_option("--mode", cfg.ball_mode, "multiplicity|dedup")->capture_default_str();
  ball->add_option("--primes", cfg.primes, "tracked primes for element encodings");
  ball->add_option("--word-budget", cfg.word_budget, "max |S|^T words")->capture_default_str();
  add_group_options(ball, cfg);
  add_run_options(ball, cfg);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "gsieve: cannot open config file " << config_path << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << is.rdbuf();
    gsieve::ExperimentConfig parsed;
    try {
      parsed = gsieve::parse_config(buf.str());
    } catch (const gsieve::ConfigError& e) {
      std::cerr << "gsieve: " << config_path << ":" << e.line;
      if (e.column > 0) std::cerr << ":" << e.column;
      std::cerr << ": " << e.what() << "\n";
      return 2;
    }
    return finish(gsieve::run_experiment(parsed));
  }

  if (enumerate->parsed()) cfg.experiment = "enumerate";
  else if (spectrum->parsed()) cfg.experiment = "spectrum";
  else if (audit->parsed()) cfg.experiment = "audit";
  else if (sieve->parsed()) cfg.experiment = sieve_mode == "bounded" ? "bounded"
                                          : sieve_mode == "small"    ? "small"
                                                                     : "large";
  else if (kappa->parsed()) cfg.experiment = "kappa";
  else if (ek->parsed()) cfg.experiment = "ek";
  else if (baseline->parsed()) cfg.experiment = "baseline";
  else if (ball->parsed()) cfg.experiment = "ball";

  return finish(gsieve::run_experiment(cfg));
}
