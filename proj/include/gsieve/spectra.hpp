#pragma once

// The Markov averaging operator on a finite quotient, its spectral radius on
// mean-zero functions, exact walk distributions, and equidistribution audits.
//
// For a symmetric generating set S the operator
//   (M f)(x) = (1/|S|) sum_{s in S} f(xs)
// is self-adjoint; its restriction to mean-zero functions has spectral
// radius rho < 1 exactly when the Cayley graph is connected and not
// bipartite. Evolving the walk distribution and applying M to a function are
// the same computation because S = S^{-1}.

#include <cstdint>
#include <vector>

#include "gsieve/quotients.hpp"

namespace gsieve {

struct DistributionVector {
  const FiniteQuotient* quotient = nullptr;
  std::vector<double> values;

  double sum() const;
  /// Largest |v_i - 1/order| over all elements.
  double max_deviation_from_uniform() const;
};

DistributionVector uniform_distribution(const FiniteQuotient& q);
DistributionVector point_mass(const FiniteQuotient& q, uint32_t index);

/// out = M in. Parallelizes over element slices.
void markov_apply(const FiniteQuotient& q, const std::vector<double>& in,
                  std::vector<double>& out, int workers = 1);
DistributionVector markov_apply(const FiniteQuotient& q, const DistributionVector& v,
                                int workers = 1);

struct SpectrumReport {
  std::vector<uint64_t> primes;
  double spectral_radius = 0.0;
  uint64_t iterations = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool converged = false;
  bool bipartite = false;
  bool trivial = false;  // order-1 quotient; rho = 0 by convention
};

/// Power iteration on M^2 restricted to mean-zero functions. Squaring makes
/// the target eigenvalue non-negative, so a bipartite -1 shows up as rho = 1.
/// A non-converged run returns its best estimate with converged = false.
SpectrumReport spectral_radius(const FiniteQuotient& q, double tol = 1e-10,
                               uint64_t max_iter = 100000, int workers = 1);

/// BFS 2-coloring of the Cayley graph; self-loops (a generator reducing to
/// the identity) make the graph non-bipartite.
bool bipartite_check(const FiniteQuotient& q);

/// Exact law of the n-th step of the walk: M^n applied to the point mass at
/// the identity. No sampling.
DistributionVector exact_walk_distribution(const FiniteQuotient& q, int n, int workers = 1);

struct AuditRow {
  int n;
  double max_deviation;
  double bound;  // rho^n * (1 + 10 tol)
  bool pass;
};

/// Per-step check of max_g |mu_n(g) - 1/|G|| <= rho^n (1 + 10 tol).
/// Throws NoConvergence when the spectrum report did not converge.
std::vector<AuditRow> equidistribution_audit(const FiniteQuotient& q, int n_max,
                                             const SpectrumReport& spectrum,
                                             int workers = 1);

/// Exact joint masses of the diagonal walk on the product index space of two
/// single-prime quotients: result[n] = P(pi_p(g_n) in mask_p and
/// pi_q(g_n) in mask_q) for n = 0..n_max. The pair quotient itself is never
/// materialized; only the two single-prime action tables are used.
std::vector<double> product_walk_masses(const FiniteQuotient& qp, const FiniteQuotient& qq,
                                        const std::vector<uint8_t>& mask_p,
                                        const std::vector<uint8_t>& mask_q, int n_max,
                                        int workers = 1);

/// Spectral radius of the diagonal walk operator on the full product space
/// of two single-prime quotients (power iteration on M^2, as above).
SpectrumReport product_spectral_radius(const FiniteQuotient& qp, const FiniteQuotient& qq,
                                       double tol = 1e-10, uint64_t max_iter = 100000,
                                       int workers = 1);

}  // namespace gsieve
