#include "gsieve/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "gsieve/rng.hpp"
#include "parallel.hpp"

namespace gsieve {

using detail::chunked_sum;
using detail::for_each_chunk;
using detail::kChunk;

double DistributionVector::sum() const {
  return chunked_sum(values.size(), kChunk, 1, [&](uint64_t i) { return values[i]; });
}

double DistributionVector::max_deviation_from_uniform() const {
  double u = 1.0 / static_cast<double>(values.size());
  double dev = 0.0;
  for (double v : values) dev = std::max(dev, std::fabs(v - u));
  return dev;
}

DistributionVector uniform_distribution(const FiniteQuotient& q) {
  DistributionVector v;
  v.quotient = &q;
  v.values.assign(q.order(), 1.0 / static_cast<double>(q.order()));
  return v;
}

DistributionVector point_mass(const FiniteQuotient& q, uint32_t index) {
  DistributionVector v;
  v.quotient = &q;
  v.values.assign(q.order(), 0.0);
  v.values.at(index) = 1.0;
  return v;
}

void markov_apply(const FiniteQuotient& q, const std::vector<double>& in,
                  std::vector<double>& out, int workers) {
  if (in.size() != q.order()) throw DimensionMismatch("vector size does not match quotient");
  out.resize(in.size());
  const size_t ngen = q.generator_count();
  const double inv = 1.0 / static_cast<double>(ngen);
  const uint32_t* action = q.action_table().data();
  for_each_chunk(q.order(), kChunk, workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
    for (uint64_t e = lo; e < hi; ++e) {
      const uint32_t* row = action + e * ngen;
      double acc = 0.0;
      for (size_t g = 0; g < ngen; ++g) acc += in[row[g]];
      out[e] = acc * inv;
    }
  });
}

DistributionVector markov_apply(const FiniteQuotient& q, const DistributionVector& v,
                                int workers) {
  DistributionVector out;
  out.quotient = &q;
  markov_apply(q, v.values, out.values, workers);
  return out;
}

bool bipartite_check(const FiniteQuotient& q) {
  const size_t ngen = q.generator_count();
  std::vector<int8_t> color(q.order(), -1);
  std::vector<uint32_t> stack;
  color[q.identity_index()] = 0;
  stack.push_back(q.identity_index());
  while (!stack.empty()) {
    uint32_t e = stack.back();
    stack.pop_back();
    for (size_t g = 0; g < ngen; ++g) {
      uint32_t ne = q.act(e, static_cast<uint32_t>(g));
      if (ne == e) return false;  // self-loop
      if (color[ne] == -1) {
        color[ne] = static_cast<int8_t>(1 - color[e]);
        stack.push_back(ne);
      } else if (color[ne] == color[e]) {
        return false;
      }
    }
  }
  return true;
}

namespace {

// Shared power-iteration driver for M^2 on mean-zero functions. `apply` must
// compute out = M in on vectors of length n.
template <class ApplyFn>
SpectrumReport power_iterate(uint64_t n, double tol, uint64_t max_iter, int workers,
                             bool bipartite, std::vector<uint64_t> primes, ApplyFn&& apply) {
  SpectrumReport rep;
  rep.primes = std::move(primes);
  rep.tolerance = tol;
  rep.bipartite = bipartite;
  if (n <= 1) {
    rep.trivial = true;
    rep.converged = true;
    rep.spectral_radius = 0.0;  // empty mean-zero space
    return rep;
  }

  std::vector<double> v(n), w(n), tmp(n);
  for_each_chunk(n, kChunk, workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
    for (uint64_t i = lo; i < hi; ++i) v[i] = uniform_double(splitmix64(i + 12345)) - 0.5;
  });

  auto project_mean_zero = [&](std::vector<double>& x) {
    double mean = chunked_sum(n, kChunk, workers, [&](uint64_t i) { return x[i]; }) /
                  static_cast<double>(n);
    for_each_chunk(n, kChunk, workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
      for (uint64_t i = lo; i < hi; ++i) x[i] -= mean;
    });
  };
  auto norm2 = [&](const std::vector<double>& x) {
    return std::sqrt(chunked_sum(n, kChunk, workers, [&](uint64_t i) { return x[i] * x[i]; }));
  };
  auto scale = [&](std::vector<double>& x, double s) {
    for_each_chunk(n, kChunk, workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
      for (uint64_t i = lo; i < hi; ++i) x[i] *= s;
    });
  };

  project_mean_zero(v);
  double nv = norm2(v);
  scale(v, 1.0 / nv);

  double rho_prev = -1.0;
  for (uint64_t it = 1; it <= max_iter; ++it) {
    apply(v, tmp);
    apply(tmp, w);
    project_mean_zero(w);
    double lambda = chunked_sum(n, kChunk, workers, [&](uint64_t i) { return v[i] * w[i]; });
    double rho = std::sqrt(std::max(lambda, 0.0));
    rep.iterations = it;
    rep.spectral_radius = std::clamp(rho, 0.0, 1.0);
    if (rho_prev >= 0.0) {
      rep.residual = std::fabs(rho - rho_prev);
      if (rep.residual <= tol) {
        rep.converged = true;
        return rep;
      }
    }
    rho_prev = rho;
    double nw = norm2(w);
    if (nw == 0.0) {
      // M^2 annihilated the vector; spectral radius 0 on this subspace.
      rep.spectral_radius = 0.0;
      rep.residual = 0.0;
      rep.converged = true;
      return rep;
    }
    scale(w, 1.0 / nw);
    v.swap(w);
  }
  rep.converged = false;
  return rep;
}

}  // namespace

SpectrumReport spectral_radius(const FiniteQuotient& q, double tol, uint64_t max_iter,
                               int workers) {
  bool bip = q.order() > 1 && bipartite_check(q);
  return power_iterate(
      q.order(), tol, max_iter, workers, bip, q.primes(),
      [&](const std::vector<double>& in, std::vector<double>& out) {
        markov_apply(q, in, out, workers);
      });
}

DistributionVector exact_walk_distribution(const FiniteQuotient& q, int n, int workers) {
  if (n < 0) throw Error("walk length must be non-negative");
  DistributionVector dist = point_mass(q, q.identity_index());
  std::vector<double> scratch(q.order());
  for (int step = 0; step < n; ++step) {
    markov_apply(q, dist.values, scratch, workers);
    dist.values.swap(scratch);
  }
  return dist;
}

std::vector<AuditRow> equidistribution_audit(const FiniteQuotient& q, int n_max,
                                             const SpectrumReport& spectrum, int workers) {
  if (!spectrum.converged)
    throw NoConvergence("spectral radius did not converge; audit bound unavailable",
                        spectrum.spectral_radius, spectrum.residual);
  std::vector<AuditRow> rows;
  rows.reserve(static_cast<size_t>(n_max) + 1);
  double inflate = 1.0 + 10.0 * spectrum.tolerance;
  DistributionVector dist = point_mass(q, q.identity_index());
  std::vector<double> scratch(q.order());
  double bound = inflate;  // rho^0 * (1 + 10 tol)
  for (int n = 0; n <= n_max; ++n) {
    AuditRow row;
    row.n = n;
    row.max_deviation = dist.max_deviation_from_uniform();
    row.bound = bound;
    row.pass = row.max_deviation <= row.bound;
    rows.push_back(row);
    bound *= spectrum.spectral_radius;
    markov_apply(q, dist.values, scratch, workers);
    dist.values.swap(scratch);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Product-space walk (pairs of primes)

namespace {

// Per-generator translation columns, copied out of the action table so the
// product loop reads two flat arrays.
std::vector<std::vector<uint32_t>> generator_columns(const FiniteQuotient& q) {
  std::vector<std::vector<uint32_t>> cols(q.generator_count());
  for (size_t g = 0; g < q.generator_count(); ++g) {
    cols[g].resize(q.order());
    for (uint64_t e = 0; e < q.order(); ++e)
      cols[g][e] = q.act(static_cast<uint32_t>(e), static_cast<uint32_t>(g));
  }
  return cols;
}

void product_apply(const std::vector<std::vector<uint32_t>>& ap,
                   const std::vector<std::vector<uint32_t>>& aq, uint64_t np, uint64_t nq,
                   const std::vector<double>& in, std::vector<double>& out, int workers) {
  const size_t ngen = ap.size();
  const double inv = 1.0 / static_cast<double>(ngen);
  for_each_chunk(np, 64, workers, [&](uint64_t, uint64_t lo, uint64_t hi) {
    for (uint64_t i = lo; i < hi; ++i) {
      double* orow = out.data() + i * nq;
      for (uint64_t j = 0; j < nq; ++j) orow[j] = 0.0;
      for (size_t g = 0; g < ngen; ++g) {
        const double* irow = in.data() + static_cast<uint64_t>(ap[g][i]) * nq;
        const uint32_t* jmap = aq[g].data();
        for (uint64_t j = 0; j < nq; ++j) orow[j] += irow[jmap[j]];
      }
      for (uint64_t j = 0; j < nq; ++j) orow[j] *= inv;
    }
  });
}

}  // namespace

std::vector<double> product_walk_masses(const FiniteQuotient& qp, const FiniteQuotient& qq,
                                        const std::vector<uint8_t>& mask_p,
                                        const std::vector<uint8_t>& mask_q, int n_max,
                                        int workers) {
  if (qp.generator_count() != qq.generator_count())
    throw DimensionMismatch("quotients come from different generating sets");
  if (mask_p.size() != qp.order() || mask_q.size() != qq.order())
    throw DimensionMismatch("mask size does not match quotient order");
  const uint64_t np = qp.order(), nq = qq.order();
  auto ap = generator_columns(qp);
  auto aq = generator_columns(qq);

  std::vector<uint32_t> q_hits;
  for (uint32_t j = 0; j < nq; ++j)
    if (mask_q[j]) q_hits.push_back(j);

  std::vector<double> dist(np * nq, 0.0), scratch(np * nq);
  dist[0] = 1.0;  // identity pair is index (0, 0)

  auto mass = [&]() {
    return chunked_sum(np, 64, workers, [&](uint64_t i) {
      if (!mask_p[i]) return 0.0;
      const double* row = dist.data() + i * nq;
      double s = 0.0;
      for (uint32_t j : q_hits) s += row[j];
      return s;
    });
  };

  std::vector<double> masses;
  masses.reserve(static_cast<size_t>(n_max) + 1);
  masses.push_back(mass());
  for (int n = 1; n <= n_max; ++n) {
    product_apply(ap, aq, np, nq, dist, scratch, workers);
    dist.swap(scratch);
    masses.push_back(mass());
  }
  return masses;
}

SpectrumReport product_spectral_radius(const FiniteQuotient& qp, const FiniteQuotient& qq,
                                       double tol, uint64_t max_iter, int workers) {
  if (qp.generator_count() != qq.generator_count())
    throw DimensionMismatch("quotients come from different generating sets");
  const uint64_t np = qp.order(), nq = qq.order();
  auto ap = generator_columns(qp);
  auto aq = generator_columns(qq);
  std::vector<uint64_t> primes = qp.primes();
  primes.insert(primes.end(), qq.primes().begin(), qq.primes().end());
  std::sort(primes.begin(), primes.end());
  return power_iterate(np * nq, tol, max_iter, workers, false, std::move(primes),
                       [&](const std::vector<double>& in, std::vector<double>& out) {
                         product_apply(ap, aq, np, nq, in, out, workers);
                       });
}

}  // namespace gsieve
