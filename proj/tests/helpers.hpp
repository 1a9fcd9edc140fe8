#pragma once

#include <cstdint>
#include <vector>

#include "qpan/graph.hpp"
#include "qpan/qubo.hpp"
#include "qpan/rng.hpp"

namespace test_helpers {

/// G(nA, nB, p) random bipartite graph.
inline qpan::BipartiteGraph random_bigraph(int na, int nb, double p,
                                           std::uint64_t seed) {
  qpan::BipartiteGraph g(na, nb);
  qpan::Rng rng(seed, "test.bigraph");
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      if (rng.bernoulli(p)) g.add_edge(a, b);
    }
  }
  return g;
}

/// Dense random QUBO with coefficients uniform in [-1, 1].
inline qpan::QuboProblem random_qubo(int n, std::uint64_t seed,
                                     bool with_linear = true) {
  qpan::QuboProblem q(n);
  qpan::Rng rng(seed, "test.qubo");
  for (int i = 0; i < n; ++i) {
    if (with_linear) q.set_linear(i, 2.0 * rng.next_double() - 1.0);
    for (int j = i + 1; j < n; ++j) {
      q.add_quadratic(i, j, 2.0 * rng.next_double() - 1.0);
    }
  }
  return q;
}

inline std::vector<std::uint8_t> random_assignment(int n, std::uint64_t seed) {
  std::vector<std::uint8_t> s(n);
  qpan::Rng rng(seed, "test.assignment");
  for (int i = 0; i < n; ++i) s[i] = rng.next_bool() ? 1 : 0;
  return s;
}

/// Independent oracle: minimum energy by plain enumeration through energy().
inline double enumerate_min_energy(const qpan::QuboProblem& q) {
  int n = q.variable_count();
  double best = 0.0;
  bool first = true;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::vector<std::uint8_t> s(n);
    for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1ULL;
    double e = q.energy(s);
    if (first || e < best) {
      best = e;
      first = false;
    }
  }
  return best;
}

}  // namespace test_helpers
