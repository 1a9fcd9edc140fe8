#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "qpan/qubo.hpp"

using namespace qpan;
using test_helpers::random_assignment;
using test_helpers::random_bigraph;
using test_helpers::random_qubo;

TEST_CASE("energy evaluation") {
  QuboProblem q(1);
  q.set_linear(0, 2.0);
  CHECK(q.energy({0}) == 0.0);
  CHECK(q.energy({1}) == 2.0);

  QuboProblem q2(3);
  q2.set_offset(0.5);
  CHECK(q2.energy({0, 0, 0}) == 0.5);

  CHECK_THROWS_AS(q2.energy({0, 0}), std::invalid_argument);
}

TEST_CASE("diagonal terms fold into the linear part") {
  QuboProblem q(2);
  q.add_quadratic(1, 1, 3.0);
  q.add_quadratic(0, 1, -1.0);
  CHECK(q.linear(1) == 3.0);
  CHECK(q.quadratic(0, 1) == -1.0);
  CHECK(q.quadratic(1, 0) == -1.0);
  CHECK(q.energy({1, 1}) == 2.0);
}

TEST_CASE("regularity qubo coefficients") {
  BipartiteGraph edgeless(2, 2);
  QuboProblem q0 = build_regularity_qubo(edgeless);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) CHECK(q0.quadratic(a, 2 + b) == 0.0);
  }

  BipartiteGraph complete(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) complete.add_edge(a, b);
  }
  QuboProblem q1 = build_regularity_qubo(complete);
  CHECK(q1.quadratic_terms().empty());

  BipartiteGraph s(2, 2);
  s.add_edge(0, 0);
  QuboProblem q = build_regularity_qubo(s);
  CHECK(q.quadratic(0, 2) == -0.75);
  CHECK(q.quadratic(0, 3) == 0.25);
  CHECK(q.quadratic(1, 2) == 0.25);
  CHECK(q.quadratic(1, 3) == 0.25);
  CHECK(q.energy({1, 0, 1, 0}) == -0.75);

  // Linear terms and offset are zero; within-part coefficients are zero.
  for (int i = 0; i < 4; ++i) CHECK(q.linear(i) == 0.0);
  CHECK(q.offset() == 0.0);
  CHECK(q.quadratic(0, 1) == 0.0);
  CHECK(q.quadratic(2, 3) == 0.0);

  QuboProblem qmax = build_regularity_qubo(s, Sense::maximize);
  CHECK(qmax.quadratic(0, 2) == 0.75);
  CHECK(qmax.energy({1, 0, 1, 0}) == 0.75);
}

TEST_CASE("regularity qubo energy equals deviation_l on random draws") {
  // Cross-module oracle over 10^4 random (graph, assignment) pairs.
  int checked = 0;
  for (std::uint64_t g_seed = 0; g_seed < 100; ++g_seed) {
    int na = 2 + static_cast<int>(g_seed % 7);
    int nb = 2 + static_cast<int>((g_seed / 7) % 7);
    BipartiteGraph g = random_bigraph(na, nb, 0.4, g_seed);
    QuboProblem q = build_regularity_qubo(g);
    for (std::uint64_t s_seed = 0; s_seed < 100; ++s_seed) {
      auto s = random_assignment(na + nb, g_seed * 1000 + s_seed);
      SubsetPair p = decode_assignment(g, s);
      CHECK(std::abs(q.energy(s) - deviation_l(g, p)) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 10000);
}

TEST_CASE("regularity qubo exhaustive equality for small graphs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    int na = (seed == 4) ? 6 : 3;
    int nb = (seed == 4) ? 6 : 3;
    BipartiteGraph g = random_bigraph(na, nb, 0.5, seed);
    QuboProblem q = build_regularity_qubo(g);
    int n = na + nb;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
      std::vector<std::uint8_t> s(n);
      for (int i = 0; i < n; ++i) s[i] = (mask >> i) & 1ULL;
      CHECK(std::abs(q.energy(s) - deviation_l(g, decode_assignment(g, s))) <
            1e-9);
    }
  }
}

TEST_CASE("flip delta matches full re-evaluation") {
  QuboProblem q = random_qubo(20, 99);
  Rng rng(7, "test.flips");
  auto s = random_assignment(20, 1);
  for (int trial = 0; trial < 10000; ++trial) {
    int i = static_cast<int>(rng.next_below(20));
    double before = q.energy(s);
    double predicted = q.flip_delta(s, i);
    s[i] ^= 1;
    double after = q.energy(s);
    CHECK(std::abs((after - before) - predicted) < 1e-9);
  }
}

TEST_CASE("ising conversion: single variable") {
  QuboProblem q(1);
  q.set_linear(0, 1.0);
  IsingProblem p = qubo_to_ising(q);
  CHECK(p.h[0] == 0.5);
  CHECK(p.offset == 0.5);
  CHECK(p.energy({-1}) == 0.0);
  CHECK(p.energy({1}) == 1.0);
}

TEST_CASE("ising conversion: zero problem stays zero") {
  QuboProblem q(3);
  IsingProblem p = qubo_to_ising(q);
  CHECK(p.offset == 0.0);
  for (double h : p.h) CHECK(h == 0.0);
  CHECK(p.j.empty());
}

TEST_CASE("ising energy basics") {
  IsingProblem p;
  p.n = 2;
  p.h = {1.0, -1.0};
  CHECK(p.energy({1, 1}) == 0.0);

  IsingProblem c;
  c.n = 2;
  c.h = {0.0, 0.0};
  c.j = {{0, 1, 1.0}};
  CHECK(c.energy({1, -1}) == -1.0);

  CHECK_THROWS_AS(c.energy({1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(c.energy({1}), std::invalid_argument);
}

TEST_CASE("qubo/ising full-spectrum equality and argmin preservation") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    QuboProblem q = random_qubo(10, seed);
    q.set_offset(0.3);
    IsingProblem p = qubo_to_ising(q);
    QuboProblem q2 = ising_to_qubo(p);

    double q_min = 1e300, p_min = 1e300;
    std::vector<std::uint64_t> q_argmin, p_argmin;
    for (std::uint64_t mask = 0; mask < 1024; ++mask) {
      std::vector<std::uint8_t> b(10);
      for (int i = 0; i < 10; ++i) b[i] = (mask >> i) & 1ULL;
      double eq = q.energy(b);
      double ep = p.energy(bits_to_spins(b));
      CHECK(std::abs(eq - ep) < 1e-9);
      CHECK(std::abs(eq - q2.energy(b)) < 1e-9);
      if (eq < q_min - 1e-12) {
        q_min = eq;
        q_argmin.assign(1, mask);
      } else if (std::abs(eq - q_min) <= 1e-12) {
        q_argmin.push_back(mask);
      }
      if (ep < p_min - 1e-12) {
        p_min = ep;
        p_argmin.assign(1, mask);
      } else if (std::abs(ep - p_min) <= 1e-12) {
        p_argmin.push_back(mask);
      }
    }
    CHECK(q_argmin == p_argmin);
  }
}

TEST_CASE("qubo json round trip") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    QuboProblem q = random_qubo(8, seed);
    q.set_offset(static_cast<double>(seed) * 0.25);
    QuboProblem r = qubo_from_json(to_json(q));
    CHECK(r.variable_count() == q.variable_count());
    auto s = random_assignment(8, seed + 50);
    CHECK(r.energy(s) == q.energy(s));
  }
}

TEST_CASE("qubo json rejects malformed documents") {
  CHECK_THROWS_AS(qubo_from_json(nlohmann::json::parse("{}")), IoError);
  CHECK_THROWS_AS(
      qubo_from_json(nlohmann::json::parse(
          R"({"n":2,"linear":[0.0],"quadratic":[],"offset":0.0})")),
      IoError);
  CHECK_THROWS_AS(
      qubo_from_json(nlohmann::json::parse(
          R"({"n":2,"linear":[0,0],"quadratic":[[0,1]],"offset":0})")),
      IoError);
}
