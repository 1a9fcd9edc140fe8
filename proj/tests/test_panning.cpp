#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "qpan/panning.hpp"
#include "qpan/sbm.hpp"

using namespace qpan;
using test_helpers::random_bigraph;

namespace {

SolverFn sa_solver() {
  return [](const QuboProblem& q, const SolverConfig& cfg) {
    return solve_sa(q, cfg);
  };
}

SolverFn exhaustive_solver() {
  return [](const QuboProblem& q, const SolverConfig& cfg) {
    return solve_exhaustive(q, cfg);
  };
}

// Contrast strong enough that the global min-L subset is the whole planted
// block with high probability (no below-average-degree community nodes).
PlantedGraph planted_two(std::uint64_t seed) {
  SbmParams p;
  p.n = 100;
  p.k = 2;
  p.p = {0.5, 0.5};
  p.d = {{0.85, 0.05}, {0.05, 0.80}};
  return sample_sbm(p, seed);
}

bool matches_a_community(const PlantedGraph& pg,
                         const std::vector<int>& found) {
  int k = 0;
  for (int l : pg.labels) k = std::max(k, l + 1);
  for (int c = 0; c < k; ++c) {
    if (community_overlap(found, pg.community(c)).exact) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("pan_once recovers a planted community") {
  SolverConfig cfg;
  cfg.num_restarts = 8;
  cfg.sweeps = 800;
  int exact = 0;
  const int trials = 5;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    PlantedGraph pg = planted_two(seed);
    cfg.seed = seed;
    PanTrajectory traj = pan_once(pg.graph, sa_solver(), cfg, seed);
    if (matches_a_community(pg, traj.community)) ++exact;
  }
  CHECK(exact >= 4);
}

TEST_CASE("pan_once on a homogeneous graph returns every node") {
  SbmParams p;
  p.n = 24;
  p.k = 1;
  p.p = {1.0};
  p.d = {{1.0}};
  PlantedGraph pg = sample_sbm(p, 4);
  SolverConfig cfg;
  PanTrajectory traj = pan_once(pg.graph, exhaustive_solver(), cfg, 4);
  CHECK(traj.community.size() == 24);
  CHECK(traj.energy_per_node == 0.0);
}

TEST_CASE("pan_once is deterministic per seed") {
  PlantedGraph pg = planted_two(7);
  SolverConfig cfg;
  cfg.num_restarts = 4;
  cfg.sweeps = 300;
  PanTrajectory a = pan_once(pg.graph, sa_solver(), cfg, 21);
  PanTrajectory b = pan_once(pg.graph, sa_solver(), cfg, 21);
  CHECK(a.community == b.community);
  REQUIRE(a.stages.size() == b.stages.size());
  for (std::size_t t = 0; t < a.stages.size(); ++t) {
    CHECK(a.stages[t].energy == b.stages[t].energy);
    CHECK(a.stages[t].density == b.stages[t].density);
  }
}

TEST_CASE("pan_once trajectory invariants") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PlantedGraph pg = planted_two(seed + 40);
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.num_restarts = 6;
    cfg.sweeps = 500;
    PanTrajectory traj = pan_once(pg.graph, sa_solver(), cfg, seed + 40);
    REQUIRE(traj.stages.size() >= 2);

    // Strictly decreasing energy per node, excluding the final evaluation.
    for (std::size_t t = 1; t + 1 < traj.stages.size(); ++t) {
      CHECK(traj.stages[t].energy_per_node <
            traj.stages[t - 1].energy_per_node);
    }
    // Shrinking node sets.
    for (std::size_t t = 1; t < traj.stages.size(); ++t) {
      CHECK(traj.stages[t].n1 <= traj.stages[t - 1].n1);
      CHECK(traj.stages[t].n2 <= traj.stages[t - 1].n2);
    }
    // Non-decreasing density on an assortative input.
    for (std::size_t t = 1; t < traj.stages.size(); ++t) {
      CHECK(traj.stages[t].density >= traj.stages[t - 1].density - 1e-9);
    }
    // First record carries the unrefined split.
    BipartiteGraph split = random_split(pg.graph, seed + 40);
    CHECK(traj.stages[0].density == split.density());
    CHECK(traj.stages[0].energy == 0.0);
  }
}

TEST_CASE("pan_all on one homogeneous community stops with all nodes") {
  SbmParams p;
  p.n = 20;
  p.k = 1;
  p.p = {1.0};
  p.d = {{1.0}};
  PlantedGraph pg = sample_sbm(p, 9);
  SolverConfig cfg;
  PanAllResult res = pan_all(pg.graph, exhaustive_solver(), cfg, 9);
  REQUIRE(res.communities.size() == 1);
  CHECK(res.communities[0].size() == 20);
}

TEST_CASE("pan_all recovers three planted communities") {
  SbmParams p;
  p.n = 200;
  p.k = 3;
  p.p = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  p.d = {{0.90, 0.05, 0.05}, {0.05, 0.75, 0.05}, {0.05, 0.05, 0.70}};

  int perfect = 0;
  const int trials = 3;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    PlantedGraph pg = sample_sbm(p, seed);
    SolverConfig cfg;
    cfg.seed = seed;
    cfg.num_restarts = 8;
    cfg.sweeps = 800;
    PanAllResult res = pan_all(pg.graph, sa_solver(), cfg, seed);
    if (res.communities.size() != 3) continue;
    std::set<int> matched;
    for (const auto& found : res.communities) {
      for (int c = 0; c < 3; ++c) {
        if (community_overlap(found, pg.community(c)).exact) matched.insert(c);
      }
    }
    if (matched.size() == 3) ++perfect;
  }
  CHECK(perfect >= 2);
}

TEST_CASE("check_regularity on degenerate graphs") {
  BipartiteGraph complete(5, 4);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 4; ++b) complete.add_edge(a, b);
  }
  RegularityVerdict v = check_regularity(complete, 0.01, exhaustive_solver(),
                                         /*solver_is_exact=*/true);
  CHECK(v.is_regular);
  CHECK(v.min_l == 0.0);
  CHECK(v.max_l == 0.0);
  CHECK(v.certified);

  BipartiteGraph edgeless(5, 4);
  RegularityVerdict v2 = check_regularity(edgeless, 0.01, exhaustive_solver(),
                                          true);
  CHECK(v2.is_regular);
}

TEST_CASE("check_regularity agrees with brute force") {
  // 7x7: |A||B| = 49 is not a power of two, so the QUBO energy and the
  // single-division L evaluation may differ in the last ulp; 1e-9 is the
  // library-wide tolerance. 8x8 exercises the exactly-representable case.
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    BipartiteGraph g = random_bigraph(7, 7, 0.5, seed + 60);
    auto brute = brute_min_max_l(g);
    for (double eps : {0.05, 0.1, 0.2, 0.3, 0.5}) {
      RegularityVerdict v = check_regularity(g, eps, exhaustive_solver(), true);
      CHECK(v.min_l == Catch::Approx(brute.min_l).margin(1e-9));
      CHECK(v.max_l == Catch::Approx(brute.max_l).margin(1e-9));
      bool expected = std::max(std::abs(v.min_l), std::abs(v.max_l)) <=
                      eps * 49.0;
      CHECK(v.is_regular == expected);
      double witness_l = std::abs(deviation_l(g, v.witness));
      CHECK(witness_l == Catch::Approx(std::max(std::abs(brute.min_l),
                                                std::abs(brute.max_l)))
                             .margin(1e-9));
    }
  }
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    BipartiteGraph g = random_bigraph(8, 8, 0.5, seed + 80);
    auto brute = brute_min_max_l(g);
    RegularityVerdict v = check_regularity(g, 0.1, exhaustive_solver(), true);
    CHECK(v.min_l == brute.min_l);  // bit-exact: d is a multiple of 1/64
    CHECK(v.max_l == brute.max_l);
  }
}

TEST_CASE("regularity verdict is monotone in epsilon") {
  BipartiteGraph g = random_bigraph(6, 8, 0.4, 3);
  bool was_regular = false;
  for (double eps : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    RegularityVerdict v = check_regularity(g, eps, exhaustive_solver(), true);
    if (was_regular) CHECK(v.is_regular);
    was_regular = v.is_regular;
  }
}

TEST_CASE("heuristic verdicts are not certified") {
  BipartiteGraph g = random_bigraph(10, 10, 0.5, 5);
  SolverFn sa = [](const QuboProblem& q, const SolverConfig&) {
    SolverConfig cfg;
    cfg.num_restarts = 4;
    cfg.sweeps = 200;
    return solve_sa(q, cfg);
  };
  RegularityVerdict v = check_regularity(g, 0.1, sa, /*solver_is_exact=*/false);
  CHECK_FALSE(v.certified);
  // A heuristic min is an upper bound on the true min (lower-bound witness
  // for irregularity).
  auto brute = brute_min_max_l(g);
  CHECK(v.min_l >= brute.min_l - 1e-12);
  CHECK(v.max_l <= brute.max_l + 1e-12);
}

TEST_CASE("check_regularity rejects non-positive epsilon") {
  BipartiteGraph g = random_bigraph(4, 4, 0.5, 1);
  CHECK_THROWS_AS(check_regularity(g, 0.0, exhaustive_solver(), true),
                  std::invalid_argument);
}

TEST_CASE("csv outputs") {
  PlantedGraph pg = planted_two(3);
  SolverConfig cfg;
  cfg.num_restarts = 4;
  cfg.sweeps = 300;
  PanTrajectory traj = pan_once(pg.graph, sa_solver(), cfg, 3);

  std::stringstream stage_csv;
  write_stage_csv(stage_csv, traj);
  std::string header;
  std::getline(stage_csv, header);
  CHECK(header == "stage,density,energy,energy_per_node");
  std::string first_row;
  std::getline(stage_csv, first_row);
  BipartiteGraph split = random_split(pg.graph, 3);
  std::stringstream expected;
  expected << 0 << "," << split.density() << "," << 0 << "," << 0;
  CHECK(first_row == expected.str());

  PanAllResult all = pan_all(pg.graph, sa_solver(), cfg, 3);
  std::stringstream round_csv;
  write_round_csv(round_csv, all);
  std::getline(round_csv, header);
  CHECK(header == "round,energy_per_node,community_size");

  std::stringstream communities;
  write_communities(communities, all);
  int lines = 0;
  std::string line;
  while (std::getline(communities, line)) ++lines;
  CHECK(lines == static_cast<int>(all.communities.size()));
}
