#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "qpan/sbm.hpp"
#include "qpan/solvers.hpp"

using namespace qpan;

namespace {

SbmParams two_block(int n, double within, double cross) {
  SbmParams p;
  p.n = n;
  p.k = 2;
  p.p = {0.5, 0.5};
  p.d = {{within, cross}, {cross, within}};
  return p;
}

double cross_density(const PlantedGraph& pg, int c1, int c2) {
  std::vector<int> a, b;
  for (int i = 0; i < pg.graph.node_count(); ++i) {
    if (pg.labels[i] == c1) a.push_back(i);
    if (pg.labels[i] == c2) b.push_back(i);
  }
  std::size_t edges = 0;
  for (int u : a) {
    for (int v : b) {
      if (pg.graph.has_edge(u, v)) ++edges;
    }
  }
  return static_cast<double>(edges) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

TEST_CASE("sbm degenerate matrices") {
  SbmParams zero = two_block(30, 0.0, 0.0);
  PlantedGraph g0 = sample_sbm(zero, 1);
  CHECK(g0.graph.edge_count() == 0);

  SbmParams one = two_block(30, 1.0, 1.0);
  PlantedGraph g1 = sample_sbm(one, 1);
  CHECK(g1.graph.edge_count() == 30u * 29u / 2u);
}

TEST_CASE("sbm determinism") {
  SbmParams p = two_block(50, 0.5, 0.1);
  PlantedGraph a = sample_sbm(p, 9);
  PlantedGraph b = sample_sbm(p, 9);
  CHECK(a.labels == b.labels);
  CHECK(a.graph.edge_count() == b.graph.edge_count());
}

TEST_CASE("sbm parameter validation") {
  SbmParams bad = two_block(10, 0.5, 0.1);
  bad.p = {0.7, 0.4};
  CHECK_THROWS_AS(sample_sbm(bad, 0), std::invalid_argument);

  SbmParams asym = two_block(10, 0.5, 0.1);
  asym.d[0][1] = 0.3;
  CHECK_THROWS_AS(sample_sbm(asym, 0), std::invalid_argument);

  SbmParams range = two_block(10, 1.5, 0.1);
  CHECK_THROWS_AS(sample_sbm(range, 0), std::invalid_argument);
}

TEST_CASE("sbm empirical densities concentrate") {
  SbmParams p = two_block(400, 0.5, 0.1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    PlantedGraph pg = sample_sbm(p, seed);
    Condition4Report rep = check_condition4(pg);
    REQUIRE(rep.defined[0]);
    REQUIRE(rep.defined[1]);
    CHECK(std::abs(rep.within_density[0] - 0.5) < 0.05);
    CHECK(std::abs(rep.within_density[1] - 0.5) < 0.05);
    CHECK(std::abs(cross_density(pg, 0, 1) - 0.1) < 0.03);
  }
}

TEST_CASE("sbm edge count matches its conditional mean") {
  SbmParams p = two_block(60, 0.6, 0.15);
  double sum_diff = 0.0;
  double sum_var = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PlantedGraph pg = sample_sbm(p, seed);
    double expected = 0.0;
    double var = 0.0;
    for (int u = 0; u < p.n; ++u) {
      for (int v = u + 1; v < p.n; ++v) {
        double prob = p.d[pg.labels[u]][pg.labels[v]];
        expected += prob;
        var += prob * (1.0 - prob);
      }
    }
    sum_diff += static_cast<double>(pg.graph.edge_count()) - expected;
    sum_var += var;
  }
  CHECK(std::abs(sum_diff) <= 3.0 * std::sqrt(sum_var));
}

TEST_CASE("condition 4 on a single community fails at equality") {
  SbmParams p;
  p.n = 40;
  p.k = 1;
  p.p = {1.0};
  p.d = {{0.5}};
  PlantedGraph pg = sample_sbm(p, 3);
  Condition4Report rep = check_condition4(pg);
  CHECK(rep.defined[0]);
  CHECK(rep.margins[0] == 0.0);  // d(G) equals the within density exactly
  CHECK_FALSE(rep.holds);
}

TEST_CASE("condition 4 holds on an assortative model") {
  PlantedGraph pg = sample_sbm(two_block(400, 0.5, 0.1), 11);
  Condition4Report rep = check_condition4(pg);
  CHECK(rep.holds);
  CHECK(rep.margins[0] > 0.0);
  CHECK(rep.margins[1] > 0.0);
}

TEST_CASE("condition 4 fails on a sparse diagonal block") {
  SbmParams p;
  p.n = 300;
  p.k = 2;
  p.p = {0.5, 0.5};
  p.d = {{0.05, 0.3}, {0.3, 0.6}};
  PlantedGraph pg = sample_sbm(p, 5);
  Condition4Report rep = check_condition4(pg);
  CHECK_FALSE(rep.holds);
  CHECK(rep.margins[0] < 0.0);  // the sparse block sits below the mean
  CHECK(rep.margins[1] > 0.0);
}

TEST_CASE("condition 4 flags undersized communities") {
  PlantedGraph pg;
  pg.graph = Graph(3);
  pg.graph.add_edge(0, 1);
  pg.labels = {0, 0, 1};
  Condition4Report rep = check_condition4(pg);
  CHECK(rep.defined[0]);
  CHECK_FALSE(rep.defined[1]);
  CHECK(std::isnan(rep.margins[1]));
}

TEST_CASE("expected-L corner minimum: one community") {
  ExpectedLInstance inst;
  inst.a = {3.0};
  inst.b = {4.0};
  inst.d_matrix = {{0.7}};
  inst.density = 0.3;
  CornerMinResult r = expected_l_corner_min(inst);
  CHECK(r.subset == std::vector<int>{0});
  CHECK(r.value == Catch::Approx(3.0 * 4.0 * (0.3 - 0.7)).margin(1e-12));
}

TEST_CASE("expected-L corner minimum: all corners non-negative") {
  ExpectedLInstance inst;
  inst.a = {3.0, 5.0};
  inst.b = {4.0, 2.0};
  inst.d_matrix = {{0.1, 0.2}, {0.2, 0.3}};
  inst.density = 0.5;  // d - D_ij > 0 everywhere
  CornerMinResult r = expected_l_corner_min(inst);
  CHECK(r.subset.empty());
  CHECK(r.value == 0.0);
}

TEST_CASE("expected-L corner minimum: size guard") {
  ExpectedLInstance inst;
  inst.a.assign(21, 1.0);
  inst.b.assign(21, 1.0);
  inst.d_matrix.assign(21, std::vector<double>(21, 0.5));
  inst.density = 0.2;
  CHECK_THROWS_AS(expected_l_corner_min(inst), GuardError);
}

TEST_CASE("corner minimum equals a dense grid search for k = 2") {
  Rng rng(77, "test.grid");
  for (int trial = 0; trial < 10; ++trial) {
    ExpectedLInstance inst;
    inst.a = {2.0 + 8.0 * rng.next_double(), 2.0 + 8.0 * rng.next_double()};
    inst.b = {2.0 + 8.0 * rng.next_double(), 2.0 + 8.0 * rng.next_double()};
    double q = 0.2 * rng.next_double();
    inst.d_matrix = {{0.4 + 0.5 * rng.next_double(), q},
                     {q, 0.4 + 0.5 * rng.next_double()}};
    inst.density = 0.2 + 0.15 * rng.next_double();

    CornerMinResult corner = expected_l_corner_min(inst);

    // 21 points per axis over the continuous box.
    double grid_min = 0.0;
    const int steps = 20;
    for (int x0 = 0; x0 <= steps; ++x0) {
      for (int x1 = 0; x1 <= steps; ++x1) {
        for (int y0 = 0; y0 <= steps; ++y0) {
          for (int y1 = 0; y1 <= steps; ++y1) {
            double xs[2] = {inst.a[0] * x0 / steps, inst.a[1] * x1 / steps};
            double ys[2] = {inst.b[0] * y0 / steps, inst.b[1] * y1 / steps};
            double v = 0.0;
            for (int i = 0; i < 2; ++i) {
              for (int j = 0; j < 2; ++j) {
                v += xs[i] * ys[j] * (inst.density - inst.d_matrix[i][j]);
              }
            }
            grid_min = std::min(grid_min, v);
          }
        }
      }
    }
    CHECK(corner.value == Catch::Approx(grid_min).margin(1e-9));
  }
}

TEST_CASE("corner dominance over random box samples") {
  // No sampled point of the continuous box beats the corner minimum.
  Rng rng(123, "test.box");
  int instances = 0;
  while (instances < 100) {
    int k = 2 + static_cast<int>(rng.next_below(3));  // k in [2, 4]
    ExpectedLInstance inst;
    for (int i = 0; i < k; ++i) {
      inst.a.push_back(2.0 + 10.0 * rng.next_double());
      inst.b.push_back(2.0 + 10.0 * rng.next_double());
    }
    inst.d_matrix.assign(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
      inst.d_matrix[i][i] = 0.4 + 0.4 * rng.next_double();
      for (int j = i + 1; j < k; ++j) {
        double q = 0.2 * rng.next_double();
        inst.d_matrix[i][j] = inst.d_matrix[j][i] = q;
      }
    }
    inst.density = 0.15 + 0.15 * rng.next_double();
    bool cond4 = true;
    for (int i = 0; i < k; ++i) {
      if (!(inst.density - inst.d_matrix[i][i] < 0.0)) cond4 = false;
    }
    if (!cond4) continue;
    ++instances;

    CornerMinResult corner = expected_l_corner_min(inst);
    CHECK(corner.value < 0.0);
    CHECK_FALSE(corner.subset.empty());

    std::vector<double> xs(k), ys(k);
    for (int sample = 0; sample < 10000; ++sample) {
      double v = 0.0;
      for (int i = 0; i < k; ++i) {
        xs[i] = inst.a[i] * rng.next_double();
        ys[i] = inst.b[i] * rng.next_double();
      }
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          v += xs[i] * ys[j] * (inst.density - inst.d_matrix[i][j]);
        }
      }
      if (v < corner.value - 1e-9) {
        FAIL("box sample below the corner minimum");
      }
    }
  }
}

TEST_CASE("community overlap") {
  CHECK(community_overlap({1, 2, 3}, {3, 2, 1}).exact);
  CHECK(community_overlap({1, 2, 3}, {3, 2, 1}).jaccard == 1.0);
  CHECK(community_overlap({1, 2}, {3, 4}).jaccard == 0.0);
  CHECK_FALSE(community_overlap({1, 2}, {3, 4}).exact);
  auto half = community_overlap({1, 2}, {2, 3});
  CHECK(half.jaccard == Catch::Approx(1.0 / 3.0));
  CHECK_FALSE(half.exact);
}

TEST_CASE("sbm params json round trip") {
  SbmParams p = two_block(100, 0.55, 0.05);
  SbmParams q = sbm_params_from_json(to_json(p));
  CHECK(q.n == p.n);
  CHECK(q.k == p.k);
  CHECK(q.p == p.p);
  CHECK(q.d == p.d);

  CHECK_THROWS_AS(sbm_params_from_json(nlohmann::json::parse("{}")), IoError);
  CHECK_THROWS_AS(sbm_params_from_json(nlohmann::json::parse(
                      R"({"n":4,"k":2,"P":[0.9,0.2],"D":[[0.5,0.1],[0.1,0.5]]})")),
                  IoError);
}

TEST_CASE("label file round trip") {
  PlantedGraph pg = sample_sbm(two_block(20, 0.6, 0.1), 2);
  std::stringstream ss;
  write_labels(ss, pg);
  std::vector<int> labels = read_labels(ss, 20);
  CHECK(labels == pg.labels);

  std::stringstream missing("0 1\n");
  CHECK_THROWS_AS(read_labels(missing, 3), IoError);
}

TEST_CASE("split argmin lands on a union of split communities") {
  // Statistical property behind the detection algorithm: on an assortative
  // model the minimizer of L over the split graph is a union of whole
  // split communities (a proper, non-empty index set).
  SbmParams p;
  p.n = 420;
  p.k = 3;
  p.p = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  p.d = {{0.70, 0.05, 0.05}, {0.05, 0.50, 0.05}, {0.05, 0.05, 0.45}};

  int good = 0;
  const int trials = 10;
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    PlantedGraph pg = sample_sbm(p, seed);
    REQUIRE(check_condition4(pg).holds);
    BipartiteGraph split = random_split(pg.graph, seed + 1000);

    SolverConfig cfg;
    cfg.seed = seed;
    cfg.num_restarts = 5;
    cfg.sweeps = 600;
    SolveResult sol = solve_sa(build_regularity_qubo(split), cfg);
    SubsetPair sel = decode_assignment(split, sol.best.assignment);

    // Membership counts per community on each side.
    std::vector<int> in_x(p.k, 0), all_a(p.k, 0), in_y(p.k, 0), all_b(p.k, 0);
    for (int a = 0; a < split.part_a_size(); ++a) {
      int c = pg.labels[split.labels_a()[a]];
      ++all_a[c];
      if (sel.x.test(a)) ++in_x[c];
    }
    for (int b = 0; b < split.part_b_size(); ++b) {
      int c = pg.labels[split.labels_b()[b]];
      ++all_b[c];
      if (sel.y.test(b)) ++in_y[c];
    }
    bool union_structure = true;
    int chosen = 0;
    for (int c = 0; c < p.k; ++c) {
      bool x_all = in_x[c] == all_a[c] && all_a[c] > 0;
      bool x_none = in_x[c] == 0;
      bool y_all = in_y[c] == all_b[c] && all_b[c] > 0;
      bool y_none = in_y[c] == 0;
      if (x_all && y_all) {
        ++chosen;
      } else if (!(x_none && y_none)) {
        union_structure = false;
      }
    }
    if (union_structure && chosen >= 1 && chosen < p.k) ++good;
  }
  CHECK(good >= 9);
}
