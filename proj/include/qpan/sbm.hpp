/// Stochastic block models, planted-community scoring, and the expected-L
/// corner optimizer.
///
/// SBM(n, k, P, D): node labels are sampled i.i.d. from P, then each
/// unordered pair {u, v} is linked independently with probability
/// D[label(u)][label(v)].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpan/errors.hpp"
#include "qpan/graph.hpp"
#include "qpan/rng.hpp"

namespace qpan {

struct SbmParams {
  int n = 0;
  int k = 0;
  std::vector<double> p;               // label distribution over [k]
  std::vector<std::vector<double>> d;  // symmetric k x k link probabilities

  void validate() const {
    if (n < 0 || k < 1) throw std::invalid_argument("need n >= 0 and k >= 1");
    if (static_cast<int>(p.size()) != k) {
      throw std::invalid_argument("P must have k entries");
    }
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0) throw std::invalid_argument("P entries must be >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw std::invalid_argument("P must sum to 1");
    }
    if (static_cast<int>(d.size()) != k) {
      throw std::invalid_argument("D must be k x k");
    }
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(d[i].size()) != k) {
        throw std::invalid_argument("D must be k x k");
      }
      for (int j = 0; j < k; ++j) {
        if (d[i][j] < 0.0 || d[i][j] > 1.0) {
          throw std::invalid_argument("D entries must lie in [0,1]");
        }
        if (std::abs(d[i][j] - d[j][i]) > 1e-12) {
          throw std::invalid_argument("D must be symmetric");
        }
      }
    }
  }
};

struct PlantedGraph {
  Graph graph;
  std::vector<int> labels;  // node index -> community in [0, k)

  std::vector<int> community(int c) const {
    std::vector<int> ids;
    for (int i = 0; i < graph.node_count(); ++i) {
      if (labels[i] == c) ids.push_back(graph.node_ids()[i]);
    }
    return ids;
  }
};

inline PlantedGraph sample_sbm(const SbmParams& params, std::uint64_t seed) {
  params.validate();
  PlantedGraph pg;
  pg.labels.resize(params.n);

  Rng label_rng(seed, "sbm.labels");
  std::vector<double> cdf(params.k);
  double acc = 0.0;
  for (int c = 0; c < params.k; ++c) {
    acc += params.p[c];
    cdf[c] = acc;
  }
  for (int i = 0; i < params.n; ++i) {
    double u = label_rng.next_double();
    int c = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    pg.labels[i] = std::min(c, params.k - 1);
  }

  pg.graph = Graph(params.n);
  Rng edge_rng(seed, "sbm.edges");
  for (int u = 0; u < params.n; ++u) {
    for (int v = u + 1; v < params.n; ++v) {
      if (edge_rng.bernoulli(params.d[pg.labels[u]][pg.labels[v]])) {
        pg.graph.add_edge(u, v);
      }
    }
  }
  return pg;
}

/// Empirical check of the panning precondition: every community's internal
/// density must exceed the graph's mean density, i.e. d(G) - D_ii < 0.
/// margins[i] = within_density[i] - d(G), so a failing community shows a
/// non-positive margin. Communities with fewer than 2 nodes have no internal
/// density and are flagged via defined[i] = false (they do not contribute
/// to `holds`).
struct Condition4Report {
  bool holds = false;
  std::vector<double> margins;  // within_density[i] - d(G); want > 0
  std::vector<bool> defined;
  double global_density = 0.0;
  std::vector<double> within_density;
};

inline Condition4Report check_condition4(const PlantedGraph& pg) {
  int n = pg.graph.node_count();
  int k = 0;
  for (int l : pg.labels) k = std::max(k, l + 1);
  Condition4Report rep;
  rep.global_density = pg.graph.density();
  rep.margins.assign(k, std::numeric_limits<double>::quiet_NaN());
  rep.defined.assign(k, false);
  rep.within_density.assign(k, std::numeric_limits<double>::quiet_NaN());

  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < n; ++i) members[pg.labels[i]].push_back(i);

  bool all_neg = true;
  bool any_defined = false;
  for (int c = 0; c < k; ++c) {
    std::size_t sz = members[c].size();
    if (sz < 2) continue;
    std::size_t within = 0;
    for (std::size_t i = 0; i < sz; ++i) {
      for (std::size_t j = i + 1; j < sz; ++j) {
        if (pg.graph.has_edge(members[c][i], members[c][j])) ++within;
      }
    }
    double pairs = 0.5 * static_cast<double>(sz) * (sz - 1);
    rep.within_density[c] = static_cast<double>(within) / pairs;
    rep.margins[c] = rep.within_density[c] - rep.global_density;
    rep.defined[c] = true;
    any_defined = true;
    if (!(rep.margins[c] > 0.0)) all_neg = false;
  }
  rep.holds = any_defined && all_neg;
  return rep;
}

/// Conditional expectation of L on a split SBM:
///   value(I) = sum_{i,j in I} a_i b_j (d - D_ij).
/// Corners of the box constraint are exactly the 2^k community subsets.
struct ExpectedLInstance {
  std::vector<double> a;  // split community sizes, A side
  std::vector<double> b;  // split community sizes, B side
  std::vector<std::vector<double>> d_matrix;
  double density = 0.0;  // expected bipartite density d
};

struct CornerMinResult {
  std::vector<int> subset;  // community indices in I*
  std::uint64_t mask = 0;
  double value = 0.0;
};

inline constexpr int kCornerMaxCommunities = 20;

inline double expected_l_value(const ExpectedLInstance& inst,
                               std::uint64_t mask) {
  int k = static_cast<int>(inst.a.size());
  double v = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!((mask >> i) & 1ULL)) continue;
    for (int j = 0; j < k; ++j) {
      if (!((mask >> j) & 1ULL)) continue;
      v += inst.a[i] * inst.b[j] * (inst.density - inst.d_matrix[i][j]);
    }
  }
  return v;
}

/// Minimizes value(I) over all 2^k corner subsets; ties resolve to the
/// lexicographically first subset (lowest bitmask).
inline CornerMinResult expected_l_corner_min(const ExpectedLInstance& inst) {
  int k = static_cast<int>(inst.a.size());
  if (k < 1 || inst.b.size() != inst.a.size() ||
      static_cast<int>(inst.d_matrix.size()) != k) {
    throw std::invalid_argument("inconsistent expected-L instance");
  }
  if (k > kCornerMaxCommunities) {
    throw GuardError("expected_l_corner_min: k exceeds " +
                     std::to_string(kCornerMaxCommunities));
  }
  CornerMinResult best;
  best.mask = 0;
  best.value = 0.0;
  for (std::uint64_t mask = 1; mask < (1ULL << k); ++mask) {
    double v = expected_l_value(inst, mask);
    if (v < best.value) {
      best.value = v;
      best.mask = mask;
    }
  }
  for (int i = 0; i < k; ++i) {
    if ((best.mask >> i) & 1ULL) best.subset.push_back(i);
  }
  return best;
}

struct OverlapScore {
  double jaccard = 0.0;
  bool exact = false;
};

inline OverlapScore community_overlap(const std::vector<int>& found,
                                      const std::vector<int>& planted) {
  std::set<int> f(found.begin(), found.end());
  std::set<int> p(planted.begin(), planted.end());
  if (f.empty() && p.empty()) return {1.0, true};
  std::size_t inter = 0;
  for (int id : f) inter += p.count(id);
  std::size_t uni = f.size() + p.size() - inter;
  return {static_cast<double>(inter) / static_cast<double>(uni), f == p};
}

// ---------------------------------------------------------------------------
// Serialization. Params as {"n":..,"k":..,"P":[..],"D":[[..]]}; planted
// graphs as an edge list plus a "node label" line per node.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SbmParams& params) {
  return nlohmann::json{
      {"n", params.n}, {"k", params.k}, {"P", params.p}, {"D", params.d}};
}

inline SbmParams sbm_params_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("k") ||
      !j.contains("P") || !j.contains("D")) {
    throw IoError("sbm params json must contain n, k, P, D");
  }
  SbmParams params;
  params.n = j.at("n").get<int>();
  params.k = j.at("k").get<int>();
  params.p = j.at("P").get<std::vector<double>>();
  params.d = j.at("D").get<std::vector<std::vector<double>>>();
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("bad sbm params: ") + e.what());
  }
  return params;
}

inline void write_labels(std::ostream& out, const PlantedGraph& pg) {
  for (int i = 0; i < pg.graph.node_count(); ++i) {
    out << pg.graph.node_ids()[i] << " " << pg.labels[i] << "\n";
  }
}

inline std::vector<int> read_labels(std::istream& in, int n) {
  std::vector<int> labels(n, -1);
  int node, label;
  while (in >> node >> label) {
    if (node < 0 || node >= n) throw IoError("label line node out of range");
    labels[node] = label;
  }
  for (int l : labels) {
    if (l < 0) throw IoError("label file does not cover every node");
  }
  return labels;
}

}  // namespace qpan
