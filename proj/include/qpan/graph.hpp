/// Graphs, bipartite graphs and the deviation function L.
///
/// L(X,Y) = |X||Y| d(A,B) - e(X,Y) measures how far the edge count of the
/// subgraph induced by X and Y sits from its expectation in a random
/// bipartite graph of the same density. Everything downstream (the QUBO
/// build, regularity verdicts, panning) is phrased in terms of L.
#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "qpan/bitset.hpp"
#include "qpan/errors.hpp"
#include "qpan/rng.hpp"

namespace qpan {

/// Undirected simple graph with stable external node labels.
/// Immutable once built; construction goes through add_edge.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n) : n_(n), rows_(n) {
    ids_.resize(n);
    for (int i = 0; i < n; ++i) ids_[i] = i;
    for (auto& r : rows_) r = DynBitset(static_cast<std::size_t>(n));
  }
  Graph(int n, std::vector<int> ids) : Graph(n) {
    if (static_cast<int>(ids.size()) != n) {
      throw std::invalid_argument("node id list does not match node count");
    }
    ids_ = std::move(ids);
  }

  int node_count() const { return n_; }
  const std::vector<int>& node_ids() const { return ids_; }

  void add_edge(int u, int v) {
    check_index(u);
    check_index(v);
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (!rows_[u].test(v)) ++edges_;
    rows_[u].set(v);
    rows_[v].set(u);
  }

  bool has_edge(int u, int v) const {
    check_index(u);
    check_index(v);
    return rows_[u].test(v);
  }

  std::size_t edge_count() const { return edges_; }

  const DynBitset& row(int u) const { return rows_[u]; }

  /// Mean density over unordered node pairs; 0 for n < 2.
  double density() const {
    if (n_ < 2) return 0.0;
    double pairs = 0.5 * static_cast<double>(n_) * (n_ - 1);
    return static_cast<double>(edges_) / pairs;
  }

 private:
  void check_index(int i) const {
    if (i < 0 || i >= n_) throw std::invalid_argument("node index out of range");
  }

  int n_ = 0;
  std::size_t edges_ = 0;
  std::vector<int> ids_;
  std::vector<DynBitset> rows_;
};

/// Bipartite graph over parts A (nA nodes) and B (nB nodes). The labels of
/// either part map bipartite indices back to whatever graph the parts came
/// from. The full-graph density d(A,B) is exposed both as a double and as an
/// exact edge count so that L can be evaluated without accumulated rounding.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(int na, int nb) : na_(na), nb_(nb), rows_(na) {
    if (na < 0 || nb < 0) throw std::invalid_argument("negative part size");
    labels_a_.resize(na);
    labels_b_.resize(nb);
    for (int i = 0; i < na; ++i) labels_a_[i] = i;
    for (int j = 0; j < nb; ++j) labels_b_[j] = j;
    for (auto& r : rows_) r = DynBitset(static_cast<std::size_t>(nb));
  }

  int part_a_size() const { return na_; }
  int part_b_size() const { return nb_; }

  const std::vector<int>& labels_a() const { return labels_a_; }
  const std::vector<int>& labels_b() const { return labels_b_; }
  void set_labels(std::vector<int> la, std::vector<int> lb) {
    if (static_cast<int>(la.size()) != na_ ||
        static_cast<int>(lb.size()) != nb_) {
      throw std::invalid_argument("label list does not match part size");
    }
    labels_a_ = std::move(la);
    labels_b_ = std::move(lb);
  }

  void add_edge(int a, int b) {
    check(a, b);
    if (!rows_[a].test(b)) ++edges_;
    rows_[a].set(b);
  }

  bool has_edge(int a, int b) const {
    check(a, b);
    return rows_[a].test(b);
  }

  std::size_t edge_count() const { return edges_; }

  const DynBitset& row(int a) const { return rows_[a]; }

  /// d(A,B) = e(A,B) / (|A||B|).
  double density() const {
    if (na_ == 0 || nb_ == 0) return 0.0;
    return static_cast<double>(edges_) /
           (static_cast<double>(na_) * static_cast<double>(nb_));
  }

 private:
  void check(int a, int b) const {
    if (a < 0 || a >= na_ || b < 0 || b >= nb_) {
      throw std::invalid_argument("bipartite index out of range");
    }
  }

  int na_ = 0;
  int nb_ = 0;
  std::size_t edges_ = 0;
  std::vector<int> labels_a_, labels_b_;
  std::vector<DynBitset> rows_;
};

/// A pair of subsets X ⊆ A, Y ⊆ B. Empty sets are fine.
struct SubsetPair {
  DynBitset x;
  DynBitset y;

  static SubsetPair full(const BipartiteGraph& g) {
    SubsetPair p{DynBitset(g.part_a_size()), DynBitset(g.part_b_size())};
    for (int a = 0; a < g.part_a_size(); ++a) p.x.set(a);
    for (int b = 0; b < g.part_b_size(); ++b) p.y.set(b);
    return p;
  }

  static SubsetPair from_masks(const BipartiteGraph& g, std::uint64_t xmask,
                               std::uint64_t ymask) {
    return SubsetPair{DynBitset::from_mask(xmask, g.part_a_size()),
                      DynBitset::from_mask(ymask, g.part_b_size())};
  }
};

inline void check_pair(const BipartiteGraph& g, const SubsetPair& p) {
  if (p.x.size() != static_cast<std::size_t>(g.part_a_size()) ||
      p.y.size() != static_cast<std::size_t>(g.part_b_size())) {
    throw std::invalid_argument("subset pair does not match graph parts");
  }
}

/// e(X,Y): number of edges with one endpoint in X and the other in Y.
inline std::size_t edge_count(const BipartiteGraph& g, const SubsetPair& p) {
  check_pair(g, p);
  std::size_t e = 0;
  const auto& yw = p.y.words();
  for (std::size_t wi = 0; wi < p.x.words().size(); ++wi) {
    std::uint64_t w = p.x.words()[wi];
    while (w) {
      int a = static_cast<int>(wi * 64 + std::countr_zero(w));
      e += and_count(g.row(a).words(), yw);
      w &= w - 1;
    }
  }
  return e;
}

/// d(X,Y) = e(X,Y)/(|X||Y|). Rounded once from the exact rational.
inline double link_density(const BipartiteGraph& g, const SubsetPair& p) {
  std::size_t nx = p.x.count();
  std::size_t ny = p.y.count();
  if (nx == 0 || ny == 0) {
    throw std::invalid_argument("link density of an empty subset is undefined");
  }
  return static_cast<double>(edge_count(g, p)) /
         (static_cast<double>(nx) * static_cast<double>(ny));
}

/// L from pre-counted quantities. Evaluated as the exact integer
/// (|X||Y| e(A,B) - |A||B| e(X,Y)) divided once by |A||B|, so the only
/// rounding is the final division; in particular L(A,B) is exactly 0.
inline double deviation_l_counts(const BipartiteGraph& g, std::size_t nx,
                                 std::size_t ny, std::size_t exy) {
  if (g.part_a_size() == 0 || g.part_b_size() == 0) return 0.0;
  double nm = static_cast<double>(g.part_a_size()) *
              static_cast<double>(g.part_b_size());
  double numerator = static_cast<double>(nx) * static_cast<double>(ny) *
                         static_cast<double>(g.edge_count()) -
                     nm * static_cast<double>(exy);
  return numerator / nm;
}

/// L(X,Y) = |X||Y| d(A,B) - e(X,Y); 0 whenever X or Y is empty.
inline double deviation_l(const BipartiteGraph& g, const SubsetPair& p) {
  check_pair(g, p);
  return deviation_l_counts(g, p.x.count(), p.y.count(), edge_count(g, p));
}

struct BruteForceExtrema {
  double min_l = 0.0;
  SubsetPair argmin;
  double max_l = 0.0;
  SubsetPair argmax;
};

inline constexpr int kBruteForceMaxBits = 24;

/// Exact extrema of L over all 2^(nA+nB) subset pairs.
///
/// Per Y (outer, ascending mask) the per-column counts cnt[b] = e(X, {b})
/// feed a subset-sum DP over X, so each pair costs O(1). The visit order is
/// ascending in the combined assignment integer (X bits low, Y bits high),
/// and only strict improvements are kept: ties resolve to the lowest bit
/// pattern, matching the exhaustive QUBO solver.
inline BruteForceExtrema brute_min_max_l(const BipartiteGraph& g) {
  int na = g.part_a_size();
  int nb = g.part_b_size();
  if (na + nb > kBruteForceMaxBits) {
    throw GuardError("brute_min_max_l: nA + nB exceeds " +
                     std::to_string(kBruteForceMaxBits) + " bits");
  }
  std::uint64_t xn = 1ULL << na;
  std::uint64_t yn = 1ULL << nb;
  double nm = (na > 0 && nb > 0)
                  ? static_cast<double>(na) * static_cast<double>(nb)
                  : 1.0;
  double eab = static_cast<double>(g.edge_count());

  BruteForceExtrema out;
  out.argmin = SubsetPair::from_masks(g, 0, 0);
  out.argmax = SubsetPair::from_masks(g, 0, 0);
  bool first = true;

  std::vector<std::uint32_t> ecount(xn);
  std::vector<int> cnt(std::max(na, 1));
  for (std::uint64_t ymask = 0; ymask < yn; ++ymask) {
    for (int a = 0; a < na; ++a) {
      cnt[a] = static_cast<int>(
          std::popcount(g.row(a).words().empty()
                            ? 0ULL
                            : (g.row(a).words()[0] & ymask)));
    }
    double ysize = static_cast<double>(std::popcount(ymask));
    ecount[0] = 0;
    for (std::uint64_t xmask = 0; xmask < xn; ++xmask) {
      if (xmask != 0) {
        int low = std::countr_zero(xmask);
        ecount[xmask] = ecount[xmask & (xmask - 1)] +
                        static_cast<std::uint32_t>(cnt[low]);
      }
      double xsize = static_cast<double>(std::popcount(xmask));
      double l = (xsize * ysize * eab -
                  nm * static_cast<double>(ecount[xmask])) /
                 nm;
      if (first || l < out.min_l) {
        out.min_l = l;
        out.argmin = SubsetPair::from_masks(g, xmask, ymask);
      }
      if (first || l > out.max_l) {
        out.max_l = l;
        out.argmax = SubsetPair::from_masks(g, xmask, ymask);
      }
      first = false;
    }
  }
  return out;
}

inline constexpr int kSplitRetries = 16;

/// Splits g into two sides by a fair coin per node and keeps only the
/// crossing edges. Part labels carry the original node ids. A split that
/// leaves either side empty is redrawn up to kSplitRetries times.
inline BipartiteGraph random_split(const Graph& g, std::uint64_t seed) {
  if (g.node_count() < 2) {
    throw std::invalid_argument("random_split needs at least 2 nodes");
  }
  Rng rng(seed, "graph.split");
  int n = g.node_count();
  std::vector<int> side(n);
  for (int attempt = 0; attempt < kSplitRetries; ++attempt) {
    int count_a = 0;
    for (int i = 0; i < n; ++i) {
      side[i] = rng.next_bool() ? 0 : 1;
      if (side[i] == 0) ++count_a;
    }
    if (count_a == 0 || count_a == n) continue;

    std::vector<int> a_index, b_index;
    std::vector<int> a_ids, b_ids;
    std::vector<int> b_slot(n, -1);
    for (int i = 0; i < n; ++i) {
      if (side[i] == 0) {
        a_index.push_back(i);
        a_ids.push_back(g.node_ids()[i]);
      } else {
        b_slot[i] = static_cast<int>(b_index.size());
        b_index.push_back(i);
        b_ids.push_back(g.node_ids()[i]);
      }
    }
    BipartiteGraph bg(static_cast<int>(a_index.size()),
                      static_cast<int>(b_index.size()));
    bg.set_labels(std::move(a_ids), std::move(b_ids));
    for (int ai = 0; ai < static_cast<int>(a_index.size()); ++ai) {
      const auto& words = g.row(a_index[ai]).words();
      for (std::size_t wi = 0; wi < words.size(); ++wi) {
        std::uint64_t w = words[wi];
        while (w) {
          int v = static_cast<int>(wi * 64 + std::countr_zero(w));
          w &= w - 1;
          if (b_slot[v] >= 0) bg.add_edge(ai, b_slot[v]);
        }
      }
    }
    return bg;
  }
  throw Error("random_split: degenerate split after " +
              std::to_string(kSplitRetries) + " attempts");
}

/// Induced subgraph after deleting the given external node ids.
inline Graph remove_nodes(const Graph& g, const std::vector<int>& ids) {
  std::unordered_map<int, int> index_of;
  for (int i = 0; i < g.node_count(); ++i) index_of[g.node_ids()[i]] = i;
  std::unordered_set<int> drop;
  for (int id : ids) {
    if (!index_of.count(id)) {
      throw std::invalid_argument("remove_nodes: unknown node id " +
                                  std::to_string(id));
    }
    drop.insert(id);
  }
  std::vector<int> keep;
  std::vector<int> keep_ids;
  for (int i = 0; i < g.node_count(); ++i) {
    if (!drop.count(g.node_ids()[i])) {
      keep.push_back(i);
      keep_ids.push_back(g.node_ids()[i]);
    }
  }
  Graph out(static_cast<int>(keep.size()), keep_ids);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = i + 1; j < keep.size(); ++j) {
      if (g.has_edge(keep[i], keep[j])) {
        out.add_edge(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return out;
}

/// Induced bipartite subgraph on the selected rows/columns; labels follow.
inline BipartiteGraph induced_subgraph(const BipartiteGraph& g,
                                       const SubsetPair& p) {
  check_pair(g, p);
  auto xs = p.x.to_indices();
  auto ys = p.y.to_indices();
  BipartiteGraph out(static_cast<int>(xs.size()), static_cast<int>(ys.size()));
  std::vector<int> la, lb;
  la.reserve(xs.size());
  lb.reserve(ys.size());
  for (auto a : xs) la.push_back(g.labels_a()[a]);
  for (auto b : ys) lb.push_back(g.labels_b()[b]);
  out.set_labels(std::move(la), std::move(lb));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) {
      if (g.has_edge(static_cast<int>(xs[i]), static_cast<int>(ys[j]))) {
        out.add_edge(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text formats.
//   graph <n>        followed by "u v" lines, 0-based indices
//   bigraph <nA> <nB> followed by "a b" lines
//   dense 0/1 matrix: one row of space-separated bits per line
// ---------------------------------------------------------------------------

inline Graph read_graph(std::istream& in) {
  std::string head;
  int n = -1;
  if (!(in >> head >> n) || head != "graph" || n < 0) {
    throw IoError("expected header 'graph <n>'");
  }
  Graph g(n);
  int u, v;
  while (in >> u >> v) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw IoError("edge endpoint out of range");
    }
    g.add_edge(u, v);
  }
  return g;
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << "graph " << g.node_count() << "\n";
  for (int u = 0; u < g.node_count(); ++u) {
    for (int v = u + 1; v < g.node_count(); ++v) {
      if (g.has_edge(u, v)) out << u << " " << v << "\n";
    }
  }
}

inline BipartiteGraph read_bigraph(std::istream& in) {
  std::string head;
  int na = -1, nb = -1;
  if (!(in >> head >> na >> nb) || head != "bigraph" || na < 0 || nb < 0) {
    throw IoError("expected header 'bigraph <nA> <nB>'");
  }
  BipartiteGraph g(na, nb);
  int a, b;
  while (in >> a >> b) {
    if (a < 0 || a >= na || b < 0 || b >= nb) {
      throw IoError("bipartite edge endpoint out of range");
    }
    g.add_edge(a, b);
  }
  return g;
}

inline void write_bigraph(std::ostream& out, const BipartiteGraph& g) {
  out << "bigraph " << g.part_a_size() << " " << g.part_b_size() << "\n";
  for (int a = 0; a < g.part_a_size(); ++a) {
    for (int b = 0; b < g.part_b_size(); ++b) {
      if (g.has_edge(a, b)) out << a << " " << b << "\n";
    }
  }
}

/// Dense 0/1 biadjacency matrix, one row per line.
inline BipartiteGraph read_dense_matrix(std::istream& in) {
  std::vector<std::vector<int>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<int> row;
    int bit;
    while (ls >> bit) {
      if (bit != 0 && bit != 1) throw IoError("matrix entries must be 0 or 1");
      row.push_back(bit);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty dense matrix");
  std::size_t nb = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != nb) throw IoError("ragged dense matrix");
  }
  BipartiteGraph g(static_cast<int>(rows.size()), static_cast<int>(nb));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < nb; ++b) {
      if (rows[a][b]) g.add_edge(static_cast<int>(a), static_cast<int>(b));
    }
  }
  return g;
}

inline void write_dense_matrix(std::ostream& out, const BipartiteGraph& g) {
  for (int a = 0; a < g.part_a_size(); ++a) {
    for (int b = 0; b < g.part_b_size(); ++b) {
      out << (g.has_edge(a, b) ? 1 : 0)
          << (b + 1 == g.part_b_size() ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace qpan
