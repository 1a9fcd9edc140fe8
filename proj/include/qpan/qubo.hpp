/// Quadratic binary models and the regularity-check objective.
///
/// A QuboProblem is min over s in {0,1}^n of
///   offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j.
/// Each unordered pair is stored once (strict upper triangle), so the
/// symmetric-matrix factor 1/2 never appears. Diagonal terms passed by a
/// caller fold into the linear part since s_i^2 = s_i.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpan/errors.hpp"
#include "qpan/graph.hpp"

namespace qpan {

struct QuadTerm {
  int i;
  int j;
  double value;
};

class QuboProblem {
 public:
  QuboProblem() = default;
  explicit QuboProblem(int n) : n_(n), linear_(n, 0.0) {
    if (n < 0) throw std::invalid_argument("negative variable count");
  }

  int variable_count() const { return n_; }

  double linear(int i) const { return linear_[i]; }
  void set_linear(int i, double v) {
    check_var(i);
    linear_[i] = v;
    dirty_ = true;
  }
  void add_linear(int i, double v) {
    check_var(i);
    linear_[i] += v;
    dirty_ = true;
  }

  /// Adds J_{ij} s_i s_j; (i,i) folds into the linear term.
  void add_quadratic(int i, int j, double v) {
    check_var(i);
    check_var(j);
    if (i == j) {
      linear_[i] += v;
    } else {
      quad_.push_back({std::min(i, j), std::max(i, j), v});
    }
    dirty_ = true;
  }

  double offset() const { return offset_; }
  void set_offset(double v) { offset_ = v; }

  /// Coalesced strict-upper-triangular terms, sorted by (i, j).
  const std::vector<QuadTerm>& quadratic_terms() const {
    finalize();
    return quad_;
  }

  const std::vector<double>& linear_terms() const { return linear_; }

  double quadratic(int i, int j) const {
    check_var(i);
    check_var(j);
    if (i == j) return 0.0;
    finalize();
    QuadTerm probe{std::min(i, j), std::max(i, j), 0.0};
    auto it = std::lower_bound(quad_.begin(), quad_.end(), probe,
                               [](const QuadTerm& a, const QuadTerm& b) {
                                 return a.i != b.i ? a.i < b.i : a.j < b.j;
                               });
    if (it != quad_.end() && it->i == probe.i && it->j == probe.j) {
      return it->value;
    }
    return 0.0;
  }

  /// Largest |coefficient| over linear and quadratic terms.
  double max_abs_coefficient() const {
    finalize();
    double m = 0.0;
    for (double h : linear_) m = std::max(m, std::abs(h));
    for (const auto& t : quad_) m = std::max(m, std::abs(t.value));
    return m;
  }

  /// Neighbor list (CSR) over nonzero couplings; each pair appears from both
  /// endpoints. Backs incremental delta-energy updates in the solvers.
  const std::vector<int>& adjacency_offsets() const {
    finalize();
    return adj_off_;
  }
  const std::vector<std::pair<int, double>>& adjacency() const {
    finalize();
    return adj_;
  }

  double energy(const std::vector<std::uint8_t>& s) const {
    if (static_cast<int>(s.size()) != n_) {
      throw std::invalid_argument("assignment length mismatch");
    }
    finalize();
    double e = offset_;
    for (int i = 0; i < n_; ++i) {
      if (s[i]) e += linear_[i];
    }
    for (const auto& t : quad_) {
      if (s[t.i] && s[t.j]) e += t.value;
    }
    return e;
  }

  /// Energy change of flipping bit i: (1 - 2 s_i)(h_i + sum_j J_ij s_j).
  double flip_delta(const std::vector<std::uint8_t>& s, int i) const {
    finalize();
    double field = linear_[i];
    for (int k = adj_off_[i]; k < adj_off_[i + 1]; ++k) {
      if (s[adj_[k].first]) field += adj_[k].second;
    }
    return (1.0 - 2.0 * static_cast<double>(s[i])) * field;
  }

 private:
  void check_var(int i) const {
    if (i < 0 || i >= n_) {
      throw std::invalid_argument("variable index out of range");
    }
  }

  void finalize() const {
    if (!dirty_) return;
    auto& q = const_cast<QuboProblem*>(this)->quad_;
    std::sort(q.begin(), q.end(), [](const QuadTerm& a, const QuadTerm& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<QuadTerm> merged;
    merged.reserve(q.size());
    for (const auto& t : q) {
      if (!merged.empty() && merged.back().i == t.i && merged.back().j == t.j) {
        merged.back().value += t.value;
      } else {
        merged.push_back(t);
      }
    }
    merged.erase(std::remove_if(merged.begin(), merged.end(),
                                [](const QuadTerm& t) { return t.value == 0.0; }),
                 merged.end());
    q = std::move(merged);

    auto* self = const_cast<QuboProblem*>(this);
    self->adj_off_.assign(n_ + 1, 0);
    for (const auto& t : q) {
      ++self->adj_off_[t.i + 1];
      ++self->adj_off_[t.j + 1];
    }
    for (int i = 0; i < n_; ++i) self->adj_off_[i + 1] += self->adj_off_[i];
    self->adj_.resize(q.size() * 2);
    std::vector<int> cursor(self->adj_off_.begin(), self->adj_off_.end() - 1);
    for (const auto& t : q) {
      self->adj_[cursor[t.i]++] = {t.j, t.value};
      self->adj_[cursor[t.j]++] = {t.i, t.value};
    }
    self->dirty_ = false;
  }

  int n_ = 0;
  double offset_ = 0.0;
  std::vector<double> linear_;
  mutable std::vector<QuadTerm> quad_;
  mutable std::vector<int> adj_off_{0};
  mutable std::vector<std::pair<int, double>> adj_;
  mutable bool dirty_ = true;
};

enum class Sense { minimize, maximize };

/// QUBO whose energy over assignments s equals L(X(s), Y(s)) of the graph,
/// with X = selected A-part variables [0, nA) and Y = selected B-part
/// variables [nA, nA+nB). Cross-part coefficient between a and b is
/// d(A,B) - a_{ab}; within-part coefficients, linear terms and the offset
/// are all zero. Sense::maximize negates every coefficient (optimizes -L).
inline QuboProblem build_regularity_qubo(const BipartiteGraph& g,
                                         Sense sense = Sense::minimize) {
  int na = g.part_a_size();
  int nb = g.part_b_size();
  if (na < 1 || nb < 1) {
    throw std::invalid_argument("regularity qubo needs both parts non-empty");
  }
  double d = g.density();
  double sign = (sense == Sense::maximize) ? -1.0 : 1.0;
  QuboProblem q(na + nb);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < nb; ++b) {
      double coeff = sign * (d - (g.has_edge(a, b) ? 1.0 : 0.0));
      if (coeff != 0.0) q.add_quadratic(a, na + b, coeff);
    }
  }
  return q;
}

/// Decodes an assignment of a regularity QUBO back into the subset pair.
inline SubsetPair decode_assignment(const BipartiteGraph& g,
                                    const std::vector<std::uint8_t>& s) {
  if (static_cast<int>(s.size()) != g.part_a_size() + g.part_b_size()) {
    throw std::invalid_argument("assignment length mismatch");
  }
  SubsetPair p{DynBitset(g.part_a_size()), DynBitset(g.part_b_size())};
  for (int a = 0; a < g.part_a_size(); ++a) {
    if (s[a]) p.x.set(a);
  }
  for (int b = 0; b < g.part_b_size(); ++b) {
    if (s[g.part_a_size() + b]) p.y.set(b);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Ising form. Spins sigma_i = 2 b_i - 1; the offset absorbs the constant so
// that energies match exactly, not merely the argmin set.
// ---------------------------------------------------------------------------

struct IsingProblem {
  int n = 0;
  std::vector<double> h;
  std::vector<QuadTerm> j;  // i < j
  double offset = 0.0;

  double energy(const std::vector<int>& spins) const {
    if (static_cast<int>(spins.size()) != n) {
      throw std::invalid_argument("spin vector length mismatch");
    }
    for (int s : spins) {
      if (s != 1 && s != -1) {
        throw std::invalid_argument("spins must be +1 or -1");
      }
    }
    double e = offset;
    for (int i = 0; i < n; ++i) e += h[i] * spins[i];
    for (const auto& t : j) e += t.value * spins[t.i] * spins[t.j];
    return e;
  }
};

inline double ising_energy(const IsingProblem& p, const std::vector<int>& s) {
  return p.energy(s);
}

inline IsingProblem qubo_to_ising(const QuboProblem& q) {
  int n = q.variable_count();
  IsingProblem out;
  out.n = n;
  out.h.assign(n, 0.0);
  out.offset = q.offset();
  for (int i = 0; i < n; ++i) {
    out.h[i] += q.linear(i) / 2.0;
    out.offset += q.linear(i) / 2.0;
  }
  for (const auto& t : q.quadratic_terms()) {
    out.j.push_back({t.i, t.j, t.value / 4.0});
    out.h[t.i] += t.value / 4.0;
    out.h[t.j] += t.value / 4.0;
    out.offset += t.value / 4.0;
  }
  return out;
}

inline QuboProblem ising_to_qubo(const IsingProblem& p) {
  QuboProblem q(p.n);
  double offset = p.offset;
  for (int i = 0; i < p.n; ++i) {
    q.add_linear(i, 2.0 * p.h[i]);
    offset -= p.h[i];
  }
  for (const auto& t : p.j) {
    q.add_quadratic(t.i, t.j, 4.0 * t.value);
    q.add_linear(t.i, -2.0 * t.value);
    q.add_linear(t.j, -2.0 * t.value);
    offset += t.value;
  }
  q.set_offset(offset);
  return q;
}

inline std::vector<int> bits_to_spins(const std::vector<std::uint8_t>& b) {
  std::vector<int> s(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) s[i] = b[i] ? 1 : -1;
  return s;
}

inline std::vector<std::uint8_t> spins_to_bits(const std::vector<int>& s) {
  std::vector<std::uint8_t> b(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) b[i] = (s[i] == 1) ? 1 : 0;
  return b;
}

// ---------------------------------------------------------------------------
// JSON format: { "n": int, "linear": [..], "quadratic": [[i,j,v],..],
// "offset": v }. Also the wire body of the remote-solver protocol.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const QuboProblem& q) {
  nlohmann::json j;
  j["n"] = q.variable_count();
  j["linear"] = q.linear_terms();
  auto quad = nlohmann::json::array();
  for (const auto& t : q.quadratic_terms()) {
    quad.push_back(nlohmann::json::array({t.i, t.j, t.value}));
  }
  j["quadratic"] = quad;
  j["offset"] = q.offset();
  return j;
}

inline QuboProblem qubo_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("linear") ||
      !j.contains("quadratic") || !j.contains("offset")) {
    throw IoError("qubo json missing required fields");
  }
  int n = j.at("n").get<int>();
  QuboProblem q(n);
  auto lin = j.at("linear").get<std::vector<double>>();
  if (static_cast<int>(lin.size()) != n) {
    throw IoError("qubo json linear length mismatch");
  }
  for (int i = 0; i < n; ++i) q.set_linear(i, lin[i]);
  for (const auto& row : j.at("quadratic")) {
    if (!row.is_array() || row.size() != 3) {
      throw IoError("qubo json quadratic rows must be [i, j, v]");
    }
    q.add_quadratic(row[0].get<int>(), row[1].get<int>(), row[2].get<double>());
  }
  q.set_offset(j.at("offset").get<double>());
  return q;
}

/// One solver sample: an assignment and its energy.
struct Sample {
  std::vector<std::uint8_t> assignment;
  double energy = 0.0;
};

}  // namespace qpan
