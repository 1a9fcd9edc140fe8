/// Community panning: iterated min-L extraction on a randomly bipartized
/// graph, stopped at the minimum of energy per node, plus the pan-all loop
/// and the epsilon-regularity verdict driver.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "qpan/errors.hpp"
#include "qpan/graph.hpp"
#include "qpan/qubo.hpp"
#include "qpan/solvers.hpp"

namespace qpan {

struct StageRecord {
  int n1 = 0;
  int n2 = 0;
  double density = 0.0;
  double energy = 0.0;
  double energy_per_node = 0.0;  // energy / (n1 * n2)
};

struct PanTrajectory {
  // stages[0] is the unrefined random split (energy 0 by definition);
  // stages[t] for t >= 1 records the pair selected at refinement t,
  // including the final evaluation that failed to improve.
  std::vector<StageRecord> stages;
  std::vector<int> community;  // original node ids, V1' united with V2'
  std::size_t returned_stage = 0;  // index of the stage the community is from
  double energy_per_node = 0.0;    // of the returned iterate
  bool aborted = false;  // a refinement returned an empty side
};

/// One panning run (the paper's single-community extraction).
///
/// Random split, then repeat: build the min-L QUBO on the current block,
/// solve, take the selected pair as the next block. At least one refinement
/// is executed; the loop continues while energy per node strictly decreases
/// and returns the iterate before the first failed step. A refinement whose
/// selected pair has an empty side aborts the stage and returns the previous
/// iterate with the aborted flag set.
inline PanTrajectory pan_once(const Graph& g, const SolverFn& solver,
                              const SolverConfig& cfg, std::uint64_t seed) {
  if (g.node_count() < 4) {
    throw std::invalid_argument("pan_once needs at least 4 nodes");
  }
  BipartiteGraph block = random_split(g, seed);

  PanTrajectory traj;
  StageRecord initial;
  initial.n1 = block.part_a_size();
  initial.n2 = block.part_b_size();
  initial.density = block.density();
  traj.stages.push_back(initial);

  auto current_union = [](const BipartiteGraph& b) {
    std::vector<int> ids(b.labels_a());
    ids.insert(ids.end(), b.labels_b().begin(), b.labels_b().end());
    std::sort(ids.begin(), ids.end());
    return ids;
  };

  traj.community = current_union(block);
  double prev_epn = 0.0;  // L(A,B) = 0 for the unrefined split

  for (std::uint64_t stage = 1;; ++stage) {
    QuboProblem q = build_regularity_qubo(block, Sense::minimize);
    SolverConfig stage_cfg = cfg;
    stage_cfg.seed = stream_seed(seed, "pan.stage", stage);
    SolveResult sol = solver(q, stage_cfg);
    SubsetPair selected = decode_assignment(block, sol.best.assignment);

    std::size_t nx = selected.x.count();
    std::size_t ny = selected.y.count();
    if (nx == 0 || ny == 0) {
      traj.aborted = true;
      break;
    }

    StageRecord rec;
    rec.n1 = static_cast<int>(nx);
    rec.n2 = static_cast<int>(ny);
    rec.energy = sol.best.energy;
    rec.energy_per_node =
        rec.energy / (static_cast<double>(nx) * static_cast<double>(ny));
    rec.density = link_density(block, selected);
    traj.stages.push_back(rec);

    if (!(rec.energy_per_node < prev_epn)) break;

    block = induced_subgraph(block, selected);
    traj.community = current_union(block);
    traj.returned_stage = stage;
    prev_epn = rec.energy_per_node;
  }

  traj.energy_per_node = prev_epn;
  return traj;
}

struct StopRule {
  int min_size = 3;   // stop when fewer nodes remain
  double tau = 0.5;   // relative jump of round energy-per-node
};

struct PanRound {
  double energy_per_node = 0.0;
  int community_size = 0;
};

struct PanAllResult {
  std::vector<std::vector<int>> communities;
  std::vector<PanRound> rounds;
};

/// Pans communities out one by one, deleting each found community, until
/// (a) fewer than min_size nodes remain, (b) the round energy-per-node jumps
/// up by more than tau relative to the previous round, or (c) a round
/// returns all remaining nodes. A jump past tau means the panned subset is
/// noise from the last remaining community, so that round's subset is
/// discarded and the whole remainder is emitted as the final community.
inline PanAllResult pan_all(const Graph& g, const SolverFn& solver,
                            const SolverConfig& cfg, std::uint64_t seed,
                            const StopRule& stop = {}) {
  if (g.node_count() == 0) throw std::invalid_argument("empty graph");
  PanAllResult out;
  Graph remaining = g;
  for (std::uint64_t round = 0;; ++round) {
    if (remaining.node_count() < stop.min_size || remaining.node_count() < 4) {
      break;
    }

    PanTrajectory traj = pan_once(remaining, solver, cfg,
                                  stream_seed(seed, "pan.round", round));
    out.rounds.push_back(
        {traj.energy_per_node, static_cast<int>(traj.community.size())});

    if (traj.community.size() ==
        static_cast<std::size_t>(remaining.node_count())) {
      out.communities.push_back(traj.community);
      break;
    }

    if (out.rounds.size() >= 2) {
      double prev = out.rounds[out.rounds.size() - 2].energy_per_node;
      double cur = out.rounds.back().energy_per_node;
      if (prev < 0.0 && (cur - prev) / std::abs(prev) > stop.tau) {
        out.communities.push_back(remaining.node_ids());
        out.rounds.back().community_size = remaining.node_count();
        break;
      }
    }

    out.communities.push_back(traj.community);
    remaining = remove_nodes(remaining, traj.community);
  }
  return out;
}

struct RegularityVerdict {
  double epsilon = 0.0;
  double min_l = 0.0;
  double max_l = 0.0;
  bool is_regular = false;
  bool certified = false;  // true only with an exact solver; a heuristic
                           // verdict is a lower-bound witness: irregularity
                           // can be confirmed, regularity cannot
  SubsetPair witness;      // the pair attaining max(|min_l|, |max_l|)
};

/// Decides epsilon-regularity by optimizing L both ways: regular iff
/// max(|min L|, |max L|) <= epsilon * |A| * |B|.
inline RegularityVerdict check_regularity(const BipartiteGraph& g,
                                          double epsilon,
                                          const SolverFn& solver,
                                          bool solver_is_exact = false) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  RegularityVerdict v;
  v.epsilon = epsilon;
  v.certified = solver_is_exact;

  SolverConfig cfg;  // solver closures carry their own configuration
  QuboProblem q_min = build_regularity_qubo(g, Sense::minimize);
  SolveResult min_res = solver(q_min, cfg);
  v.min_l = min_res.best.energy;
  SubsetPair argmin = decode_assignment(g, min_res.best.assignment);

  QuboProblem q_max = build_regularity_qubo(g, Sense::maximize);
  SolveResult max_res = solver(q_max, cfg);
  v.max_l = -max_res.best.energy;
  SubsetPair argmax = decode_assignment(g, max_res.best.assignment);

  double bound = epsilon * static_cast<double>(g.part_a_size()) *
                 static_cast<double>(g.part_b_size());
  v.is_regular = std::max(std::abs(v.min_l), std::abs(v.max_l)) <= bound;
  v.witness = (std::abs(v.min_l) >= std::abs(v.max_l)) ? argmin : argmax;
  return v;
}

// ---------------------------------------------------------------------------
// CSV outputs.
// ---------------------------------------------------------------------------

inline void write_stage_csv(std::ostream& out, const PanTrajectory& traj) {
  out << "stage,density,energy,energy_per_node\n";
  for (std::size_t t = 0; t < traj.stages.size(); ++t) {
    const auto& s = traj.stages[t];
    out << t << "," << s.density << "," << s.energy << ","
        << s.energy_per_node << "\n";
  }
}

inline void write_round_csv(std::ostream& out, const PanAllResult& result) {
  out << "round,energy_per_node,community_size\n";
  for (std::size_t r = 0; r < result.rounds.size(); ++r) {
    out << r << "," << result.rounds[r].energy_per_node << ","
        << result.rounds[r].community_size << "\n";
  }
}

inline void write_communities(std::ostream& out, const PanAllResult& result) {
  for (const auto& community : result.communities) {
    for (std::size_t i = 0; i < community.size(); ++i) {
      out << community[i] << (i + 1 == community.size() ? "" : " ");
    }
    out << "\n";
  }
}

}  // namespace qpan
