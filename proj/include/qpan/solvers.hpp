/// QUBO solver backends.
///
/// All backends return a SolveResult whose best.energy is re-evaluated from
/// scratch before returning, so it always matches energy(q, assignment).
/// Randomized backends are reproducible: restart r draws from the stream
/// (seed, "solver.restart", r) regardless of how restarts are scheduled
/// across threads.
#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qpan/errors.hpp"
#include "qpan/qubo.hpp"
#include "qpan/rng.hpp"

namespace qpan {

struct SolverConfig {
  std::uint64_t seed = 12345;
  int num_restarts = 10;
  int sweeps = 1000;          // per restart
  double t_start = 0.0;       // 0 = auto: max|coeff| * n
  double t_end = 0.0;         // 0 = auto: 1e-3 * max|coeff|
  int subproblem_size = 16;   // decomposition
  double time_budget_s = 0.0; // 0 = unlimited; checked between sweeps
  int threads = 1;
  bool debug_check_fields = false;  // re-verify cached fields every 1000 sweeps
  int num_reads = 32;               // remote backend
};

struct SolveResult {
  Sample best;
  std::vector<double> energy_history;  // best energy per restart (or pass)
  std::uint64_t evaluations = 0;
  double wall_time_s = 0.0;
  bool timed_out = false;
};

using SolverFn =
    std::function<SolveResult(const QuboProblem&, const SolverConfig&)>;

inline constexpr int kExhaustiveMaxBits = 24;

namespace detail {

inline std::vector<double> compute_fields(const QuboProblem& q,
                                          const std::vector<std::uint8_t>& s) {
  int n = q.variable_count();
  std::vector<double> field(q.linear_terms().begin(), q.linear_terms().end());
  const auto& off = q.adjacency_offsets();
  const auto& adj = q.adjacency();
  for (int i = 0; i < n; ++i) {
    for (int k = off[i]; k < off[i + 1]; ++k) {
      if (s[adj[k].first]) field[i] += adj[k].second;
    }
  }
  return field;
}

inline void apply_flip(const QuboProblem& q, std::vector<std::uint8_t>& s,
                       std::vector<double>& field, int i) {
  double delta = s[i] ? -1.0 : 1.0;
  s[i] ^= 1;
  const auto& off = q.adjacency_offsets();
  const auto& adj = q.adjacency();
  for (int k = off[i]; k < off[i + 1]; ++k) {
    field[adj[k].first] += adj[k].second * delta;
  }
}

struct Deadline {
  std::optional<std::chrono::steady_clock::time_point> at;
  bool expired() const {
    return at && std::chrono::steady_clock::now() >= *at;
  }
};

inline Deadline make_deadline(const SolverConfig& cfg) {
  Deadline d;
  if (cfg.time_budget_s > 0.0) {
    d.at = std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(cfg.time_budget_s));
  }
  return d;
}

struct RestartOutcome {
  Sample best;
  std::uint64_t evaluations = 0;
  bool timed_out = false;
};

/// One annealing restart: sequential sweeps with Metropolis acceptance.
/// At temperature <= 0 only strictly improving flips are taken, which is
/// exactly the greedy descent path (greedy passes t_schedule = nullptr).
inline RestartOutcome anneal_restart(const QuboProblem& q,
                                     const SolverConfig& cfg, Rng rng,
                                     double t_start, double t_end,
                                     bool greedy_mode,
                                     const Deadline& deadline) {
  int n = q.variable_count();
  RestartOutcome out;
  std::vector<std::uint8_t> s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.next_bool() ? 1 : 0;
  std::vector<double> field = compute_fields(q, s);
  double e = q.energy(s);
  ++out.evaluations;

  Sample best{s, e};

  if (greedy_mode) {
    // First-improvement descent, sequential passes, until a clean pass.
    for (;;) {
      if (deadline.expired()) {
        out.timed_out = true;
        break;
      }
      bool flipped = false;
      for (int i = 0; i < n; ++i) {
        double de = (1.0 - 2.0 * static_cast<double>(s[i])) * field[i];
        ++out.evaluations;
        if (de < 0.0) {
          apply_flip(q, s, field, i);
          e += de;
          flipped = true;
        }
      }
      if (!flipped) break;
      if (e < best.energy) best = Sample{s, e};
    }
  } else {
    double ratio = (cfg.sweeps > 1)
                       ? std::pow(t_end / t_start,
                                  1.0 / static_cast<double>(cfg.sweeps - 1))
                       : 1.0;
    double t = t_start;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
      if (deadline.expired()) {
        out.timed_out = true;
        break;
      }
      for (int i = 0; i < n; ++i) {
        double de = (1.0 - 2.0 * static_cast<double>(s[i])) * field[i];
        ++out.evaluations;
        bool accept;
        if (de <= 0.0) {
          accept = true;
        } else {
          double a = (t > 0.0) ? std::exp(-de / t) : 0.0;
          accept = rng.next_double() < a;
        }
        if (accept) {
          apply_flip(q, s, field, i);
          e += de;
          if (e < best.energy) best = Sample{s, e};
        }
      }
      if (cfg.debug_check_fields && (sweep + 1) % 1000 == 0) {
        std::vector<double> fresh = compute_fields(q, s);
        for (int i = 0; i < n; ++i) {
          if (std::abs(fresh[i] - field[i]) > 1e-9) {
            throw std::logic_error("annealer field cache drifted");
          }
        }
      }
      t *= ratio;
    }
  }

  best.energy = q.energy(best.assignment);
  ++out.evaluations;
  out.best = std::move(best);
  return out;
}

/// Runs restarts (possibly on several threads), merges deterministically:
/// lower energy wins, ties go to the lower restart index.
inline SolveResult run_restarts(const QuboProblem& q, const SolverConfig& cfg,
                                double t_start, double t_end,
                                bool greedy_mode) {
  if (cfg.num_restarts < 1) throw Error("num_restarts must be >= 1");
  auto t0 = std::chrono::steady_clock::now();
  Deadline deadline = make_deadline(cfg);

  std::vector<RestartOutcome> outcomes(cfg.num_restarts);
  auto run_range = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      if (r > lo && deadline.expired()) {
        outcomes[r].timed_out = true;
        outcomes[r].best.energy = std::numeric_limits<double>::infinity();
        continue;
      }
      Rng rng(cfg.seed, "solver.restart", static_cast<std::uint64_t>(r));
      outcomes[r] =
          anneal_restart(q, cfg, rng, t_start, t_end, greedy_mode, deadline);
    }
  };

  int threads = std::max(1, cfg.threads);
  if (threads == 1 || cfg.num_restarts == 1) {
    run_range(0, cfg.num_restarts);
  } else {
    threads = std::min(threads, cfg.num_restarts);
    std::vector<std::thread> pool;
    int per = (cfg.num_restarts + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int lo = t * per;
      int hi = std::min(cfg.num_restarts, lo + per);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SolveResult res;
  int best_r = -1;
  for (int r = 0; r < cfg.num_restarts; ++r) {
    res.evaluations += outcomes[r].evaluations;
    res.timed_out = res.timed_out || outcomes[r].timed_out;
    if (outcomes[r].best.assignment.empty() &&
        q.variable_count() > 0) {  // skipped restart
      continue;
    }
    res.energy_history.push_back(outcomes[r].best.energy);
    if (best_r < 0 || outcomes[r].best.energy < outcomes[best_r].best.energy) {
      best_r = r;
    }
  }
  if (best_r < 0) throw Error("no restart produced a sample");
  res.best = outcomes[best_r].best;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace detail

/// Global optimum by gray-code enumeration. Guarded at n <= 24 variables.
/// Ties resolve to the lowest assignment read as a binary integer
/// (variable i contributes bit i).
inline SolveResult solve_exhaustive(const QuboProblem& q,
                                    const SolverConfig& cfg = {}) {
  (void)cfg;
  int n = q.variable_count();
  if (n > kExhaustiveMaxBits) {
    throw GuardError("solve_exhaustive: " + std::to_string(n) +
                     " variables exceed the " +
                     std::to_string(kExhaustiveMaxBits) + "-bit guard");
  }
  auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  std::vector<std::uint8_t> s(n, 0);
  std::vector<double> field = detail::compute_fields(q, s);
  double e = q.offset();
  double best_e = e;
  std::uint64_t best_code = 0;

  std::uint64_t total = 1ULL << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    int i = std::countr_zero(k);
    double de = (1.0 - 2.0 * static_cast<double>(s[i])) * field[i];
    detail::apply_flip(q, s, field, i);
    e += de;
    std::uint64_t code = k ^ (k >> 1);
    if (e < best_e || (e == best_e && code < best_code)) {
      best_e = e;
      best_code = code;
    }
  }

  res.best.assignment.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    res.best.assignment[i] = (best_code >> i) & 1ULL;
  }
  res.best.energy = q.energy(res.best.assignment);
  res.energy_history.push_back(res.best.energy);
  res.evaluations = total;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

/// Simulated annealing: Metropolis single-bit flips over sequential sweeps
/// with a geometric temperature ladder, incremental delta energies, and
/// independent restart streams.
inline SolveResult solve_sa(const QuboProblem& q, const SolverConfig& cfg = {}) {
  if (q.variable_count() < 1) throw std::invalid_argument("empty problem");
  if (cfg.sweeps < 1) throw Error("invalid schedule: sweeps must be >= 1");
  double maxc = q.max_abs_coefficient();
  double scale = (maxc > 0.0) ? maxc : 1.0;
  double t_start =
      (cfg.t_start != 0.0) ? cfg.t_start : scale * q.variable_count();
  double t_end = (cfg.t_end != 0.0) ? cfg.t_end : 1e-3 * scale;
  if (!(t_start > t_end) || !(t_end > 0.0)) {
    throw Error("invalid schedule: need t_start > t_end > 0");
  }
  return detail::run_restarts(q, cfg, t_start, t_end, /*greedy=*/false);
}

/// Descent by single improving flips from random starts until a full pass
/// finds nothing to improve; the returned state is a local optimum.
inline SolveResult solve_greedy(const QuboProblem& q,
                                const SolverConfig& cfg = {}) {
  if (q.variable_count() < 1) throw std::invalid_argument("empty problem");
  return detail::run_restarts(q, cfg, 0.0, 0.0, /*greedy=*/true);
}

namespace detail {

struct LnsOutcome {
  std::vector<std::uint8_t> assignment;
  double energy = 0.0;
  std::vector<double> pass_history;
  std::uint64_t evaluations = 0;
  bool timed_out = false;
};

/// One large-neighborhood run from a greedy start: clamp all but a working
/// set chosen by flip impact at the incumbent (ties randomized by stream),
/// solve it with `inner`, accept if not worse; a pass covers every variable
/// once, and the run stops after a pass without strict improvement.
inline LnsOutcome lns_run(const QuboProblem& q, const SolverConfig& cfg,
                          const SolverFn& inner, std::uint64_t restart,
                          const Deadline& deadline) {
  int n = q.variable_count();
  int sub = cfg.subproblem_size;
  LnsOutcome out;

  SolverConfig greedy_cfg = cfg;
  greedy_cfg.seed = stream_seed(cfg.seed, "decomp.start", restart);
  greedy_cfg.num_restarts = 1;
  SolveResult start = solve_greedy(q, greedy_cfg);
  out.evaluations += start.evaluations;
  std::vector<std::uint8_t> inc = start.best.assignment;
  double inc_e = start.best.energy;
  out.pass_history.push_back(inc_e);

  for (std::uint64_t pass = 0;; ++pass) {
    bool improved = false;
    std::vector<std::uint8_t> covered(n, 0);
    int covered_count = 0;
    Rng tie_rng(cfg.seed, "decomp.ties", restart * 4096 + pass);
    std::vector<std::uint64_t> tie(n);
    for (int i = 0; i < n; ++i) tie[i] = tie_rng.next_u64();
    std::uint64_t iter = 0;

    while (covered_count < n) {
      if (deadline.expired()) {
        out.timed_out = true;
        break;
      }
      std::vector<double> impact(n);
      for (int i = 0; i < n; ++i) {
        impact[i] = std::abs(q.flip_delta(inc, i));
      }
      out.evaluations += static_cast<std::uint64_t>(n);

      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (impact[a] != impact[b]) return impact[a] > impact[b];
        return tie[a] < tie[b];
      });

      std::vector<int> chosen;
      chosen.reserve(sub);
      for (int i : order) {  // uncovered first, highest impact
        if (!covered[i] && static_cast<int>(chosen.size()) < sub) {
          chosen.push_back(i);
        }
      }
      for (int i : order) {  // pad with already-covered context variables
        if (static_cast<int>(chosen.size()) >= sub) break;
        if (covered[i]) chosen.push_back(i);
      }
      for (int i : chosen) {
        if (!covered[i]) {
          covered[i] = 1;
          ++covered_count;
        }
      }

      // Induced subproblem with the rest clamped at the incumbent.
      std::vector<int> local_of(n, -1);
      for (std::size_t li = 0; li < chosen.size(); ++li) {
        local_of[chosen[li]] = static_cast<int>(li);
      }
      std::vector<std::uint8_t> zeroed = inc;
      for (int i : chosen) zeroed[i] = 0;
      QuboProblem sub_q(static_cast<int>(chosen.size()));
      sub_q.set_offset(q.energy(zeroed));
      ++out.evaluations;
      for (std::size_t li = 0; li < chosen.size(); ++li) {
        int g = chosen[li];
        double h = q.linear(g);
        const auto& off = q.adjacency_offsets();
        const auto& adj = q.adjacency();
        for (int k = off[g]; k < off[g + 1]; ++k) {
          int nb = adj[k].first;
          if (local_of[nb] >= 0) {
            if (g < nb) {
              sub_q.add_quadratic(static_cast<int>(li), local_of[nb],
                                  adj[k].second);
            }
          } else if (inc[nb]) {
            h += adj[k].second;
          }
        }
        sub_q.set_linear(static_cast<int>(li), h);
      }

      SolverConfig inner_cfg = cfg;
      inner_cfg.seed = stream_seed(cfg.seed, "decomp.inner",
                                   (restart * 4096 + pass) * 65536 + iter);
      SolveResult sub_res = inner(sub_q, inner_cfg);
      out.evaluations += sub_res.evaluations;

      std::vector<std::uint8_t> candidate = inc;
      for (std::size_t li = 0; li < chosen.size(); ++li) {
        candidate[chosen[li]] = sub_res.best.assignment[li];
      }
      double cand_e = q.energy(candidate);
      ++out.evaluations;
      if (cand_e <= inc_e) {
        if (cand_e < inc_e) improved = true;
        inc = std::move(candidate);
        inc_e = cand_e;
      }
      ++iter;
    }

    out.pass_history.push_back(inc_e);
    if (!improved || out.timed_out) break;
  }

  out.assignment = std::move(inc);
  out.energy = q.energy(out.assignment);
  return out;
}

}  // namespace detail

/// Qbsolv-style decomposition: num_restarts independent large-neighborhood
/// runs, each from its own greedy incumbent, merged like the other
/// multi-start solvers. The reported history is the winning run's per-pass
/// incumbent energy, which never increases.
inline SolveResult solve_decomposed(const QuboProblem& q,
                                    const SolverConfig& cfg,
                                    const SolverFn& inner) {
  int n = q.variable_count();
  if (cfg.subproblem_size < 2) throw Error("subproblem_size must be >= 2");
  if (cfg.num_restarts < 1) throw Error("num_restarts must be >= 1");
  if (n <= cfg.subproblem_size) {
    return inner(q, cfg);
  }
  auto t0 = std::chrono::steady_clock::now();
  detail::Deadline deadline = detail::make_deadline(cfg);

  SolveResult res;
  int best = -1;
  std::vector<detail::LnsOutcome> runs;
  for (int r = 0; r < cfg.num_restarts; ++r) {
    if (r > 0 && deadline.expired()) {
      res.timed_out = true;
      break;
    }
    runs.push_back(detail::lns_run(q, cfg, inner,
                                   static_cast<std::uint64_t>(r), deadline));
    res.evaluations += runs.back().evaluations;
    res.timed_out = res.timed_out || runs.back().timed_out;
    if (best < 0 || runs.back().energy < runs[best].energy) {
      best = static_cast<int>(runs.size()) - 1;
    }
  }
  res.best = Sample{runs[best].assignment, runs[best].energy};
  res.energy_history = runs[best].pass_history;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace qpan
