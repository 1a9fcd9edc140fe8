// qpan command line: SBM generation, bipartization, regularity checks,
// QUBO solving, community panning and the desk-scale benchmark harness.
//
// Exit codes: 0 success, 1 domain error, 2 I/O error, 3 guard violation.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpan/graph.hpp"
#include "qpan/panning.hpp"
#include "qpan/qsim.hpp"
#include "qpan/qubo.hpp"
#include "qpan/remote.hpp"
#include "qpan/sbm.hpp"
#include "qpan/solvers.hpp"

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 12345;

struct CommonOpts {
  std::string input;
  std::string output;
  std::string seed_text = std::to_string(kDefaultSeed);
  std::string solver = "exhaustive";
  std::string config_path;
  std::string endpoint;
  double epsilon = 0.1;
  int phase_bits = 0;  // 0 = default width
};

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw qpan::Error("--seed expects an unsigned integer or 'random'");
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw qpan::IoError("cannot open config file " + path);
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw qpan::IoError("config file is not valid JSON");
  return j;
}

qpan::SolverConfig solver_config_from(const json& cfg, std::uint64_t seed) {
  qpan::SolverConfig sc;
  sc.seed = seed;
  if (cfg.contains("solver")) {
    const json& s = cfg["solver"];
    if (s.contains("num_restarts")) sc.num_restarts = s["num_restarts"];
    if (s.contains("sweeps")) sc.sweeps = s["sweeps"];
    if (s.contains("t_start")) sc.t_start = s["t_start"];
    if (s.contains("t_end")) sc.t_end = s["t_end"];
    if (s.contains("subproblem_size")) sc.subproblem_size = s["subproblem_size"];
    if (s.contains("time_budget_s")) sc.time_budget_s = s["time_budget_s"];
    if (s.contains("threads")) sc.threads = s["threads"];
    if (s.contains("num_reads")) sc.num_reads = s["num_reads"];
  }
  return sc;
}

qpan::StopRule stop_rule_from(const json& cfg) {
  qpan::StopRule rule;
  if (cfg.contains("pan")) {
    const json& p = cfg["pan"];
    if (p.contains("tau")) rule.tau = p["tau"];
    if (p.contains("min_size")) rule.min_size = p["min_size"];
  }
  return rule;
}

qpan::SolverFn make_solver_fn(const std::string& name,
                              const std::string& endpoint) {
  if (name == "exhaustive") {
    return [](const qpan::QuboProblem& q, const qpan::SolverConfig& cfg) {
      return qpan::solve_exhaustive(q, cfg);
    };
  }
  if (name == "sa") {
    return [](const qpan::QuboProblem& q, const qpan::SolverConfig& cfg) {
      return qpan::solve_sa(q, cfg);
    };
  }
  if (name == "greedy") {
    return [](const qpan::QuboProblem& q, const qpan::SolverConfig& cfg) {
      return qpan::solve_greedy(q, cfg);
    };
  }
  if (name == "decomposed") {
    return [](const qpan::QuboProblem& q, const qpan::SolverConfig& cfg) {
      qpan::SolverFn inner = [](const qpan::QuboProblem& sub,
                                const qpan::SolverConfig& sub_cfg) {
        return sub.variable_count() <= qpan::kExhaustiveMaxBits
                   ? qpan::solve_exhaustive(sub, sub_cfg)
                   : qpan::solve_sa(sub, sub_cfg);
      };
      return qpan::solve_decomposed(q, cfg, inner);
    };
  }
  if (name == "remote") {
    if (endpoint.empty()) {
      throw qpan::Error("--solver remote requires --endpoint");
    }
    return [endpoint](const qpan::QuboProblem& q,
                      const qpan::SolverConfig& cfg) {
      return qpan::solve_remote(q, endpoint, cfg);
    };
  }
  throw qpan::Error("unknown solver '" + name + "'");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qpan::IoError("cannot open input file " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw qpan::IoError("cannot open output file " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

void emit_json(const CommonOpts& opts, const json& j) {
  std::string text = j.dump(2) + "\n";
  if (opts.output.empty()) {
    std::cout << text;
  } else {
    write_text(opts.output, text);
  }
}

int cmd_gen_sbm(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  json params_json = cfg.contains("sbm") ? cfg["sbm"] : cfg;
  qpan::SbmParams params = qpan::sbm_params_from_json(params_json);
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::PlantedGraph pg = qpan::sample_sbm(params, seed);

  std::string base = opts.output.empty() ? std::string("sbm") : opts.output;
  {
    auto out = open_output(base + ".edges");
    qpan::write_graph(out, pg.graph);
  }
  {
    auto out = open_output(base + ".labels");
    qpan::write_labels(out, pg);
  }

  qpan::Condition4Report rep = qpan::check_condition4(pg);
  std::cout << "n=" << params.n << " k=" << params.k
            << " edges=" << pg.graph.edge_count()
            << " density=" << rep.global_density << "\n";
  std::cout << "condition4 " << (rep.holds ? "holds" : "fails") << "; margins:";
  for (std::size_t c = 0; c < rep.margins.size(); ++c) {
    std::cout << " " << (rep.defined[c] ? std::to_string(rep.margins[c])
                                        : std::string("undefined"));
  }
  std::cout << "\n";
  std::cout << "wrote " << base << ".edges and " << base << ".labels\n";
  return 0;
}

int cmd_bipartize(const CommonOpts& opts) {
  auto in = open_input(opts.input);
  qpan::Graph g = qpan::read_graph(in);
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::BipartiteGraph bg = qpan::random_split(g, seed);

  std::string base = opts.output.empty() ? std::string("split") : opts.output;
  {
    auto out = open_output(base);
    qpan::write_bigraph(out, bg);
  }
  {
    auto out = open_output(base + ".map");
    for (int a = 0; a < bg.part_a_size(); ++a) {
      out << "a " << a << " " << bg.labels_a()[a] << "\n";
    }
    for (int b = 0; b < bg.part_b_size(); ++b) {
      out << "b " << b << " " << bg.labels_b()[b] << "\n";
    }
  }
  std::cout << "split " << g.node_count() << " nodes into |A|="
            << bg.part_a_size() << " |B|=" << bg.part_b_size()
            << " crossing-edges=" << bg.edge_count() << "\n";
  std::cout << "wrote " << base << " and " << base << ".map\n";
  return 0;
}

json verdict_to_json(const qpan::RegularityVerdict& v) {
  json j;
  j["epsilon"] = v.epsilon;
  j["min_l"] = v.min_l;
  j["max_l"] = v.max_l;
  j["is_regular"] = v.is_regular;
  j["certified"] = v.certified;
  json witness;
  witness["x"] = json::array();
  witness["y"] = json::array();
  for (auto i : v.witness.x.to_indices()) witness["x"].push_back(i);
  for (auto i : v.witness.y.to_indices()) witness["y"].push_back(i);
  j["witness"] = witness;
  return j;
}

int cmd_check_regularity(const CommonOpts& opts) {
  auto in = open_input(opts.input);
  qpan::BipartiteGraph g = qpan::read_bigraph(in);
  json cfg = load_config(opts.config_path);
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::SolverConfig sc = solver_config_from(cfg, seed);
  qpan::SolverFn base = make_solver_fn(opts.solver, opts.endpoint);
  qpan::SolverFn fn = [&](const qpan::QuboProblem& q,
                          const qpan::SolverConfig&) { return base(q, sc); };
  qpan::RegularityVerdict v =
      qpan::check_regularity(g, opts.epsilon, fn, opts.solver == "exhaustive");
  emit_json(opts, verdict_to_json(v));
  return 0;
}

int cmd_solve_qubo(const CommonOpts& opts) {
  auto in = open_input(opts.input);
  json qj = json::parse(in, nullptr, false);
  if (qj.is_discarded()) throw qpan::IoError("input is not valid JSON");
  qpan::QuboProblem q = qpan::qubo_from_json(qj);
  json cfg = load_config(opts.config_path);
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::SolverConfig sc = solver_config_from(cfg, seed);
  qpan::SolverFn fn = make_solver_fn(opts.solver, opts.endpoint);
  qpan::SolveResult res = fn(q, sc);

  json out;
  out["assignment"] = json::array();
  for (auto b : res.best.assignment) out["assignment"].push_back(int(b));
  out["energy"] = res.best.energy;
  out["evaluations"] = res.evaluations;
  out["wall_time_s"] = res.wall_time_s;
  out["energy_history"] = res.energy_history;
  out["timed_out"] = res.timed_out;
  emit_json(opts, out);
  return 0;
}

int cmd_pan(const CommonOpts& opts, bool all) {
  auto in = open_input(opts.input);
  qpan::Graph g = qpan::read_graph(in);
  json cfg = load_config(opts.config_path);
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::SolverConfig sc = solver_config_from(cfg, seed);
  qpan::SolverFn base = make_solver_fn(opts.solver, opts.endpoint);
  qpan::SolverFn fn = [&](const qpan::QuboProblem& q,
                          const qpan::SolverConfig& stage_cfg) {
    qpan::SolverConfig merged = sc;
    merged.seed = stage_cfg.seed;  // panning derives per-stage streams
    return base(q, merged);
  };

  std::string base_path = opts.output.empty() ? std::string("pan") : opts.output;
  if (!all) {
    qpan::PanTrajectory traj = qpan::pan_once(g, fn, sc, seed);
    {
      auto out = open_output(base_path + ".community.txt");
      for (std::size_t i = 0; i < traj.community.size(); ++i) {
        out << traj.community[i] << (i + 1 == traj.community.size() ? "" : " ");
      }
      out << "\n";
    }
    {
      auto out = open_output(base_path + ".stages.csv");
      qpan::write_stage_csv(out, traj);
    }
    std::cout << "community of " << traj.community.size() << " nodes in "
              << traj.stages.size() - 1 << " refinements"
              << (traj.aborted ? " (stage aborted)" : "") << "\n";
    std::cout << "wrote " << base_path << ".community.txt and " << base_path
              << ".stages.csv\n";
  } else {
    qpan::StopRule rule = stop_rule_from(cfg);
    qpan::PanAllResult res = qpan::pan_all(g, fn, sc, seed, rule);
    {
      auto out = open_output(base_path + ".communities.txt");
      qpan::write_communities(out, res);
    }
    {
      auto out = open_output(base_path + ".rounds.csv");
      qpan::write_round_csv(out, res);
    }
    std::cout << "found " << res.communities.size() << " communities\n";
    std::cout << "wrote " << base_path << ".communities.txt and " << base_path
              << ".rounds.csv\n";
  }
  return 0;
}

int cmd_qexist(const CommonOpts& opts) {
  auto in = open_input(opts.input);
  qpan::BipartiteGraph g = qpan::read_bigraph(in);
  std::optional<int> m;
  if (opts.phase_bits > 0) m = opts.phase_bits;
  qpan::ExistenceReport rep = qpan::quantum_exists_regularity(g, opts.epsilon, m);

  json out;
  out["exists"] = rep.exists;
  out["M_estimate"] = rep.m_estimate;
  out["theta_hat"] = rep.theta_hat;
  out["ops_count"] = rep.ops_count;
  out["p_zero"] = rep.p_zero;
  out["phase_bits"] = rep.phase_bits;
  if (g.part_a_size() + g.part_b_size() <= qpan::kBruteForceMaxBits) {
    auto [mask, count] = qpan::regularity_marked_set(g, opts.epsilon);
    out["classical_exists"] = (count > 0);
    out["agreement"] = ((count > 0) == rep.exists);
  }
  emit_json(opts, out);
  return 0;
}

int cmd_bench(const CommonOpts& opts) {
  json cfg = load_config(opts.config_path);
  std::vector<int> sizes = {8, 12, 16, 20, 24, 32, 48, 64};
  double density = 0.5;
  if (cfg.contains("bench")) {
    if (cfg["bench"].contains("sizes")) {
      sizes = cfg["bench"]["sizes"].get<std::vector<int>>();
    }
    if (cfg["bench"].contains("density")) density = cfg["bench"]["density"];
  }
  std::uint64_t seed = resolve_seed(opts.seed_text);
  qpan::SolverConfig sc = solver_config_from(cfg, seed);

  std::ostringstream csv;
  csv << "size,solver,seconds,best_energy,truncated\n";
  const std::vector<std::string> solvers = {"exhaustive", "sa", "greedy",
                                            "decomposed"};
  for (int n : sizes) {
    int na = n / 2;
    int nb = n - na;
    qpan::BipartiteGraph g(na, nb);
    qpan::Rng rng(seed, "bench.graph", static_cast<std::uint64_t>(n));
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) {
        if (rng.bernoulli(density)) g.add_edge(a, b);
      }
    }
    qpan::QuboProblem q = qpan::build_regularity_qubo(g);
    for (const auto& name : solvers) {
      if (name == "exhaustive" && n > qpan::kExhaustiveMaxBits) continue;
      qpan::SolverFn fn = make_solver_fn(name, "");
      qpan::SolveResult res = fn(q, sc);
      // Trust nothing that is not re-evaluated.
      double energy = q.energy(res.best.assignment);
      csv << n << "," << name << "," << res.wall_time_s << "," << energy << ","
          << (res.timed_out ? 1 : 0) << "\n";
    }
  }
  if (opts.output.empty()) {
    std::cout << csv.str();
  } else {
    write_text(opts.output, csv.str());
    std::cout << "wrote " << opts.output << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QUBO-based regularity checking and community panning"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto add_common = [&](CLI::App* sub, bool with_solver) {
    sub->add_option("--input", opts.input, "input file");
    sub->add_option("--output", opts.output, "output file or prefix");
    sub->add_option("--seed", opts.seed_text,
                    "integer seed or 'random' (default " +
                        std::to_string(kDefaultSeed) + ")");
    sub->add_option("--config", opts.config_path, "JSON config file");
    if (with_solver) {
      sub->add_option("--solver", opts.solver,
                      "exhaustive|sa|greedy|decomposed|remote");
      sub->add_option("--endpoint", opts.endpoint, "remote solver URL");
    }
  };

  auto* gen = app.add_subcommand("gen-sbm", "sample a stochastic block model");
  add_common(gen, false);

  auto* bip = app.add_subcommand("bipartize", "random split into a bipartite graph");
  add_common(bip, false);

  auto* reg = app.add_subcommand("check-regularity",
                                 "two-sided epsilon-regularity verdict");
  add_common(reg, true);
  reg->add_option("--epsilon", opts.epsilon, "regularity epsilon");

  auto* slv = app.add_subcommand("solve-qubo", "solve a QUBO JSON file");
  add_common(slv, true);

  auto* pan = app.add_subcommand("pan", "extract one community");
  add_common(pan, true);

  auto* pan_all = app.add_subcommand("pan-all", "extract all communities");
  add_common(pan_all, true);

  auto* qex = app.add_subcommand("qexist",
                                 "quantum existence check of irregularity");
  add_common(qex, false);
  qex->add_option("--epsilon", opts.epsilon, "regularity epsilon");
  qex->add_option("--phase-bits", opts.phase_bits,
                  "phase register width (default ceil((n1+n2)/2))");

  auto* bench = app.add_subcommand("bench", "timing sweep over sizes and solvers");
  add_common(bench, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_sbm(opts);
    if (bip->parsed()) return cmd_bipartize(opts);
    if (reg->parsed()) return cmd_check_regularity(opts);
    if (slv->parsed()) return cmd_solve_qubo(opts);
    if (pan->parsed()) return cmd_pan(opts, false);
    if (pan_all->parsed()) return cmd_pan(opts, true);
    if (qex->parsed()) return cmd_qexist(opts);
    if (bench->parsed()) return cmd_bench(opts);
  } catch (const qpan::GuardError& e) {
    std::cerr << "guard violation: " << e.what() << "\n";
    return 3;
  } catch (const qpan::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const qpan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
