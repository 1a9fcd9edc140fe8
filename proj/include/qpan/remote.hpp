/// Remote annealer wire protocol: client and a canned localhost mock.
///
/// POST /solve with the QUBO JSON plus {"num_reads": k, "time_limit_ms": t};
/// the response is {"samples":[{"assignment":[0,1,..],"energy":e,
/// "occurrences":m},..]}. The client trusts nothing: every returned energy
/// is re-evaluated locally and a mismatch beyond 1e-6 is an error.
#pragma once

#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "qpan/errors.hpp"
#include "qpan/qubo.hpp"
#include "qpan/solvers.hpp"

namespace qpan {

inline constexpr double kRemoteEnergyTolerance = 1e-6;

inline SolveResult solve_remote(const QuboProblem& q,
                                const std::string& endpoint,
                                const SolverConfig& cfg = {}) {
  auto t0 = std::chrono::steady_clock::now();

  nlohmann::json body = to_json(q);
  body["num_reads"] = cfg.num_reads;
  body["time_limit_ms"] =
      static_cast<long>(cfg.time_budget_s > 0 ? cfg.time_budget_s * 1000.0
                                              : 0);

  httplib::Client client(endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);
  auto http = client.Post("/solve", body.dump(), "application/json");
  if (!http) {
    throw NetworkError("remote solver unreachable at " + endpoint + ": " +
                       httplib::to_string(http.error()));
  }
  if (http->status != 200) {
    throw NetworkError("remote solver returned HTTP " +
                       std::to_string(http->status));
  }

  nlohmann::json reply = nlohmann::json::parse(http->body, nullptr,
                                               /*allow_exceptions=*/false);
  if (reply.is_discarded() || !reply.is_object() ||
      !reply.contains("samples") || !reply["samples"].is_array()) {
    throw MalformedResponseError("remote solver response is not valid JSON "
                                 "with a samples array");
  }
  if (reply["samples"].empty()) {
    throw NoSamplesError("remote solver returned no samples");
  }

  SolveResult res;
  int best = -1;
  std::vector<Sample> samples;
  for (const auto& row : reply["samples"]) {
    if (!row.is_object() || !row.contains("assignment") ||
        !row.contains("energy") || !row.contains("occurrences")) {
      throw MalformedResponseError("sample is missing assignment/energy/"
                                   "occurrences");
    }
    Sample s;
    for (const auto& bit : row["assignment"]) {
      int v = bit.get<int>();
      if (v != 0 && v != 1) {
        throw MalformedResponseError("assignment bits must be 0 or 1");
      }
      s.assignment.push_back(static_cast<std::uint8_t>(v));
    }
    if (static_cast<int>(s.assignment.size()) != q.variable_count()) {
      throw MalformedResponseError("assignment length mismatch");
    }
    double claimed = row["energy"].get<double>();
    double local = q.energy(s.assignment);
    if (std::abs(claimed - local) > kRemoteEnergyTolerance) {
      throw EnergyMismatchError(
          "remote sample energy " + std::to_string(claimed) +
          " disagrees with local evaluation " + std::to_string(local));
    }
    s.energy = local;
    res.energy_history.push_back(local);
    samples.push_back(std::move(s));
    if (best < 0 || samples.back().energy < samples[best].energy) {
      best = static_cast<int>(samples.size()) - 1;
    }
  }
  res.best = samples[best];
  res.evaluations = samples.size();
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

/// Localhost mock with canned behaviors for exercising the client contract.
class MockSolverServer {
 public:
  enum class Behavior { exact, corrupt_energy, empty_samples, malformed };

  explicit MockSolverServer(Behavior behavior = Behavior::exact)
      : behavior_(behavior) {
    server_.Post("/solve", [this](const httplib::Request& req,
                                  httplib::Response& resp) {
      handle(req, resp);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw Error("mock server failed to bind");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  MockSolverServer(const MockSolverServer&) = delete;
  MockSolverServer& operator=(const MockSolverServer&) = delete;

  ~MockSolverServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& resp) {
    if (behavior_ == Behavior::malformed) {
      resp.set_content("this is not json", "text/plain");
      return;
    }
    nlohmann::json reply;
    reply["samples"] = nlohmann::json::array();
    if (behavior_ == Behavior::empty_samples) {
      resp.set_content(reply.dump(), "application/json");
      return;
    }
    QuboProblem q = qubo_from_json(nlohmann::json::parse(req.body));
    int num_reads = 1;
    auto parsed = nlohmann::json::parse(req.body);
    if (parsed.contains("num_reads")) num_reads = parsed["num_reads"].get<int>();
    SolveResult exact = solve_exhaustive(q);
    double energy = exact.best.energy;
    if (behavior_ == Behavior::corrupt_energy) energy += 1.0;
    nlohmann::json sample;
    sample["assignment"] = nlohmann::json::array();
    for (auto b : exact.best.assignment) {
      sample["assignment"].push_back(static_cast<int>(b));
    }
    sample["energy"] = energy;
    sample["occurrences"] = num_reads;
    reply["samples"].push_back(sample);
    resp.set_content(reply.dump(), "application/json");
  }

  Behavior behavior_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace qpan
