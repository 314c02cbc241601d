#pragma once

#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>

#include "lagree/node.hpp"

namespace lagree {

// Byzantine quorum size: any two quorums intersect in at least one correct
// process when n >= 3f+1.
inline int byz_quorum(int n, int f) { return (n + f) / 2 + 1; }

struct Envelope {
  NodeId src = 0;
  NodeId dst = 0;
  ProtocolMessage msg;
  uint64_t send_depth = 0;
  uint64_t seq = 0;           // equals the seq of the matching send event
  uint64_t enqueue_step = 0;  // scheduler step at which it was queued
};

struct SchedulerSpec {
  std::string policy = "lockstep";  // lockstep | random | adversarial_delay
  uint64_t seed = 0;
  uint32_t age_cap = 64;
  // adversarial_delay: messages on `delayed_links` are withheld for the
  // first `delay_prefix` deliveries, then fairness resumes.
  uint64_t delay_prefix = 0;
  std::vector<std::pair<NodeId, NodeId>> delayed_links;
};

struct ByzSpec {
  NodeId node = 0;
  std::string strategy;
  Json params = Json::object();
};

struct ClientsSpec {
  int count = 0;
  std::vector<ByzSpec> byzantine;
  // Op sequence each correct client walks through, e.g. {"update","read"}.
  std::vector<std::string> script;
};

struct ScenarioConfig {
  std::string protocol = "wts";  // wts | gwts | sbs | rsm | rbcast
  int n = 4;
  int f = 1;
  std::vector<ByzSpec> byzantine;
  SchedulerSpec scheduler;
  uint64_t rounds = 1;  // gwts/rsm round budget
  uint64_t budget = 2000000;
  // Per-node input payload strings; missing nodes get generated defaults.
  std::map<NodeId, std::vector<std::string>> inputs;
  ClientsSpec clients;
  std::string admissibility;  // "accept_all" | "wellformed"; default by protocol
  std::string scheme = "ideal";

  Json to_json() const;
  static ScenarioConfig from_json(const Json& j);

  int total_nodes() const { return protocol == "rsm" ? n + clients.count : n; }
  std::set<NodeId> byz_nodes() const;
  std::set<NodeId> byz_client_nodes() const;  // absolute node ids (>= n)
  std::string effective_admissibility() const;
  AdmissibilityPredicate predicate() const;
};

/// nullopt when the scenario is runnable; otherwise a human-readable reason.
/// Resilience requires n >= 3f+1 and at most f Byzantine protocol nodes.
std::optional<std::string> validate_config(const ScenarioConfig& cfg);

struct RunResult {
  Trace trace;
  bool quiescent = false;
  uint64_t delivered = 0;
};

/// Deterministic discrete-event network. Single-threaded: one envelope is
/// delivered per step, handlers run to completion, and every choice the
/// scheduler makes is a pure function of (config, seed). Causal depth
/// bookkeeping: an envelope sent while handling an event at depth d is
/// delivered at depth d+1; on_start runs at depth 0.
class Simulator : public Emitter {
 public:
  Simulator(SchedulerSpec sched, uint64_t budget, int total_nodes);

  void add_node(std::unique_ptr<Node> node);
  void set_meta(Json meta);

  void send(NodeId dst, ProtocolMessage msg) override;
  void trace(const std::string& kind, Json detail) override;

  RunResult run();

 private:
  bool eligible(const Envelope& e) const;
  size_t pick_index();
  void pump_held();

  SchedulerSpec sched_;
  uint64_t budget_;
  int total_nodes_;
  std::vector<std::unique_ptr<Node>> nodes_;
  Json meta_ = Json::object();

  std::vector<Envelope> pending_;           // swap-removed on delivery
  std::map<uint64_t, size_t> index_by_seq_; // seq -> index in pending_
  std::vector<Envelope> held_;              // adversarial_delay backlog
  std::mt19937_64 rng_;
  Trace trace_;
  uint64_t seq_ = 0;
  uint64_t step_ = 0;
  uint64_t delivered_ = 0;
  uint64_t current_depth_ = 0;
  NodeId current_node_ = -1;
};

/// Builds the node set for a scenario (protocol nodes, adversaries, RSM
/// clients), runs it to quiescence or budget exhaustion, returns the trace.
RunResult run_scenario(const ScenarioConfig& cfg);

}  // namespace lagree
