#include "lagree/simnet.hpp"

#include <algorithm>
#include <stdexcept>

#include "lagree/adversary.hpp"
#include "lagree/gwts.hpp"
#include "lagree/rbcast.hpp"
#include "lagree/rsm.hpp"
#include "lagree/sbs.hpp"
#include "lagree/signature.hpp"
#include "lagree/wts.hpp"

namespace lagree {

// ---------------------------------------------------------------------------
// Scenario configuration

Json ScenarioConfig::to_json() const {
  Json byz = Json::array();
  for (const auto& b : byzantine) {
    byz.push_back(Json{{"node", b.node}, {"strategy", b.strategy}, {"params", b.params}});
  }
  Json links = Json::array();
  for (const auto& [a, b] : scheduler.delayed_links) links.push_back(Json::array({a, b}));
  Json ins = Json::object();
  for (const auto& [id, vals] : inputs) ins[std::to_string(id)] = vals;
  Json cbyz = Json::array();
  for (const auto& b : clients.byzantine) {
    cbyz.push_back(Json{{"node", b.node}, {"strategy", b.strategy}, {"params", b.params}});
  }
  return Json{
      {"protocol", protocol},
      {"n", n},
      {"f", f},
      {"byzantine", byz},
      {"scheduler",
       Json{{"policy", scheduler.policy},
            {"seed", scheduler.seed},
            {"age_cap", scheduler.age_cap},
            {"delay_prefix", scheduler.delay_prefix},
            {"delayed_links", links}}},
      {"rounds", rounds},
      {"budget", budget},
      {"inputs", ins},
      {"clients", Json{{"count", clients.count}, {"byzantine", cbyz}, {"script", clients.script}}},
      {"admissibility", admissibility},
      {"scheme", scheme},
  };
}

static std::vector<ByzSpec> byz_from_json(const Json& arr) {
  std::vector<ByzSpec> out;
  for (const auto& j : arr) {
    ByzSpec b;
    b.node = j.at("node").get<NodeId>();
    b.strategy = j.at("strategy").get<std::string>();
    b.params = j.value("params", Json::object());
    out.push_back(std::move(b));
  }
  return out;
}

ScenarioConfig ScenarioConfig::from_json(const Json& j) {
  ScenarioConfig c;
  c.protocol = j.value("protocol", c.protocol);
  c.n = j.value("n", c.n);
  c.f = j.value("f", c.f);
  if (j.contains("byzantine")) c.byzantine = byz_from_json(j.at("byzantine"));
  if (j.contains("scheduler")) {
    const Json& s = j.at("scheduler");
    c.scheduler.policy = s.value("policy", c.scheduler.policy);
    c.scheduler.seed = s.value("seed", c.scheduler.seed);
    c.scheduler.age_cap = s.value("age_cap", c.scheduler.age_cap);
    c.scheduler.delay_prefix = s.value("delay_prefix", c.scheduler.delay_prefix);
    if (s.contains("delayed_links")) {
      for (const auto& l : s.at("delayed_links")) {
        c.scheduler.delayed_links.emplace_back(l.at(0).get<NodeId>(), l.at(1).get<NodeId>());
      }
    }
  }
  c.rounds = j.value("rounds", c.rounds);
  c.budget = j.value("budget", c.budget);
  if (j.contains("inputs")) {
    for (const auto& [key, vals] : j.at("inputs").items()) {
      c.inputs[NodeId(std::stol(key))] = vals.get<std::vector<std::string>>();
    }
  }
  if (j.contains("clients")) {
    const Json& cl = j.at("clients");
    c.clients.count = cl.value("count", 0);
    if (cl.contains("byzantine")) c.clients.byzantine = byz_from_json(cl.at("byzantine"));
    if (cl.contains("script")) c.clients.script = cl.at("script").get<std::vector<std::string>>();
  }
  c.admissibility = j.value("admissibility", c.admissibility);
  c.scheme = j.value("scheme", c.scheme);
  return c;
}

std::set<NodeId> ScenarioConfig::byz_nodes() const {
  std::set<NodeId> out;
  for (const auto& b : byzantine) out.insert(b.node);
  return out;
}

std::set<NodeId> ScenarioConfig::byz_client_nodes() const {
  std::set<NodeId> out;
  for (const auto& b : clients.byzantine) out.insert(b.node);
  return out;
}

std::string ScenarioConfig::effective_admissibility() const {
  if (!admissibility.empty()) return admissibility;
  return protocol == "rsm" ? "wellformed" : "accept_all";
}

AdmissibilityPredicate ScenarioConfig::predicate() const {
  return effective_admissibility() == "wellformed" ? wellformed_command_predicate()
                                                   : accept_all_predicate();
}

std::optional<std::string> validate_config(const ScenarioConfig& cfg) {
  static const std::set<std::string> kProtocols = {"wts", "gwts", "sbs", "rsm", "rbcast"};
  static const std::set<std::string> kPolicies = {"lockstep", "random", "adversarial_delay"};
  if (!kProtocols.count(cfg.protocol)) return "unknown protocol '" + cfg.protocol + "'";
  if (cfg.n < 1) return "n must be positive";
  if (cfg.f < 0) return "f must be non-negative";
  if (cfg.n < 3 * cfg.f + 1) {
    return "resilience violated: need n >= 3f+1, got n=" + std::to_string(cfg.n) +
           " f=" + std::to_string(cfg.f);
  }
  if (!kPolicies.count(cfg.scheduler.policy)) {
    return "unknown scheduler policy '" + cfg.scheduler.policy + "'";
  }
  if (cfg.budget < 1) return "budget must be positive";
  if (int(cfg.byzantine.size()) > cfg.f) {
    return "too many byzantine nodes: " + std::to_string(cfg.byzantine.size()) +
           " > f=" + std::to_string(cfg.f);
  }
  std::set<NodeId> seen;
  for (const auto& b : cfg.byzantine) {
    if (b.node < 0 || b.node >= cfg.n) return "byzantine node id out of range";
    if (!seen.insert(b.node).second) return "duplicate byzantine node id";
    if (!adversary_supported(b.strategy, cfg.protocol)) {
      return "strategy '" + b.strategy + "' not supported for protocol '" + cfg.protocol + "'";
    }
    if (b.strategy == "bad_client") return "bad_client occupies a client slot, not a replica";
  }
  if (cfg.protocol == "rsm") {
    if (cfg.clients.count < 1) return "rsm needs at least one client";
    if (cfg.rounds < 1) return "rsm needs a positive round budget";
    for (const auto& b : cfg.clients.byzantine) {
      if (b.node < cfg.n || b.node >= cfg.n + cfg.clients.count) {
        return "byzantine client id out of range";
      }
      if (b.strategy != "bad_client") {
        return "client strategy must be bad_client, got '" + b.strategy + "'";
      }
    }
  } else {
    if (cfg.clients.count != 0) return "clients only make sense for rsm";
    if ((cfg.protocol == "gwts") && cfg.rounds < 1) return "gwts needs a positive round budget";
  }
  const std::string adm = cfg.effective_admissibility();
  if (adm != "accept_all" && adm != "wellformed") {
    return "unknown admissibility '" + cfg.admissibility + "'";
  }
  if (cfg.scheme != "ideal" && cfg.scheme != "ed25519") {
    return "unknown signature scheme '" + cfg.scheme + "'";
  }
  for (const auto& [id, vals] : cfg.inputs) {
    if (id < 0 || id >= cfg.n) return "input node id out of range";
    (void)vals;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

// Compact kind-specific fields for send events. Reliable-broadcast frames
// carry their tag (instance identity); acks and nacks of the single-shot
// protocol carry the full set (they are small and the offline commit oracle
// reads them); requests carry their size.
Json send_event_detail(const ProtocolMessage& msg) {
  Json d = Json::object();
  if (const auto* frame = std::get_if<RbFrame>(&msg)) {
    d["t"] = tag_to_json(frame->tag);
  } else if (const auto* m = std::get_if<WtsAckReqMsg>(&msg)) {
    d["size"] = m->proposed.size();
    d["ts"] = m->ts;
  } else if (const auto* m = std::get_if<WtsAckMsg>(&msg)) {
    d["set"] = to_hex(m->accepted.encode());
    d["ts"] = m->ts;
  } else if (const auto* m = std::get_if<WtsNackMsg>(&msg)) {
    d["set"] = to_hex(m->accepted.encode());
    d["ts"] = m->ts;
  } else if (const auto* m = std::get_if<GwtsAckReqMsg>(&msg)) {
    d["size"] = m->proposed.size();
    d["ts"] = m->ts;
    d["r"] = m->round;
  } else if (const auto* m = std::get_if<GwtsNackMsg>(&msg)) {
    d["ts"] = m->ts;
    d["r"] = m->round;
  } else if (const auto* m = std::get_if<SbsAckReqMsg>(&msg)) {
    d["size"] = m->proposed.size();
    d["ts"] = m->ts;
  }
  return d;
}

}  // namespace

Simulator::Simulator(SchedulerSpec sched, uint64_t budget, int total_nodes)
    : sched_(std::move(sched)),
      budget_(budget),
      total_nodes_(total_nodes),
      rng_(sched_.seed) {}

void Simulator::add_node(std::unique_ptr<Node> node) { nodes_.push_back(std::move(node)); }

void Simulator::set_meta(Json meta) { meta_ = std::move(meta); }

bool Simulator::eligible(const Envelope& e) const {
  if (sched_.policy != "adversarial_delay") return true;
  if (delivered_ >= sched_.delay_prefix) return true;
  for (const auto& [a, b] : sched_.delayed_links) {
    if (a == e.src && b == e.dst) return false;
  }
  return true;
}

void Simulator::send(NodeId dst, ProtocolMessage msg) {
  uint64_t seq = seq_++;
  Json detail = send_event_detail(msg);
  detail["dst"] = dst;
  detail["k"] = message_kind(msg);
  trace_.push_back(TraceEvent{seq, current_depth_, current_node_, ev::send, std::move(detail)});
  if (dst < 0 || dst >= total_nodes_) return;
  Envelope e;
  e.src = current_node_;
  e.dst = dst;
  e.msg = std::move(msg);
  e.send_depth = current_depth_;
  e.seq = seq;
  e.enqueue_step = step_;
  if (!eligible(e)) {
    held_.push_back(std::move(e));
    return;
  }
  index_by_seq_[seq] = pending_.size();
  pending_.push_back(std::move(e));
}

void Simulator::trace(const std::string& kind, Json detail) {
  uint64_t seq = seq_++;
  trace_.push_back(TraceEvent{seq, current_depth_, current_node_, kind, std::move(detail)});
}

void Simulator::pump_held() {
  if (held_.empty()) return;
  bool release_all = pending_.empty();
  if (delivered_ < sched_.delay_prefix && !release_all) return;
  for (auto& e : held_) {
    index_by_seq_[e.seq] = pending_.size();
    pending_.push_back(std::move(e));
  }
  held_.clear();
}

size_t Simulator::pick_index() {
  if (sched_.policy == "lockstep") {
    // Oldest causal depth first, ties by sequence number: breadth-first
    // message order, so every node finishes depth d before d+1 starts.
    size_t best = 0;
    for (size_t i = 1; i < pending_.size(); i++) {
      auto key = std::pair(pending_[i].send_depth, pending_[i].seq);
      auto cur = std::pair(pending_[best].send_depth, pending_[best].seq);
      if (key < cur) best = i;
    }
    return best;
  }
  // random and adversarial_delay: starvation-free uniform choice. Whenever
  // the oldest queued envelope has waited age_cap deliveries it goes first.
  size_t oldest = index_by_seq_.begin()->second;
  if (step_ - pending_[oldest].enqueue_step >= sched_.age_cap) return oldest;
  return size_t(rng_() % pending_.size());
}

RunResult Simulator::run() {
  trace(ev::run_meta, meta_);
  for (size_t i = 0; i < nodes_.size(); i++) {
    current_node_ = NodeId(i);
    current_depth_ = 0;
    nodes_[i]->on_start(*this);
  }
  current_node_ = -1;
  current_depth_ = 0;
  while (delivered_ < budget_) {
    pump_held();
    if (pending_.empty()) break;
    size_t idx = pick_index();
    Envelope e = std::move(pending_[idx]);
    index_by_seq_.erase(e.seq);
    if (idx + 1 != pending_.size()) {
      pending_[idx] = std::move(pending_.back());
      index_by_seq_[pending_[idx].seq] = idx;
    }
    pending_.pop_back();
    delivered_++;
    step_++;
    current_node_ = e.dst;
    current_depth_ = e.send_depth + 1;
    nodes_[size_t(e.dst)]->on_deliver(*this, e.src, e.msg);
    current_node_ = -1;
    current_depth_ = 0;
  }
  bool quiescent = pending_.empty() && held_.empty();
  trace(ev::run_end, Json{{"quiescent", quiescent}, {"delivered", delivered_}});
  RunResult r;
  r.trace = std::move(trace_);
  r.quiescent = quiescent;
  r.delivered = delivered_;
  return r;
}

// ---------------------------------------------------------------------------
// Scenario assembly

namespace {

// Correct node for rbcast-only scenarios: broadcasts one value, relays and
// delivers everything else.
class RbOnlyNode : public Node {
 public:
  RbOnlyNode(NodeId self, int n, int f, std::string input)
      : self_(self), input_(std::move(input)), rb_(self, n, f) {}

  void on_start(Emitter& em) override {
    Bytes payload =
        LatticeValue::single(make_value_item(uint64_t(int64_t(self_)), input_)).encode();
    rb_.broadcast(em, disclosure_tag(self_, 0), payload);
  }

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    if (const auto* frame = std::get_if<RbFrame>(&msg)) rb_.on_frame(em, src, *frame);
  }

 private:
  NodeId self_;
  std::string input_;
  RbcastEndpoint rb_;
};

std::string input_or(const ScenarioConfig& cfg, NodeId id, size_t idx, const std::string& dflt) {
  auto it = cfg.inputs.find(id);
  if (it == cfg.inputs.end() || idx >= it->second.size()) return dflt;
  return it->second[idx];
}

std::vector<std::string> gwts_script(const ScenarioConfig& cfg, NodeId id) {
  auto it = cfg.inputs.find(id);
  if (it != cfg.inputs.end()) return it->second;
  // Stop submitting a few rounds before the budget runs out so the cluster
  // has slack to fold the last submissions into everyone's decisions.
  uint64_t inject = cfg.rounds > 3 ? cfg.rounds - 3 : cfg.rounds;
  std::vector<std::string> script;
  for (uint64_t r = 0; r < inject; r++) {
    script.push_back("g" + std::to_string(id) + "_" + std::to_string(r));
  }
  return script;
}

std::vector<RsmClientOp> client_script(const ScenarioConfig& cfg, NodeId id) {
  std::vector<std::string> names = cfg.clients.script;
  if (names.empty()) names = {"update", "read", "update", "read"};
  std::vector<RsmClientOp> ops;
  for (const auto& s : names) {
    if (s == "update") {
      ops.push_back({RsmClientOp::Kind::update, "u" + std::to_string(id)});
    } else if (s == "read") {
      ops.push_back({RsmClientOp::Kind::read, ""});
    } else {
      throw std::runtime_error("unknown client op '" + s + "'");
    }
  }
  return ops;
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  if (auto err = validate_config(cfg)) {
    throw std::runtime_error("invalid scenario: " + *err);
  }
  auto sig = make_signature_provider(cfg.scheme, cfg.scheduler.seed, cfg.total_nodes());
  auto admissible = cfg.predicate();
  auto byz = cfg.byz_nodes();
  auto byz_clients = cfg.byz_client_nodes();

  Simulator sim(cfg.scheduler, cfg.budget, cfg.total_nodes());
  sim.set_meta(Json{{"config", cfg.to_json()}, {"quorum", byz_quorum(cfg.n, cfg.f)}});

  for (NodeId id = 0; id < cfg.n; id++) {
    if (byz.count(id)) {
      const auto& spec = *std::find_if(cfg.byzantine.begin(), cfg.byzantine.end(),
                                       [&](const ByzSpec& b) { return b.node == id; });
      sim.add_node(make_adversary(spec.strategy, cfg.protocol, id, cfg.n, cfg.f, sig, admissible));
      continue;
    }
    if (cfg.protocol == "wts") {
      Item v = make_value_item(uint64_t(int64_t(id)), input_or(cfg, id, 0, "w" + std::to_string(id)));
      sim.add_node(std::make_unique<WtsNode>(WtsConfig{id, cfg.n, cfg.f, admissible}, v));
    } else if (cfg.protocol == "gwts") {
      sim.add_node(std::make_unique<GwtsNode>(
          GwtsConfig{id, cfg.n, cfg.f, admissible, cfg.rounds}, gwts_script(cfg, id)));
    } else if (cfg.protocol == "sbs") {
      Item v = make_value_item(uint64_t(int64_t(id)), input_or(cfg, id, 0, "s" + std::to_string(id)));
      sim.add_node(std::make_unique<SbsNode>(SbsConfig{id, cfg.n, cfg.f, admissible}, v, sig));
    } else if (cfg.protocol == "rsm") {
      sim.add_node(std::make_unique<RsmReplicaNode>(
          RsmReplicaConfig{id, cfg.n, cfg.f, admissible, cfg.rounds}));
    } else {
      sim.add_node(std::make_unique<RbOnlyNode>(id, cfg.n, cfg.f,
                                                input_or(cfg, id, 0, "r" + std::to_string(id))));
    }
  }
  for (NodeId id = cfg.n; id < cfg.total_nodes(); id++) {
    if (byz_clients.count(id)) {
      sim.add_node(make_adversary("bad_client", cfg.protocol, id, cfg.n, cfg.f, sig, admissible));
    } else {
      RsmClientConfig cc;
      cc.self = id;
      cc.n = cfg.n;
      cc.f = cfg.f;
      cc.script = client_script(cfg, id);
      sim.add_node(std::make_unique<RsmClientNode>(cc));
    }
  }
  return sim.run();
}

}  // namespace lagree
