#include <deque>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "lagree/checker.hpp"
#include "lagree/lattice.hpp"
#include "lagree/simnet.hpp"
#include "lagree/trace.hpp"
#include "lagree/wts.hpp"

using namespace lagree;

namespace {

// Loopback emitter for driving a single node without a simulator. Messages
// to self are queued and pumped back into the node.
struct Loop : Emitter {
  WtsNode* node = nullptr;
  std::deque<ProtocolMessage> queue;

  void send(NodeId dst, ProtocolMessage msg) override {
    REQUIRE(dst == 0);
    queue.push_back(std::move(msg));
  }
  void trace(const std::string&, Json) override {}

  void pump() {
    while (!queue.empty()) {
      ProtocolMessage m = std::move(queue.front());
      queue.pop_front();
      node->on_deliver(*this, 0, m);
    }
  }
};

LatticeValue dec_value(const Json& detail, const char* field = "v") {
  auto v = LatticeValue::decode_all(from_hex(detail.at(field).get<std::string>()));
  REQUIRE(v.has_value());
  return *v;
}

Item dec_item(const Json& detail) {
  Bytes b = from_hex(detail.at("v").get<std::string>());
  size_t pos = 0;
  return Item::decode(b, pos);
}

ScenarioConfig wts_cfg(int n, int f, const std::string& strategy, uint64_t seed) {
  ScenarioConfig cfg;
  cfg.protocol = "wts";
  cfg.n = n;
  cfg.f = f;
  cfg.scheduler.policy = "random";
  cfg.scheduler.seed = seed;
  if (f > 0) cfg.byzantine.push_back({NodeId(n - 1), strategy, Json::object()});
  return cfg;
}

// Every ack and nack a correct acceptor sends carries its Accepted_set at
// send time, and that set only grows. So the full per-acceptor sequence of
// ack/nack sets must form a chain under set inclusion.
void check_acceptor_chains(const Trace& trace, const std::set<NodeId>& byz) {
  std::map<NodeId, LatticeValue> last;
  for (const auto& e : trace) {
    if (e.kind != ev::send || byz.count(e.node)) continue;
    const std::string k = e.detail.value("k", "");
    if (k != "wts_ack" && k != "wts_nack") continue;
    LatticeValue cur = dec_value(e.detail, "set");
    auto it = last.find(e.node);
    if (it != last.end()) {
      CAPTURE(e.seq);
      CAPTURE(e.node);
      REQUIRE(leq(it->second, cur));
    }
    last[e.node] = std::move(cur);
  }
}

}  // namespace

TEST_CASE("single node decides its own value through the full pipeline") {
  WtsConfig cfg;
  cfg.self = 0;
  cfg.n = 1;
  cfg.f = 0;
  cfg.admissible = accept_all_predicate();
  WtsNode node(cfg, make_value_item(0, "solo"));
  Loop loop;
  loop.node = &node;

  node.on_start(loop);
  loop.pump();

  REQUIRE(node.state() == WtsState::decided);
  REQUIRE(node.decision().has_value());
  LatticeValue expect = LatticeValue::single(make_value_item(0, "solo"));
  CHECK(node.decision()->encode() == expect.encode());
  CHECK(leq(expect, node.svs()));
  CHECK(node.ack_count() >= node.quorum());
  CHECK(node.waiting_size() == 0);
}

TEST_CASE("acceptor ack and nack sets form a chain per acceptor") {
  for (const char* strategy : {"equivocator", "silent", "nack_flooder", "stale_acker"}) {
    for (uint64_t seed = 0; seed < 8; ++seed) {
      ScenarioConfig cfg = wts_cfg(4, 1, strategy, seed);
      RunResult rr = run_scenario(cfg);
      REQUIRE(rr.quiescent);
      check_acceptor_chains(rr.trace, cfg.byz_nodes());
    }
  }
}

TEST_CASE("checker passes across adversaries and seeds") {
  for (const char* strategy : {"equivocator", "silent", "nack_flooder", "stale_acker"}) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      ScenarioConfig cfg = wts_cfg(4, 1, strategy, seed);
      RunResult rr = run_scenario(cfg);
      REQUIRE(rr.quiescent);
      Verdict v = check_trace(rr.trace, cfg);
      CAPTURE(strategy);
      CAPTURE(seed);
      CHECK(v.passed());
    }
  }
}

TEST_CASE("all-correct run decides the join of all proposals") {
  ScenarioConfig cfg = wts_cfg(4, 0, "", 3);
  cfg.scheduler.policy = "lockstep";
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);

  LatticeValue all;
  std::map<NodeId, LatticeValue> decided;
  for (const auto& e : rr.trace) {
    if (e.kind == ev::propose) {
      all.insert(dec_item(e.detail));
    } else if (e.kind == ev::decided && e.node >= 0) {
      decided[e.node] = dec_value(e.detail);
    }
  }
  REQUIRE(decided.size() == 4);
  for (const auto& [node, d] : decided) {
    CAPTURE(node);
    CHECK(d.encode() == all.encode());
  }
}

TEST_CASE("lockstep depth stays within the decide bound") {
  for (int n : {4, 7}) {
    int f = (n - 1) / 3;
    ScenarioConfig cfg = wts_cfg(n, f, "equivocator", 1);
    cfg.scheduler.policy = "lockstep";
    RunResult rr = run_scenario(cfg);
    REQUIRE(rr.quiescent);
    Verdict v = check_trace(rr.trace, cfg);
    CHECK(v.passed());
    RunMetrics m = collect_metrics(rr.trace, cfg);
    CAPTURE(n);
    CHECK(m.max_decide_depth <= uint64_t(2 * f + 5));
    CHECK(m.max_refinements <= uint64_t(f));
  }
}

TEST_CASE("refinements never exceed f under the random scheduler") {
  for (uint64_t seed = 20; seed < 30; ++seed) {
    ScenarioConfig cfg = wts_cfg(7, 2, "nack_flooder", seed);
    cfg.byzantine.push_back({5, "equivocator", Json::object()});
    RunResult rr = run_scenario(cfg);
    REQUIRE(rr.quiescent);
    Verdict v = check_trace(rr.trace, cfg);
    CHECK(v.passed());
    RunMetrics m = collect_metrics(rr.trace, cfg);
    CHECK(m.max_refinements <= 2);
  }
}

TEST_CASE("same config and seed produce byte-identical traces") {
  ScenarioConfig cfg = wts_cfg(4, 1, "equivocator", 42);
  RunResult a = run_scenario(cfg);
  RunResult b = run_scenario(cfg);
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
  CHECK(a.delivered == b.delivered);
  CHECK(a.quiescent == b.quiescent);
}

TEST_CASE("explicit inputs end up in every correct decision") {
  ScenarioConfig cfg = wts_cfg(4, 1, "silent", 5);
  cfg.inputs[0] = {"alpha"};
  cfg.inputs[1] = {"beta"};
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);
  Verdict v = check_trace(rr.trace, cfg);
  REQUIRE(v.passed());

  Item alpha = make_value_item(0, "alpha");
  Item beta = make_value_item(1, "beta");
  std::map<NodeId, LatticeValue> decided;
  for (const auto& e : rr.trace) {
    if (e.kind != ev::decided || e.node < 0 || cfg.byz_nodes().count(e.node)) continue;
    decided[e.node] = dec_value(e.detail);
  }
  REQUIRE(decided.count(0));
  REQUIRE(decided.count(1));
  CHECK(decided[0].contains(alpha));
  CHECK(decided[1].contains(beta));

  // Decisions are comparable, so the largest one holds both explicit inputs.
  LatticeValue top;
  for (const auto& [node, d] : decided) top = join(top, d);
  CHECK(top.contains(alpha));
  CHECK(top.contains(beta));
}
