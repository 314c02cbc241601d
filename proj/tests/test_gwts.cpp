#include <deque>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "lagree/checker.hpp"
#include "lagree/gwts.hpp"
#include "lagree/lattice.hpp"
#include "lagree/simnet.hpp"
#include "lagree/trace.hpp"

using namespace lagree;

namespace {

struct Loop : Emitter {
  Node* node = nullptr;
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

ScenarioConfig gwts_cfg(int n, int f, uint64_t rounds, uint64_t seed) {
  ScenarioConfig cfg;
  cfg.protocol = "gwts";
  cfg.n = n;
  cfg.f = f;
  cfg.rounds = rounds;
  cfg.scheduler.policy = "random";
  cfg.scheduler.seed = seed;
  if (f > 0) cfg.byzantine.push_back({NodeId(n - 1), "round_jumper", Json::object()});
  return cfg;
}

LatticeValue dec_value(const Json& detail, const char* field = "v") {
  auto v = LatticeValue::decode_all(from_hex(detail.at(field).get<std::string>()));
  REQUIRE(v.has_value());
  return *v;
}

}  // namespace

TEST_CASE("single node runs its whole round budget against itself") {
  GwtsConfig cfg;
  cfg.self = 0;
  cfg.n = 1;
  cfg.f = 0;
  cfg.admissible = accept_all_predicate();
  cfg.round_budget = 2;
  GwtsNode node(cfg, {"a", "b"});
  std::vector<LatticeValue> decisions;
  node.on_decide = [&](Emitter&, const LatticeValue& v) { decisions.push_back(v); };
  Loop loop;
  loop.node = &node;

  node.on_start(loop);
  loop.pump();

  REQUIRE(node.decisions() == 2);
  REQUIRE(decisions.size() == 2);
  CHECK(decisions[0].contains(make_value_item(0, "a")));
  CHECK(decisions[1].contains(make_value_item(0, "a")));
  CHECK(decisions[1].contains(make_value_item(0, "b")));
  CHECK(leq(decisions[0], decisions[1]));
  CHECK(node.decided_set().encode() == decisions[1].encode());
  CHECK(node.state() == GwtsState::newround);
  CHECK(node.waiting_size() == 0);
}

TEST_CASE("checker passes and every correct node decides once per round") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    ScenarioConfig cfg = gwts_cfg(4, 1, 3, seed);
    RunResult rr = run_scenario(cfg);
    REQUIRE(rr.quiescent);
    Verdict v = check_trace(rr.trace, cfg);
    CAPTURE(seed);
    CHECK(v.passed());

    std::map<NodeId, int> decided;
    for (const auto& e : rr.trace) {
      if (e.kind == ev::decided && e.node >= 0 && !cfg.byz_nodes().count(e.node)) {
        decided[e.node]++;
      }
    }
    REQUIRE(decided.size() == 3);
    for (const auto& [node, count] : decided) {
      CAPTURE(node);
      CHECK(count == 3);
    }
  }
}

TEST_CASE("round numbers and trusted rounds only move forward") {
  ScenarioConfig cfg = gwts_cfg(4, 1, 4, 11);
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);

  std::map<NodeId, int64_t> last_round;
  std::map<NodeId, uint64_t> last_safe;
  for (const auto& e : rr.trace) {
    if (e.node < 0 || cfg.byz_nodes().count(e.node)) continue;
    if (e.kind == ev::round_start) {
      int64_t r = e.detail.at("r").get<int64_t>();
      auto it = last_round.find(e.node);
      if (it != last_round.end()) CHECK(r == it->second + 1);
      last_round[e.node] = r;
    } else if (e.kind == ev::safe_r_advance) {
      uint64_t s = e.detail.at("safe_r").get<uint64_t>();
      auto it = last_safe.find(e.node);
      if (it != last_safe.end()) CHECK(s == it->second + 1);
      last_safe[e.node] = s;
    }
  }
  CHECK(last_round.size() == 3);
  CHECK(last_safe.size() == 3);
}

TEST_CASE("consecutive decisions of one node never shrink") {
  for (uint64_t seed = 30; seed < 35; ++seed) {
    ScenarioConfig cfg = gwts_cfg(7, 2, 3, seed);
    cfg.byzantine.push_back({5, "silent", Json::object()});
    RunResult rr = run_scenario(cfg);
    REQUIRE(rr.quiescent);
    Verdict v = check_trace(rr.trace, cfg);
    CAPTURE(seed);
    CHECK(v.passed());

    std::map<NodeId, LatticeValue> prev;
    for (const auto& e : rr.trace) {
      if (e.kind != ev::decided || e.node < 0 || cfg.byz_nodes().count(e.node)) continue;
      LatticeValue cur = dec_value(e.detail);
      auto it = prev.find(e.node);
      if (it != prev.end()) CHECK(leq(it->second, cur));
      prev[e.node] = std::move(cur);
    }
  }
}

TEST_CASE("fault-free run leaves the message budget inconclusive") {
  ScenarioConfig cfg = gwts_cfg(4, 0, 2, 9);
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);
  Verdict v = check_trace(rr.trace, cfg);
  CHECK(v.passed());
  const PropertyResult* budget = v.find("gla_message_budget");
  REQUIRE(budget != nullptr);
  CHECK(budget->status == "inconclusive");
}

TEST_CASE("same config and seed produce byte-identical traces") {
  ScenarioConfig cfg = gwts_cfg(4, 1, 3, 77);
  RunResult a = run_scenario(cfg);
  RunResult b = run_scenario(cfg);
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
}
