#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "lagree/checker.hpp"
#include "lagree/lattice.hpp"
#include "lagree/rsm.hpp"
#include "lagree/simnet.hpp"
#include "lagree/trace.hpp"

using namespace lagree;

namespace {

Bytes command_payload(uint64_t origin, uint64_t counter) {
  Bytes b;
  put_u64(b, origin);
  put_u64(b, counter);
  return b;
}

ScenarioConfig rsm_cfg(uint64_t seed, int clients = 3) {
  ScenarioConfig cfg;
  cfg.protocol = "rsm";
  cfg.n = 4;
  cfg.f = 1;
  cfg.rounds = 40;
  cfg.scheduler.policy = "random";
  cfg.scheduler.seed = seed;
  cfg.clients.count = clients;
  cfg.byzantine.push_back({3, "fabricator", Json::object()});
  return cfg;
}

}  // namespace

TEST_CASE("executing a decided set keeps commands and drops the rest") {
  LatticeValue decided;
  Item cmd{7, ItemKind::command, command_payload(7, 1)};
  Item nop{8, ItemKind::nop, command_payload(8, 2)};
  Item val = make_value_item(9, "stray");
  decided.insert(cmd);
  decided.insert(nop);
  decided.insert(val);

  LatticeValue out = execute_commands(decided);
  CHECK(out.size() == 1);
  CHECK(out.contains(cmd));
  CHECK(!out.contains(nop));
  CHECK(!out.contains(val));
  CHECK(execute_commands(LatticeValue{}).size() == 0);
}

TEST_CASE("checker passes the full client and replica property set") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    ScenarioConfig cfg = rsm_cfg(seed);
    RunResult rr = run_scenario(cfg);
    REQUIRE(rr.quiescent);
    Verdict v = check_trace(rr.trace, cfg);
    CAPTURE(seed);
    CHECK(v.passed());
    for (const char* name :
         {"rsm_liveness", "rsm_read_validity", "rsm_read_consistency",
          "rsm_read_monotonicity", "rsm_update_stability", "rsm_update_visibility"}) {
      const PropertyResult* p = v.find(name);
      REQUIRE(p != nullptr);
      CHECK(p->status == "pass");
    }
  }
}

TEST_CASE("every correct client finishes its script") {
  ScenarioConfig cfg = rsm_cfg(17);
  cfg.clients.script = {"update", "read", "update", "read"};
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);

  std::map<NodeId, int> updates, reads;
  for (const auto& e : rr.trace) {
    if (e.kind == ev::update_complete) updates[e.node]++;
    if (e.kind == ev::read_complete) reads[e.node]++;
  }
  REQUIRE(updates.size() == 3);
  REQUIRE(reads.size() == 3);
  for (NodeId c = 4; c < 7; ++c) {
    CHECK(updates[c] == 2);
    CHECK(reads[c] == 2);
  }
}

TEST_CASE("replicas reject malformed commands from a bad client") {
  ScenarioConfig cfg = rsm_cfg(3, 4);
  cfg.clients.byzantine.push_back({7, "bad_client", Json::object()});
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);
  Verdict v = check_trace(rr.trace, cfg);
  CHECK(v.passed());

  int rejected = 0;
  for (const auto& e : rr.trace) {
    if (e.kind == ev::submit_rejected && !cfg.byz_nodes().count(e.node)) rejected++;
  }
  CHECK(rejected > 0);
}

TEST_CASE("read results only ever contain well-formed commands") {
  ScenarioConfig cfg = rsm_cfg(5, 4);
  cfg.clients.byzantine.push_back({7, "bad_client", Json::object()});
  RunResult rr = run_scenario(cfg);
  REQUIRE(rr.quiescent);

  auto wf = wellformed_command_predicate();
  for (const auto& e : rr.trace) {
    if (e.kind != ev::read_complete) continue;
    if (cfg.byz_client_nodes().count(e.node)) continue;
    auto res = LatticeValue::decode_all(from_hex(e.detail.at("v").get<std::string>()));
    REQUIRE(res.has_value());
    for (const auto& it : res->items()) {
      CAPTURE(e.seq);
      CHECK(it.kind == ItemKind::command);
      CHECK(wf(it));
    }
  }
}

TEST_CASE("same config and seed produce byte-identical traces") {
  ScenarioConfig cfg = rsm_cfg(21);
  RunResult a = run_scenario(cfg);
  RunResult b = run_scenario(cfg);
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
}
