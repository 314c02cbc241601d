// Acceptance suite for the agreement stack: twelve end-to-end criteria, one
// printed line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lagree/checker.hpp"
#include "lagree/lattice.hpp"
#include "lagree/rbcast.hpp"
#include "lagree/simnet.hpp"
#include "lagree/trace.hpp"
#include "mutation_suite.hpp"

using namespace lagree;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string note;

  void fail(const std::string& why) {
    if (pass) note = why;
    pass = false;
  }
};

int g_failures = 0;

void report(int id, const char* label, const Outcome& o, double secs) {
  std::printf("criterion %2d: %s  %s%s%s (%.1fs)\n", id, o.pass ? "pass" : "FAIL", label,
              o.note.empty() ? "" : " - ", o.note.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) g_failures++;
}

ScenarioConfig base_cfg(const std::string& protocol, int n, int f,
                        const std::string& strategy, uint64_t seed,
                        const std::string& policy) {
  ScenarioConfig cfg;
  cfg.protocol = protocol;
  cfg.n = n;
  cfg.f = f;
  cfg.scheduler.policy = policy;
  cfg.scheduler.seed = seed;
  for (int i = 0; i < f; ++i) {
    cfg.byzantine.push_back({NodeId(n - 1 - i), strategy, Json::object()});
  }
  return cfg;
}

std::string describe(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << cfg.protocol << " n=" << cfg.n << " f=" << cfg.f;
  if (!cfg.byzantine.empty()) os << " " << cfg.byzantine[0].strategy;
  os << " seed=" << cfg.scheduler.seed;
  return os.str();
}

std::string first_failure(const Verdict& v) {
  for (const auto& p : v.properties) {
    if (p.status == "fail") return p.name + (p.note.empty() ? "" : ": " + p.note);
  }
  return "?";
}

struct Checked {
  RunResult rr;
  Verdict verdict;
  RunMetrics metrics;
};

Checked run_checked(const ScenarioConfig& cfg) {
  Checked c;
  c.rr = run_scenario(cfg);
  c.verdict = check_trace(c.rr.trace, cfg);
  c.metrics = collect_metrics(c.rr.trace, cfg);
  return c;
}

// Mirrors the trace checker's attribution of message cost to the proposer
// that caused it: reliable-broadcast frames charge the disclosing sender or
// the ack's requesting destination, direct requests charge their sender and
// nacks the requester they answer.
std::map<NodeId, uint64_t> gwts_cost_by_proposer(const Trace& trace) {
  std::map<NodeId, uint64_t> cost;
  for (const auto& e : trace) {
    if (e.kind != ev::send) continue;
    const std::string k = e.detail.value("k", "");
    if (k == "rb_init" || k == "rb_echo" || k == "rb_ready") {
      BroadcastTag t = tag_from_json(e.detail.at("t"));
      cost[t.kind == TagKind::disclosure ? t.sender : t.destination]++;
    } else if (k == "gwts_ack_req") {
      cost[e.node]++;
    } else if (k == "gwts_nack") {
      cost[e.detail.at("dst").get<NodeId>()]++;
    }
  }
  return cost;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

const int kNs[] = {4, 7, 10};
int f_of(int n) { return (n - 1) / 3; }

}  // namespace

// Criteria 1-3: single-shot sweep under the random scheduler, plus the
// lockstep decide-depth bound and the refinement bound across both sweeps.
static void wts_criteria() {
  const char* advs[] = {"equivocator", "silent", "nack_flooder", "stale_acker"};
  Outcome c1, c2, c3;
  uint64_t runs = 0;
  uint64_t max_depth_seen = 0, max_refine_seen = 0;

  auto t0 = Clock::now();
  for (int n : kNs) {
    int f = f_of(n);
    for (const char* adv : advs) {
      for (uint64_t seed = 0; seed < 100; ++seed) {
        ScenarioConfig cfg = base_cfg("wts", n, f, adv, seed, "random");
        Checked c = run_checked(cfg);
        runs++;
        if (!c.rr.quiescent) c1.fail("not quiescent: " + describe(cfg));
        if (!c.verdict.passed()) c1.fail(describe(cfg) + " " + first_failure(c.verdict));
        if (c.metrics.max_refinements > uint64_t(f)) {
          c3.fail(describe(cfg) + " refinements=" + std::to_string(c.metrics.max_refinements));
        }
        max_refine_seen = std::max(max_refine_seen, c.metrics.max_refinements);
      }
    }
  }
  double c1_secs = seconds_since(t0);
  c1.note = std::to_string(runs) + " runs";
  report(1, "single-shot safety sweep", c1, c1_secs);

  t0 = Clock::now();
  for (int n : kNs) {
    int f = f_of(n);
    for (const char* adv : advs) {
      for (uint64_t seed = 0; seed < 10; ++seed) {
        ScenarioConfig cfg = base_cfg("wts", n, f, adv, seed, "lockstep");
        Checked c = run_checked(cfg);
        if (!c.rr.quiescent || !c.verdict.passed()) {
          c2.fail(describe(cfg) + " " + first_failure(c.verdict));
        }
        if (c.metrics.max_decide_depth > uint64_t(2 * f + 5)) {
          c2.fail(describe(cfg) + " depth=" + std::to_string(c.metrics.max_decide_depth) +
                  " > " + std::to_string(2 * f + 5));
        }
        if (c.metrics.max_refinements > uint64_t(f)) {
          c3.fail(describe(cfg) + " refinements=" + std::to_string(c.metrics.max_refinements));
        }
        max_depth_seen = std::max(max_depth_seen, c.metrics.max_decide_depth);
        max_refine_seen = std::max(max_refine_seen, c.metrics.max_refinements);
      }
    }
  }
  c2.note = "max depth " + std::to_string(max_depth_seen) + ", bound 2f+5";
  report(2, "single-shot lockstep decide depth", c2, seconds_since(t0));
  c3.note = "max refinements " + std::to_string(max_refine_seen) + " across both sweeps";
  report(3, "single-shot refinement bound", c3, 0.0);
}

static void rbcast_criterion() {
  Outcome c4;
  auto t0 = Clock::now();
  for (uint64_t seed = 0; seed < 200; ++seed) {
    ScenarioConfig cfg = base_cfg("rbcast", 4, 1, "equivocator", seed, "random");
    Checked c = run_checked(cfg);
    if (!c.rr.quiescent) c4.fail("not quiescent: " + describe(cfg));
    if (!c.verdict.passed()) c4.fail(describe(cfg) + " " + first_failure(c.verdict));
  }
  c4.note = "200 seeds, per-instance budget n+2n^2";
  report(4, "reliable broadcast under an equivocating sender", c4, seconds_since(t0));
}

static void gwts_criteria() {
  Outcome c5, c6;
  double max_ratio = 0.0;
  auto t0 = Clock::now();
  for (int n : {4, 7}) {
    int f = f_of(n);
    for (uint64_t seed = 0; seed < 50; ++seed) {
      ScenarioConfig cfg = base_cfg("gwts", n, f, "round_jumper", seed, "random");
      cfg.rounds = 10;
      Checked c = run_checked(cfg);
      if (!c.rr.quiescent) c5.fail("not quiescent: " + describe(cfg));
      if (!c.verdict.passed()) c5.fail(describe(cfg) + " " + first_failure(c.verdict));

      const PropertyResult* budget = c.verdict.find("gla_message_budget");
      if (budget == nullptr || budget->status != "pass") {
        c6.fail(describe(cfg) + " budget property " +
                (budget ? budget->status : std::string("missing")));
      }
      std::map<NodeId, uint64_t> cost = gwts_cost_by_proposer(c.rr.trace);
      std::map<NodeId, uint64_t> decisions;
      for (const auto& e : c.rr.trace) {
        if (e.kind == ev::decided && e.node >= 0 && !cfg.byz_nodes().count(e.node)) {
          decisions[e.node]++;
        }
      }
      for (const auto& [node, d] : decisions) {
        if (d == 0) continue;
        double cap = double(kGwtsBudgetConstant) * f * n * n * double(d);
        max_ratio = std::max(max_ratio, double(cost[node]) / cap);
      }
    }
  }
  c5.note = "10 rounds, 100 runs";
  report(5, "multi-round liveness and safety", c5, seconds_since(t0));
  {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "c=%d, worst observed %.3f of budget",
                  kGwtsBudgetConstant, max_ratio);
    c6.note = buf;
    report(6, "multi-round per-decision message budget", c6, 0.0);
  }
}

static void sbs_criteria() {
  const char* advs[] = {"double_signer", "nack_flooder"};
  Outcome c7, c8;
  uint64_t max_depth_seen = 0, max_refine_seen = 0;
  int uniq_runs = 0;

  auto t0 = Clock::now();
  for (int n : kNs) {
    int f = f_of(n);
    for (const char* adv : advs) {
      for (uint64_t seed = 0; seed < 100; ++seed) {
        ScenarioConfig cfg = base_cfg("sbs", n, f, adv, seed, "random");
        Checked c = run_checked(cfg);
        if (!c.rr.quiescent) c7.fail("not quiescent: " + describe(cfg));
        if (!c.verdict.passed()) c7.fail(describe(cfg) + " " + first_failure(c.verdict));
        if (c.metrics.max_refinements > uint64_t(2 * f)) {
          c7.fail(describe(cfg) + " refinements=" + std::to_string(c.metrics.max_refinements));
        }
        max_refine_seen = std::max(max_refine_seen, c.metrics.max_refinements);
        if (std::string(adv) == "double_signer") {
          const PropertyResult* uniq = c.verdict.find("sbs_signer_uniqueness");
          if (uniq == nullptr || uniq->status != "pass") {
            c8.fail(describe(cfg) + " uniqueness " +
                    (uniq ? uniq->status : std::string("missing")));
          }
          uniq_runs++;
        }
      }
    }
    for (const char* adv : advs) {
      for (uint64_t seed = 0; seed < 10; ++seed) {
        ScenarioConfig cfg = base_cfg("sbs", n, f, adv, seed, "lockstep");
        Checked c = run_checked(cfg);
        if (!c.rr.quiescent || !c.verdict.passed()) {
          c7.fail(describe(cfg) + " " + first_failure(c.verdict));
        }
        if (c.metrics.max_decide_depth > uint64_t(5 + 4 * f)) {
          c7.fail(describe(cfg) + " depth=" + std::to_string(c.metrics.max_decide_depth) +
                  " > " + std::to_string(5 + 4 * f));
        }
        max_depth_seen = std::max(max_depth_seen, c.metrics.max_decide_depth);
      }
    }
  }
  c7.note = "max lockstep depth " + std::to_string(max_depth_seen) + " (bound 5+4f), max refinements " +
            std::to_string(max_refine_seen) + " (bound 2f), send budget (3+2f)n checked per run";
  report(7, "signature-based agreement sweep", c7, seconds_since(t0));
  c8.note = std::to_string(uniq_runs) + " double-signer runs scanned";
  report(8, "at most one safely proven value per signer", c8, 0.0);
}

static void rsm_criterion() {
  Outcome c9;
  auto t0 = Clock::now();
  for (uint64_t seed = 0; seed < 50; ++seed) {
    ScenarioConfig cfg;
    cfg.protocol = "rsm";
    cfg.n = 4;
    cfg.f = 1;
    cfg.rounds = 60;
    cfg.scheduler.policy = "random";
    cfg.scheduler.seed = seed;
    cfg.clients.count = 4;
    cfg.byzantine.push_back({3, "fabricator", Json::object()});
    cfg.clients.byzantine.push_back({7, "bad_client", Json::object()});
    Checked c = run_checked(cfg);
    if (!c.rr.quiescent) c9.fail("not quiescent: seed " + std::to_string(seed));
    if (!c.verdict.passed()) {
      c9.fail("seed " + std::to_string(seed) + " " + first_failure(c.verdict));
    }
  }
  c9.note = "3 correct clients, 1 bad client, 1 fabricator replica, 50 seeds";
  report(9, "replicated state machine properties", c9, seconds_since(t0));
}

static void resilience_criterion() {
  Outcome c10;
  auto t0 = Clock::now();
  for (auto [n, f] : std::vector<std::pair<int, int>>{{3, 1}, {6, 2}, {9, 3}, {1, 1}}) {
    ScenarioConfig cfg;
    cfg.protocol = "wts";
    cfg.n = n;
    cfg.f = f;
    auto err = validate_config(cfg);
    if (!err.has_value() || err->find("3f+1") == std::string::npos) {
      c10.fail("n=" + std::to_string(n) + " f=" + std::to_string(f) + " not rejected");
    }
  }
  for (auto [n, f] : std::vector<std::pair<int, int>>{{4, 1}, {7, 2}, {10, 3}}) {
    ScenarioConfig cfg;
    cfg.protocol = "wts";
    cfg.n = n;
    cfg.f = f;
    if (validate_config(cfg).has_value()) {
      c10.fail("n=" + std::to_string(n) + " f=" + std::to_string(f) + " wrongly rejected");
    }
  }
  c10.note = "n < 3f+1 rejected, boundary configs accepted";
  report(10, "resilience gate", c10, seconds_since(t0));
}

static void mutation_criterion() {
  Outcome c11;
  auto t0 = Clock::now();
  size_t cases = 0;
  try {
    for (const auto& mc : mutation_suite::build_mutation_cases()) {
      cases++;
      Verdict v = check_trace(mc.trace, mc.cfg);
      const PropertyResult* p = v.find(mc.property);
      if (p == nullptr) {
        c11.fail(mc.property + " not reported");
      } else if (p->status != "fail") {
        c11.fail(mc.property + " not detected (status " + p->status + ")");
      }
    }
  } catch (const std::exception& e) {
    c11.fail(std::string("mutation construction failed: ") + e.what());
  }
  c11.note = std::to_string(cases) + " mutated traces, one per property";
  report(11, "checker mutation coverage", c11, seconds_since(t0));
}

static void determinism_criterion() {
  Outcome c12;
  auto t0 = Clock::now();
  std::vector<ScenarioConfig> cfgs;
  cfgs.push_back(base_cfg("wts", 4, 1, "equivocator", 5, "random"));
  cfgs.push_back(base_cfg("wts", 7, 2, "nack_flooder", 6, "adversarial_delay"));
  cfgs.back().scheduler.delay_prefix = 30;
  cfgs.back().scheduler.delayed_links = {{0, 1}};
  {
    ScenarioConfig g = base_cfg("gwts", 4, 1, "round_jumper", 7, "random");
    g.rounds = 3;
    cfgs.push_back(g);
  }
  cfgs.push_back(base_cfg("sbs", 4, 1, "double_signer", 8, "random"));
  {
    ScenarioConfig s = base_cfg("sbs", 4, 1, "double_signer", 9, "random");
    s.scheme = "ed25519";
    cfgs.push_back(s);
  }
  {
    ScenarioConfig r;
    r.protocol = "rsm";
    r.n = 4;
    r.f = 1;
    r.rounds = 40;
    r.scheduler.policy = "random";
    r.scheduler.seed = 10;
    r.clients.count = 3;
    r.byzantine.push_back({3, "fabricator", Json::object()});
    cfgs.push_back(r);
  }
  cfgs.push_back(base_cfg("rbcast", 4, 1, "equivocator", 11, "random"));

  int idx = 0;
  for (const auto& cfg : cfgs) {
    std::string pa = "acceptance_replay_a" + std::to_string(idx) + ".jsonl";
    std::string pb = "acceptance_replay_b" + std::to_string(idx) + ".jsonl";
    write_trace_file(pa, run_scenario(cfg).trace);
    write_trace_file(pb, run_scenario(cfg).trace);
    if (read_file(pa).empty() || read_file(pa) != read_file(pb)) {
      c12.fail("replay differs: " + describe(cfg));
    }
    std::remove(pa.c_str());
    std::remove(pb.c_str());
    idx++;
  }
  c12.note = std::to_string(idx) + " configs replayed to byte-identical trace files";
  report(12, "deterministic replay", c12, seconds_since(t0));
}

int main() {
  wts_criteria();
  rbcast_criterion();
  gwts_criteria();
  sbs_criteria();
  rsm_criterion();
  resilience_criterion();
  mutation_criterion();
  determinism_criterion();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 12 criteria passed\n");
  return 0;
}
