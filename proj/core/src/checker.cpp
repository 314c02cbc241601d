#include "lagree/checker.hpp"

#include <algorithm>

#include "lagree/rbcast.hpp"
#include "lagree/rsm.hpp"
#include "lagree/sbs.hpp"
#include "lagree/signature.hpp"

namespace lagree {

bool Verdict::passed() const {
  for (const auto& p : properties) {
    if (p.status == "fail") return false;
  }
  return true;
}

const PropertyResult* Verdict::find(const std::string& name) const {
  for (const auto& p : properties) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Json Verdict::to_json() const {
  Json props = Json::array();
  for (const auto& p : properties) {
    props.push_back(Json{{"name", p.name},
                         {"status", p.status},
                         {"witness", p.witness},
                         {"note", p.note}});
  }
  return Json{{"verdict", passed() ? "pass" : "fail"}, {"properties", props}};
}

namespace {

Bytes safe_from_hex(const std::string& hex, uint64_t seq) {
  try {
    return from_hex(hex);
  } catch (const std::exception&) {
    throw TraceFormatError("event " + std::to_string(seq) + ": bad hex string");
  }
}

LatticeValue decode_value_hex(const std::string& hex, uint64_t seq) {
  auto v = LatticeValue::decode_all(safe_from_hex(hex, seq));
  if (!v) {
    throw TraceFormatError("event " + std::to_string(seq) + ": undecodable lattice value");
  }
  return *v;
}

Item decode_item_hex(const std::string& hex, uint64_t seq) {
  Bytes b = safe_from_hex(hex, seq);
  try {
    size_t pos = 0;
    Item it = Item::decode(b, pos);
    if (pos != b.size()) throw std::runtime_error("trailing bytes");
    return it;
  } catch (const std::runtime_error&) {
    throw TraceFormatError("event " + std::to_string(seq) + ": undecodable item");
  }
}

struct Ctx {
  const Trace& trace;
  const ScenarioConfig& cfg;
  bool quiescent = false;
  std::set<NodeId> byz;
  std::set<NodeId> correct;          // protocol nodes
  std::set<NodeId> correct_clients;  // rsm only
  AdmissibilityPredicate admissible;
  std::shared_ptr<SignatureProvider> sig;
  std::map<std::string, std::vector<const TraceEvent*>> by_kind;

  const std::vector<const TraceEvent*>& events(const std::string& kind) const {
    static const std::vector<const TraceEvent*> kEmpty;
    auto it = by_kind.find(kind);
    return it == by_kind.end() ? kEmpty : it->second;
  }
};

Ctx build_ctx(const Trace& trace, const ScenarioConfig& cfg) {
  if (trace.empty()) throw TraceFormatError("empty trace");
  if (trace.front().kind != ev::run_meta) throw TraceFormatError("trace must start with run_meta");
  if (trace.back().kind != ev::run_end) throw TraceFormatError("trace must end with run_end");
  uint64_t prev = 0;
  bool first = true;
  for (const auto& e : trace) {
    if (!first && e.seq <= prev) {
      throw TraceFormatError("event " + std::to_string(e.seq) + ": sequence not increasing");
    }
    prev = e.seq;
    first = false;
    if (e.node < -1 || e.node >= cfg.total_nodes()) {
      throw TraceFormatError("event " + std::to_string(e.seq) + ": node id out of range");
    }
    if ((e.kind == ev::run_meta || e.kind == ev::run_end) && &e != &trace.front() &&
        &e != &trace.back()) {
      throw TraceFormatError("event " + std::to_string(e.seq) + ": stray " + e.kind);
    }
  }
  Ctx ctx{trace, cfg};
  if (!trace.back().detail.contains("quiescent") ||
      !trace.back().detail.at("quiescent").is_boolean()) {
    throw TraceFormatError("run_end lacks quiescent flag");
  }
  ctx.quiescent = trace.back().detail.at("quiescent").get<bool>();
  ctx.byz = cfg.byz_nodes();
  for (NodeId id = 0; id < cfg.n; id++) {
    if (!ctx.byz.count(id)) ctx.correct.insert(id);
  }
  auto byz_clients = cfg.byz_client_nodes();
  for (NodeId id = cfg.n; id < cfg.total_nodes(); id++) {
    if (!byz_clients.count(id)) ctx.correct_clients.insert(id);
  }
  ctx.admissible = cfg.predicate();
  ctx.sig = make_signature_provider(cfg.scheme, cfg.scheduler.seed, cfg.total_nodes());
  for (const auto& e : trace) ctx.by_kind[e.kind].push_back(&e);
  return ctx;
}

PropertyResult pass(const std::string& name, std::string note = "") {
  return PropertyResult{name, "pass", {}, std::move(note)};
}
PropertyResult fail(const std::string& name, std::vector<uint64_t> witness, std::string note) {
  return PropertyResult{name, "fail", std::move(witness), std::move(note)};
}
PropertyResult inconclusive(const std::string& name, std::string note) {
  return PropertyResult{name, "inconclusive", {}, std::move(note)};
}

// ---------------------------------------------------------------------------
// Reliable broadcast properties

std::string tag_key(const Json& t) { return t.dump(); }

void check_rbcast(const Ctx& ctx, std::vector<PropertyResult>& out) {
  // One delivery per (node, tag); same payload digest across correct nodes.
  std::map<std::pair<NodeId, std::string>, uint64_t> seen;
  PropertyResult integrity = pass("rb_integrity");
  PropertyResult agreement = pass("rb_agreement");
  std::map<std::string, std::pair<std::string, uint64_t>> digest_of;  // tag -> (digest, seq)
  std::map<std::string, std::set<NodeId>> delivered_by;
  for (const auto* e : ctx.events(ev::rb_deliver)) {
    if (!ctx.correct.count(e->node)) continue;
    std::string key = tag_key(e->detail.at("t"));
    auto [it, fresh] = seen.emplace(std::pair(e->node, key), e->seq);
    if (!fresh && integrity.status == "pass") {
      integrity = fail("rb_integrity", {it->second, e->seq},
                       "correct node delivered the same instance twice");
    }
    std::string digest = e->detail.at("digest").get<std::string>();
    auto [dit, dfresh] = digest_of.emplace(key, std::pair(digest, e->seq));
    if (!dfresh && dit->second.first != digest && agreement.status == "pass") {
      agreement = fail("rb_agreement", {dit->second.second, e->seq},
                       "correct nodes delivered different payloads for one instance");
    }
    delivered_by[key].insert(e->node);
  }
  out.push_back(integrity);
  out.push_back(agreement);

  // Validity and totality: instances opened by correct senders, plus any
  // instance some correct node delivered, must reach every correct node.
  if (!ctx.quiescent) {
    out.push_back(inconclusive("rb_validity", "run did not quiesce"));
  } else {
    PropertyResult validity = pass("rb_validity");
    std::set<std::string> must_deliver;
    for (const auto* e : ctx.events(ev::send)) {
      const std::string k = e->detail.at("k").get<std::string>();
      if (k != "rb_init") continue;
      if (!ctx.correct.count(e->node)) continue;
      BroadcastTag tag = tag_from_json(e->detail.at("t"));
      if (tag.sender == e->node) must_deliver.insert(tag_key(e->detail.at("t")));
    }
    for (const auto& [key, nodes] : delivered_by) must_deliver.insert(key);
    for (const auto& key : must_deliver) {
      auto it = delivered_by.find(key);
      size_t got = it == delivered_by.end() ? 0 : it->second.size();
      if (got != ctx.correct.size()) {
        validity = fail("rb_validity", {},
                        "instance " + key + " delivered by " + std::to_string(got) + "/" +
                            std::to_string(ctx.correct.size()) + " correct nodes");
        break;
      }
    }
    out.push_back(validity);
  }

  // Per-instance message budget: n + 2n^2.
  uint64_t budget = uint64_t(ctx.cfg.n) + 2 * uint64_t(ctx.cfg.n) * uint64_t(ctx.cfg.n);
  std::map<std::string, uint64_t> frames;
  PropertyResult msgs = pass("rb_msg_budget");
  for (const auto* e : ctx.events(ev::send)) {
    const std::string k = e->detail.at("k").get<std::string>();
    if (k != "rb_init" && k != "rb_echo" && k != "rb_ready") continue;
    std::string key = tag_key(e->detail.at("t"));
    if (++frames[key] > budget && msgs.status == "pass") {
      msgs = fail("rb_msg_budget", {e->seq},
                  "instance " + key + " exceeded " + std::to_string(budget) + " messages");
    }
  }
  out.push_back(msgs);
}

// ---------------------------------------------------------------------------
// Single-shot lattice agreement (wts and sbs share the skeleton)

struct Decision {
  NodeId node;
  uint64_t seq;
  uint64_t depth;
  LatticeValue value;
};

std::vector<Decision> correct_decisions(const Ctx& ctx) {
  std::vector<Decision> out;
  for (const auto* e : ctx.events(ev::decided)) {
    if (!ctx.correct.count(e->node)) continue;
    out.push_back(Decision{e->node, e->seq, e->depth,
                           decode_value_hex(e->detail.at("v").get<std::string>(), e->seq)});
  }
  return out;
}

void check_la(const Ctx& ctx, std::vector<PropertyResult>& out) {
  const bool is_sbs = ctx.cfg.protocol == "sbs";
  auto decisions = correct_decisions(ctx);

  if (!ctx.quiescent) {
    out.push_back(inconclusive("la_liveness", "run did not quiesce"));
  } else {
    std::set<NodeId> decided_nodes;
    for (const auto& d : decisions) decided_nodes.insert(d.node);
    if (decided_nodes.size() == ctx.correct.size()) {
      out.push_back(pass("la_liveness"));
    } else {
      out.push_back(fail("la_liveness", {},
                         std::to_string(decided_nodes.size()) + "/" +
                             std::to_string(ctx.correct.size()) + " correct nodes decided"));
    }
  }

  {
    PropertyResult stability = pass("la_stability");
    std::map<NodeId, uint64_t> first;
    for (const auto& d : decisions) {
      auto [it, fresh] = first.emplace(d.node, d.seq);
      if (!fresh) {
        stability = fail("la_stability", {it->second, d.seq}, "node decided twice");
        break;
      }
    }
    out.push_back(stability);
  }

  {
    PropertyResult comp = pass("la_comparability");
    for (size_t i = 0; i < decisions.size() && comp.status == "pass"; i++) {
      for (size_t j = i + 1; j < decisions.size(); j++) {
        if (!comparable(decisions[i].value, decisions[j].value)) {
          comp = fail("la_comparability", {decisions[i].seq, decisions[j].seq},
                      "incomparable decisions");
          break;
        }
      }
    }
    out.push_back(comp);
  }

  // Own proposal ends up in the decision.
  std::map<NodeId, std::pair<Item, uint64_t>> proposed;
  for (const auto* e : ctx.events(ev::propose)) {
    if (!ctx.correct.count(e->node)) continue;
    proposed.emplace(e->node,
                     std::pair(decode_item_hex(e->detail.at("v").get<std::string>(), e->seq), e->seq));
  }
  {
    PropertyResult inc = pass("la_inclusivity");
    for (const auto& d : decisions) {
      auto it = proposed.find(d.node);
      if (it == proposed.end()) continue;
      if (!d.value.contains(it->second.first)) {
        inc = fail("la_inclusivity", {it->second.second, d.seq},
                   "own proposal missing from decision");
        break;
      }
    }
    out.push_back(inc);
  }

  // Decisions stay within the correct inputs plus at most f admissible
  // values attributable to Byzantine nodes (disclosed by them, or carrying
  // their verified signature).
  {
    PropertyResult nt = pass("la_non_triviality");
    LatticeValue x;
    for (const auto& [node, p] : proposed) x.insert(p.first);
    // Provenance pools.
    LatticeValue byz_disclosed;
    for (const auto* e : ctx.events(ev::rb_deliver)) {
      if (!ctx.correct.count(e->node)) continue;
      BroadcastTag tag = tag_from_json(e->detail.at("t"));
      if (tag.kind != TagKind::disclosure || !ctx.byz.count(tag.sender)) continue;
      auto v = LatticeValue::decode_all(safe_from_hex(e->detail.at("p").get<std::string>(), e->seq));
      if (v) byz_disclosed.join_with(*v);
    }
    LatticeValue byz_signed;
    for (const auto* e : ctx.events(ev::proof_seen)) {
      if (!ctx.correct.count(e->node)) continue;
      NodeId signer = e->detail.at("signer").get<NodeId>();
      if (!ctx.byz.count(signer)) continue;
      Item v = decode_item_hex(e->detail.at("v").get<std::string>(), e->seq);
      Bytes enc = safe_from_hex(e->detail.at("e").get<std::string>(), e->seq);
      try {
        size_t pos = 0;
        ProposedEntry entry = ProposedEntry::decode(enc, pos);
        if (pos == enc.size() && entry.sv.sender == signer && entry.sv.value == v &&
            entry_safe(*ctx.sig, ctx.cfg.n, ctx.cfg.f, ctx.admissible, entry)) {
          byz_signed.insert(v);
        }
      } catch (const std::runtime_error&) {
        throw TraceFormatError("event " + std::to_string(e->seq) + ": undecodable proof entry");
      }
    }
    for (const auto& d : decisions) {
      std::vector<Item> b;
      for (const auto& it : d.value.items()) {
        if (!x.contains(it)) b.push_back(it);
      }
      if (int(b.size()) > ctx.cfg.f) {
        nt = fail("la_non_triviality", {d.seq},
                  "decision holds " + std::to_string(b.size()) +
                      " values outside correct inputs, more than f");
        break;
      }
      for (const auto& it : b) {
        bool attributable = is_sbs ? byz_signed.contains(it) : byz_disclosed.contains(it);
        if (!ctx.admissible(it) || !attributable) {
          nt = fail("la_non_triviality", {d.seq},
                    "extra decided value not attributable to a Byzantine node");
          break;
        }
      }
      if (nt.status == "fail") break;
    }
    out.push_back(nt);
  }

  // Causal-depth bound, meaningful under the lockstep scheduler only.
  {
    uint64_t bound = is_sbs ? uint64_t(5 + 4 * ctx.cfg.f) : uint64_t(2 * ctx.cfg.f + 5);
    std::string name = "la_depth_bound";
    if (ctx.cfg.scheduler.policy != "lockstep") {
      out.push_back(inconclusive(name, "depth bound applies to the lockstep scheduler"));
    } else {
      PropertyResult depth = pass(name);
      for (const auto& d : decisions) {
        if (d.depth > bound) {
          depth = fail(name, {d.seq},
                       "decision at depth " + std::to_string(d.depth) + " > " +
                           std::to_string(bound));
          break;
        }
      }
      out.push_back(depth);
    }
  }

  {
    uint64_t bound = is_sbs ? uint64_t(2 * ctx.cfg.f) : uint64_t(ctx.cfg.f);
    PropertyResult refine = pass("la_refinement_bound");
    std::map<NodeId, uint64_t> counts;
    for (const auto* e : ctx.events(ev::refinement)) {
      if (!ctx.correct.count(e->node)) continue;
      if (++counts[e->node] > bound) {
        refine = fail("la_refinement_bound", {e->seq},
                      "node refined more than " + std::to_string(bound) + " times");
        break;
      }
    }
    out.push_back(refine);
  }
}

// A value is committed once floor((n+f)/2)+1 distinct acceptors have sent
// acks whose set contains it. Any proposal that gathers a full quorum of
// exact acks after that point must contain the value: the two quorums share
// a correct acceptor whose accepted set already held the value, and such an
// acceptor only acks requests covering its accepted set.
void check_wts_commit(const Ctx& ctx, std::vector<PropertyResult>& out) {
  struct AckSend {
    uint64_t seq;
    NodeId sender;
    LatticeValue set;
  };
  std::vector<AckSend> acks;
  for (const auto* e : ctx.events(ev::send)) {
    if (e->detail.at("k").get<std::string>() != "wts_ack") continue;
    acks.push_back(
        AckSend{e->seq, e->node, decode_value_hex(e->detail.at("set").get<std::string>(), e->seq)});
  }
  const size_t q = size_t(byz_quorum(ctx.cfg.n, ctx.cfg.f));

  std::map<Item, uint64_t> item_commit;
  std::set<Item> universe;
  std::map<Bytes, LatticeValue> sets;
  for (const auto& a : acks) {
    for (const auto& it : a.set.items()) universe.insert(it);
    sets.emplace(a.set.encode(), a.set);
  }
  for (const auto& it : universe) {
    std::set<NodeId> senders;
    for (const auto& a : acks) {
      if (!a.set.contains(it)) continue;
      senders.insert(a.sender);
      if (senders.size() >= q) {
        item_commit.emplace(it, a.seq);
        break;
      }
    }
  }
  PropertyResult mono = pass("wts_commit_monotonicity");
  for (const auto& [it, t_item] : item_commit) {
    for (const auto& [enc, s] : sets) {
      if (s.contains(it)) continue;
      // Distinct senders acking exactly this set after the value's commit.
      std::set<NodeId> senders;
      uint64_t quorum_seq = 0;
      for (const auto& a : acks) {
        if (a.seq <= t_item || a.set.encode() != enc) continue;
        senders.insert(a.sender);
        if (senders.size() >= q) {
          quorum_seq = a.seq;
          break;
        }
      }
      if (senders.size() >= q) {
        mono = fail("wts_commit_monotonicity", {t_item, quorum_seq},
                    "proposal committed after a value's commit excludes the value");
        break;
      }
    }
    if (mono.status == "fail") break;
  }
  out.push_back(mono);
}

// ---------------------------------------------------------------------------
// sbs extras

void check_sbs(const Ctx& ctx, std::vector<PropertyResult>& out) {
  {
    uint64_t bound = uint64_t(3 + 2 * ctx.cfg.f) * uint64_t(ctx.cfg.n);
    PropertyResult budget = pass("sbs_send_budget");
    std::map<NodeId, uint64_t> counts;
    for (const auto* e : ctx.events(ev::send)) {
      if (!ctx.correct.count(e->node)) continue;
      const std::string k = e->detail.at("k").get<std::string>();
      if (k != "sbs_init" && k != "sbs_safe_req" && k != "sbs_ack_req") continue;
      if (++counts[e->node] > bound && budget.status == "pass") {
        budget = fail("sbs_send_budget", {e->seq},
                      "proposer sent more than " + std::to_string(bound) +
                          " init/safe_req/ack_req messages");
      }
    }
    out.push_back(budget);
  }
  {
    // Every validly proven value, grouped by signer: one value per signer.
    PropertyResult uniq = pass("sbs_signer_uniqueness");
    std::map<NodeId, std::pair<Bytes, uint64_t>> value_of;
    std::set<std::pair<NodeId, Bytes>> checked;
    for (const auto* e : ctx.events(ev::proof_seen)) {
      if (!ctx.correct.count(e->node)) continue;
      NodeId signer = e->detail.at("signer").get<NodeId>();
      Bytes venc = safe_from_hex(e->detail.at("v").get<std::string>(), e->seq);
      if (!checked.insert(std::pair(signer, venc)).second) continue;
      Bytes enc = safe_from_hex(e->detail.at("e").get<std::string>(), e->seq);
      ProposedEntry entry;
      try {
        size_t pos = 0;
        entry = ProposedEntry::decode(enc, pos);
        if (pos != enc.size()) throw std::runtime_error("trailing bytes");
      } catch (const std::runtime_error&) {
        throw TraceFormatError("event " + std::to_string(e->seq) + ": undecodable proof entry");
      }
      if (entry.sv.sender != signer || entry.sv.value.encode() != venc) continue;
      if (!entry_safe(*ctx.sig, ctx.cfg.n, ctx.cfg.f, ctx.admissible, entry)) continue;
      auto [it, fresh] = value_of.emplace(signer, std::pair(venc, e->seq));
      if (!fresh && it->second.first != venc) {
        uniq = fail("sbs_signer_uniqueness", {it->second.second, e->seq},
                    "two different values of one signer both carry valid proofs");
        break;
      }
    }
    out.push_back(uniq);
  }
}

// ---------------------------------------------------------------------------
// Generalized (multi-round) agreement

void check_gla(const Ctx& ctx, std::vector<PropertyResult>& out) {
  auto decisions = correct_decisions(ctx);

  if (!ctx.quiescent) {
    out.push_back(inconclusive("gla_liveness", "run did not quiesce"));
  } else {
    std::map<NodeId, uint64_t> counts;
    for (const auto& d : decisions) counts[d.node]++;
    PropertyResult live = pass("gla_liveness");
    for (NodeId id : ctx.correct) {
      if (counts[id] < ctx.cfg.rounds) {
        live = fail("gla_liveness", {},
                    "node " + std::to_string(id) + " decided " + std::to_string(counts[id]) +
                        " rounds, wanted " + std::to_string(ctx.cfg.rounds));
        break;
      }
    }
    out.push_back(live);
  }

  {
    PropertyResult mono = pass("gla_local_monotonicity");
    std::map<NodeId, const Decision*> last;
    for (const auto& d : decisions) {
      auto it = last.find(d.node);
      if (it != last.end() && !leq(it->second->value, d.value)) {
        mono = fail("gla_local_monotonicity", {it->second->seq, d.seq},
                    "a node's later decision does not contain its earlier one");
        break;
      }
      last[d.node] = &d;
    }
    out.push_back(mono);
  }

  {
    PropertyResult comp = pass("gla_comparability");
    for (size_t i = 0; i < decisions.size() && comp.status == "pass"; i++) {
      for (size_t j = i + 1; j < decisions.size(); j++) {
        if (!comparable(decisions[i].value, decisions[j].value)) {
          comp = fail("gla_comparability", {decisions[i].seq, decisions[j].seq},
                      "incomparable decisions");
          break;
        }
      }
    }
    out.push_back(comp);
  }

  // Submitted values reach the submitter's final decision.
  if (!ctx.quiescent) {
    out.push_back(inconclusive("gla_inclusivity", "run did not quiesce"));
  } else {
    PropertyResult inc = pass("gla_inclusivity");
    std::map<NodeId, const Decision*> final_of;
    for (const auto& d : decisions) final_of[d.node] = &d;
    for (const auto* e : ctx.events(ev::submit)) {
      if (!ctx.correct.count(e->node)) continue;
      Item v = decode_item_hex(e->detail.at("v").get<std::string>(), e->seq);
      auto it = final_of.find(e->node);
      if (it == final_of.end() || !it->second->value.contains(v)) {
        inc = fail("gla_inclusivity", {e->seq}, "submitted value missing from final decision");
        break;
      }
    }
    out.push_back(inc);
  }

  // Everything decided was reliably disclosed to some correct node.
  {
    PropertyResult prov = pass("gla_provenance");
    LatticeValue disclosed;
    for (const auto* e : ctx.events(ev::rb_deliver)) {
      if (!ctx.correct.count(e->node)) continue;
      BroadcastTag tag = tag_from_json(e->detail.at("t"));
      if (tag.kind != TagKind::disclosure) continue;
      auto v = LatticeValue::decode_all(safe_from_hex(e->detail.at("p").get<std::string>(), e->seq));
      if (v) disclosed.join_with(*v);
    }
    for (const auto& d : decisions) {
      if (!leq(d.value, disclosed)) {
        prov = fail("gla_provenance", {d.seq}, "decision holds a value never disclosed");
        break;
      }
    }
    out.push_back(prov);
  }

  // No correct acceptor serves a request from a round beyond its trusted one.
  {
    PropertyResult gate = pass("gla_safe_round_gating");
    for (const auto* e : ctx.events(ev::ack_req_processed)) {
      if (!ctx.correct.count(e->node)) continue;
      if (e->detail.at("r").get<uint64_t>() > e->detail.at("safe_r").get<uint64_t>()) {
        gate = fail("gla_safe_round_gating", {e->seq},
                    "acceptor served a request beyond its trusted round");
        break;
      }
    }
    out.push_back(gate);
  }

  // Amortized message budget per proposer per decision.
  if (ctx.cfg.f == 0) {
    out.push_back(inconclusive("gla_message_budget", "budget is stated for f >= 1"));
  } else {
    PropertyResult budget = pass("gla_message_budget");
    std::map<NodeId, uint64_t> attributed;
    for (const auto* e : ctx.events(ev::send)) {
      const std::string k = e->detail.at("k").get<std::string>();
      if (k == "rb_init" || k == "rb_echo" || k == "rb_ready") {
        BroadcastTag tag = tag_from_json(e->detail.at("t"));
        attributed[tag.kind == TagKind::disclosure ? tag.sender : tag.destination]++;
      } else if (k == "gwts_ack_req") {
        attributed[e->node]++;
      } else if (k == "gwts_nack") {
        attributed[e->detail.at("dst").get<NodeId>()]++;
      }
    }
    std::map<NodeId, uint64_t> counts;
    for (const auto& d : decisions) counts[d.node]++;
    uint64_t per_decision_bound =
        kGwtsBudgetConstant * uint64_t(ctx.cfg.f) * uint64_t(ctx.cfg.n) * uint64_t(ctx.cfg.n);
    for (NodeId id : ctx.correct) {
      uint64_t decided = counts[id];
      if (decided == 0) continue;
      if (attributed[id] > per_decision_bound * decided) {
        budget = fail("gla_message_budget", {},
                      "node " + std::to_string(id) + " used " + std::to_string(attributed[id]) +
                          " messages for " + std::to_string(decided) + " decisions");
        break;
      }
    }
    out.push_back(budget);
  }
}

// ---------------------------------------------------------------------------
// Replicated state machine

struct RsmOp {
  NodeId client;
  bool is_update;
  Item op_item;          // command (update) or no-op (read)
  uint64_t start_seq;
  std::optional<uint64_t> complete_seq;
  std::optional<LatticeValue> result;  // reads only
};

void check_rsm(const Ctx& ctx, std::vector<PropertyResult>& out) {
  // Reconstruct per-client op timelines.
  std::map<NodeId, std::vector<RsmOp>> ops;
  auto handle_start = [&](const TraceEvent* e, bool is_update) {
    if (!ctx.correct_clients.count(e->node)) return;
    ops[e->node].push_back(RsmOp{e->node, is_update,
                                 decode_item_hex(e->detail.at("v").get<std::string>(), e->seq),
                                 e->seq, std::nullopt, std::nullopt});
  };
  auto handle_complete = [&](const TraceEvent* e, bool is_update) {
    if (!ctx.correct_clients.count(e->node)) return;
    auto& v = ops[e->node];
    if (v.empty() || v.back().complete_seq || v.back().is_update != is_update) {
      throw TraceFormatError("event " + std::to_string(e->seq) + ": completion without start");
    }
    v.back().complete_seq = e->seq;
    if (!is_update) {
      v.back().result = decode_value_hex(e->detail.at("v").get<std::string>(), e->seq);
    }
  };
  // Walk in trace order to interleave starts and completes correctly.
  for (const auto& e : ctx.trace) {
    if (e.kind == ev::update_start) handle_start(&e, true);
    else if (e.kind == ev::read_start) handle_start(&e, false);
    else if (e.kind == ev::update_complete) handle_complete(&e, true);
    else if (e.kind == ev::read_complete) handle_complete(&e, false);
  }

  if (!ctx.quiescent) {
    out.push_back(inconclusive("rsm_liveness", "run did not quiesce"));
  } else {
    PropertyResult live = pass("rsm_liveness");
    for (const auto& [client, v] : ops) {
      for (const auto& op : v) {
        if (!op.complete_seq) {
          live = fail("rsm_liveness", {op.start_seq},
                      "client " + std::to_string(client) + " op never completed");
          break;
        }
      }
      if (live.status == "fail") break;
    }
    if (live.status == "pass" && ops.size() != ctx.correct_clients.size()) {
      live = fail("rsm_liveness", {}, "some correct client issued no operations");
    }
    out.push_back(live);
  }

  // Committed sets: quorum groups of reliably broadcast acks observed at
  // correct replicas.
  std::map<std::string, std::pair<BroadcastTag, LatticeValue>> records;
  for (const auto* e : ctx.events(ev::rb_deliver)) {
    if (!ctx.correct.count(e->node)) continue;
    BroadcastTag tag = tag_from_json(e->detail.at("t"));
    if (tag.kind != TagKind::ack) continue;
    std::string key = tag_key(e->detail.at("t"));
    if (records.count(key)) continue;
    Bytes payload = safe_from_hex(e->detail.at("p").get<std::string>(), e->seq);
    try {
      size_t pos = 0;
      AckRecord rec = AckRecord::decode(payload, pos);
      if (pos != payload.size()) continue;
      records.emplace(key, std::pair(tag, rec.accepted));
    } catch (const std::runtime_error&) {
      continue;  // a Byzantine acceptor may broadcast garbage
    }
  }
  std::map<std::tuple<Bytes, NodeId, uint64_t, uint64_t>, std::set<NodeId>> tallies;
  for (const auto& [key, rec] : records) {
    const auto& [tag, accepted] = rec;
    tallies[std::tuple(accepted.encode(), tag.destination, tag.timestamp, tag.round)].insert(
        tag.sender);
  }
  std::vector<LatticeValue> committed;
  std::set<Bytes> committed_encs;
  const size_t q = size_t(byz_quorum(ctx.cfg.n, ctx.cfg.f));
  for (const auto& [key, senders] : tallies) {
    if (senders.size() < q) continue;
    if (committed_encs.insert(std::get<0>(key)).second) {
      auto v = LatticeValue::decode_all(std::get<0>(key));
      if (v) committed.push_back(*v);
    }
  }

  std::vector<const RsmOp*> reads;
  std::vector<const RsmOp*> updates;
  for (const auto& [client, v] : ops) {
    for (const auto& op : v) {
      if (op.is_update) updates.push_back(&op);
      else if (op.result) reads.push_back(&op);
    }
  }

  {
    PropertyResult validity = pass("rsm_read_validity");
    for (const auto* r : reads) {
      bool matched = false;
      for (const auto& c : committed) {
        if (execute_commands(c) == *r->result) {
          matched = true;
          break;
        }
      }
      if (!matched) {
        validity = fail("rsm_read_validity", {*r->complete_seq},
                        "read result matches no committed set");
        break;
      }
    }
    out.push_back(validity);
  }

  {
    PropertyResult cons = pass("rsm_read_consistency");
    for (size_t i = 0; i < reads.size() && cons.status == "pass"; i++) {
      for (size_t j = i + 1; j < reads.size(); j++) {
        if (!comparable(*reads[i]->result, *reads[j]->result)) {
          cons = fail("rsm_read_consistency", {*reads[i]->complete_seq, *reads[j]->complete_seq},
                      "incomparable read results");
          break;
        }
      }
    }
    out.push_back(cons);
  }

  {
    PropertyResult mono = pass("rsm_read_monotonicity");
    for (const auto* r1 : reads) {
      for (const auto* r2 : reads) {
        if (!r1->complete_seq || *r1->complete_seq >= r2->start_seq) continue;
        if (!leq(*r1->result, *r2->result)) {
          mono = fail("rsm_read_monotonicity", {*r1->complete_seq, *r2->complete_seq},
                      "earlier read result not contained in later one");
          break;
        }
      }
      if (mono.status == "fail") break;
    }
    out.push_back(mono);
  }

  {
    PropertyResult stab = pass("rsm_update_stability");
    for (const auto* u1 : updates) {
      if (!u1->complete_seq) continue;
      for (const auto* u2 : updates) {
        if (*u1->complete_seq >= u2->start_seq) continue;
        for (const auto* r : reads) {
          if (r->result->contains(u2->op_item) && !r->result->contains(u1->op_item)) {
            stab = fail("rsm_update_stability", {*u1->complete_seq, *r->complete_seq},
                        "read sees a later update but not the earlier completed one");
            break;
          }
        }
        if (stab.status == "fail") break;
      }
      if (stab.status == "fail") break;
    }
    out.push_back(stab);
  }

  {
    PropertyResult vis = pass("rsm_update_visibility");
    for (const auto* u : updates) {
      if (!u->complete_seq) continue;
      for (const auto* r : reads) {
        if (*u->complete_seq >= r->start_seq) continue;
        if (!r->result->contains(u->op_item)) {
          vis = fail("rsm_update_visibility", {*u->complete_seq, *r->complete_seq},
                     "completed update missing from a later read");
          break;
        }
      }
      if (vis.status == "fail") break;
    }
    out.push_back(vis);
  }
}

}  // namespace

Verdict check_trace(const Trace& trace, const ScenarioConfig& cfg) {
  if (auto err = validate_config(cfg)) {
    throw TraceFormatError("invalid scenario config: " + *err);
  }
  Ctx ctx = build_ctx(trace, cfg);
  Verdict v;
  if (cfg.protocol == "wts" || cfg.protocol == "gwts" || cfg.protocol == "rsm" ||
      cfg.protocol == "rbcast") {
    check_rbcast(ctx, v.properties);
  }
  if (cfg.protocol == "wts" || cfg.protocol == "sbs") {
    check_la(ctx, v.properties);
    if (cfg.protocol == "wts") check_wts_commit(ctx, v.properties);
    if (cfg.protocol == "sbs") check_sbs(ctx, v.properties);
  } else if (cfg.protocol == "gwts") {
    check_gla(ctx, v.properties);
  } else if (cfg.protocol == "rsm") {
    check_rsm(ctx, v.properties);
  }
  return v;
}

RunMetrics collect_metrics(const Trace& trace, const ScenarioConfig& cfg) {
  RunMetrics m;
  auto byz = cfg.byz_nodes();
  std::map<NodeId, uint64_t> refinements;
  for (const auto& e : trace) {
    if (e.kind == ev::send) {
      m.total_msgs++;
    } else if (e.kind == ev::decided && e.node >= 0 && !byz.count(e.node)) {
      m.decisions++;
      m.max_decide_depth = std::max(m.max_decide_depth, e.depth);
    } else if (e.kind == ev::refinement && e.node >= 0 && !byz.count(e.node)) {
      m.max_refinements = std::max(m.max_refinements, ++refinements[e.node]);
    }
  }
  return m;
}

}  // namespace lagree
