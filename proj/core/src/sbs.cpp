#include "lagree/sbs.hpp"

#include <algorithm>
#include <stdexcept>

namespace lagree {

const char* to_string(SbsState s) {
  switch (s) {
    case SbsState::init: return "init";
    case SbsState::safetying: return "safetying";
    case SbsState::proposing: return "proposing";
    case SbsState::decided: return "decided";
  }
  return "?";
}

bool verify_conflict_pair(const SignatureProvider& sig, const ConflictPair& p) {
  if (p.a.sender != p.b.sender) return false;
  if (p.a.value == p.b.value) return false;
  return sig.verify(p.a.sender, p.a.value.encode(), p.a.sig) &&
         sig.verify(p.b.sender, p.b.value.encode(), p.b.sig);
}

std::vector<ConflictPair> return_conflicts(const SignatureProvider& sig,
                                           const std::vector<SignedValue>& values) {
  std::vector<SignedValue> verified;
  for (const auto& sv : values) {
    if (sig.verify(sv.sender, sv.value.encode(), sv.sig)) verified.push_back(sv);
  }
  std::sort(verified.begin(), verified.end());
  verified.erase(std::unique(verified.begin(), verified.end()), verified.end());
  std::vector<ConflictPair> out;
  for (size_t i = 0; i < verified.size(); i++) {
    for (size_t j = i + 1; j < verified.size(); j++) {
      if (verified[i].sender == verified[j].sender &&
          !(verified[i].value == verified[j].value)) {
        out.push_back(ConflictPair{verified[i], verified[j]});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SignedValue> remove_conflicts(const SignatureProvider& sig,
                                          const std::vector<SignedValue>& values) {
  auto conflicts = return_conflicts(sig, values);
  std::set<SignedValue> burned;
  for (const auto& c : conflicts) {
    burned.insert(c.a);
    burned.insert(c.b);
  }
  std::vector<SignedValue> out;
  for (const auto& sv : values) {
    if (!sig.verify(sv.sender, sv.value.encode(), sv.sig)) continue;
    if (burned.count(sv)) continue;
    if (std::find(out.begin(), out.end(), sv) == out.end()) out.push_back(sv);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool entry_safe(const SignatureProvider& sig, int n, int f,
                const AdmissibilityPredicate& admissible, const ProposedEntry& e) {
  if (!admissible(e.sv.value)) return false;
  if (!sig.verify(e.sv.sender, e.sv.value.encode(), e.sv.sig)) return false;
  std::set<NodeId> acceptors;
  for (const auto& a : e.proof) {
    if (a.acceptor < 0 || a.acceptor >= n) return false;
    if (!sig.verify(a.acceptor, a.signed_bytes(), a.sig)) return false;
    if (std::find(a.rcvd_set.begin(), a.rcvd_set.end(), e.sv) == a.rcvd_set.end()) {
      return false;
    }
    for (const auto& c : a.conflicts) {
      if (c.a == e.sv || c.b == e.sv) return false;
    }
    acceptors.insert(a.acceptor);
  }
  return int(acceptors.size()) >= byz_quorum(n, f);
}

bool all_safe(const SignatureProvider& sig, int n, int f,
              const AdmissibilityPredicate& admissible,
              const std::vector<ProposedEntry>& entries) {
  for (const auto& e : entries) {
    if (!entry_safe(sig, n, f, admissible, e)) return false;
  }
  return true;
}

LatticeValue entry_values(const std::vector<ProposedEntry>& entries) {
  LatticeValue v;
  for (const auto& e : entries) v.insert(e.sv.value);
  return v;
}

SbsNode::SbsNode(SbsConfig cfg, std::optional<Item> own_value,
                 std::shared_ptr<SignatureProvider> sig)
    : cfg_(cfg), own_value_(std::move(own_value)), sig_(std::move(sig)) {
  if (!cfg_.admissible) cfg_.admissible = accept_all_predicate();
  byz_.assign(size_t(cfg_.n), false);
}

void SbsNode::on_start(Emitter& em) {
  if (!own_value_) return;
  if (!cfg_.admissible(*own_value_)) throw std::invalid_argument("sbs: own value inadmissible");
  SignedValue sv{*own_value_, cfg_.self, sig_->sign(cfg_.self, own_value_->encode())};
  safety_set_.emplace(cfg_.self, sv);
  em.trace(ev::propose, Json{{"v", to_hex(own_value_->encode())}});
  broadcast(em, cfg_.n, SbsInitMsg{sv});
  maybe_send_safe_req(em);
}

void SbsNode::on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) {
  if (const auto* m = std::get_if<SbsInitMsg>(&msg)) {
    handle_init(em, *m);
  } else if (const auto* m = std::get_if<SbsSafeReqMsg>(&msg)) {
    handle_safe_req(em, src, *m);
  } else if (const auto* m = std::get_if<SbsSafeAckMsg>(&msg)) {
    handle_safe_ack(em, src, *m);
  } else if (const auto* m = std::get_if<SbsAckReqMsg>(&msg)) {
    handle_ack_req(em, src, *m);
  } else if (const auto* m = std::get_if<SbsAckMsg>(&msg)) {
    handle_ack(em, src, *m);
  } else if (const auto* m = std::get_if<SbsNackMsg>(&msg)) {
    handle_nack(em, src, *m);
  }
}

void SbsNode::flag(Emitter& em, NodeId who, const char* reason) {
  if (who < 0 || who >= cfg_.n || byz_[size_t(who)]) return;
  byz_[size_t(who)] = true;
  em.trace(ev::byz_flag, Json{{"flagged", who}, {"reason", reason}});
}

void SbsNode::trace_proofs(Emitter& em, const std::vector<ProposedEntry>& entries) {
  for (const auto& e : entries) {
    if (!proofs_traced_.insert(key_of(e.sv)).second) continue;
    bool ok = entry_safe(*sig_, cfg_.n, cfg_.f, cfg_.admissible, e);
    em.trace(ev::proof_seen, Json{{"signer", e.sv.sender},
                                  {"v", to_hex(e.sv.value.encode())},
                                  {"e", to_hex(e.encode())},
                                  {"ok", ok}});
  }
}

void SbsNode::handle_init(Emitter& em, const SbsInitMsg& m) {
  if (state_ != SbsState::init) return;
  const SignedValue& sv = m.sv;
  if (!sig_->verify(sv.sender, sv.value.encode(), sv.sig)) return;
  if (!cfg_.admissible(sv.value)) return;
  auto it = safety_set_.find(sv.sender);
  if (it == safety_set_.end()) {
    safety_set_.emplace(sv.sender, sv);
  } else if (!(it->second.value == sv.value)) {
    safety_set_.erase(it);
  }
  maybe_send_safe_req(em);
}

std::vector<SignedValue> SbsNode::safety_snapshot() const {
  std::vector<SignedValue> out;
  for (const auto& [signer, sv] : safety_set_) out.push_back(sv);
  std::sort(out.begin(), out.end());
  return out;
}

void SbsNode::maybe_send_safe_req(Emitter& em) {
  if (state_ != SbsState::init) return;
  if (int(safety_set_.size()) < cfg_.n - cfg_.f) return;
  state_ = SbsState::safetying;
  frozen_safety_set_ = safety_snapshot();
  frozen_safety_enc_ = encode_signed_values(frozen_safety_set_);
  broadcast(em, cfg_.n, SbsSafeReqMsg{frozen_safety_set_});
}

void SbsNode::handle_safe_req(Emitter& em, NodeId src, const SbsSafeReqMsg& m) {
  for (const auto& sv : m.safety_set) {
    if (!sig_->verify(sv.sender, sv.value.encode(), sv.sig)) return;
  }
  std::vector<SignedValue> combined = m.safety_set;
  for (const auto& [signer, sv] : safe_candidates_) combined.push_back(sv);
  SafeAck ack;
  ack.rcvd_set = m.safety_set;
  ack.conflicts = return_conflicts(*sig_, combined);
  ack.acceptor = cfg_.self;
  ack.sig = sig_->sign(cfg_.self, ack.signed_bytes());
  em.send(src, SbsSafeAckMsg{ack});
  for (const auto& sv : remove_conflicts(*sig_, combined)) {
    safe_candidates_.emplace(sv.sender, sv);
  }
}

void SbsNode::handle_safe_ack(Emitter& em, NodeId src, const SbsSafeAckMsg& m) {
  if (state_ != SbsState::safetying) return;
  const SafeAck& a = m.ack;
  bool valid = a.acceptor >= 0 && a.acceptor < cfg_.n &&
               sig_->verify(a.acceptor, a.signed_bytes(), a.sig) &&
               encode_signed_values(a.rcvd_set) == frozen_safety_enc_;
  if (valid) {
    for (const auto& c : a.conflicts) {
      if (!verify_conflict_pair(*sig_, c)) {
        valid = false;
        break;
      }
    }
  }
  if (!valid) {
    flag(em, src, "bad_safe_ack");
    return;
  }
  safe_acks_.emplace(a.acceptor, a);
  maybe_build_proposal(em);
}

std::vector<ProposedEntry> SbsNode::proposed_entries() const {
  std::vector<ProposedEntry> out;
  for (const auto& [key, e] : proposed_) out.push_back(e);
  return out;
}

void SbsNode::broadcast_request(Emitter& em) {
  auto entries = proposed_entries();
  em.trace(ev::ack_req_sent, Json{{"ts", ts_}, {"size", entries.size()}});
  broadcast(em, cfg_.n, SbsAckReqMsg{std::move(entries), ts_});
}

void SbsNode::maybe_build_proposal(Emitter& em) {
  if (state_ != SbsState::safetying) return;
  if (int(safe_acks_.size()) < quorum()) return;
  std::vector<SafeAck> proof;
  for (const auto& [acceptor, a] : safe_acks_) proof.push_back(a);
  for (const auto& sv : frozen_safety_set_) {
    bool conflicted = false;
    for (const auto& a : proof) {
      for (const auto& c : a.conflicts) {
        if (c.a == sv || c.b == sv) {
          conflicted = true;
          break;
        }
      }
      if (conflicted) break;
    }
    if (!conflicted) proposed_.emplace(key_of(sv), ProposedEntry{sv, proof});
  }
  state_ = SbsState::proposing;
  ack_set_.clear();
  ts_++;
  trace_proofs(em, proposed_entries());
  broadcast_request(em);
}

void SbsNode::handle_ack_req(Emitter& em, NodeId src, const SbsAckReqMsg& m) {
  bool ok = true;
  for (const auto& e : m.proposed) {
    if (!entry_safe(*sig_, cfg_.n, cfg_.f, cfg_.admissible, e)) {
      ok = false;
      break;
    }
  }
  trace_proofs(em, m.proposed);
  if (!ok) return;
  LatticeValue accepted_values;
  for (const auto& [key, e] : accepted_) accepted_values.insert(e.sv.value);
  if (leq(accepted_values, entry_values(m.proposed))) {
    accepted_.clear();
    for (const auto& e : m.proposed) accepted_.emplace(key_of(e.sv), e);
    em.send(src, SbsAckMsg{m.proposed, m.ts});
  } else {
    std::vector<ProposedEntry> old_accepted;
    for (const auto& [key, e] : accepted_) old_accepted.push_back(e);
    em.send(src, SbsNackMsg{std::move(old_accepted), m.ts});
    for (const auto& e : m.proposed) accepted_.emplace(key_of(e.sv), e);
  }
}

void SbsNode::handle_ack(Emitter& em, NodeId src, const SbsAckMsg& m) {
  if (state_ != SbsState::proposing) return;
  if (m.ts != ts_) return;
  auto sorted = m.accepted;
  std::sort(sorted.begin(), sorted.end(), [](const ProposedEntry& x, const ProposedEntry& y) {
    return std::pair(x.sv.value.encode(), x.sv.sender) < std::pair(y.sv.value.encode(), y.sv.sender);
  });
  bool equal = encode_entries(sorted) == encode_entries(proposed_entries());
  bool trusted = src >= 0 && src < cfg_.n && !byz_[size_t(src)];
  if (equal && trusted) {
    ack_set_.insert(src);
    maybe_decide(em);
  } else {
    flag(em, src, "bad_ack");
  }
}

void SbsNode::handle_nack(Emitter& em, NodeId src, const SbsNackMsg& m) {
  if (state_ != SbsState::proposing) return;
  if (m.ts != ts_) return;
  bool grows = !leq(entry_values(m.accepted), entry_values(proposed_entries()));
  bool usable = grows && src >= 0 && src < cfg_.n && !byz_[size_t(src)] &&
                all_safe(*sig_, cfg_.n, cfg_.f, cfg_.admissible, m.accepted);
  if (!usable) {
    flag(em, src, "bad_nack");
    return;
  }
  for (const auto& e : m.accepted) proposed_.emplace(key_of(e.sv), e);
  ack_set_.clear();
  ts_++;
  refinements_++;
  em.trace(ev::refinement, Json{{"ts", ts_}, {"count", refinements_}});
  trace_proofs(em, proposed_entries());
  broadcast_request(em);
}

void SbsNode::maybe_decide(Emitter& em) {
  if (state_ != SbsState::proposing) return;
  if (int(ack_set_.size()) < quorum()) return;
  state_ = SbsState::decided;
  decision_ = entry_values(proposed_entries());
  em.trace(ev::decided, Json{{"v", to_hex(decision_->encode())},
                             {"ts", ts_},
                             {"refinements", refinements_}});
}

}  // namespace lagree
