#pragma once

#include <map>
#include <memory>
#include <optional>

#include "lagree/signature.hpp"
#include "lagree/simnet.hpp"

namespace lagree {

enum class SbsState { init, safetying, proposing, decided };
const char* to_string(SbsState s);

struct SbsConfig {
  NodeId self = 0;
  int n = 0;
  int f = 0;
  AdmissibilityPredicate admissible;
};

// Pairwise conflict scan: every pair of verified signed values with the same
// signer and different values. Pairs come out with a < b, sorted.
std::vector<ConflictPair> return_conflicts(const SignatureProvider& sig,
                                           const std::vector<SignedValue>& values);

// True when both halves verify, share a signer and differ in value: the pair
// proves its signer equivocated.
bool verify_conflict_pair(const SignatureProvider& sig, const ConflictPair& p);

// Drops every value that belongs to some valid conflict pair (both halves of
// the pair go). Values whose signature fails verification also go.
std::vector<SignedValue> remove_conflicts(const SignatureProvider& sig,
                                          const std::vector<SignedValue>& values);

// A proposal entry is safe when its proof holds floor((n+f)/2)+1 validly
// signed acks from distinct acceptors, each echoing a set that contains the
// value and a conflict list that clears its signer, and the value itself is
// admissible. An empty entry list is vacuously safe.
bool entry_safe(const SignatureProvider& sig, int n, int f,
                const AdmissibilityPredicate& admissible, const ProposedEntry& e);
bool all_safe(const SignatureProvider& sig, int n, int f,
              const AdmissibilityPredicate& admissible,
              const std::vector<ProposedEntry>& entries);

// The value sets underneath entry lists, used for the lattice order.
LatticeValue entry_values(const std::vector<ProposedEntry>& entries);

/// Signature-based lattice agreement process with O(n) message complexity
/// per phase. No message buffering: a message whose guards fail at delivery
/// time is dropped.
///
/// Values travel signed by their proposer. The init phase collects n-f
/// mutually conflict-free signed values; the safety phase has acceptors
/// countersign the collected set and report every equivocation they know;
/// the proposal phase then carries (value, proof) entries, where the proof
/// is the quorum of safety acks clearing the value, so any third party can
/// re-check admissibility without trusting the proposer.
class SbsNode : public Node {
 public:
  SbsNode(SbsConfig cfg, std::optional<Item> own_value,
          std::shared_ptr<SignatureProvider> sig);

  void on_start(Emitter& em) override;
  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override;

  SbsState state() const { return state_; }
  const std::optional<LatticeValue>& decision() const { return decision_; }
  uint64_t ts() const { return ts_; }
  size_t safety_set_size() const { return safety_set_.size(); }
  size_t safe_ack_count() const { return safe_acks_.size(); }
  int refinement_count() const { return refinements_; }
  int quorum() const { return byz_quorum(cfg_.n, cfg_.f); }

 private:
  using EntryKey = std::pair<Bytes, NodeId>;  // (value encoding, signer)
  static EntryKey key_of(const SignedValue& sv) {
    return {sv.value.encode(), sv.sender};
  }

  std::vector<SignedValue> safety_snapshot() const;
  std::vector<ProposedEntry> proposed_entries() const;
  void flag(Emitter& em, NodeId who, const char* reason);
  void trace_proofs(Emitter& em, const std::vector<ProposedEntry>& entries);
  void maybe_send_safe_req(Emitter& em);
  void maybe_build_proposal(Emitter& em);
  void maybe_decide(Emitter& em);
  void broadcast_request(Emitter& em);

  void handle_init(Emitter& em, const SbsInitMsg& m);
  void handle_safe_req(Emitter& em, NodeId src, const SbsSafeReqMsg& m);
  void handle_safe_ack(Emitter& em, NodeId src, const SbsSafeAckMsg& m);
  void handle_ack_req(Emitter& em, NodeId src, const SbsAckReqMsg& m);
  void handle_ack(Emitter& em, NodeId src, const SbsAckMsg& m);
  void handle_nack(Emitter& em, NodeId src, const SbsNackMsg& m);

  SbsConfig cfg_;
  std::optional<Item> own_value_;
  std::shared_ptr<SignatureProvider> sig_;

  // Proposer side. The safety set keeps at most one value per signer; a
  // conflicting arrival erases the stored one and itself (so a later third
  // value from the same signer can enter cleanly, matching the scan-the-
  // whole-set semantics of the conflict filter).
  SbsState state_ = SbsState::init;
  std::map<NodeId, SignedValue> safety_set_;
  std::vector<SignedValue> frozen_safety_set_;
  Bytes frozen_safety_enc_;
  std::map<NodeId, SafeAck> safe_acks_;
  std::map<EntryKey, ProposedEntry> proposed_;
  uint64_t ts_ = 0;
  std::set<NodeId> ack_set_;
  std::vector<bool> byz_;
  std::optional<LatticeValue> decision_;
  int refinements_ = 0;

  // Acceptor side. Candidates are first-wins per signer: a conflicting
  // later value never displaces the stored one, which is exactly the
  // conflict memory the safety phase relies on.
  std::map<NodeId, SignedValue> safe_candidates_;
  std::map<EntryKey, ProposedEntry> accepted_;

  // proof_seen dedup, per (signer, value encoding).
  std::set<EntryKey> proofs_traced_;
};

}  // namespace lagree
