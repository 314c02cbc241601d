#pragma once

#include <optional>

#include "lagree/rbcast.hpp"
#include "lagree/simnet.hpp"

namespace lagree {

enum class WtsState { disclosing, proposing, decided };
const char* to_string(WtsState s);

struct WtsConfig {
  NodeId self = 0;
  int n = 0;
  int f = 0;
  AdmissibilityPredicate admissible;
};

/// Single-shot Byzantine lattice agreement process: one proposer role and
/// one acceptor role sharing a set of safe values (SvS).
///
/// The proposer discloses its value by reliable broadcast, waits for n-f
/// disclosures, then runs ack rounds: a request is re-issued with a higher
/// timestamp each time a nack brings new values (a refinement; at most f of
/// them happen). It decides once floor((n+f)/2)+1 distinct acceptors ack the
/// current request. Requests, acks and nacks whose lattice element is not
/// yet covered by SvS wait in a buffer; the buffer is re-scanned in arrival
/// order after every delivery until nothing more can fire, so handler
/// guards behave like the eager "upon" semantics they model.
class WtsNode : public Node {
 public:
  WtsNode(WtsConfig cfg, std::optional<Item> own_value);

  void on_start(Emitter& em) override;
  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override;

  /// Discloses `value` and starts the proposer. Calling it twice or with an
  /// inadmissible value is a caller bug.
  void propose(Emitter& em, const Item& value);

  WtsState state() const { return state_; }
  const LatticeValue& svs() const { return svs_; }
  const LatticeValue& proposed_set() const { return proposed_; }
  const LatticeValue& accepted_set() const { return accepted_; }
  const std::optional<LatticeValue>& decision() const { return decision_; }
  uint64_t ts() const { return ts_; }
  int init_counter() const { return init_counter_; }
  int ack_count() const { return int(ack_set_.size()); }
  size_t waiting_size() const { return waiting_.size(); }

  int quorum() const { return byz_quorum(cfg_.n, cfg_.f); }

 private:
  struct Buffered {
    NodeId src;
    ProtocolMessage msg;
  };

  bool safe(const LatticeValue& v) const { return leq(v, svs_); }
  void on_disclosure(Emitter& em, const BroadcastTag& tag, const Bytes& payload);
  void pump(Emitter& em);
  // True when the message fired (and must leave the buffer); false keeps it
  // waiting. Permanently stale messages also return true to get dropped.
  bool try_process(Emitter& em, const Buffered& b);
  void handle_ack_req(Emitter& em, NodeId src, const WtsAckReqMsg& m);
  void broadcast_request(Emitter& em);

  WtsConfig cfg_;
  std::optional<Item> own_value_;
  RbcastEndpoint rb_;

  // Proposer side.
  WtsState state_ = WtsState::disclosing;
  bool proposed_once_ = false;
  int init_counter_ = 0;
  uint64_t ts_ = 0;
  LatticeValue proposed_;
  LatticeValue svs_;
  std::set<NodeId> ack_set_;
  std::optional<LatticeValue> decision_;
  int refinements_ = 0;

  // Acceptor side (SvS is shared with the proposer above).
  LatticeValue accepted_;

  std::vector<Buffered> waiting_;
};

}  // namespace lagree
