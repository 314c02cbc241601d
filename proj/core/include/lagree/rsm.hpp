#pragma once

#include <map>
#include <optional>

#include "lagree/gwts.hpp"

namespace lagree {

struct RsmReplicaConfig {
  NodeId self = 0;
  int n = 0;
  int f = 0;
  AdmissibilityPredicate admissible;  // command well-formedness
  uint64_t round_budget = 1;
};

/// Replica: a multi-round agreement node plus the client-facing plumbing.
/// Submitted commands join the next round's batch; once a decided set
/// contains a command some client asked about, the replica notifies that
/// client once. Read confirmation requests are answered as soon as the
/// replica's own ack history holds a full quorum that acked exactly the
/// set in question (buffered until then).
class RsmReplicaNode : public Node {
 public:
  explicit RsmReplicaNode(RsmReplicaConfig cfg);

  void on_start(Emitter& em) override;
  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override;

  const GwtsNode& agreement() const { return gwts_; }

 private:
  void handle_submit(Emitter& em, NodeId src, const RsmSubmitMsg& m);
  void handle_cnf_req(Emitter& em, NodeId src, const RsmCnfReqMsg& m);
  void notify_interested(Emitter& em, const LatticeValue& decided);
  void retry_pending_conf(Emitter& em);

  RsmReplicaConfig cfg_;
  GwtsNode gwts_;
  std::map<Item, std::set<NodeId>> interest_;
  std::vector<std::pair<NodeId, LatticeValue>> pending_conf_;
};

struct RsmClientOp {
  enum class Kind { update, read } kind = Kind::update;
  std::string body;  // update payload label, unused for reads
};

struct RsmClientConfig {
  NodeId self = 0;  // absolute node id (>= n)
  int n = 0;
  int f = 0;
  std::vector<RsmClientOp> script;
};

/// Client: runs its script sequentially. An update submits a fresh command
/// item (proposed to the f+1 lowest-id replicas, interest-only elsewhere)
/// and completes once f+1 distinct replicas report a decided set holding
/// it. A read submits a fresh no-op the same way, then confirms one of the
/// reported sets with the replicas; the first set f+1 distinct replicas
/// confirm becomes the result, minus the no-ops.
class RsmClientNode : public Node {
 public:
  explicit RsmClientNode(RsmClientConfig cfg);

  void on_start(Emitter& em) override;
  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override;

  size_t completed_ops() const { return op_idx_; }
  bool done() const { return op_idx_ >= cfg_.script.size(); }

 private:
  enum class Phase { idle, updating, reading };

  void next_op(Emitter& em);
  void submit_everywhere(Emitter& em, const Item& cmd);
  void handle_notify(Emitter& em, NodeId src, const RsmDecideNotifyMsg& m);
  void handle_cnf_rep(Emitter& em, NodeId src, const RsmCnfRepMsg& m);

  RsmClientConfig cfg_;
  size_t op_idx_ = 0;
  Phase phase_ = Phase::idle;
  uint64_t op_counter_ = 0;
  std::optional<Item> current_;
  std::set<NodeId> reporters_;
  // Reported decided sets by encoding, with the replicas that reported each.
  std::map<Bytes, LatticeValue> reported_sets_;
  bool confirming_ = false;
  std::map<Bytes, std::set<NodeId>> conf_replies_;
};

// Strips no-op items: what executing a decided set yields.
LatticeValue execute_commands(const LatticeValue& decided);

}  // namespace lagree
