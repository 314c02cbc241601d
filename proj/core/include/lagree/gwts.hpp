#pragma once

#include <functional>
#include <map>
#include <optional>

#include "lagree/rbcast.hpp"
#include "lagree/simnet.hpp"

namespace lagree {

enum class GwtsState { newround, disclosing, proposing };
const char* to_string(GwtsState s);

struct GwtsConfig {
  NodeId self = 0;
  int n = 0;
  int f = 0;
  AdmissibilityPredicate admissible;
  // Number of rounds this node drives as a proposer. The acceptor role and
  // ack bookkeeping keep running after the budget is spent.
  uint64_t round_budget = 1;
};

/// One ack as recorded in the merged ack history: who acked what, for which
/// (destination, timestamp, round) request coordinates.
struct TallyKey {
  uint64_t round = 0;
  uint64_t ts = 0;
  NodeId destination = 0;
  Bytes accepted;

  auto tie() const { return std::tie(round, ts, destination, accepted); }
  bool operator<(const TallyKey& o) const { return tie() < o.tie(); }
};

/// Multi-shot lattice agreement process producing one decision per round.
///
/// Values submitted while round r runs are batched for round r+1. A round
/// starts by reliably broadcasting the batch (possibly empty), waits for
/// n-f disclosures of the same round, then runs ack rounds like the
/// single-shot protocol, except acks travel by reliable broadcast (tagged
/// with the request's round, timestamp and destination) and land in a
/// shared history every node maintains. A request is only served once its
/// round is at most the acceptor's trusted round Safe_r, which advances
/// when the history holds a full quorum for the round; the proposer decides
/// on the first quorum group for its own round, smallest (round, ts,
/// destination) first.
class GwtsNode : public Node {
 public:
  GwtsNode(GwtsConfig cfg, std::vector<std::string> value_script = {});

  void on_start(Emitter& em) override;
  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override;

  /// Queues `value` for the next round. Callable at any time.
  void submit(Emitter& em, const Item& value);

  /// True when some quorum group in the ack history acked exactly `value`.
  bool history_has_quorum(const LatticeValue& value) const;

  // Invoked after each decision with the decided set, and whenever the ack
  // history gains an entry. Both default to no-ops.
  std::function<void(Emitter&, const LatticeValue&)> on_decide;
  std::function<void(Emitter&)> on_history_grown;

  GwtsState state() const { return state_; }
  int64_t round() const { return round_; }
  uint64_t safe_round() const { return safe_r_; }
  uint64_t decisions() const { return decisions_; }
  const LatticeValue& decided_set() const { return decided_; }
  const LatticeValue& proposed_set() const { return proposed_; }
  const LatticeValue& accepted_set() const { return accepted_; }
  size_t waiting_size() const { return waiting_.size(); }
  int quorum() const { return byz_quorum(cfg_.n, cfg_.f); }

 private:
  struct BufferedMsg {
    NodeId src;
    ProtocolMessage msg;
  };
  struct BufferedRecord {
    AckRecord record;
  };
  using Buffered = std::variant<BufferedMsg, BufferedRecord>;

  bool covered(const LatticeValue& v) const;
  void begin_round(Emitter& em);
  void on_disclosure(Emitter& em, const BroadcastTag& tag, const Bytes& payload);
  void on_ack_record(Emitter& em, const BroadcastTag& tag, const Bytes& payload);
  void pump(Emitter& em);
  bool try_process(Emitter& em, const Buffered& b);
  bool try_insert_record(Emitter& em, const AckRecord& rec);
  void handle_ack_req(Emitter& em, NodeId src, const GwtsAckReqMsg& m);
  void broadcast_request(Emitter& em);

  GwtsConfig cfg_;
  std::vector<std::string> value_script_;
  RbcastEndpoint rb_;

  GwtsState state_ = GwtsState::newround;
  int64_t round_ = -1;
  uint64_t ts_ = 0;
  uint64_t decisions_ = 0;
  std::map<uint64_t, LatticeValue> batches_;
  LatticeValue proposed_;
  LatticeValue decided_;
  // Earliest disclosure round per item; membership is what the guards use.
  std::map<Item, uint64_t> svs_index_;
  std::map<uint64_t, int> disclosure_count_;

  uint64_t safe_r_ = 0;
  LatticeValue accepted_;
  // Request coordinates already answered with a reliably broadcast ack.
  std::set<std::tuple<uint64_t, uint64_t, NodeId>> acked_tags_;

  std::set<std::tuple<Bytes, NodeId, NodeId, uint64_t, uint64_t>> history_keys_;
  std::map<TallyKey, std::set<NodeId>> tallies_;

  std::vector<Buffered> waiting_;
};

}  // namespace lagree
