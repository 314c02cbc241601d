#include "lagree/rsm.hpp"

namespace lagree {

LatticeValue execute_commands(const LatticeValue& decided) {
  LatticeValue out;
  for (const auto& it : decided.items()) {
    if (it.kind == ItemKind::command) out.insert(it);
  }
  return out;
}

static Bytes op_payload(NodeId client, uint64_t counter) {
  Bytes p;
  put_u64(p, uint64_t(int64_t(client)));
  put_u64(p, counter);
  return p;
}

RsmReplicaNode::RsmReplicaNode(RsmReplicaConfig cfg)
    : cfg_(cfg),
      gwts_(GwtsConfig{cfg.self, cfg.n, cfg.f,
                       cfg.admissible ? cfg.admissible : wellformed_command_predicate(),
                       cfg.round_budget}) {
  if (!cfg_.admissible) cfg_.admissible = wellformed_command_predicate();
  gwts_.on_decide = [this](Emitter& em, const LatticeValue& decided) {
    notify_interested(em, decided);
  };
  gwts_.on_history_grown = [this](Emitter& em) { retry_pending_conf(em); };
}

void RsmReplicaNode::on_start(Emitter& em) { gwts_.on_start(em); }

void RsmReplicaNode::on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) {
  if (const auto* m = std::get_if<RsmSubmitMsg>(&msg)) {
    handle_submit(em, src, *m);
  } else if (const auto* m = std::get_if<RsmCnfReqMsg>(&msg)) {
    handle_cnf_req(em, src, *m);
  } else {
    gwts_.on_deliver(em, src, msg);
  }
}

void RsmReplicaNode::handle_submit(Emitter& em, NodeId src, const RsmSubmitMsg& m) {
  if (!cfg_.admissible(m.cmd) || m.cmd.origin != uint64_t(int64_t(src))) {
    em.trace(ev::submit_rejected, Json{{"from", src}});
    return;
  }
  interest_[m.cmd].insert(src);
  if (m.propose) gwts_.submit(em, m.cmd);
  // A command decided before this submission arrived still gets its notify.
  if (gwts_.decided_set().contains(m.cmd)) notify_interested(em, gwts_.decided_set());
}

void RsmReplicaNode::notify_interested(Emitter& em, const LatticeValue& decided) {
  for (auto it = interest_.begin(); it != interest_.end();) {
    if (decided.contains(it->first)) {
      for (NodeId client : it->second) {
        em.send(client, RsmDecideNotifyMsg{decided});
      }
      it = interest_.erase(it);
    } else {
      ++it;
    }
  }
}

void RsmReplicaNode::handle_cnf_req(Emitter& em, NodeId src, const RsmCnfReqMsg& m) {
  if (gwts_.history_has_quorum(m.accepted)) {
    em.trace(ev::cnf_sent, Json{{"to", src}});
    em.send(src, RsmCnfRepMsg{m.accepted});
  } else {
    pending_conf_.emplace_back(src, m.accepted);
  }
}

void RsmReplicaNode::retry_pending_conf(Emitter& em) {
  for (size_t i = 0; i < pending_conf_.size();) {
    if (gwts_.history_has_quorum(pending_conf_[i].second)) {
      em.trace(ev::cnf_sent, Json{{"to", pending_conf_[i].first}});
      em.send(pending_conf_[i].first, RsmCnfRepMsg{pending_conf_[i].second});
      pending_conf_.erase(pending_conf_.begin() + long(i));
    } else {
      i++;
    }
  }
}

RsmClientNode::RsmClientNode(RsmClientConfig cfg) : cfg_(cfg) {}

void RsmClientNode::on_start(Emitter& em) { next_op(em); }

void RsmClientNode::next_op(Emitter& em) {
  phase_ = Phase::idle;
  current_.reset();
  reporters_.clear();
  reported_sets_.clear();
  conf_replies_.clear();
  confirming_ = false;
  if (op_idx_ >= cfg_.script.size()) return;
  const RsmClientOp& op = cfg_.script[op_idx_];
  uint64_t counter = op_counter_++;
  if (op.kind == RsmClientOp::Kind::update) {
    Item cmd = make_command_item(uint64_t(int64_t(cfg_.self)), op_payload(cfg_.self, counter));
    current_ = cmd;
    phase_ = Phase::updating;
    em.trace(ev::update_start, Json{{"v", to_hex(cmd.encode())}, {"op", op_idx_}});
    submit_everywhere(em, cmd);
  } else {
    Item nop = make_nop_item(uint64_t(int64_t(cfg_.self)), op_payload(cfg_.self, counter));
    current_ = nop;
    phase_ = Phase::reading;
    em.trace(ev::read_start, Json{{"v", to_hex(nop.encode())}, {"op", op_idx_}});
    submit_everywhere(em, nop);
  }
}

void RsmClientNode::submit_everywhere(Emitter& em, const Item& cmd) {
  for (NodeId r = 0; r < cfg_.n; r++) {
    em.send(r, RsmSubmitMsg{cmd, r <= cfg_.f});
  }
}

void RsmClientNode::on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) {
  if (src < 0 || src >= cfg_.n) return;  // replicas only
  if (const auto* m = std::get_if<RsmDecideNotifyMsg>(&msg)) {
    handle_notify(em, src, *m);
  } else if (const auto* m = std::get_if<RsmCnfRepMsg>(&msg)) {
    handle_cnf_rep(em, src, *m);
  }
}

void RsmClientNode::handle_notify(Emitter& em, NodeId src, const RsmDecideNotifyMsg& m) {
  if (phase_ == Phase::idle || !current_ || !m.accepted.contains(*current_)) return;
  if (phase_ == Phase::updating) {
    reporters_.insert(src);
    if (int(reporters_.size()) >= cfg_.f + 1) {
      em.trace(ev::update_complete, Json{{"v", to_hex(current_->encode())}, {"op", op_idx_}});
      op_idx_++;
      next_op(em);
    }
    return;
  }
  // Reading: collect sets until f+1 distinct replicas reported, then ask the
  // replicas to confirm each distinct set.
  if (confirming_) return;
  reporters_.insert(src);
  reported_sets_.emplace(m.accepted.encode(), m.accepted);
  if (int(reporters_.size()) >= cfg_.f + 1) {
    confirming_ = true;
    for (const auto& [enc, set] : reported_sets_) {
      for (NodeId r = 0; r < cfg_.n; r++) {
        em.send(r, RsmCnfReqMsg{set});
      }
    }
  }
}

void RsmClientNode::handle_cnf_rep(Emitter& em, NodeId src, const RsmCnfRepMsg& m) {
  if (phase_ != Phase::reading || !confirming_) return;
  Bytes enc = m.accepted.encode();
  if (!reported_sets_.count(enc)) return;
  auto& replies = conf_replies_[enc];
  replies.insert(src);
  if (int(replies.size()) >= cfg_.f + 1) {
    LatticeValue result = execute_commands(m.accepted);
    em.trace(ev::read_complete, Json{{"v", to_hex(result.encode())}, {"op", op_idx_}});
    op_idx_++;
    next_op(em);
  }
}

}  // namespace lagree
