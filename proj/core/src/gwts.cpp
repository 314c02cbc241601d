#include "lagree/gwts.hpp"

#include <stdexcept>

namespace lagree {

const char* to_string(GwtsState s) {
  switch (s) {
    case GwtsState::newround: return "newround";
    case GwtsState::disclosing: return "disclosing";
    case GwtsState::proposing: return "proposing";
  }
  return "?";
}

GwtsNode::GwtsNode(GwtsConfig cfg, std::vector<std::string> value_script)
    : cfg_(cfg), value_script_(std::move(value_script)), rb_(cfg.self, cfg.n, cfg.f) {
  if (!cfg_.admissible) cfg_.admissible = accept_all_predicate();
}

void GwtsNode::on_start(Emitter& em) { pump(em); }

void GwtsNode::submit(Emitter& em, const Item& value) {
  if (!cfg_.admissible(value)) throw std::invalid_argument("gwts: value inadmissible");
  batches_[uint64_t(round_ + 1)].insert(value);
  em.trace(ev::submit, Json{{"v", to_hex(value.encode())}, {"r", round_ + 1}});
}

void GwtsNode::on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) {
  if (const auto* frame = std::get_if<RbFrame>(&msg)) {
    for (auto& d : rb_.on_frame(em, src, *frame)) {
      if (d.tag.kind == TagKind::disclosure) {
        on_disclosure(em, d.tag, d.payload);
      } else {
        on_ack_record(em, d.tag, d.payload);
      }
    }
  } else if (std::holds_alternative<GwtsAckReqMsg>(msg) ||
             std::holds_alternative<GwtsNackMsg>(msg)) {
    waiting_.push_back(BufferedMsg{src, msg});
  }
  pump(em);
}

bool GwtsNode::covered(const LatticeValue& v) const {
  for (const auto& it : v.items()) {
    if (!svs_index_.count(it)) return false;
  }
  return true;
}

void GwtsNode::begin_round(Emitter& em) {
  if (uint64_t(round_ + 1) < value_script_.size()) {
    const auto& s = value_script_[size_t(round_ + 1)];
    if (!s.empty()) submit(em, make_value_item(uint64_t(cfg_.self), s));
  }
  state_ = GwtsState::disclosing;
  round_++;
  auto batch = batches_[uint64_t(round_)];
  batches_.erase(uint64_t(round_));
  proposed_.join_with(batch);
  em.trace(ev::round_start, Json{{"r", round_}, {"batch", batch.size()}});
  rb_.broadcast(em, disclosure_tag(cfg_.self, uint64_t(round_)), batch.encode());
}

void GwtsNode::on_disclosure(Emitter& em, const BroadcastTag& tag, const Bytes& payload) {
  auto v = LatticeValue::decode_all(payload);
  if (!v) return;
  for (const auto& it : v->items()) {
    if (!cfg_.admissible(it)) return;
  }
  if (state_ == GwtsState::disclosing) proposed_.join_with(*v);
  for (const auto& it : v->items()) {
    auto [pos, inserted] = svs_index_.emplace(it, tag.round);
    if (!inserted && tag.round < pos->second) pos->second = tag.round;
  }
  disclosure_count_[tag.round]++;
  em.trace(ev::disclosure, Json{{"from", tag.sender}, {"r", tag.round}, {"size", v->size()}});
}

void GwtsNode::on_ack_record(Emitter& em, const BroadcastTag& tag, const Bytes& payload) {
  size_t pos = 0;
  AckRecord rec;
  try {
    rec = AckRecord::decode(payload, pos);
  } catch (const std::runtime_error&) {
    return;
  }
  if (pos != payload.size()) return;
  // The broadcast tag authenticates the acking node and the request
  // coordinates; a relayed record cannot claim someone else's identity.
  rec.sender = tag.sender;
  rec.round = tag.round;
  rec.ts = tag.timestamp;
  rec.destination = tag.destination;
  waiting_.push_back(BufferedRecord{std::move(rec)});
}

void GwtsNode::broadcast_request(Emitter& em) {
  em.trace(ev::ack_req_sent, Json{{"ts", ts_}, {"r", round_}, {"size", proposed_.size()}});
  broadcast(em, cfg_.n, GwtsAckReqMsg{proposed_, ts_, uint64_t(round_)});
}

void GwtsNode::pump(Emitter& em) {
  for (;;) {
    if (state_ == GwtsState::newround && decisions_ < cfg_.round_budget) {
      begin_round(em);
      continue;
    }
    if (state_ == GwtsState::disclosing && disclosure_count_[uint64_t(round_)] >= cfg_.n - cfg_.f) {
      state_ = GwtsState::proposing;
      ts_++;
      broadcast_request(em);
      continue;
    }
    bool fired = false;
    for (auto it = tallies_.begin(); it != tallies_.end(); ++it) {
      if (int(it->second.size()) < quorum()) continue;
      const TallyKey& key = it->first;
      if (key.round == safe_r_) {
        safe_r_++;
        em.trace(ev::safe_r_advance, Json{{"safe_r", safe_r_}});
        fired = true;
        break;
      }
      if (state_ == GwtsState::proposing && key.round == uint64_t(round_)) {
        auto accepted = LatticeValue::decode_all(key.accepted);
        if (accepted && leq(decided_, *accepted)) {
          decided_ = *accepted;
          state_ = GwtsState::newround;
          decisions_++;
          em.trace(ev::decided, Json{{"v", to_hex(decided_.encode())},
                                     {"r", key.round},
                                     {"ts", key.ts},
                                     {"n_decided", decisions_}});
          if (on_decide) on_decide(em, decided_);
          fired = true;
          break;
        }
      }
    }
    if (fired) continue;
    for (size_t i = 0; i < waiting_.size(); i++) {
      if (try_process(em, waiting_[i])) {
        waiting_.erase(waiting_.begin() + long(i));
        fired = true;
        break;
      }
    }
    if (!fired) break;
  }
}

bool GwtsNode::try_process(Emitter& em, const Buffered& b) {
  if (const auto* br = std::get_if<BufferedRecord>(&b)) {
    return try_insert_record(em, br->record);
  }
  const auto& bm = std::get<BufferedMsg>(b);
  if (const auto* req = std::get_if<GwtsAckReqMsg>(&bm.msg)) {
    if (!covered(req->proposed) || req->round > safe_r_) return false;
    handle_ack_req(em, bm.src, *req);
    return true;
  }
  if (const auto* nack = std::get_if<GwtsNackMsg>(&bm.msg)) {
    // Stale coordinates can never match again; drop them.
    if (nack->round < uint64_t(round_) || nack->ts < ts_) return true;
    if (state_ != GwtsState::proposing || nack->ts != ts_ || nack->round != uint64_t(round_)) {
      return false;
    }
    if (!covered(nack->accepted)) return false;
    if (!leq(nack->accepted, proposed_)) {
      proposed_.join_with(nack->accepted);
      ts_++;
      em.trace(ev::refinement, Json{{"ts", ts_}, {"r", round_}});
      broadcast_request(em);
    }
    return true;
  }
  return true;
}

bool GwtsNode::try_insert_record(Emitter& em, const AckRecord& rec) {
  bool insertable = covered(rec.accepted) &&
                    (rec.round <= safe_r_ || state_ == GwtsState::proposing);
  if (!insertable) return false;
  auto key = std::make_tuple(rec.accepted.encode(), rec.destination, rec.sender, rec.ts, rec.round);
  if (!history_keys_.insert(std::move(key)).second) return true;
  TallyKey tk{rec.round, rec.ts, rec.destination, rec.accepted.encode()};
  tallies_[tk].insert(rec.sender);
  if (on_history_grown) on_history_grown(em);
  return true;
}

bool GwtsNode::history_has_quorum(const LatticeValue& value) const {
  Bytes enc = value.encode();
  for (const auto& [key, senders] : tallies_) {
    if (key.accepted == enc && int(senders.size()) >= quorum()) return true;
  }
  return false;
}

void GwtsNode::handle_ack_req(Emitter& em, NodeId src, const GwtsAckReqMsg& m) {
  em.trace(ev::ack_req_processed, Json{{"from", src}, {"r", m.round}, {"safe_r", safe_r_}});
  if (leq(accepted_, m.proposed)) {
    accepted_ = m.proposed;
    auto coords = std::make_tuple(m.round, m.ts, src);
    if (acked_tags_.insert(coords).second) {
      AckRecord rec{accepted_, src, cfg_.self, m.ts, m.round};
      rb_.broadcast(em, ack_tag(cfg_.self, m.round, m.ts, src), rec.encode());
    }
  } else {
    em.send(src, GwtsNackMsg{accepted_, m.ts, m.round});
    accepted_.join_with(m.proposed);
  }
}

}  // namespace lagree
