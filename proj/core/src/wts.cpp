#include "lagree/wts.hpp"

#include <stdexcept>

namespace lagree {

const char* to_string(WtsState s) {
  switch (s) {
    case WtsState::disclosing: return "disclosing";
    case WtsState::proposing: return "proposing";
    case WtsState::decided: return "decided";
  }
  return "?";
}

WtsNode::WtsNode(WtsConfig cfg, std::optional<Item> own_value)
    : cfg_(cfg), own_value_(std::move(own_value)), rb_(cfg.self, cfg.n, cfg.f) {
  if (!cfg_.admissible) cfg_.admissible = accept_all_predicate();
}

void WtsNode::on_start(Emitter& em) {
  if (own_value_) propose(em, *own_value_);
}

void WtsNode::propose(Emitter& em, const Item& value) {
  if (proposed_once_) throw std::logic_error("wts: propose called twice");
  if (!cfg_.admissible(value)) throw std::invalid_argument("wts: own value inadmissible");
  proposed_once_ = true;
  proposed_.insert(value);
  em.trace(ev::propose, Json{{"v", to_hex(value.encode())}});
  rb_.broadcast(em, disclosure_tag(cfg_.self, 0), LatticeValue::single(value).encode());
  pump(em);
}

void WtsNode::on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) {
  if (const auto* frame = std::get_if<RbFrame>(&msg)) {
    for (auto& d : rb_.on_frame(em, src, *frame)) {
      if (d.tag.kind == TagKind::disclosure) on_disclosure(em, d.tag, d.payload);
    }
  } else if (std::holds_alternative<WtsAckReqMsg>(msg) ||
             std::holds_alternative<WtsAckMsg>(msg) ||
             std::holds_alternative<WtsNackMsg>(msg)) {
    waiting_.push_back(Buffered{src, msg});
  }
  pump(em);
}

void WtsNode::on_disclosure(Emitter& em, const BroadcastTag& tag, const Bytes& payload) {
  auto v = LatticeValue::decode_all(payload);
  // A disclosure carries exactly one value; anything else is discarded.
  if (!v || v->size() != 1 || !cfg_.admissible(*v->items().begin())) return;
  if (state_ == WtsState::disclosing) proposed_.join_with(*v);
  svs_.join_with(*v);
  init_counter_++;
  em.trace(ev::disclosure, Json{{"from", tag.sender}, {"n_seen", init_counter_}});
}

void WtsNode::broadcast_request(Emitter& em) {
  em.trace(ev::ack_req_sent, Json{{"ts", ts_}, {"size", proposed_.size()}});
  broadcast(em, cfg_.n, WtsAckReqMsg{proposed_, ts_});
}

void WtsNode::pump(Emitter& em) {
  for (;;) {
    if (state_ == WtsState::disclosing && proposed_once_ && init_counter_ >= cfg_.n - cfg_.f) {
      state_ = WtsState::proposing;
      broadcast_request(em);
      continue;
    }
    if (state_ == WtsState::proposing && int(ack_set_.size()) >= quorum()) {
      state_ = WtsState::decided;
      decision_ = proposed_;
      em.trace(ev::decided, Json{{"v", to_hex(proposed_.encode())},
                                 {"ts", ts_},
                                 {"refinements", refinements_}});
      continue;
    }
    bool fired = false;
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

bool WtsNode::try_process(Emitter& em, const Buffered& b) {
  if (const auto* req = std::get_if<WtsAckReqMsg>(&b.msg)) {
    if (!safe(req->proposed)) return false;
    handle_ack_req(em, b.src, *req);
    return true;
  }
  if (const auto* ack = std::get_if<WtsAckMsg>(&b.msg)) {
    if (state_ != WtsState::proposing || ack->ts != ts_) return false;
    if (!safe(ack->accepted)) return false;
    ack_set_.insert(b.src);
    return true;
  }
  if (const auto* nack = std::get_if<WtsNackMsg>(&b.msg)) {
    if (state_ != WtsState::proposing || nack->ts != ts_) return false;
    if (!safe(nack->accepted)) return false;
    if (!leq(nack->accepted, proposed_)) {
      proposed_.join_with(nack->accepted);
      ack_set_.clear();
      ts_++;
      refinements_++;
      em.trace(ev::refinement, Json{{"ts", ts_}, {"count", refinements_}});
      broadcast_request(em);
    }
    return true;
  }
  return true;
}

void WtsNode::handle_ack_req(Emitter& em, NodeId src, const WtsAckReqMsg& m) {
  if (leq(accepted_, m.proposed)) {
    accepted_ = m.proposed;
    em.send(src, WtsAckMsg{accepted_, m.ts});
  } else {
    // The nack carries the pre-merge accepted set; the union happens after.
    em.send(src, WtsNackMsg{accepted_, m.ts});
    accepted_.join_with(m.proposed);
  }
}

}  // namespace lagree
