#include "lagree/rbcast.hpp"

#include <stdexcept>

namespace lagree {

Json tag_to_json(const BroadcastTag& t) {
  return Json::array({t.kind == TagKind::disclosure ? "d" : "a", t.sender,
                      t.round, t.timestamp, t.destination});
}

BroadcastTag tag_from_json(const Json& j) {
  BroadcastTag t;
  t.kind = j.at(0).get<std::string>() == "d" ? TagKind::disclosure : TagKind::ack;
  t.sender = j.at(1).get<NodeId>();
  t.round = j.at(2).get<uint64_t>();
  t.timestamp = j.at(3).get<uint64_t>();
  t.destination = j.at(4).get<NodeId>();
  return t;
}

void RbcastEndpoint::broadcast(Emitter& em, const BroadcastTag& tag,
                               Bytes payload) {
  if (tag.sender != self_)
    throw std::logic_error("broadcast with foreign sender tag");
  if (!sent_tags_.insert(tag).second)
    throw std::logic_error("broadcast tag reused");
  RbFrame frame{FrameKind::init, tag, std::move(payload)};
  for (NodeId id = 0; id < n_; ++id) em.send(id, frame);
}

std::vector<RbDelivery> RbcastEndpoint::on_frame(Emitter& em, NodeId src,
                                                 const RbFrame& frame) {
  std::vector<RbDelivery> out;
  Instance& inst = instances_[frame.tag];
  switch (frame.frame) {
    case FrameKind::init:
      // Only the tag's sender can open the instance; later (possibly
      // conflicting) INITs from it are ignored.
      if (src != frame.tag.sender || inst.init_seen) return out;
      inst.init_seen = true;
      if (!inst.sent_echo) {
        inst.sent_echo = true;
        RbFrame echo{FrameKind::echo, frame.tag, frame.payload};
        for (NodeId id = 0; id < n_; ++id) em.send(id, echo);
      }
      break;
    case FrameKind::echo:
      if (!inst.echo_peers.insert(src).second) return out;
      inst.echoes[frame.payload].insert(src);
      break;
    case FrameKind::ready:
      if (!inst.ready_peers.insert(src).second) return out;
      inst.readys[frame.payload].insert(src);
      break;
  }
  progress(em, frame.tag, inst, out);
  return out;
}

void RbcastEndpoint::progress(Emitter& em, const BroadcastTag& tag,
                              Instance& inst, std::vector<RbDelivery>& out) {
  if (!inst.sent_ready) {
    const Bytes* ready_payload = nullptr;
    for (const auto& [payload, peers] : inst.echoes)
      if (int(peers.size()) >= echo_quorum()) {
        ready_payload = &payload;
        break;
      }
    if (!ready_payload)
      for (const auto& [payload, peers] : inst.readys)
        if (int(peers.size()) >= ready_amplify()) {
          ready_payload = &payload;
          break;
        }
    if (ready_payload) {
      inst.sent_ready = true;
      RbFrame ready{FrameKind::ready, tag, *ready_payload};
      for (NodeId id = 0; id < n_; ++id) em.send(id, ready);
    }
  }
  if (!inst.delivered) {
    for (const auto& [payload, peers] : inst.readys) {
      if (int(peers.size()) >= deliver_quorum()) {
        inst.delivered = true;
        em.trace(ev::rb_deliver, Json{{"t", tag_to_json(tag)},
                                      {"p", to_hex(payload)},
                                      {"digest", digest_hex(payload)}});
        out.push_back(RbDelivery{tag, payload});
        break;
      }
    }
  }
}

}  // namespace lagree
