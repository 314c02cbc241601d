#include "lagree/adversary.hpp"

#include <stdexcept>

#include "lagree/rbcast.hpp"
#include "lagree/sbs.hpp"

namespace lagree {

namespace {

Bytes be8_pair(NodeId id, uint64_t counter) {
  Bytes p;
  put_u64(p, uint64_t(int64_t(id)));
  put_u64(p, counter);
  return p;
}

class SilentNode : public Node {
 public:
  void on_deliver(Emitter&, NodeId, const ProtocolMessage&) override {}
};

// Opens its disclosure instance with payload A toward the low half of the
// cluster (and itself) and payload B toward the high half, then behaves like
// a correct reliable-broadcast relay. It never answers protocol messages.
class EquivocatorNode : public Node {
 public:
  EquivocatorNode(NodeId self, int n, int f) : self_(self), n_(n), rb_(self, n, f) {}

  void on_start(Emitter& em) override {
    Bytes a = LatticeValue::single(make_value_item(uint64_t(int64_t(self_)), "eq_a")).encode();
    Bytes b = LatticeValue::single(make_value_item(uint64_t(int64_t(self_)), "eq_b")).encode();
    BroadcastTag tag = disclosure_tag(self_, 0);
    for (NodeId dst = 0; dst < n_; dst++) {
      const Bytes& payload = (dst < n_ / 2 || dst == self_) ? a : b;
      em.send(dst, RbFrame{FrameKind::init, tag, payload});
    }
  }

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    if (const auto* frame = std::get_if<RbFrame>(&msg)) {
      rb_.on_frame(em, src, *frame);
    }
  }

 private:
  NodeId self_;
  int n_;
  RbcastEndpoint rb_;
};

// Relays broadcasts and discloses honestly, but answers every ack request
// with a nack carrying the biggest set it has seen, regardless of what the
// request proposed.
class NackFlooderNode : public Node {
 public:
  NackFlooderNode(std::string protocol, NodeId self, int n, int f,
                  std::shared_ptr<SignatureProvider> sig, AdmissibilityPredicate adm)
      : protocol_(std::move(protocol)),
        self_(self),
        n_(n),
        f_(f),
        sig_(std::move(sig)),
        admissible_(std::move(adm)),
        rb_(self, n, f) {}

  void on_start(Emitter& em) override {
    if (protocol_ == "wts") {
      Bytes v = LatticeValue::single(make_value_item(uint64_t(int64_t(self_)), "flood")).encode();
      rb_.broadcast(em, disclosure_tag(self_, 0), v);
    } else if (protocol_ == "sbs") {
      Item v = make_value_item(uint64_t(int64_t(self_)), "flood");
      SignedValue sv{v, self_, sig_->sign(self_, v.encode())};
      broadcast(em, n_, SbsInitMsg{sv});
    }
    // gwts: discloses nothing, floods from what it observes.
  }

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    if (const auto* frame = std::get_if<RbFrame>(&msg)) {
      for (auto& d : rb_.on_frame(em, src, *frame)) {
        if (d.tag.kind != TagKind::disclosure) continue;
        if (auto v = LatticeValue::decode_all(d.payload)) svs_.join_with(*v);
      }
      return;
    }
    if (const auto* req = std::get_if<WtsAckReqMsg>(&msg)) {
      em.send(src, WtsNackMsg{svs_, req->ts});
    } else if (const auto* req = std::get_if<GwtsAckReqMsg>(&msg)) {
      em.send(src, GwtsNackMsg{svs_, req->ts, req->round});
    } else if (const auto* req = std::get_if<SbsAckReqMsg>(&msg)) {
      for (const auto& e : req->proposed) {
        if (entry_safe(*sig_, n_, f_, admissible_, e)) {
          pool_.emplace(std::pair(e.sv.value.encode(), e.sv.sender), e);
        }
      }
      std::vector<ProposedEntry> entries;
      for (const auto& [key, e] : pool_) entries.push_back(e);
      em.send(src, SbsNackMsg{std::move(entries), req->ts});
    }
  }

 private:
  std::string protocol_;
  NodeId self_;
  int n_;
  int f_;
  std::shared_ptr<SignatureProvider> sig_;
  AdmissibilityPredicate admissible_;
  RbcastEndpoint rb_;
  LatticeValue svs_;
  std::map<std::pair<Bytes, NodeId>, ProposedEntry> pool_;
};

// A mostly correct acceptor that additionally replays every ack it ever
// sent (their timestamps go stale as the proposer refines) and answers each
// request with one far-future ack on top.
class StaleAckerNode : public Node {
 public:
  StaleAckerNode(NodeId self, int n, int f) : self_(self), rb_(self, n, f) {}

  void on_start(Emitter& em) override {
    Bytes v = LatticeValue::single(make_value_item(uint64_t(int64_t(self_)), "stale")).encode();
    rb_.broadcast(em, disclosure_tag(self_, 0), v);
  }

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    if (const auto* frame = std::get_if<RbFrame>(&msg)) {
      rb_.on_frame(em, src, *frame);
      return;
    }
    const auto* req = std::get_if<WtsAckReqMsg>(&msg);
    if (!req) return;
    for (const auto& old : sent_) em.send(src, old);
    em.send(src, WtsAckMsg{accepted_, req->ts + 7});
    if (leq(accepted_, req->proposed)) {
      accepted_ = req->proposed;
      WtsAckMsg ack{accepted_, req->ts};
      sent_.push_back(ack);
      em.send(src, ack);
    } else {
      em.send(src, WtsNackMsg{accepted_, req->ts});
      accepted_.join_with(req->proposed);
    }
  }

 private:
  NodeId self_;
  RbcastEndpoint rb_;
  LatticeValue accepted_;
  std::vector<WtsAckMsg> sent_;
};

// Never discloses; when it observes a round-k disclosure it floods an empty
// ack request pretending to run round k+5. The empty set is trivially
// covered, so only the acceptors' trusted-round gate keeps these buffered.
class RoundJumperNode : public Node {
 public:
  RoundJumperNode(NodeId self, int n, int f) : n_(n), rb_(self, n, f) {}

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    const auto* frame = std::get_if<RbFrame>(&msg);
    if (!frame) return;
    for (auto& d : rb_.on_frame(em, src, *frame)) {
      if (d.tag.kind != TagKind::disclosure) continue;
      if (!jumped_.insert(d.tag.round).second) continue;
      broadcast(em, n_, GwtsAckReqMsg{LatticeValue{}, 1, d.tag.round + 5});
    }
  }

 private:
  int n_;
  RbcastEndpoint rb_;
  std::set<uint64_t> jumped_;
};

// Signs two different values and shows each to one half of the cluster,
// then ignores everything. Only signature pairs can expose it.
class DoubleSignerNode : public Node {
 public:
  DoubleSignerNode(NodeId self, int n, std::shared_ptr<SignatureProvider> sig)
      : self_(self), n_(n), sig_(std::move(sig)) {}

  void on_start(Emitter& em) override {
    Item a = make_value_item(uint64_t(int64_t(self_)), "ds_a");
    Item b = make_value_item(uint64_t(int64_t(self_)), "ds_b");
    SignedValue sva{a, self_, sig_->sign(self_, a.encode())};
    SignedValue svb{b, self_, sig_->sign(self_, b.encode())};
    for (NodeId dst = 0; dst < n_; dst++) {
      em.send(dst, SbsInitMsg{dst < n_ / 2 ? sva : svb});
    }
  }

  void on_deliver(Emitter&, NodeId, const ProtocolMessage&) override {}

 private:
  NodeId self_;
  int n_;
  std::shared_ptr<SignatureProvider> sig_;
};

// Replica that skips agreement entirely: every submission is answered with
// a fabricated decide notification (the command plus junk of its own), and
// every confirmation request is granted.
class FabricatorReplicaNode : public Node {
 public:
  explicit FabricatorReplicaNode(NodeId self) : self_(self) {}

  void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) override {
    if (const auto* m = std::get_if<RsmSubmitMsg>(&msg)) {
      LatticeValue fake;
      fake.insert(m->cmd);
      fake.insert(make_command_item(uint64_t(int64_t(self_)), be8_pair(self_, 999)));
      em.send(src, RsmDecideNotifyMsg{fake});
    } else if (const auto* m = std::get_if<RsmCnfReqMsg>(&msg)) {
      em.send(src, RsmCnfRepMsg{m->accepted});
    }
  }

 private:
  NodeId self_;
};

// Client that submits a malformed command, an under-replicated command and
// a pipeline of three commands without awaiting completion. It never reads
// and never looks at replies.
class BadClientNode : public Node {
 public:
  BadClientNode(NodeId self, int n, int f) : self_(self), n_(n), f_(f) {}

  void on_start(Emitter& em) override {
    Item malformed{uint64_t(int64_t(self_)), ItemKind::command, Bytes(4, 0xab)};
    for (NodeId r = 0; r <= f_; r++) em.send(r, RsmSubmitMsg{malformed, true});
    em.send(0, RsmSubmitMsg{make_command_item(uint64_t(int64_t(self_)), be8_pair(self_, 0)), true});
    for (uint64_t i = 1; i <= 3; i++) {
      Item cmd = make_command_item(uint64_t(int64_t(self_)), be8_pair(self_, i));
      for (NodeId r = 0; r < n_; r++) em.send(r, RsmSubmitMsg{cmd, r <= f_});
    }
  }

  void on_deliver(Emitter&, NodeId, const ProtocolMessage&) override {}

 private:
  NodeId self_;
  int n_;
  int f_;
};

}  // namespace

bool adversary_supported(const std::string& strategy, const std::string& protocol) {
  if (strategy == "silent") return true;
  if (strategy == "equivocator") {
    return protocol == "wts" || protocol == "gwts" || protocol == "rbcast";
  }
  if (strategy == "nack_flooder") {
    return protocol == "wts" || protocol == "gwts" || protocol == "sbs";
  }
  if (strategy == "stale_acker") return protocol == "wts";
  if (strategy == "round_jumper") return protocol == "gwts";
  if (strategy == "double_signer") return protocol == "sbs";
  if (strategy == "fabricator") return protocol == "rsm";
  if (strategy == "bad_client") return protocol == "rsm";
  return false;
}

std::unique_ptr<Node> make_adversary(const std::string& strategy,
                                     const std::string& protocol, NodeId self,
                                     int n, int f,
                                     std::shared_ptr<SignatureProvider> sig,
                                     AdmissibilityPredicate admissible) {
  if (!adversary_supported(strategy, protocol)) {
    throw std::runtime_error("adversary strategy '" + strategy +
                             "' not supported for protocol '" + protocol + "'");
  }
  if (strategy == "silent") return std::make_unique<SilentNode>();
  if (strategy == "equivocator") return std::make_unique<EquivocatorNode>(self, n, f);
  if (strategy == "nack_flooder") {
    return std::make_unique<NackFlooderNode>(protocol, self, n, f, std::move(sig),
                                             std::move(admissible));
  }
  if (strategy == "stale_acker") return std::make_unique<StaleAckerNode>(self, n, f);
  if (strategy == "round_jumper") return std::make_unique<RoundJumperNode>(self, n, f);
  if (strategy == "double_signer") {
    return std::make_unique<DoubleSignerNode>(self, n, std::move(sig));
  }
  if (strategy == "fabricator") return std::make_unique<FabricatorReplicaNode>(self);
  return std::make_unique<BadClientNode>(self, n, f);
}

}  // namespace lagree
