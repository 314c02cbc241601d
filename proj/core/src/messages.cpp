#include "lagree/messages.hpp"

#include <stdexcept>

namespace lagree {

Bytes BroadcastTag::encode() const {
  Bytes out;
  put_u64(out, uint64_t(int64_t(sender)));
  put_u8(out, uint8_t(kind));
  put_u64(out, round);
  put_u64(out, timestamp);
  put_u64(out, uint64_t(int64_t(destination)));
  return out;
}

BroadcastTag BroadcastTag::decode(const Bytes& in, size_t& pos) {
  BroadcastTag t;
  t.sender = NodeId(int64_t(get_u64(in, pos)));
  uint8_t k = get_u8(in, pos);
  if (k > 1) throw std::runtime_error("bad tag kind");
  t.kind = TagKind(k);
  t.round = get_u64(in, pos);
  t.timestamp = get_u64(in, pos);
  t.destination = NodeId(int64_t(get_u64(in, pos)));
  return t;
}

BroadcastTag disclosure_tag(NodeId sender, uint64_t round) {
  BroadcastTag t;
  t.sender = sender;
  t.kind = TagKind::disclosure;
  t.round = round;
  return t;
}

BroadcastTag ack_tag(NodeId sender, uint64_t round, uint64_t ts, NodeId destination) {
  BroadcastTag t;
  t.sender = sender;
  t.kind = TagKind::ack;
  t.round = round;
  t.timestamp = ts;
  t.destination = destination;
  return t;
}

Bytes AckRecord::encode() const {
  Bytes out = accepted.encode();
  put_u64(out, uint64_t(int64_t(destination)));
  put_u64(out, uint64_t(int64_t(sender)));
  put_u64(out, ts);
  put_u64(out, round);
  return out;
}

AckRecord AckRecord::decode(const Bytes& in, size_t& pos) {
  AckRecord r;
  r.accepted = LatticeValue::decode(in, pos);
  r.destination = NodeId(int64_t(get_u64(in, pos)));
  r.sender = NodeId(int64_t(get_u64(in, pos)));
  r.ts = get_u64(in, pos);
  r.round = get_u64(in, pos);
  return r;
}

Bytes SignedValue::encode() const {
  Bytes out = value.encode();
  put_u64(out, uint64_t(int64_t(sender)));
  put_u32(out, uint32_t(sig.size()));
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

SignedValue SignedValue::decode(const Bytes& in, size_t& pos) {
  SignedValue sv;
  sv.value = Item::decode(in, pos);
  sv.sender = NodeId(int64_t(get_u64(in, pos)));
  uint32_t len = get_u32(in, pos);
  if (pos + len > in.size()) throw std::runtime_error("truncated signature");
  sv.sig.assign(in.begin() + pos, in.begin() + pos + len);
  pos += len;
  return sv;
}

Bytes ConflictPair::encode() const {
  Bytes out = a.encode();
  Bytes eb = b.encode();
  out.insert(out.end(), eb.begin(), eb.end());
  return out;
}

ConflictPair ConflictPair::decode(const Bytes& in, size_t& pos) {
  ConflictPair p;
  p.a = SignedValue::decode(in, pos);
  p.b = SignedValue::decode(in, pos);
  return p;
}

Bytes encode_signed_values(const std::vector<SignedValue>& vs) {
  Bytes out;
  put_u32(out, uint32_t(vs.size()));
  for (const auto& sv : vs) {
    Bytes e = sv.encode();
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

static std::vector<SignedValue> decode_signed_values(const Bytes& in, size_t& pos) {
  uint32_t count = get_u32(in, pos);
  std::vector<SignedValue> vs;
  vs.reserve(count);
  for (uint32_t i = 0; i < count; ++i) vs.push_back(SignedValue::decode(in, pos));
  return vs;
}

Bytes SafeAck::signed_bytes() const {
  Bytes out = encode_signed_values(rcvd_set);
  put_u32(out, uint32_t(conflicts.size()));
  for (const auto& c : conflicts) {
    Bytes e = c.encode();
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

Bytes SafeAck::encode() const {
  Bytes out = signed_bytes();
  put_u64(out, uint64_t(int64_t(acceptor)));
  put_u32(out, uint32_t(sig.size()));
  out.insert(out.end(), sig.begin(), sig.end());
  return out;
}

SafeAck SafeAck::decode(const Bytes& in, size_t& pos) {
  SafeAck a;
  a.rcvd_set = decode_signed_values(in, pos);
  uint32_t nconf = get_u32(in, pos);
  for (uint32_t i = 0; i < nconf; ++i)
    a.conflicts.push_back(ConflictPair::decode(in, pos));
  a.acceptor = NodeId(int64_t(get_u64(in, pos)));
  uint32_t len = get_u32(in, pos);
  if (pos + len > in.size()) throw std::runtime_error("truncated signature");
  a.sig.assign(in.begin() + pos, in.begin() + pos + len);
  pos += len;
  return a;
}

Bytes ProposedEntry::encode() const {
  Bytes out = sv.encode();
  put_u32(out, uint32_t(proof.size()));
  for (const auto& a : proof) {
    Bytes e = a.encode();
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

ProposedEntry ProposedEntry::decode(const Bytes& in, size_t& pos) {
  ProposedEntry e;
  e.sv = SignedValue::decode(in, pos);
  uint32_t count = get_u32(in, pos);
  for (uint32_t i = 0; i < count; ++i) e.proof.push_back(SafeAck::decode(in, pos));
  return e;
}

Bytes encode_entries(const std::vector<ProposedEntry>& entries) {
  Bytes out;
  put_u32(out, uint32_t(entries.size()));
  for (const auto& e : entries) {
    Bytes b = e.encode();
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

std::optional<std::vector<ProposedEntry>> decode_entries(const Bytes& in) {
  try {
    size_t pos = 0;
    uint32_t count = get_u32(in, pos);
    std::vector<ProposedEntry> es;
    for (uint32_t i = 0; i < count; ++i) es.push_back(ProposedEntry::decode(in, pos));
    if (pos != in.size()) return std::nullopt;
    return es;
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

const char* message_kind(const ProtocolMessage& m) {
  struct Visitor {
    const char* operator()(const RbFrame& f) const {
      switch (f.frame) {
        case FrameKind::init: return "rb_init";
        case FrameKind::echo: return "rb_echo";
        case FrameKind::ready: return "rb_ready";
      }
      return "rb_?";
    }
    const char* operator()(const WtsAckReqMsg&) const { return "wts_ack_req"; }
    const char* operator()(const WtsAckMsg&) const { return "wts_ack"; }
    const char* operator()(const WtsNackMsg&) const { return "wts_nack"; }
    const char* operator()(const GwtsAckReqMsg&) const { return "gwts_ack_req"; }
    const char* operator()(const GwtsNackMsg&) const { return "gwts_nack"; }
    const char* operator()(const SbsInitMsg&) const { return "sbs_init"; }
    const char* operator()(const SbsSafeReqMsg&) const { return "sbs_safe_req"; }
    const char* operator()(const SbsSafeAckMsg&) const { return "sbs_safe_ack"; }
    const char* operator()(const SbsAckReqMsg&) const { return "sbs_ack_req"; }
    const char* operator()(const SbsAckMsg&) const { return "sbs_ack"; }
    const char* operator()(const SbsNackMsg&) const { return "sbs_nack"; }
    const char* operator()(const RsmSubmitMsg&) const { return "rsm_submit"; }
    const char* operator()(const RsmDecideNotifyMsg&) const { return "rsm_decide"; }
    const char* operator()(const RsmCnfReqMsg&) const { return "rsm_cnf_req"; }
    const char* operator()(const RsmCnfRepMsg&) const { return "rsm_cnf_rep"; }
  };
  return std::visit(Visitor{}, m);
}

Bytes encode_message(const ProtocolMessage& m) {
  Bytes out;
  put_u8(out, uint8_t(m.index()));
  struct Visitor {
    Bytes& out;
    void operator()(const RbFrame& f) const {
      put_u8(out, uint8_t(f.frame));
      Bytes t = f.tag.encode();
      out.insert(out.end(), t.begin(), t.end());
      put_u32(out, uint32_t(f.payload.size()));
      out.insert(out.end(), f.payload.begin(), f.payload.end());
    }
    void value_ts(const LatticeValue& v, uint64_t ts) const {
      Bytes e = v.encode();
      out.insert(out.end(), e.begin(), e.end());
      put_u64(out, ts);
    }
    void operator()(const WtsAckReqMsg& m) const { value_ts(m.proposed, m.ts); }
    void operator()(const WtsAckMsg& m) const { value_ts(m.accepted, m.ts); }
    void operator()(const WtsNackMsg& m) const { value_ts(m.accepted, m.ts); }
    void operator()(const GwtsAckReqMsg& m) const {
      value_ts(m.proposed, m.ts);
      put_u64(out, m.round);
    }
    void operator()(const GwtsNackMsg& m) const {
      value_ts(m.accepted, m.ts);
      put_u64(out, m.round);
    }
    void operator()(const SbsInitMsg& m) const {
      Bytes e = m.sv.encode();
      out.insert(out.end(), e.begin(), e.end());
    }
    void operator()(const SbsSafeReqMsg& m) const {
      put_u32(out, uint32_t(m.safety_set.size()));
      for (const auto& sv : m.safety_set) {
        Bytes e = sv.encode();
        out.insert(out.end(), e.begin(), e.end());
      }
    }
    void operator()(const SbsSafeAckMsg& m) const {
      Bytes e = m.ack.encode();
      out.insert(out.end(), e.begin(), e.end());
    }
    void entries_ts(const std::vector<ProposedEntry>& es, uint64_t ts) const {
      Bytes e = encode_entries(es);
      out.insert(out.end(), e.begin(), e.end());
      put_u64(out, ts);
    }
    void operator()(const SbsAckReqMsg& m) const { entries_ts(m.proposed, m.ts); }
    void operator()(const SbsAckMsg& m) const { entries_ts(m.accepted, m.ts); }
    void operator()(const SbsNackMsg& m) const { entries_ts(m.accepted, m.ts); }
    void operator()(const RsmSubmitMsg& m) const {
      Bytes e = m.cmd.encode();
      out.insert(out.end(), e.begin(), e.end());
      put_u8(out, m.propose ? 1 : 0);
    }
    void operator()(const RsmDecideNotifyMsg& m) const {
      Bytes e = m.accepted.encode();
      out.insert(out.end(), e.begin(), e.end());
    }
    void operator()(const RsmCnfReqMsg& m) const {
      Bytes e = m.accepted.encode();
      out.insert(out.end(), e.begin(), e.end());
    }
    void operator()(const RsmCnfRepMsg& m) const {
      Bytes e = m.accepted.encode();
      out.insert(out.end(), e.begin(), e.end());
    }
  };
  std::visit(Visitor{out}, m);
  return out;
}

}  // namespace lagree
