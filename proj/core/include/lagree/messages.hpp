#pragma once

#include <variant>
#include <vector>

#include "lagree/lattice.hpp"

namespace lagree {

// ---------------------------------------------------------------------------
// Reliable-broadcast framing

enum class TagKind : uint8_t { disclosure = 0, ack = 1 };

/// Names one reliable-broadcast instance. A correct sender opens at most one
/// instance per tag; round / timestamp / destination disambiguate the
/// instances a process opens over its lifetime.
struct BroadcastTag {
  NodeId sender = 0;
  TagKind kind = TagKind::disclosure;
  uint64_t round = 0;
  uint64_t timestamp = 0;   // ack tags only
  NodeId destination = 0;   // ack tags only

  auto tie() const { return std::tuple(sender, kind, round, timestamp, destination); }
  bool operator<(const BroadcastTag& o) const { return tie() < o.tie(); }
  bool operator==(const BroadcastTag& o) const { return tie() == o.tie(); }

  Bytes encode() const;
  static BroadcastTag decode(const Bytes& in, size_t& pos);
};

BroadcastTag disclosure_tag(NodeId sender, uint64_t round = 0);
BroadcastTag ack_tag(NodeId sender, uint64_t round, uint64_t ts, NodeId destination);

enum class FrameKind : uint8_t { init = 0, echo = 1, ready = 2 };

/// One INIT / ECHO / READY message of a broadcast instance. The payload is
/// opaque here; the protocols above encode lattice values or ack records
/// into it.
struct RbFrame {
  FrameKind frame;
  BroadcastTag tag;
  Bytes payload;
};

// ---------------------------------------------------------------------------
// Single-shot agreement messages (disclosures travel inside RbFrame payloads)

struct WtsAckReqMsg {
  LatticeValue proposed;
  uint64_t ts = 0;
};
struct WtsAckMsg {
  LatticeValue accepted;
  uint64_t ts = 0;
};
struct WtsNackMsg {
  LatticeValue accepted;
  uint64_t ts = 0;
};

// ---------------------------------------------------------------------------
// Generalized (multi-round) agreement

struct GwtsAckReqMsg {
  LatticeValue proposed;
  uint64_t ts = 0;
  uint64_t round = 0;
};
struct GwtsNackMsg {
  LatticeValue accepted;
  uint64_t ts = 0;
  uint64_t round = 0;
};

/// Payload of a reliably broadcast acknowledgement. `sender` is the
/// acknowledging acceptor and is forced to the broadcast tag's sender on
/// delivery, so a lying payload cannot impersonate anyone.
struct AckRecord {
  LatticeValue accepted;
  NodeId destination = 0;
  NodeId sender = 0;
  uint64_t ts = 0;
  uint64_t round = 0;

  auto tie() const {
    return std::tuple(accepted.encode(), destination, sender, ts, round);
  }
  Bytes encode() const;
  static AckRecord decode(const Bytes& in, size_t& pos);
};

// ---------------------------------------------------------------------------
// Signature-based agreement

struct SignedValue {
  Item value;
  NodeId sender = 0;
  Bytes sig;  // over value.encode()

  // Equality and ordering are structural on (value, sender); the signature
  // just rides along.
  auto tie() const { return std::tuple(value, sender); }
  bool operator<(const SignedValue& o) const { return tie() < o.tie(); }
  bool operator==(const SignedValue& o) const { return tie() == o.tie(); }

  Bytes encode() const;
  static SignedValue decode(const Bytes& in, size_t& pos);
};

struct ConflictPair {
  SignedValue a;
  SignedValue b;

  auto tie() const { return std::tuple(a, b); }
  bool operator<(const ConflictPair& o) const { return tie() < o.tie(); }
  bool operator==(const ConflictPair& o) const { return tie() == o.tie(); }

  Bytes encode() const;
  static ConflictPair decode(const Bytes& in, size_t& pos);
};

/// An acceptor's signed answer to a safety request: it echoes the proposed
/// set and reports every conflicting signature pair it knows about.
struct SafeAck {
  std::vector<SignedValue> rcvd_set;      // sorted
  std::vector<ConflictPair> conflicts;    // sorted
  NodeId acceptor = 0;
  Bytes sig;  // over signed_bytes()

  Bytes signed_bytes() const;  // canonical (rcvd_set, conflicts)
  Bytes encode() const;
  static SafeAck decode(const Bytes& in, size_t& pos);
};

/// A value together with the quorum of safe-acks that vouches for it.
struct ProposedEntry {
  SignedValue sv;
  std::vector<SafeAck> proof;  // sorted by acceptor

  Bytes encode() const;
  static ProposedEntry decode(const Bytes& in, size_t& pos);
};

Bytes encode_entries(const std::vector<ProposedEntry>& entries);
std::optional<std::vector<ProposedEntry>> decode_entries(const Bytes& in);

// Canonical length-prefixed encoding of a signed-value list; safety-phase
// equality checks compare these bytes.
Bytes encode_signed_values(const std::vector<SignedValue>& values);

struct SbsInitMsg {
  SignedValue sv;
};
struct SbsSafeReqMsg {
  std::vector<SignedValue> safety_set;  // sorted
};
struct SbsSafeAckMsg {
  SafeAck ack;
};
struct SbsAckReqMsg {
  std::vector<ProposedEntry> proposed;
  uint64_t ts = 0;
};
struct SbsAckMsg {
  std::vector<ProposedEntry> accepted;
  uint64_t ts = 0;
};
struct SbsNackMsg {
  std::vector<ProposedEntry> accepted;
  uint64_t ts = 0;
};

// ---------------------------------------------------------------------------
// Replicated state machine (client <-> replica)

struct RsmSubmitMsg {
  Item cmd;
  bool propose = true;  // false registers interest without proposing
};
struct RsmDecideNotifyMsg {
  LatticeValue accepted;
};
struct RsmCnfReqMsg {
  LatticeValue accepted;
};
struct RsmCnfRepMsg {
  LatticeValue accepted;
};

using ProtocolMessage =
    std::variant<RbFrame, WtsAckReqMsg, WtsAckMsg, WtsNackMsg, GwtsAckReqMsg,
                 GwtsNackMsg, SbsInitMsg, SbsSafeReqMsg, SbsSafeAckMsg,
                 SbsAckReqMsg, SbsAckMsg, SbsNackMsg, RsmSubmitMsg,
                 RsmDecideNotifyMsg, RsmCnfReqMsg, RsmCnfRepMsg>;

/// Short stable name of the message kind, used in traces.
const char* message_kind(const ProtocolMessage& m);

/// Canonical byte encoding of a whole message (kind byte + body); the trace
/// digests and exact-equality comparisons run over these bytes.
Bytes encode_message(const ProtocolMessage& m);

}  // namespace lagree
