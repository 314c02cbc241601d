#pragma once

#include "lagree/messages.hpp"
#include "lagree/trace.hpp"

namespace lagree {

/// What a node may do while handling an event: send messages and append
/// trace events. The simulator implements this and stamps sender identity,
/// causal depth and sequence numbers itself, so a node (or adversary)
/// cannot fake either.
class Emitter {
 public:
  virtual ~Emitter() = default;
  virtual void send(NodeId dst, ProtocolMessage msg) = 0;
  virtual void trace(const std::string& kind, Json detail) = 0;
};

/// A deterministic event-driven process. `on_start` runs once at depth 0;
/// afterwards the node only acts when the simulator delivers an envelope.
/// Handlers must reach a local fixpoint before returning: any internal
/// guard that the delivery enabled fires inside the same call.
class Node {
 public:
  virtual ~Node() = default;
  virtual void on_start(Emitter&) {}
  virtual void on_deliver(Emitter& em, NodeId src, const ProtocolMessage& msg) = 0;
};

inline void broadcast(Emitter& em, int n, const ProtocolMessage& msg) {
  for (NodeId id = 0; id < n; ++id) em.send(id, msg);
}

}  // namespace lagree
