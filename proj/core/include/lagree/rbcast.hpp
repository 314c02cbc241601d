#pragma once

#include <map>
#include <optional>
#include <set>

#include "lagree/node.hpp"

namespace lagree {

struct RbDelivery {
  BroadcastTag tag;
  Bytes payload;
};

Json tag_to_json(const BroadcastTag& t);
BroadcastTag tag_from_json(const Json& j);

/// Per-process endpoint of the echo/ready reliable broadcast. One instance
/// per tag; within an instance:
///   - ECHO is sent once, on the first INIT received from the tag's sender;
///   - READY is sent once, on floor((n+f)/2)+1 ECHOes for one payload or on
///     f+1 READYs for one payload;
///   - delivery happens once, on 2f+1 READYs for one payload.
/// Duplicate frames from the same peer are ignored, so an instance costs at
/// most n + 2n^2 messages across the system. A process's own broadcast goes
/// through the same machinery (no local shortcut), which keeps the delay
/// accounting uniform: an all-correct instance delivers within 3 hops.
class RbcastEndpoint {
 public:
  RbcastEndpoint(NodeId self, int n, int f)
      : self_(self), n_(n), f_(f) {}

  /// Opens an instance as its sender. Reusing a tag is a local logic error.
  void broadcast(Emitter& em, const BroadcastTag& tag, Bytes payload);

  /// Feeds one INIT/ECHO/READY frame in; returns the (0 or 1) deliveries it
  /// completes. The caller hands the payload to its protocol layer.
  std::vector<RbDelivery> on_frame(Emitter& em, NodeId src, const RbFrame& frame);

  int echo_quorum() const { return (n_ + f_) / 2 + 1; }
  int ready_amplify() const { return f_ + 1; }
  int deliver_quorum() const { return 2 * f_ + 1; }

 private:
  struct Instance {
    bool init_seen = false;
    bool sent_echo = false;
    bool sent_ready = false;
    bool delivered = false;
    std::set<NodeId> echo_peers;   // at most one counted ECHO per peer
    std::set<NodeId> ready_peers;  // likewise for READY
    std::map<Bytes, std::set<NodeId>> echoes;  // payload -> peers
    std::map<Bytes, std::set<NodeId>> readys;
  };

  void progress(Emitter& em, const BroadcastTag& tag, Instance& inst,
                std::vector<RbDelivery>& out);

  NodeId self_;
  int n_;
  int f_;
  std::map<BroadcastTag, Instance> instances_;
  std::set<BroadcastTag> sent_tags_;
};

}  // namespace lagree
