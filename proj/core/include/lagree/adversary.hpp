#pragma once

#include <memory>

#include "lagree/signature.hpp"
#include "lagree/simnet.hpp"

namespace lagree {

/// Builds a Byzantine node. Strategies:
///   silent        drops everything (any protocol)
///   equivocator   sends two different broadcast payloads to the two halves
///                 of the cluster, then relays echoes/readies honestly
///   nack_flooder  answers every ack request with a nack carrying the
///                 largest set it can assemble (wts, gwts, sbs)
///   stale_acker   serves requests honestly but replays every old ack and
///                 adds future-timestamp ones (wts)
///   round_jumper  never discloses; floods empty ack requests five rounds
///                 ahead of every round it observes (gwts)
///   double_signer signs two different values and shows each to half the
///                 cluster, then goes silent (sbs)
///   fabricator    replica that skips agreement and fabricates decide
///                 notifications and confirmations (rsm)
///   bad_client    client that submits malformed, under-replicated and
///                 pipelined commands, and never reads (rsm)
///
/// All strategies are reactive with bounded output, so runs still quiesce,
/// and none signs with another node's key.
std::unique_ptr<Node> make_adversary(const std::string& strategy,
                                     const std::string& protocol, NodeId self,
                                     int n, int f,
                                     std::shared_ptr<SignatureProvider> sig,
                                     AdmissibilityPredicate admissible);

/// True when `strategy` makes sense for `protocol` (and whether it occupies
/// a protocol-node slot or a client slot).
bool adversary_supported(const std::string& strategy, const std::string& protocol);

}  // namespace lagree
