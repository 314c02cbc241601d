#include <algorithm>
#include <deque>

#include "doctest.h"
#include "lagree/checker.hpp"
#include "lagree/rbcast.hpp"
#include "lagree/simnet.hpp"

using namespace lagree;

namespace {

// Drives one endpoint directly. Frames the endpoint sends to itself are fed
// back (the simulator loops self-sends through the network too), so quorum
// counting matches a real run.
struct Harness : Emitter {
  explicit Harness(NodeId self, int n, int f) : self(self), ep(self, n, f) {}

  void send(NodeId dst, ProtocolMessage msg) override {
    const auto* frame = std::get_if<RbFrame>(&msg);
    REQUIRE(frame != nullptr);
    sent.push_back({dst, *frame});
    if (dst == self) loopback.push_back(*frame);
  }
  void trace(const std::string&, Json) override {}

  std::vector<RbDelivery> feed(NodeId src, const RbFrame& f) {
    auto out = ep.on_frame(*this, src, f);
    while (!loopback.empty()) {
      RbFrame next = loopback.front();
      loopback.pop_front();
      auto more = ep.on_frame(*this, self, next);
      out.insert(out.end(), more.begin(), more.end());
    }
    return out;
  }

  size_t count_sent(FrameKind k) const {
    return size_t(std::count_if(sent.begin(), sent.end(),
                                [&](const auto& p) { return p.second.frame == k; }));
  }

  NodeId self;
  RbcastEndpoint ep;
  std::vector<std::pair<NodeId, RbFrame>> sent;
  std::deque<RbFrame> loopback;
};

RbFrame frame(FrameKind k, const BroadcastTag& tag, const Bytes& payload) {
  return RbFrame{k, tag, payload};
}

}  // namespace

TEST_CASE("delivery thresholds for n=4 f=1 observer") {
  BroadcastTag tag = disclosure_tag(2);
  Bytes payload = {1, 2, 3};
  // Node 0 observes sender 2's instance. echo quorum 3, ready quorum 3.
  Harness h(0, 4, 1);

  CHECK(h.feed(2, frame(FrameKind::init, tag, payload)).empty());
  CHECK(h.count_sent(FrameKind::echo) == 4);  // its own echo, broadcast

  // Two peer echoes plus its own (looped back) reach the echo quorum.
  CHECK(h.feed(1, frame(FrameKind::echo, tag, payload)).empty());
  CHECK(h.count_sent(FrameKind::ready) == 0);
  CHECK(h.feed(2, frame(FrameKind::echo, tag, payload)).empty());
  CHECK(h.count_sent(FrameKind::ready) == 4);

  // Own ready (looped back) plus two peers' reach the delivery quorum.
  CHECK(h.feed(1, frame(FrameKind::ready, tag, payload)).empty());
  auto got = h.feed(3, frame(FrameKind::ready, tag, payload));
  REQUIRE(got.size() == 1);
  CHECK(got[0].payload == payload);
  CHECK(got[0].tag == tag);
}

TEST_CASE("f+1 readys amplify into a ready without an echo quorum") {
  BroadcastTag tag = disclosure_tag(3);
  Bytes payload = {9};
  Harness h(0, 4, 1);
  CHECK(h.feed(1, frame(FrameKind::ready, tag, payload)).empty());
  CHECK(h.count_sent(FrameKind::ready) == 0);
  // The second peer ready amplifies; the endpoint's own looped-back ready is
  // then the third distinct one, completing delivery in the same call.
  auto got = h.feed(2, frame(FrameKind::ready, tag, payload));
  CHECK(h.count_sent(FrameKind::ready) == 4);
  REQUIRE(got.size() == 1);
  CHECK(got[0].payload == payload);
}

TEST_CASE("duplicate frames from one peer are not counted twice") {
  BroadcastTag tag = disclosure_tag(2);
  Bytes payload = {5};
  Harness h(0, 4, 1);
  h.feed(2, frame(FrameKind::init, tag, payload));
  h.feed(1, frame(FrameKind::echo, tag, payload));
  for (int i = 0; i < 10; i++) {
    CHECK(h.feed(1, frame(FrameKind::echo, tag, payload)).empty());
  }
  CHECK(h.count_sent(FrameKind::ready) == 0);
}

TEST_CASE("only the first init from the tag's sender draws an echo") {
  BroadcastTag tag = disclosure_tag(2);
  Harness h(0, 4, 1);
  h.feed(2, frame(FrameKind::init, tag, {1}));
  CHECK(h.count_sent(FrameKind::echo) == 4);
  // A second, different init from the same sender is ignored.
  h.feed(2, frame(FrameKind::init, tag, {2}));
  CHECK(h.count_sent(FrameKind::echo) == 4);
  // An init relayed by somebody other than the tag's sender is ignored too.
  h.feed(1, frame(FrameKind::init, disclosure_tag(3), {3}));
  CHECK(h.count_sent(FrameKind::echo) == 4);
}

TEST_CASE("reusing a tag as sender is a logic error") {
  Harness h(0, 4, 1);
  BroadcastTag tag = disclosure_tag(0);
  h.ep.broadcast(h, tag, {1});
  CHECK_THROWS_AS(h.ep.broadcast(h, tag, {1}), std::logic_error);
}

TEST_CASE("any arrival order of a quorum set delivers exactly once") {
  // Permutation oracle: an init, three echoes and two peer readys (the
  // endpoint's own looped-back frames complete the quorums) always deliver,
  // exactly once, no matter the interleaving.
  BroadcastTag tag = disclosure_tag(2);
  Bytes payload = {7, 7};
  std::vector<std::pair<NodeId, RbFrame>> frames = {
      {2, frame(FrameKind::init, tag, payload)},
      {1, frame(FrameKind::echo, tag, payload)},
      {2, frame(FrameKind::echo, tag, payload)},
      {3, frame(FrameKind::echo, tag, payload)},
      {1, frame(FrameKind::ready, tag, payload)},
      {3, frame(FrameKind::ready, tag, payload)},
  };
  std::vector<size_t> order = {0, 1, 2, 3, 4, 5};
  size_t permutations = 0;
  do {
    Harness h(0, 4, 1);
    size_t delivered = 0;
    for (size_t i : order) delivered += h.feed(frames[i].first, frames[i].second).size();
    CHECK(delivered == 1);
    permutations++;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(permutations == 720);
}

TEST_CASE("short of a quorum nothing is delivered") {
  BroadcastTag tag = disclosure_tag(2);
  Bytes payload = {1};
  // Readys from f=1 distinct peers only: amplification fires (f+1 counts the
  // endpoint's own? no: amplification needs f+1 distinct peers), so nothing
  // moves with a single ready.
  Harness h(0, 4, 1);
  CHECK(h.feed(1, frame(FrameKind::ready, tag, payload)).empty());
  CHECK(h.count_sent(FrameKind::ready) == 0);
  CHECK(h.feed(1, frame(FrameKind::echo, tag, payload)).empty());
  CHECK(h.feed(2, frame(FrameKind::echo, tag, payload)).empty());
  // Two echoes without the init: below the echo quorum of 3, no own echo
  // exists to complete it.
  CHECK(h.count_sent(FrameKind::ready) == 0);
}

TEST_CASE("tags serialize to fixed width and round-trip through json") {
  BroadcastTag t = ack_tag(3, 7, 2, 1);
  Bytes enc = t.encode();
  CHECK(enc.size() == 33);
  size_t pos = 0;
  CHECK(BroadcastTag::decode(enc, pos) == t);
  CHECK(tag_from_json(tag_to_json(t)) == t);
  BroadcastTag d = disclosure_tag(0, 4);
  CHECK(tag_from_json(tag_to_json(d)) == d);
  CHECK(d < t);
}

TEST_CASE("equivocating sender cannot split correct nodes in full runs") {
  for (uint64_t seed = 0; seed < 25; seed++) {
    ScenarioConfig cfg;
    cfg.protocol = "rbcast";
    cfg.n = 4;
    cfg.f = 1;
    cfg.byzantine = {ByzSpec{3, "equivocator", Json::object()}};
    cfg.scheduler.policy = "random";
    cfg.scheduler.seed = seed;
    RunResult r = run_scenario(cfg);
    REQUIRE(r.quiescent);
    Verdict v = check_trace(r.trace, cfg);
    CAPTURE(seed);
    CHECK(v.passed());
  }
}
