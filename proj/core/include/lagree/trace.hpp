#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lagree/lattice.hpp"

namespace lagree {

using Json = nlohmann::json;

/// One observable event of a run. `seq` is a global counter shared with
/// message sends, `depth` is the causal depth (longest message chain behind
/// the event), `node` is -1 for harness-level events.
struct TraceEvent {
  uint64_t seq = 0;
  uint64_t depth = 0;
  NodeId node = -1;
  std::string kind;
  Json detail;  // kind-specific, integers and hex strings only

  Json to_json() const;
  static TraceEvent from_json(const Json& j);
};

using Trace = std::vector<TraceEvent>;

// Event kind names. Kept short and stable: the offline checker and the
// JSON-lines files both key on them.
namespace ev {
inline constexpr const char* run_meta = "run_meta";
inline constexpr const char* run_end = "run_end";
inline constexpr const char* send = "send";
inline constexpr const char* rb_deliver = "rb_deliver";
inline constexpr const char* propose = "propose";
inline constexpr const char* submit = "submit";
inline constexpr const char* submit_rejected = "submit_rejected";
inline constexpr const char* disclosure = "disclosure";
inline constexpr const char* ack_req_sent = "ack_req_sent";
inline constexpr const char* ack_req_processed = "ack_req_processed";
inline constexpr const char* refinement = "refinement";
inline constexpr const char* decided = "decided";
inline constexpr const char* round_start = "round_start";
inline constexpr const char* safe_r_advance = "safe_r_advance";
inline constexpr const char* byz_flag = "byz_flag";
inline constexpr const char* proof_seen = "proof_seen";
inline constexpr const char* update_start = "update_start";
inline constexpr const char* update_complete = "update_complete";
inline constexpr const char* read_start = "read_start";
inline constexpr const char* read_complete = "read_complete";
inline constexpr const char* cnf_sent = "cnf_sent";
}  // namespace ev

void write_trace_file(const std::string& path, const Trace& trace);
Trace read_trace_file(const std::string& path);

std::string trace_to_jsonl(const Trace& trace);

}  // namespace lagree
