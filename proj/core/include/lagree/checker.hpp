#pragma once

#include <stdexcept>

#include "lagree/simnet.hpp"

namespace lagree {

// Per-proposer message budget for the multi-round protocol: total attributed
// messages per decision stays below this constant times f * n^2. Measured
// headroom over the acceptance sweeps is roughly 2x; the accounting behind
// the constant is spelled out in the README.
inline constexpr uint64_t kGwtsBudgetConstant = 32;

/// Thrown when a trace is not structurally well-formed (missing meta,
/// non-monotonic sequence numbers, undecodable hex). Distinct from a
/// property violation: a violated property yields a failing Verdict.
class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropertyResult {
  std::string name;
  std::string status;  // "pass" | "fail" | "inconclusive"
  std::vector<uint64_t> witness;  // seqs of the offending events, if any
  std::string note;
};

struct Verdict {
  std::vector<PropertyResult> properties;

  bool passed() const;  // no property failed (inconclusive is not a failure)
  const PropertyResult* find(const std::string& name) const;
  Json to_json() const;
};

/// Replays a trace against the property set of the scenario's protocol.
/// The scenario config doubles as the roles file: it names the Byzantine
/// nodes, the resilience parameters and the admissibility predicate.
Verdict check_trace(const Trace& trace, const ScenarioConfig& cfg);

struct RunMetrics {
  uint64_t max_decide_depth = 0;
  uint64_t max_refinements = 0;  // per correct node
  uint64_t total_msgs = 0;       // send events
  uint64_t decisions = 0;        // decided events at correct nodes
};

RunMetrics collect_metrics(const Trace& trace, const ScenarioConfig& cfg);

}  // namespace lagree
