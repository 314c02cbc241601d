#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lagree {

/// Entry points behind the `lagree` binary's subcommands. Each returns a
/// process exit code: 0 all properties pass, 1 a checked property failed,
/// 2 unusable input (bad config, malformed trace, unreadable file).
struct RunOptions {
  std::string config_path;
  std::string trace_out;
  std::string roles_out;    // resolved scenario config, for later checking
  std::string summary_out;  // metrics and verdict digest
  std::optional<uint64_t> seed;
};

int cmd_run(const RunOptions& opts);

int cmd_check(const std::string& trace_path, const std::string& roles_path);

struct SweepOptions {
  std::string config_path;
  uint64_t seed_begin = 0;
  uint64_t seed_end = 1;  // exclusive
  std::string csv_out;
};

int cmd_sweep(const SweepOptions& opts);

/// Parses "N" as [0,N) and "A:B" as [A,B). Throws std::runtime_error on
/// malformed input or an empty range.
std::pair<uint64_t, uint64_t> parse_seed_range(const std::string& text);

}  // namespace lagree
