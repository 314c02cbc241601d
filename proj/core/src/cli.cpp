#include "lagree/cli.hpp"

#include <fstream>
#include <iostream>

#include "lagree/checker.hpp"
#include "lagree/simnet.hpp"

namespace lagree {

namespace {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Json summary_json(const ScenarioConfig& cfg, const RunResult& result, const Verdict& verdict) {
  RunMetrics m = collect_metrics(result.trace, cfg);
  return Json{{"protocol", cfg.protocol},
              {"n", cfg.n},
              {"f", cfg.f},
              {"seed", cfg.scheduler.seed},
              {"quiescent", result.quiescent},
              {"delivered", result.delivered},
              {"events", result.trace.size()},
              {"max_decide_depth", m.max_decide_depth},
              {"max_refinements", m.max_refinements},
              {"total_msgs", m.total_msgs},
              {"decisions", m.decisions},
              {"verdict", verdict.passed() ? "pass" : "fail"}};
}

}  // namespace

int cmd_run(const RunOptions& opts) {
  ScenarioConfig cfg;
  try {
    cfg = ScenarioConfig::from_json(load_json_file(opts.config_path));
    if (opts.seed) cfg.scheduler.seed = *opts.seed;
    if (auto err = validate_config(cfg)) throw std::runtime_error(*err);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  RunResult result = run_scenario(cfg);
  Verdict verdict = check_trace(result.trace, cfg);
  try {
    write_trace_file(opts.trace_out, result.trace);
    if (!opts.roles_out.empty()) write_text_file(opts.roles_out, cfg.to_json().dump(2) + "\n");
    if (!opts.summary_out.empty()) {
      write_text_file(opts.summary_out, summary_json(cfg, result, verdict).dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 2;
  }
  std::cout << verdict.to_json().dump() << "\n";
  return verdict.passed() ? 0 : 1;
}

int cmd_check(const std::string& trace_path, const std::string& roles_path) {
  Trace trace;
  ScenarioConfig cfg;
  try {
    cfg = ScenarioConfig::from_json(load_json_file(roles_path));
    trace = read_trace_file(trace_path);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
  Verdict verdict;
  try {
    verdict = check_trace(trace, cfg);
  } catch (const TraceFormatError& e) {
    std::cerr << "trace format error: " << e.what() << "\n";
    return 2;
  }
  std::cout << verdict.to_json().dump(2) << "\n";
  return verdict.passed() ? 0 : 1;
}

int cmd_sweep(const SweepOptions& opts) {
  ScenarioConfig base;
  try {
    base = ScenarioConfig::from_json(load_json_file(opts.config_path));
    if (auto err = validate_config(base)) throw std::runtime_error(*err);
    if (opts.seed_end <= opts.seed_begin) throw std::runtime_error("empty seed range");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::string csv = "seed,protocol,n,f,max_depth,max_refinements,total_msgs,verdict\n";
  bool all_pass = true;
  for (uint64_t seed = opts.seed_begin; seed < opts.seed_end; seed++) {
    ScenarioConfig cfg = base;
    cfg.scheduler.seed = seed;
    RunResult result = run_scenario(cfg);
    Verdict verdict = check_trace(result.trace, cfg);
    RunMetrics m = collect_metrics(result.trace, cfg);
    bool ok = verdict.passed();
    if (!ok) {
      all_pass = false;
      std::cerr << "seed " << seed << " failed:";
      for (const auto& p : verdict.properties) {
        if (p.status == "fail") std::cerr << " " << p.name;
      }
      std::cerr << "\n";
    }
    csv += std::to_string(seed) + "," + cfg.protocol + "," + std::to_string(cfg.n) + "," +
           std::to_string(cfg.f) + "," + std::to_string(m.max_decide_depth) + "," +
           std::to_string(m.max_refinements) + "," + std::to_string(m.total_msgs) + "," +
           (ok ? "pass" : "fail") + "\n";
  }
  try {
    if (!opts.csv_out.empty()) {
      write_text_file(opts.csv_out, csv);
    } else {
      std::cout << csv;
    }
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return 2;
  }
  return all_pass ? 0 : 1;
}

std::pair<uint64_t, uint64_t> parse_seed_range(const std::string& text) {
  try {
    auto colon = text.find(':');
    uint64_t begin = 0;
    uint64_t end = 0;
    size_t used = 0;
    if (colon == std::string::npos) {
      end = std::stoull(text, &used);
      if (used != text.size()) throw std::runtime_error("trailing characters");
    } else {
      begin = std::stoull(text.substr(0, colon), &used);
      if (used != colon) throw std::runtime_error("trailing characters");
      std::string rest = text.substr(colon + 1);
      end = std::stoull(rest, &used);
      if (used != rest.size()) throw std::runtime_error("trailing characters");
    }
    if (end <= begin) throw std::runtime_error("empty range");
    return {begin, end};
  } catch (const std::exception&) {
    throw std::runtime_error("bad seed range '" + text + "', want N or A:B");
  }
}

}  // namespace lagree
