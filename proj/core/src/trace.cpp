#include "lagree/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lagree {

Json TraceEvent::to_json() const {
  Json j;
  j["seq"] = seq;
  j["depth"] = depth;
  j["node"] = node;
  j["kind"] = kind;
  j["detail"] = detail;
  return j;
}

TraceEvent TraceEvent::from_json(const Json& j) {
  TraceEvent e;
  e.seq = j.at("seq").get<uint64_t>();
  e.depth = j.at("depth").get<uint64_t>();
  e.node = j.at("node").get<NodeId>();
  e.kind = j.at("kind").get<std::string>();
  e.detail = j.at("detail");
  return e;
}

std::string trace_to_jsonl(const Trace& trace) {
  std::ostringstream out;
  for (const TraceEvent& e : trace) out << e.to_json().dump() << "\n";
  return out.str();
}

void write_trace_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  out << trace_to_jsonl(trace);
  if (!out) throw std::runtime_error("trace write failed: " + path);
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace trace;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw std::runtime_error("bad trace line " + std::to_string(lineno) +
                               " in " + path);
    trace.push_back(TraceEvent::from_json(j));
  }
  return trace;
}

}  // namespace lagree
