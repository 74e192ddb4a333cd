#include "critbench/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "critbench/error.hpp"

namespace critbench {

std::string AccessTrace::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : serialize_trace(*this)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize_trace(const AccessTrace& trace) {
  std::string out;
  out.reserve(trace.records.size() * 32);
  char buf[64];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%llu,%c,0x%08x,%u,", static_cast<unsigned long long>(r.index),
                  r.kind == AccessKind::Read ? 'R' : 'W', r.address, r.size);
    out += buf;
    out += r.symbol;
    out += '\n';
  }
  return out;
}

AccessTrace parse_trace(const std::string& text) {
  AccessTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 5 || (fields[1] != "R" && fields[1] != "W")) {
      throw Error("trace", "line " + std::to_string(lineno) + ": malformed record");
    }
    try {
      TraceRecord r;
      r.index = std::stoull(fields[0]);
      r.kind = fields[1] == "R" ? AccessKind::Read : AccessKind::Write;
      r.address = static_cast<Address>(std::stoul(fields[2], nullptr, 16));
      r.size = static_cast<std::uint32_t>(std::stoul(fields[3]));
      r.symbol = fields[4];
      trace.records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error("trace", "line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return trace;
}

AccessTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("trace", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace critbench
