#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critbench/isa.hpp"

namespace critbench {

enum class AccessKind : std::uint8_t { Read, Write };

struct TraceRecord {
  std::uint64_t index = 0;
  AccessKind kind = AccessKind::Read;
  Address address = 0;
  std::uint32_t size = 4;
  std::string symbol;  // data symbol name, "stack", or "unknown"

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Data-memory accesses in program order.
struct AccessTrace {
  std::vector<TraceRecord> records;

  /// FNV-1a over the serialized text; stamped into placement files.
  std::string digest() const;
  friend bool operator==(const AccessTrace&, const AccessTrace&) = default;
};

/// One record per line: `index,kind,address_hex,size,symbol` (kind R or W,
/// address as 0x%08x). Lines starting with '#' are comments.
std::string serialize_trace(const AccessTrace& trace);
AccessTrace parse_trace(const std::string& text);
AccessTrace load_trace(const std::string& path);

}  // namespace critbench
