#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "critbench/program.hpp"
#include "critbench/trace.hpp"

namespace critbench {

inline constexpr std::uint64_t kNeverUsed = std::numeric_limits<std::uint64_t>::max();

/// One program data symbol as seen through a recorded trace.
struct DataObject {
  std::string name;
  std::uint32_t size = 0;
  std::uint64_t first_use = kNeverUsed;  // index of the first record touching it
  std::uint64_t access_count = 0;

  friend bool operator==(const DataObject&, const DataObject&) = default;
};

struct ObjectTable {
  std::vector<DataObject> objects;  // program declaration order
  std::uint64_t unknown_accesses = 0;
  std::uint64_t stack_accesses = 0;
};

enum class PlacementStrategy : std::uint8_t { None, FirstUsed, SmallSizeFirst, HighFrequency };

std::string to_string(PlacementStrategy s);
/// Accepts "none", "first-used", "small-size-first", "high-frequency".
PlacementStrategy placement_strategy_from_string(const std::string& name);

/// Static set of data symbols mapped to the scratchpad for a whole run.
struct PlacementMap {
  PlacementStrategy strategy = PlacementStrategy::None;
  std::uint32_t spm_size = 0;
  std::string trace_digest;
  std::vector<std::string> symbols;  // placement order

  bool contains(std::string_view symbol) const;
  std::uint32_t occupied_bytes(const Program& program) const;
  /// Address ranges [base, end) covered by placed symbols.
  std::vector<std::pair<Address, Address>> ranges(const Program& program) const;
};

/// One object per data symbol; counts and first use by address-range
/// membership. Records resolving to no symbol and not "stack" are counted as
/// unknown.
ObjectTable build_objects(const Program& program, const AccessTrace& trace);

PlacementMap place_first_used(const ObjectTable& objects, const AccessTrace& trace,
                              std::uint32_t spm_size);
PlacementMap place_small_first(const ObjectTable& objects, std::uint32_t spm_size);
PlacementMap place_high_frequency(const ObjectTable& objects, std::uint32_t spm_size);

PlacementMap make_placement(PlacementStrategy strategy, const ObjectTable& objects,
                            const AccessTrace& trace, std::uint32_t spm_size);

/// Header lines `# strategy NAME`, `# spm_size N`, `# trace DIGEST`, then one
/// symbol per line.
std::string serialize_placement(const PlacementMap& map);
PlacementMap parse_placement(const std::string& text);
PlacementMap load_placement(const std::string& path);

}  // namespace critbench
