#pragma once

#include <cstdint>
#include <vector>

#include "critbench/hw_config.hpp"
#include "critbench/trace.hpp"

namespace critbench {

struct CacheLine {
  std::uint32_t line = 0;  // address / line_size
  bool dirty = false;
  friend bool operator==(const CacheLine&, const CacheLine&) = default;
};

/// Concrete LRU state; each set is ordered most recently used first.
struct CacheState {
  CacheConfig config;
  std::vector<std::vector<CacheLine>> sets;

  explicit CacheState(const CacheConfig& cfg) : config(cfg), sets(cfg.sets()) {}
  bool holds(Address address) const;
};

struct CacheOutcome {
  bool hit = false;
  bool evicted = false;
  bool evicted_dirty = false;
  std::uint32_t evicted_line = 0;
};

/// Write-back, write-allocate LRU access. Misses fill at MRU and evict the LRU
/// line of a full set; writes mark the line dirty.
CacheOutcome cache_access(CacheState& state, Address address, AccessKind kind);

}  // namespace critbench
