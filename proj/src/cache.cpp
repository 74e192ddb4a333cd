#include "critbench/cache.hpp"

#include <algorithm>

namespace critbench {

bool CacheState::holds(Address address) const {
  const auto& set = sets[config.set_of(address)];
  const std::uint32_t line = config.line_of(address);
  return std::any_of(set.begin(), set.end(), [&](const CacheLine& l) { return l.line == line; });
}

CacheOutcome cache_access(CacheState& state, Address address, AccessKind kind) {
  auto& set = state.sets[state.config.set_of(address)];
  const std::uint32_t line = state.config.line_of(address);
  CacheOutcome out;
  auto it = std::find_if(set.begin(), set.end(), [&](const CacheLine& l) { return l.line == line; });
  CacheLine entry{line, false};
  if (it != set.end()) {
    out.hit = true;
    entry = *it;
    set.erase(it);
  } else if (set.size() == state.config.associativity) {
    out.evicted = true;
    out.evicted_dirty = set.back().dirty;
    out.evicted_line = set.back().line;
    set.pop_back();
  }
  if (kind == AccessKind::Write) entry.dirty = true;
  set.insert(set.begin(), entry);
  return out;
}

}  // namespace critbench
