#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "critbench/error.hpp"
#include "critbench/wcet.hpp"

namespace critbench {

std::optional<std::uint32_t> AbstractCacheState::age_of(std::uint32_t line, std::uint32_t set) const {
  for (const auto& [l, age] : sets[set]) {
    if (l == line) return age;
  }
  return std::nullopt;
}

void must_access(AbstractCacheState& s, const CacheConfig& c, std::uint32_t line) {
  auto& set = s.sets[line % c.sets()];
  const std::uint32_t old = s.age_of(line, line % c.sets()).value_or(c.associativity);
  for (auto& [l, age] : set) {
    if (l != line && age < old) ++age;
  }
  std::erase_if(set, [&](const auto& e) { return e.first == line || e.second >= c.associativity; });
  set.emplace_back(line, 0);
  std::sort(set.begin(), set.end());
}

void must_age_set(AbstractCacheState& s, const CacheConfig& c, std::uint32_t set_index) {
  auto& set = s.sets[set_index];
  for (auto& e : set) ++e.second;
  std::erase_if(set, [&](const auto& e) { return e.second >= c.associativity; });
}

AbstractCacheState must_join(const AbstractCacheState& a, const AbstractCacheState& b) {
  AbstractCacheState out(static_cast<std::uint32_t>(a.sets.size()));
  for (std::size_t s = 0; s < a.sets.size(); ++s) {
    for (const auto& [line, age] : a.sets[s]) {
      for (const auto& [other, age2] : b.sets[s]) {
        if (other == line) out.sets[s].emplace_back(line, std::max(age, age2));
      }
    }
  }
  return out;
}

std::vector<bool> reachable_blocks(const Program& program) {
  std::vector<bool> seen(program.blocks.size(), false);
  const BlockId entry = program.functions[program.entry_function()].entry_block;
  std::vector<BlockId> stack{entry};
  seen[entry] = true;
  while (!stack.empty()) {
    const BlockId b = stack.back();
    stack.pop_back();
    for (EdgeId e : program.blocks[b].succs) {
      const BlockId d = program.edges[e].dst;
      if (!seen[d]) {
        seen[d] = true;
        stack.push_back(d);
      }
    }
  }
  return seen;
}

namespace {

std::vector<BlockId> with_callees(const Program& p, std::vector<BlockId> blocks) {
  std::set<FuncId> callees;
  for (BlockId b : blocks) {
    for (EdgeId e : p.blocks[b].succs) {
      if (p.edges[e].kind != EdgeKind::Call) continue;
      for (FuncId f : transitive_callees(p, p.blocks[p.edges[e].dst].function)) callees.insert(f);
    }
  }
  for (FuncId f : callees) {
    blocks.insert(blocks.end(), p.functions[f].blocks.begin(), p.functions[f].blocks.end());
  }
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  return blocks;
}

}  // namespace

std::vector<Scope> build_scopes(const Program& program, const LoopForest& loops) {
  std::vector<Scope> scopes;
  const auto reachable = reachable_blocks(program);
  Scope whole;
  whole.at_start = true;
  whole.kind = Scope::Kind::Program;
  for (BlockId b = 0; b < program.blocks.size(); ++b) {
    if (reachable[b]) whole.blocks.push_back(b);
  }
  whole.own_blocks = whole.blocks;
  scopes.push_back(std::move(whole));

  const FuncId entry = program.entry_function();
  for (FuncId f = 0; f < program.functions.size(); ++f) {
    if (f == entry) continue;
    const auto& fn = program.functions[f];
    Scope s;
    s.kind = Scope::Kind::Function;
    s.id = f;
    s.own_blocks = fn.blocks;
    s.blocks = with_callees(program, fn.blocks);
    for (const auto& e : program.edges) {
      if (e.kind == EdgeKind::Call && e.dst == fn.entry_block) s.entries.push_back(e.id);
    }
    scopes.push_back(std::move(s));
  }
  for (std::uint32_t l = 0; l < loops.loops.size(); ++l) {
    const auto& loop = loops.loops[l];
    Scope s;
    s.kind = Scope::Kind::Loop;
    s.id = l;
    s.depth = loop.depth;
    s.own_blocks = loop.blocks;
    s.blocks = with_callees(program, loop.blocks);
    s.entries = loop.entry_edges;
    s.at_start = loop.header == program.functions[program.entry_function()].entry_block;
    scopes.push_back(std::move(s));
  }
  return scopes;
}

CacheAnalysis analyze_cache(const Program& program, const CacheConfig& config,
                            const std::vector<std::optional<AbstractAccess>>& accesses,
                            const std::vector<Scope>& scopes) {
  const std::uint32_t sets = config.sets();
  const std::uint32_t assoc = config.associativity;
  CacheAnalysis out;
  out.classes.assign(program.text.size(), AccessClass{});

  auto transfer = [&](AbstractCacheState& state, InstrIndex i, bool classify) {
    const auto& a = accesses[i];
    if (!a) return;
    auto& cls = out.classes[i];
    if (classify) cls.present = true;
    switch (a->kind) {
      case AbstractAccess::Kind::Line: {
        const std::uint32_t line = a->lines.front();
        if (classify) {
          cls.line = line;
          cls.cls = state.age_of(line, line % sets) ? CacheClass::AlwaysHit
                                                    : CacheClass::NotClassified;
        }
        must_access(state, config, line);
        break;
      }
      case AbstractAccess::Kind::Lines: {
        std::set<std::uint32_t> touched;
        for (std::uint32_t l : a->lines) touched.insert(l % sets);
        for (std::uint32_t s : touched) must_age_set(state, config, s);
        break;
      }
      case AbstractAccess::Kind::Unknown:
        for (auto& s : state.sets) s.clear();
        break;
    }
  };

  // Must fixpoint over the supergraph.
  std::vector<std::optional<AbstractCacheState>> in(program.blocks.size());
  const BlockId entry = program.functions[program.entry_function()].entry_block;
  in[entry] = AbstractCacheState(sets);
  std::deque<BlockId> work{entry};
  std::vector<bool> queued(program.blocks.size(), false);
  queued[entry] = true;
  const std::uint64_t cap =
      std::uint64_t{program.blocks.size()} * (assoc + 1) * sets * 4 + program.blocks.size() * 4 + 64;
  while (!work.empty()) {
    if (++out.iterations > cap) throw Error("wcet", "cache analysis did not converge");
    const BlockId b = work.front();
    work.pop_front();
    queued[b] = false;
    AbstractCacheState state = *in[b];
    const auto& blk = program.blocks[b];
    for (InstrIndex i = blk.first; i <= blk.last(); ++i) transfer(state, i, false);
    for (EdgeId e : blk.succs) {
      const BlockId d = program.edges[e].dst;
      AbstractCacheState next = in[d] ? must_join(*in[d], state) : state;
      if (!in[d] || next != *in[d]) {
        in[d] = std::move(next);
        if (!queued[d]) {
          queued[d] = true;
          work.push_back(d);
        }
      }
    }
  }
  for (const auto& blk : program.blocks) {
    if (!in[blk.id]) continue;
    AbstractCacheState state = *in[blk.id];
    for (InstrIndex i = blk.first; i <= blk.last(); ++i) transfer(state, i, true);
  }

  // Persistence by conflict counting: a line whose set sees at most `assoc`
  // distinct lines during one execution of a scope is never evicted there.
  struct Conflicts {
    bool poisoned = false;
    std::map<std::uint32_t, std::set<std::uint32_t>> lines;  // set -> lines
  };
  std::vector<Conflicts> conflicts(scopes.size());
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    for (BlockId b : scopes[s].blocks) {
      const auto& blk = program.blocks[b];
      for (InstrIndex i = blk.first; i <= blk.last(); ++i) {
        const auto& a = accesses[i];
        if (!a) continue;
        if (a->kind == AbstractAccess::Kind::Unknown) conflicts[s].poisoned = true;
        for (std::uint32_t l : a->lines) conflicts[s].lines[l % sets].insert(l);
      }
    }
  }
  auto persistent_in = [&](std::size_t s, std::uint32_t line) {
    const auto& c = conflicts[s];
    if (c.poisoned) return false;
    auto it = c.lines.find(line % sets);
    return it == c.lines.end() || it->second.size() <= assoc;
  };

  // Candidate scopes per block, outermost first.
  std::vector<std::vector<std::size_t>> candidates(program.blocks.size());
  std::vector<std::size_t> order(scopes.size());
  for (std::size_t s = 0; s < scopes.size(); ++s) order[s] = s;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (scopes[x].kind != scopes[y].kind) return scopes[x].kind < scopes[y].kind;
    return scopes[x].depth < scopes[y].depth;
  });
  for (std::size_t s : order) {
    for (BlockId b : scopes[s].own_blocks) candidates[b].push_back(s);
  }

  for (const auto& blk : program.blocks) {
    for (InstrIndex i = blk.first; i <= blk.last(); ++i) {
      auto& cls = out.classes[i];
      if (!cls.present || cls.cls != CacheClass::NotClassified) continue;
      if (accesses[i]->kind != AbstractAccess::Kind::Line) continue;
      for (std::size_t s : candidates[blk.id]) {
        if (persistent_in(s, cls.line)) {
          cls.cls = CacheClass::Persistent;
          cls.scope = static_cast<int>(s);
          break;
        }
      }
    }
  }
  return out;
}

FetchMap fetch_map(const Program& program, const CompressionLayout* layout) {
  const std::size_t n = program.text.size();
  FetchMap m;
  m.address.resize(n);
  m.starts.assign(n, true);
  m.encoded.assign(n, false);
  for (InstrIndex i = 0; i < n; ++i) m.address[i] = program.text[i].address;
  if (!layout) return m;
  if (layout->compressed_address.size() != n) throw Error("wcet", "layout does not match the program");
  m.address = layout->compressed_address;
  for (const auto& g : layout->groups) {
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      m.starts[g.members[k]] = k == 0;
      m.encoded[g.members[k]] = true;
    }
  }
  return m;
}

CacheAnalysis icache_analysis(const Program& program, const CacheConfig& config,
                              const FetchMap& fetch, const std::vector<Scope>& scopes) {
  std::vector<std::optional<AbstractAccess>> accesses(program.text.size());
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    if (fetch.starts[i]) {
      accesses[i] = AbstractAccess{AbstractAccess::Kind::Line, {config.line_of(fetch.address[i])}};
    }
  }
  return analyze_cache(program, config, accesses, scopes);
}

DataAnalysis dcache_analysis(const Program& program, const HardwareConfig& hw,
                             const PlacementMap* placement, const ValueAnalysis& values,
                             const std::vector<Scope>& scopes) {
  DataAnalysis out;
  out.route.assign(program.text.size(), DataRoute::None);
  std::vector<std::optional<AbstractAccess>> accesses(program.text.size());
  auto placed = [&](int region) {
    return placement && hw.spm && region < static_cast<int>(program.data.size()) &&
           placement->contains(program.data[static_cast<std::size_t>(region)].name);
  };
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    const auto& t = values.targets[i];
    switch (t.kind) {
      case DataTarget::Kind::None: break;
      case DataTarget::Kind::Output: out.route[i] = DataRoute::Output; break;
      case DataTarget::Kind::Exact:
      case DataTarget::Kind::Region: {
        if (placed(t.region)) {
          out.route[i] = DataRoute::Spm;
          break;
        }
        if (!hw.dcache) {
          out.route[i] = DataRoute::Dram;
          break;
        }
        out.route[i] = DataRoute::Cache;
        const auto& c = *hw.dcache;
        if (t.kind == DataTarget::Kind::Exact) {
          accesses[i] = AbstractAccess{AbstractAccess::Kind::Line, {c.line_of(t.address)}};
          break;
        }
        const auto [lo, hi] = region_range(program, t.region);
        AbstractAccess a{AbstractAccess::Kind::Lines, {}};
        for (std::uint32_t l = c.line_of(lo); l <= c.line_of(hi - 1); ++l) a.lines.push_back(l);
        if (a.lines.size() == 1) a.kind = AbstractAccess::Kind::Line;
        accesses[i] = std::move(a);
        break;
      }
      case DataTarget::Kind::Unknown:
        out.route[i] = DataRoute::Unknown;
        if (hw.dcache) accesses[i] = AbstractAccess{AbstractAccess::Kind::Unknown, {}};
        break;
    }
  }
  if (hw.dcache) {
    out.cache = analyze_cache(program, *hw.dcache, accesses, scopes);
  } else {
    out.cache.classes.assign(program.text.size(), AccessClass{});
  }
  return out;
}

}  // namespace critbench
