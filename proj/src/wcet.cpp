#include <algorithm>
#include <map>
#include <tuple>

#include "critbench/error.hpp"
#include "critbench/wcet.hpp"

namespace critbench {

namespace {

std::uint16_t bit(int r) { return static_cast<std::uint16_t>(1u << r); }

CacheClass class_at(const CacheAnalysis& a, InstrIndex i) {
  if (i >= a.classes.size() || !a.classes[i].present) return CacheClass::NotClassified;
  return a.classes[i].cls;
}

// Worst stall of the data access of instruction i, persistent lines as hits.
std::uint64_t data_stall(const HardwareConfig& hw, const DataAnalysis& data, InstrIndex i,
                         bool write) {
  const std::uint64_t dram = (write ? hw.dram.write_latency : hw.dram.read_latency) - 1;
  switch (data.route[i]) {
    case DataRoute::None:
    case DataRoute::Output: return 0;
    case DataRoute::Spm: return hw.spm->latency - 1;
    case DataRoute::Dram: return dram;
    case DataRoute::Cache: {
      const auto& c = *hw.dcache;
      const auto cls = class_at(data.cache, i);
      return c.hit_latency - 1 + (cls == CacheClass::NotClassified ? c.miss_penalty : 0);
    }
    case DataRoute::Unknown: {
      std::uint64_t worst = hw.dcache ? hw.dcache->hit_latency - 1 + hw.dcache->miss_penalty : dram;
      if (hw.spm) worst = std::max<std::uint64_t>(worst, hw.spm->latency - 1);
      return worst;
    }
  }
  return 0;
}

}  // namespace

std::uint64_t persistent_miss_cost(const CacheConfig& c) { return std::uint64_t{c.miss_penalty} + 1; }

std::uint64_t block_time(const Program& program, BlockId block, const HardwareConfig& hw,
                         const FetchMap& fetch, const CacheAnalysis& icache,
                         const DataAnalysis& data) {
  const auto& blk = program.blocks[block];
  const auto& pl = hw.pipeline;

  // Hazards carried in from whichever predecessor ends with a load or mul.
  std::uint64_t carried = 0;
  {
    const auto reads = reads_mask(program.text[blk.first].fields);
    for (EdgeId e : blk.preds) {
      const auto& last = program.text[program.blocks[program.edges[e].src].last()].fields;
      if (last.rd == 0) continue;
      if (last.op == Opcode::Lw && (reads & bit(last.rd))) {
        carried = std::max<std::uint64_t>(carried, pl.load_use_penalty);
      }
      if (last.op == Opcode::Mul && (reads & bit(last.rd))) {
        carried = std::max<std::uint64_t>(carried, pl.mul_latency - 1);
      }
    }
  }

  std::uint64_t total = 0;
  std::uint32_t slots = 0;
  std::uint16_t group_writes = 0;
  bool group_mem = false;
  int prev_load = -1, prev_mul = -1;
  for (InstrIndex i = blk.first; i <= blk.last(); ++i) {
    const auto& d = program.text[i].fields;
    std::uint64_t stall = 0;
    if (fetch.starts[i]) {
      stall += hw.icache.hit_latency - 1;
      if (class_at(icache, i) == CacheClass::NotClassified) stall += hw.icache.miss_penalty;
      if (fetch.encoded[i]) stall += pl.dictionary_latency;
    }
    const auto reads = reads_mask(d);
    if (i == blk.first) {
      stall += carried;
    } else {
      if (prev_load >= 0 && (reads & bit(prev_load))) stall += pl.load_use_penalty;
      if (prev_mul >= 0 && (reads & bit(prev_mul))) stall += pl.mul_latency - 1;
    }
    const bool mem = d.op == Opcode::Lw || d.op == Opcode::Sw;
    if (mem) stall += data_stall(hw, data, i, d.op == Opcode::Sw);

    const bool new_group = i == blk.first || slots == pl.issue_width || stall > 0 ||
                           (reads & group_writes) || (mem && group_mem);
    if (new_group) {
      slots = 1;
      group_writes = writes_mask(d);
      group_mem = mem;
    } else {
      slots++;
      group_writes |= writes_mask(d);
      group_mem = group_mem || mem;
    }
    total += stall + (new_group ? 1 : 0);
    if (is_control(d.op) && d.op != Opcode::Halt) total += pl.branch_redirect_penalty;
    prev_load = d.op == Opcode::Lw && d.rd != 0 ? d.rd : -1;
    prev_mul = d.op == Opcode::Mul && d.rd != 0 ? d.rd : -1;
  }
  return total;
}

IpetModel build_ipet(const Program& program, const std::vector<std::uint64_t>& block_times,
                     const std::vector<PersistentLine>& persistent,
                     const std::vector<Scope>& scopes, const LoopForest& loops) {
  IpetModel m;
  m.reachable = reachable_blocks(program);
  m.edge_var.assign(program.edges.size(), -1);
  m.in_vars.assign(program.blocks.size(), {});
  auto& ilp = m.ilp;
  auto cost = [&](BlockId b) { return static_cast<std::int64_t>(block_times[b]); };

  const BlockId entry = program.functions[program.entry_function()].entry_block;
  m.source_var = ilp.add_var("source", cost(entry));
  ilp.add_constraint({{m.source_var, 1}}, Sense::Equal, 1, "source");
  m.in_vars[entry].push_back(m.source_var);

  for (const auto& e : program.edges) {
    if (!m.reachable[e.src]) continue;
    const auto v = ilp.add_var("e" + std::to_string(e.id), cost(e.dst));
    m.edge_var[e.id] = v;
    m.in_vars[e.dst].push_back(v);
  }
  for (const auto& blk : program.blocks) {
    if (!m.reachable[blk.id]) continue;
    std::vector<LinearTerm> terms;
    for (auto v : m.in_vars[blk.id]) terms.push_back({v, 1});
    for (EdgeId e : blk.succs) terms.push_back({static_cast<std::uint32_t>(m.edge_var[e]), -1});
    if (program.text[blk.last()].op() == Opcode::Halt) {
      const auto sink = ilp.add_var("sink_b" + std::to_string(blk.id));
      m.sink_vars.push_back(sink);
      terms.push_back({sink, -1});
    }
    ilp.add_constraint(std::move(terms), Sense::Equal, 0, "flow_b" + std::to_string(blk.id));
  }

  // Every call site returns exactly as often as it calls.
  for (const auto& e : program.edges) {
    if (e.kind != EdgeKind::Call || !m.reachable[e.src]) continue;
    std::vector<LinearTerm> terms{{static_cast<std::uint32_t>(m.edge_var[e.id]), 1}};
    for (const auto& r : program.edges) {
      if (r.kind == EdgeKind::Return && r.call_block == e.src && m.edge_var[r.id] >= 0) {
        terms.push_back({static_cast<std::uint32_t>(m.edge_var[r.id]), -1});
      }
    }
    ilp.add_constraint(std::move(terms), Sense::Equal, 0, "call_e" + std::to_string(e.id));
  }

  for (const auto& loop : loops.loops) {
    if (!m.reachable[loop.header]) continue;
    const FlowFact* fact = nullptr;
    for (const auto& f : program.flow_facts) {
      if (f.header == loop.header) fact = &f;
    }
    if (!fact) {
      throw Error("wcet", "loop at 0x" +
                              [&] {
                                char buf[16];
                                std::snprintf(buf, sizeof buf, "%x",
                                              program.text[program.blocks[loop.header].first].address);
                                return std::string(buf);
                              }() +
                              " has no loop bound");
    }
    std::vector<LinearTerm> terms;
    for (EdgeId e : loop.back_edges) terms.push_back({static_cast<std::uint32_t>(m.edge_var[e]), 1});
    const std::int64_t k = static_cast<std::int64_t>(fact->bound) - 1;
    for (EdgeId e : loop.entry_edges) {
      if (m.edge_var[e] >= 0) terms.push_back({static_cast<std::uint32_t>(m.edge_var[e]), -k});
    }
    if (loop.header == entry) terms.push_back({m.source_var, -k});
    ilp.add_constraint(std::move(terms), Sense::LessEq, 0, "loop_" + fact->label);
  }

  for (std::size_t p = 0; p < persistent.size(); ++p) {
    const auto& line = persistent[p];
    const auto v = ilp.add_var("m" + std::to_string(p), static_cast<std::int64_t>(line.cost));
    m.m_vars.push_back(v);
    const auto& scope = scopes[static_cast<std::size_t>(line.scope)];
    std::vector<LinearTerm> entries{{v, 1}};
    for (EdgeId e : scope.entries) {
      if (m.edge_var[e] >= 0) entries.push_back({static_cast<std::uint32_t>(m.edge_var[e]), -1});
    }
    ilp.add_constraint(std::move(entries), Sense::LessEq,
                       scope.at_start ? 1 : 0, "m_entries" + std::to_string(p));
    std::vector<LinearTerm> execs{{v, 1}};
    for (BlockId b : line.blocks) {
      for (auto x : m.in_vars[b]) execs.push_back({x, -1});
    }
    ilp.add_constraint(std::move(execs), Sense::LessEq, 0, "m_execs" + std::to_string(p));
  }
  return m;
}

WcetReport compute_wcet(const Program& program, const HardwareConfig& hw,
                        const WcetOptions& options) {
  if (!program.cfg_built) throw Error("wcet", "program has no CFG");
  if (has_recursion(program)) throw Error("wcet", "recursive programs are not supported");
  if (options.compression) {
    if (!hw.pipeline.decompression_stage) {
      throw Error("wcet", "compressed image needs a decompression stage");
    }
    validate_layout(program, *options.compression);
  }
  if (options.placement && !hw.spm) throw Error("wcet", "placement given but no scratchpad");

  WcetReport r;
  r.configuration = hw.name;
  const auto loops = find_loops(program);
  r.scopes = build_scopes(program, loops);
  const auto values = analyze_values(program);
  const auto fetch = fetch_map(program, options.compression);
  r.icache = icache_analysis(program, hw.icache, fetch, r.scopes);
  r.data = dcache_analysis(program, hw, options.placement, values, r.scopes);

  const auto reachable = reachable_blocks(program);
  r.block_times.assign(program.blocks.size(), 0);
  for (const auto& blk : program.blocks) {
    if (reachable[blk.id]) {
      r.block_times[blk.id] = block_time(program, blk.id, hw, fetch, r.icache, r.data);
    }
  }

  // One miss variable per (cache, line, scope).
  std::map<std::tuple<bool, std::uint32_t, int>, std::size_t> index;
  auto add_persistent = [&](bool icache, const AccessClass& c, BlockId b, const CacheConfig& cfg) {
    const auto key = std::make_tuple(icache, c.line, c.scope);
    auto [it, fresh] = index.emplace(key, r.persistent.size());
    if (fresh) r.persistent.push_back({icache, c.line, c.scope, persistent_miss_cost(cfg), {}});
    auto& blocks = r.persistent[it->second].blocks;
    if (std::find(blocks.begin(), blocks.end(), b) == blocks.end()) blocks.push_back(b);
  };
  auto tally = [](ClassStats& s, CacheClass c) {
    switch (c) {
      case CacheClass::AlwaysHit: s.always_hit++; break;
      case CacheClass::Persistent: s.persistent++; break;
      case CacheClass::NotClassified: s.not_classified++; break;
    }
  };
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    const BlockId b = program.block_of[i];
    if (!reachable[b]) continue;
    const auto& ic = r.icache.classes[i];
    if (ic.present) {
      tally(r.icache_stats, ic.cls);
      if (ic.cls == CacheClass::Persistent) add_persistent(true, ic, b, hw.icache);
    }
    if (r.data.route[i] == DataRoute::Spm) r.spm_accesses++;
    if (r.data.route[i] == DataRoute::Cache) {
      const auto& dc = r.data.cache.classes[i];
      const auto cls = dc.present ? dc.cls : CacheClass::NotClassified;
      tally(r.dcache_stats, cls);
      if (dc.present && cls == CacheClass::Persistent) add_persistent(false, dc, b, *hw.dcache);
    }
  }

  auto ipet = build_ipet(program, r.block_times, r.persistent, r.scopes, loops);
  r.ilp_variables = ipet.ilp.size();
  r.ilp_constraints = ipet.ilp.constraints.size();
  const auto sol = solve_ilp(ipet.ilp);
  if (sol.status == IlpStatus::Unbounded) throw Error("wcet", "IPET problem is unbounded");
  if (sol.status == IlpStatus::Infeasible) throw Error("wcet", "IPET problem is infeasible");
  r.ilp_nodes = sol.nodes;
  r.wcet = static_cast<std::uint64_t>(sol.objective);
  r.block_counts.assign(program.blocks.size(), 0);
  for (BlockId b = 0; b < program.blocks.size(); ++b) {
    for (auto v : ipet.in_vars[b]) r.block_counts[b] += sol.values[v];
  }
  return r;
}

void annotate_classes(Program& program, const WcetReport& report) {
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    if (i < report.icache.classes.size() && report.icache.classes[i].present) {
      program.annotate(instr_entity(i), "icache_class", report.icache.classes[i].cls);
    }
    if (i < report.data.route.size() && report.data.route[i] == DataRoute::Cache) {
      const auto& c = report.data.cache.classes[i];
      program.annotate(instr_entity(i), "dcache_class",
                       c.present ? c.cls : CacheClass::NotClassified);
    }
  }
}

nlohmann::json to_json(const WcetReport& r) {
  auto stats = [](const ClassStats& s) {
    return nlohmann::json{{"always_hit", s.always_hit},
                          {"persistent", s.persistent},
                          {"not_classified", s.not_classified}};
  };
  return {
      {"wcet_cycles", r.wcet},
      {"configuration", r.configuration},
      {"block_counts", r.block_counts},
      {"block_times", r.block_times},
      {"icache", stats(r.icache_stats)},
      {"dcache", stats(r.dcache_stats)},
      {"spm_accesses", r.spm_accesses},
      {"persistent_lines", r.persistent.size()},
      {"scopes", r.scopes.size()},
      {"ilp", {{"variables", r.ilp_variables},
               {"constraints", r.ilp_constraints},
               {"nodes", r.ilp_nodes}}},
  };
}

}  // namespace critbench
