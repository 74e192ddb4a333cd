#include "critbench/simulator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "critbench/cache.hpp"
#include "critbench/error.hpp"

namespace critbench {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("sim", message); }

std::uint16_t bit(int reg) { return static_cast<std::uint16_t>(1u << reg); }

}  // namespace

const AccessCounts& Counters::at(Component c) const {
  switch (c) {
    case Component::ICache: return icache;
    case Component::DCache: return dcache;
    case Component::Spm: return spm;
    case Component::Dram: return dram;
  }
  return dram;
}

AccessCounts& Counters::at(Component c) {
  return const_cast<AccessCounts&>(std::as_const(*this).at(c));
}

nlohmann::json to_json(const Counters& c) {
  nlohmann::json j;
  for (Component comp : kComponents) {
    j[to_string(comp)] = {{"reads", c.at(comp).reads}, {"writes", c.at(comp).writes}};
  }
  auto stats = [](const CacheStats& s) {
    return nlohmann::json{{"hits", s.hits},
                          {"misses", s.misses},
                          {"read_misses_dirty", s.read_misses_dirty},
                          {"write_misses_dirty", s.write_misses_dirty},
                          {"writebacks", s.writebacks}};
  };
  j["icache"].update(stats(c.icache_stats));
  j["dcache"].update(stats(c.dcache_stats));
  j["spm"]["hits"] = c.spm_hits;
  j["spm"]["fails"] = c.spm_fails;
  j["fetched_words"] = c.fetched_words;
  j["fetched_encodings"] = c.fetched_encodings;
  j["executed"] = c.executed;
  j["taken_branches"] = c.taken_branches;
  return j;
}

Counters counters_from_json(const nlohmann::json& j) {
  Counters c;
  try {
    for (Component comp : kComponents) {
      const auto& s = j.at(to_string(comp));
      c.at(comp).reads = s.at("reads").get<std::uint64_t>();
      c.at(comp).writes = s.at("writes").get<std::uint64_t>();
    }
    auto stats = [](const nlohmann::json& s, CacheStats& out) {
      out.hits = s.value("hits", std::uint64_t{0});
      out.misses = s.value("misses", std::uint64_t{0});
      out.read_misses_dirty = s.value("read_misses_dirty", std::uint64_t{0});
      out.write_misses_dirty = s.value("write_misses_dirty", std::uint64_t{0});
      out.writebacks = s.value("writebacks", std::uint64_t{0});
    };
    stats(j.at("icache"), c.icache_stats);
    stats(j.at("dcache"), c.dcache_stats);
    c.spm_hits = j.at("spm").value("hits", std::uint64_t{0});
    c.spm_fails = j.at("spm").value("fails", std::uint64_t{0});
    c.fetched_words = j.value("fetched_words", std::uint64_t{0});
    c.fetched_encodings = j.value("fetched_encodings", std::uint64_t{0});
    c.executed = j.value("executed", std::uint64_t{0});
    c.taken_branches = j.value("taken_branches", std::uint64_t{0});
  } catch (const nlohmann::json::exception& ex) {
    throw Error("energy", std::string("malformed counters: ") + ex.what());
  }
  return c;
}

InputData parse_input(const std::string& text) {
  InputData in;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream f(line);
    std::string symbol, tok;
    if (!(f >> symbol)) continue;
    std::vector<Word> words;
    while (f >> tok) {
      try {
        std::size_t used = 0;
        const long long v = std::stoll(tok, &used, 0);
        if (used != tok.size() || v < -2147483648LL || v > 0xFFFFFFFFLL) throw std::out_of_range(tok);
        words.push_back(static_cast<Word>(v));
      } catch (const std::logic_error&) {
        fail("input line " + std::to_string(lineno) + ": bad value '" + tok + "'");
      }
    }
    in.values.emplace_back(symbol, std::move(words));
  }
  return in;
}

InputData load_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_input(ss.str());
}

bool SimResult::same_state(const SimResult& other) const {
  return registers == other.registers && data_image == other.data_image &&
         stack_image == other.stack_image && output == other.output;
}

namespace {

class Machine {
 public:
  Machine(const Program& p, const HardwareConfig& hw, const SimOptions& opt)
      : p_(p), hw_(hw), opt_(opt), icache_(hw.icache) {
    if (!p.cfg_built) fail("program has no CFG");
    if (hw.dcache) dcache_.emplace(*hw.dcache);
    if (opt.compression) {
      if (!hw.pipeline.decompression_stage) {
        fail("compression layout given but the pipeline has no decompression stage");
      }
      validate_layout(p, *opt.compression);
    }
    if (opt.placement) {
      if (!hw.spm) fail("placement given but the hardware has no SPM");
      if (opt.placement->occupied_bytes(p) > hw.spm->size) fail("placement exceeds SPM size");
      spm_ranges_ = opt.placement->ranges(p);
    }
    prepare_fetch();

    const auto& L = p.layout;
    data_.assign((p.data_end() - L.data_base) / 4, 0);
    for (const auto& d : p.data) {
      std::copy(d.init.begin(), d.init.end(), data_.begin() + (d.base - L.data_base) / 4);
    }
    stack_.assign((L.stack_top - L.stack_base) / 4, 0);
    if (opt.input) {
      for (const auto& [symbol, words] : opt.input->values) {
        const auto* d = p.find_data(symbol);
        if (!d) fail("input names unknown symbol '" + symbol + "'");
        if (words.size() * 4 > d->size) fail("input for '" + symbol + "' exceeds its size");
        std::copy(words.begin(), words.end(), data_.begin() + (d->base - L.data_base) / 4);
      }
    }
    res_.registers.fill(0);
    res_.registers[kStackRegister] = L.stack_top;
    res_.instr_exec.assign(p.text.size(), 0);
    res_.fetch_misses.assign(p.text.size(), 0);
    res_.data_misses.assign(p.text.size(), 0);
    res_.block_exec.assign(p.blocks.size(), 0);
    res_.edge_exec.assign(p.edges.size(), 0);
    if (opt.record_trace) res_.trace.emplace();
  }

  SimResult run() {
    InstrIndex pc = p_.functions[p_.entry_function()].first;
    BlockId block = kNone;
    BlockVisit visit;
    auto& regs = res_.registers;
    while (true) {
      if (pc >= p_.text.size()) fail("pc left the text segment");
      const bool block_start = p_.is_leader(pc);
      if (last_taken_ && !block_start) fail("control transfer into the middle of a block");
      if (block_start) {
        const BlockId next = p_.block_of[pc];
        if (block != kNone) {
          finish_visit(visit);
          res_.edge_exec[edge_between(block, next, last_taken_)]++;
        }
        block = next;
        res_.block_exec[block]++;
        visit = BlockVisit{block, 0, {}, {}};
      }
      const Decoded& d = decoded_[pc];
      res_.instr_exec[pc]++;
      res_.counters.executed++;

      // Timing: stalls, then issue-group membership.
      std::uint64_t stall = 0;
      if (fetch_start_[pc]) {
        const bool hit = fetch(fetch_address_[pc]);
        stall += hw_.icache.hit_latency - 1;
        if (!hit) {
          stall += hw_.icache.miss_penalty;
          res_.fetch_misses[pc]++;
          visit.fetch_missed.push_back(pc);
        }
        if (in_group_[pc]) {
          res_.counters.fetched_encodings++;
          stall += hw_.pipeline.dictionary_latency;
        }
      }
      const std::uint16_t reads = reads_mask(d);
      if (prev_load_ >= 0 && (reads & bit(prev_load_))) stall += hw_.pipeline.load_use_penalty;
      if (prev_mul_ >= 0 && (reads & bit(prev_mul_))) stall += hw_.pipeline.mul_latency - 1;

      const bool mem = d.op == Opcode::Lw || d.op == Opcode::Sw;
      Word loaded = 0;
      if (mem) {
        const Address addr = regs[d.rs1] + static_cast<Word>(d.imm);
        if (d.op == Opcode::Lw) {
          stall += data_access(pc, addr, AccessKind::Read, &loaded, visit);
        } else {
          Word value = regs[d.rs2];
          stall += data_access(pc, addr, AccessKind::Write, &value, visit);
        }
      }

      const bool new_group = block_start || slots_ == hw_.pipeline.issue_width || stall > 0 ||
                             (reads & group_writes_) || (mem && group_mem_);
      if (new_group) {
        slots_ = 1;
        group_writes_ = writes_mask(d);
        group_mem_ = mem;
      } else {
        slots_++;
        group_writes_ |= writes_mask(d);
        group_mem_ = group_mem_ || mem;
      }
      std::uint64_t cost = stall + (new_group ? 1 : 0);

      // Semantics.
      InstrIndex next = pc + 1;
      bool taken = false;
      const Word a = regs[d.rs1];
      const Word b = regs[d.rs2];
      auto target = [&] { return static_cast<InstrIndex>(d.imm / kInstructionBytes); };
      switch (d.op) {
        case Opcode::Nop: break;
        case Opcode::Add: set(d.rd, a + b); break;
        case Opcode::Sub: set(d.rd, a - b); break;
        case Opcode::Mul: set(d.rd, a * b); break;
        case Opcode::And: set(d.rd, a & b); break;
        case Opcode::Or: set(d.rd, a | b); break;
        case Opcode::Xor: set(d.rd, a ^ b); break;
        case Opcode::Sll: set(d.rd, a << (b & 31)); break;
        case Opcode::Srl: set(d.rd, a >> (b & 31)); break;
        case Opcode::Li: set(d.rd, static_cast<Word>(d.imm)); break;
        case Opcode::Lw: set(d.rd, loaded); break;
        case Opcode::Sw: break;
        case Opcode::Beq: taken = a == b; break;
        case Opcode::Bne: taken = a != b; break;
        case Opcode::Blt: taken = static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b); break;
        case Opcode::Bge: taken = static_cast<std::int32_t>(a) >= static_cast<std::int32_t>(b); break;
        case Opcode::J: taken = true; break;
        case Opcode::Jal:
          taken = true;
          set(kLinkRegister, p_.text[pc].address + kInstructionBytes);
          break;
        case Opcode::Jr: {
          const Word t = a;
          if (t % kInstructionBytes != 0 || t / kInstructionBytes >= p_.text.size()) {
            fail("jr to invalid address");
          }
          taken = true;
          next = t / kInstructionBytes;
          break;
        }
        case Opcode::Halt: break;
      }
      if (taken) {
        if (d.op != Opcode::Jr) next = target();
        cost += hw_.pipeline.branch_redirect_penalty;
        res_.counters.taken_branches++;
      }
      last_taken_ = taken;
      prev_load_ = d.op == Opcode::Lw && d.rd != 0 ? d.rd : -1;
      prev_mul_ = d.op == Opcode::Mul && d.rd != 0 ? d.rd : -1;

      res_.cycles += cost;
      visit.cycles += cost;
      if (res_.cycles > opt_.cycle_limit) fail("cycle limit exceeded");
      if (d.op == Opcode::Halt) {
        finish_visit(visit);
        break;
      }
      pc = next;
    }
    res_.data_image = data_;
    res_.stack_image = stack_;
    return std::move(res_);
  }

 private:
  void prepare_fetch() {
    const std::size_t n = p_.text.size();
    decoded_.resize(n);
    fetch_address_.resize(n);
    fetch_start_.assign(n, true);
    in_group_.assign(n, false);
    for (InstrIndex i = 0; i < n; ++i) {
      fetch_address_[i] = p_.text[i].address;
      decoded_[i] = decode(p_.text[i].word);
    }
    if (!opt_.compression) return;
    const auto& layout = *opt_.compression;
    for (const auto& g : layout.groups) {
      const auto words = decode_group(encode_group(g), layout.dictionary);
      for (std::size_t k = 0; k < g.members.size(); ++k) {
        const InstrIndex m = g.members[k];
        if (words[k] != p_.text[m].word) fail("group expansion differs from the original text");
        decoded_[m] = decode(words[k]);
        fetch_start_[m] = k == 0;
        in_group_[m] = true;
      }
    }
    for (InstrIndex i = 0; i < n; ++i) fetch_address_[i] = layout.compressed_address[i];
  }

  void set(int reg, Word v) {
    if (reg != 0) res_.registers[reg] = v;
  }

  std::uint32_t dram_words(const CacheConfig& c) const { return c.line_size / hw_.dram.bus_width; }

  bool fetch(Address addr) {
    auto& c = res_.counters;
    c.fetched_words++;
    c.icache.reads++;
    const auto out = cache_access(icache_, addr, AccessKind::Read);
    if (out.hit) {
      c.icache_stats.hits++;
      return true;
    }
    c.icache_stats.misses++;
    c.dram.reads += dram_words(hw_.icache);
    return false;
  }

  bool in_spm(Address addr) const {
    for (const auto& [lo, hi] : spm_ranges_) {
      if (addr >= lo && addr < hi) return true;
    }
    return false;
  }

  // Performs the access and returns the stall cycles beyond a one-cycle issue.
  std::uint64_t data_access(InstrIndex pc, Address addr, AccessKind kind, Word* value,
                            BlockVisit& visit) {
    const auto& L = p_.layout;
    if (addr % 4 != 0) fail("unaligned access at pc " + std::to_string(pc * 4));
    if (addr == L.output_port) {
      if (kind == AccessKind::Read) fail("read from the output port");
      res_.output.push_back(*value);
      return 0;
    }
    Word* slot = nullptr;
    std::string symbol;
    if (addr >= L.data_base && addr < p_.data_end()) {
      slot = &data_[(addr - L.data_base) / 4];
      const auto* d = p_.data_at(addr);
      symbol = d ? d->name : "unknown";
    } else if (addr >= L.stack_base && addr < L.stack_top) {
      slot = &stack_[(addr - L.stack_base) / 4];
      symbol = "stack";
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "access outside data and stack: 0x%08x", addr);
      fail(buf);
    }
    if (kind == AccessKind::Read) {
      *value = *slot;
    } else {
      *slot = *value;
    }
    if (res_.trace) {
      res_.trace->records.push_back({trace_index_, kind, addr, 4, symbol});
    }
    trace_index_++;

    auto& c = res_.counters;
    auto count = [&](AccessCounts& a) { (kind == AccessKind::Read ? a.reads : a.writes)++; };
    if (hw_.spm) {
      if (in_spm(addr)) {
        c.spm_hits++;
        count(c.spm);
        return hw_.spm->latency - 1;
      }
      c.spm_fails++;
    }
    if (!dcache_) {
      count(c.dram);
      return (kind == AccessKind::Read ? hw_.dram.read_latency : hw_.dram.write_latency) - 1;
    }
    count(c.dcache);
    const auto out = cache_access(*dcache_, addr, kind);
    const auto& cfg = *hw_.dcache;
    if (out.hit) {
      c.dcache_stats.hits++;
      return cfg.hit_latency - 1;
    }
    c.dcache_stats.misses++;
    c.dram.reads += dram_words(cfg);
    if (out.evicted_dirty) {
      (kind == AccessKind::Read ? c.dcache_stats.read_misses_dirty
                                : c.dcache_stats.write_misses_dirty)++;
      c.dcache_stats.writebacks++;
      c.dram.writes += dram_words(cfg);
    }
    res_.data_misses[pc]++;
    visit.data_missed.push_back(pc);
    return cfg.hit_latency - 1 + cfg.miss_penalty;
  }

  EdgeId edge_between(BlockId from, BlockId to, bool taken) const {
    for (EdgeId e : p_.blocks[from].succs) {
      const auto& edge = p_.edges[e];
      if (edge.dst == to && (edge.kind == EdgeKind::FallThrough) != taken) return e;
    }
    fail("control transfer along no CFG edge");
  }

  void finish_visit(BlockVisit& visit) {
    if (opt_.on_block) opt_.on_block(visit);
  }

  const Program& p_;
  const HardwareConfig& hw_;
  const SimOptions& opt_;
  CacheState icache_;
  std::optional<CacheState> dcache_;
  std::vector<std::pair<Address, Address>> spm_ranges_;
  std::vector<Decoded> decoded_;
  std::vector<Address> fetch_address_;
  std::vector<bool> fetch_start_;
  std::vector<bool> in_group_;
  std::vector<Word> data_;
  std::vector<Word> stack_;
  SimResult res_;

  std::uint32_t slots_ = 0;
  std::uint16_t group_writes_ = 0;
  bool group_mem_ = false;
  int prev_load_ = -1;
  int prev_mul_ = -1;
  bool last_taken_ = false;
  std::uint64_t trace_index_ = 0;
};

}  // namespace

SimResult simulate(const Program& program, const HardwareConfig& hw, const SimOptions& options) {
  return Machine(program, hw, options).run();
}

nlohmann::json to_json(const SimResult& r) {
  nlohmann::json j;
  j["cycles"] = r.cycles;
  j["counters"] = to_json(r.counters);
  j["registers"] = r.registers;
  j["output"] = r.output;
  std::uint64_t h = 1469598103934665603ULL;
  for (Word w : r.data_image) {
    h ^= w;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  j["data_digest"] = buf;
  return j;
}

}  // namespace critbench
