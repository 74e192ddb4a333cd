#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "critbench/assembler.hpp"
#include "critbench/hw_config.hpp"
#include "critbench/placement.hpp"
#include "critbench/simulator.hpp"

#ifndef CRITBENCH_SOURCE_DIR
#define CRITBENCH_SOURCE_DIR "."
#endif

namespace testing_support {

using namespace critbench;

inline std::string source_path(const std::string& rel) {
  return std::string(CRITBENCH_SOURCE_DIR) + "/" + rel;
}

inline std::string bench_path(const std::string& name) {
  return source_path("benchmarks/" + name + "/" + name + ".masm");
}

inline Program bench(const std::string& name) { return load_program_file(bench_path(name)); }

inline InputData bench_input(const std::string& name, int k) {
  return load_input(source_path("benchmarks/" + name + "/in" + std::to_string(k) + ".txt"));
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const std::vector<std::string>& suite() {
  static const std::vector<std::string> names = {"adpcm_like", "compress_like", "helico_like",
                                                 "skewed", "segmentation_like"};
  return names;
}

/// Timestamp LRU with no notion of sets ordering: the victim is the line with
/// the oldest last use among those mapping to the same set.
class NaiveLru {
 public:
  explicit NaiveLru(const CacheConfig& c) : c_(c) {}

  struct Result {
    bool hit = false;
    bool dirty_victim = false;
  };

  Result access(Address a, bool write) {
    ++clock_;
    const std::uint32_t line = a / c_.line_size;
    const std::uint32_t set = line % c_.sets();
    auto it = lines_.find(line);
    if (it != lines_.end()) {
      it->second.stamp = clock_;
      it->second.dirty = it->second.dirty || write;
      return {true, false};
    }
    std::vector<std::uint32_t> same;
    for (const auto& [l, e] : lines_) {
      if (l % c_.sets() == set) same.push_back(l);
    }
    Result r;
    if (same.size() == c_.associativity) {
      const auto victim = *std::min_element(same.begin(), same.end(), [&](auto x, auto y) {
        return lines_.at(x).stamp < lines_.at(y).stamp;
      });
      r.dirty_victim = lines_.at(victim).dirty;
      lines_.erase(victim);
    }
    lines_[line] = {clock_, write};
    return r;
  }

 private:
  struct Entry {
    std::uint64_t stamp = 0;
    bool dirty = false;
  };
  CacheConfig c_;
  std::map<std::uint32_t, Entry> lines_;
  std::uint64_t clock_ = 0;
};

struct ReferenceRun {
  std::vector<Word> registers = std::vector<Word>(kRegisterCount, 0);
  std::vector<Word> output;
  std::map<Address, Word> memory;
  AccessCounts icache, dcache, spm, dram;
  std::uint64_t executed = 0;
};

/// Plain fetch-execute interpreter that only counts memory-side accesses.
inline ReferenceRun reference_run(const Program& p, const HardwareConfig& hw, const InputData* input,
                                  const PlacementMap* placement = nullptr) {
  ReferenceRun r;
  for (const auto& d : p.data) {
    for (std::size_t i = 0; i < d.init.size(); ++i) r.memory[d.base + 4 * i] = d.init[i];
  }
  if (input) {
    for (const auto& [name, words] : input->values) {
      const auto* d = p.find_data(name);
      for (std::size_t i = 0; i < words.size() && 4 * i < d->size; ++i) r.memory[d->base + 4 * i] = words[i];
    }
  }
  r.registers[kStackRegister] = p.layout.stack_top;
  NaiveLru ic(hw.icache);
  std::optional<NaiveLru> dc;
  if (hw.dcache) dc.emplace(*hw.dcache);
  std::vector<std::pair<Address, Address>> spm_ranges;
  if (placement && hw.spm) spm_ranges = placement->ranges(p);
  const auto words = [&](const CacheConfig& c) { return c.line_size / hw.dram.bus_width; };

  auto data = [&](Address a, bool write) {
    if (hw.spm) {
      for (auto [lo, hi] : spm_ranges) {
        if (a >= lo && a < hi) {
          (write ? r.spm.writes : r.spm.reads)++;
          return;
        }
      }
    }
    if (!dc) {
      (write ? r.dram.writes : r.dram.reads)++;
      return;
    }
    (write ? r.dcache.writes : r.dcache.reads)++;
    const auto res = dc->access(a, write);
    if (!res.hit) {
      r.dram.reads += words(*hw.dcache);
      if (res.dirty_victim) r.dram.writes += words(*hw.dcache);
    }
  };

  std::uint32_t pc = p.functions[p.entry_function()].first;
  auto& R = r.registers;
  for (;;) {
    const auto& in = p.text.at(pc);
    ++r.executed;
    r.icache.reads++;
    if (!ic.access(in.address, false).hit) r.dram.reads += words(hw.icache);
    const auto& d = in.fields;
    const Word a = R[d.rs1], b = R[d.rs2];
    auto set = [&](Word v) {
      if (d.rd != 0) R[d.rd] = v;
    };
    std::uint32_t next = pc + 1;
    switch (d.op) {
      case Opcode::Add: set(a + b); break;
      case Opcode::Sub: set(a - b); break;
      case Opcode::Mul: set(a * b); break;
      case Opcode::And: set(a & b); break;
      case Opcode::Or: set(a | b); break;
      case Opcode::Xor: set(a ^ b); break;
      case Opcode::Sll: set(a << (b & 31)); break;
      case Opcode::Srl: set(a >> (b & 31)); break;
      case Opcode::Li: set(static_cast<Word>(d.imm)); break;
      case Opcode::Lw: {
        const Address ea = a + static_cast<Word>(d.imm);
        data(ea, false);
        set(r.memory[ea]);
        break;
      }
      case Opcode::Sw: {
        const Address ea = a + static_cast<Word>(d.imm);
        if (ea == p.layout.output_port) {
          r.output.push_back(b);
        } else {
          data(ea, true);
          r.memory[ea] = b;
        }
        break;
      }
      case Opcode::Beq: if (a == b) next = d.imm / 4; break;
      case Opcode::Bne: if (a != b) next = d.imm / 4; break;
      case Opcode::Blt:
        if (static_cast<std::int32_t>(a) < static_cast<std::int32_t>(b)) next = d.imm / 4;
        break;
      case Opcode::Bge:
        if (static_cast<std::int32_t>(a) >= static_cast<std::int32_t>(b)) next = d.imm / 4;
        break;
      case Opcode::J: next = d.imm / 4; break;
      case Opcode::Jal:
        R[kLinkRegister] = in.address + 4;
        next = d.imm / 4;
        break;
      case Opcode::Jr: next = a / 4; break;
      case Opcode::Halt: return r;
      default: break;
    }
    pc = next;
  }
}

}  // namespace testing_support
