#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critbench/compression.hpp"
#include "critbench/hw_config.hpp"
#include "critbench/placement.hpp"
#include "critbench/program.hpp"
#include "critbench/trace.hpp"
#include "json.hpp"

namespace critbench {

struct AccessCounts {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  friend bool operator==(const AccessCounts&, const AccessCounts&) = default;
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t read_misses_dirty = 0;
  std::uint64_t write_misses_dirty = 0;
  std::uint64_t writebacks = 0;
  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

struct Counters {
  AccessCounts icache, dcache, spm, dram;
  CacheStats icache_stats, dcache_stats;
  std::uint64_t spm_hits = 0;
  std::uint64_t spm_fails = 0;  // checked against the placement map, routed to cache/DRAM
  std::uint64_t fetched_words = 0;
  std::uint64_t fetched_encodings = 0;
  std::uint64_t executed = 0;
  std::uint64_t taken_branches = 0;  // taken conditional branches and jumps

  const AccessCounts& at(Component c) const;
  AccessCounts& at(Component c);
  friend bool operator==(const Counters&, const Counters&) = default;
};

nlohmann::json to_json(const Counters& c);
Counters counters_from_json(const nlohmann::json& j);

/// Values poked into data symbols before execution. File form: one
/// `SYMBOL v1 v2 ...` line per symbol, '#' comments, values decimal or 0x hex.
struct InputData {
  std::vector<std::pair<std::string, std::vector<Word>>> values;
};

InputData parse_input(const std::string& text);
InputData load_input(const std::string& path);

/// Timing of one completed visit of a basic block.
struct BlockVisit {
  BlockId block = 0;
  std::uint64_t cycles = 0;
  std::vector<InstrIndex> fetch_missed;  // instruction whose fetch word missed
  std::vector<InstrIndex> data_missed;   // load/store whose D-cache access missed
};

struct SimOptions {
  const PlacementMap* placement = nullptr;
  const CompressionLayout* compression = nullptr;
  const InputData* input = nullptr;
  bool record_trace = false;
  std::uint64_t cycle_limit = 200'000'000;
  std::function<void(const BlockVisit&)> on_block;
};

struct SimResult {
  std::uint64_t cycles = 0;
  Counters counters;
  std::array<Word, kRegisterCount> registers{};
  std::vector<Word> data_image;   // data segment words
  std::vector<Word> stack_image;  // stack region words
  std::vector<Word> output;       // words stored to the output port
  std::optional<AccessTrace> trace;

  std::vector<std::uint64_t> instr_exec;    // per instruction
  std::vector<std::uint64_t> block_exec;    // per block
  std::vector<std::uint64_t> edge_exec;     // per edge
  std::vector<std::uint64_t> fetch_misses;  // per instruction (group misses go to the first member)
  std::vector<std::uint64_t> data_misses;   // per instruction

  /// Registers, memory image and output all equal.
  bool same_state(const SimResult& other) const;
};

/// Runs the program from the entry function until `halt`. Throws
/// Error("sim", ...) on cycle-limit overrun, unaligned or out-of-range
/// accesses, reserved opcodes, or a compression layout without the
/// decompression stage.
SimResult simulate(const Program& program, const HardwareConfig& hw, const SimOptions& options = {});

nlohmann::json to_json(const SimResult& r);

}  // namespace critbench
