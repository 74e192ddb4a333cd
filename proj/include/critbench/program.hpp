#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "critbench/annotations.hpp"
#include "critbench/isa.hpp"

namespace critbench {

using BlockId = std::uint32_t;
using EdgeId = std::uint32_t;
using FuncId = std::uint32_t;
using InstrIndex = std::uint32_t;

inline constexpr std::uint32_t kNone = 0xFFFFFFFFu;

/// Where code and data live. Text always starts at address 0.
struct MemoryLayout {
  Address data_base = 0x4000;
  Address stack_base = 0x6F00;  // lowest stack byte
  Address stack_top = 0x7F00;   // initial r14, exclusive upper bound
  Address output_port = 0x7FFC; // sw to this address appends to program output

  friend bool operator==(const MemoryLayout&, const MemoryLayout&) = default;
};

enum class Region : std::uint8_t { None, Prologue, Epilogue };

struct Instruction {
  Address address = 0;
  Word word = 0;
  Decoded fields;
  InstrKind kind = InstrKind::Other;
  std::string label;          // symbolic operand, empty if numeric
  std::int32_t addend = 0;    // label + addend for data references
  Region region = Region::None;
  FuncId function = 0;

  Opcode op() const { return fields.op; }
  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct DataSymbol {
  std::string name;
  Address base = 0;
  std::uint32_t size = 0;       // bytes, multiple of 4
  std::vector<Word> init;       // size / 4 words

  Address end() const { return base + size; }
  bool contains(Address a) const { return a >= base && a < end(); }
  friend bool operator==(const DataSymbol&, const DataSymbol&) = default;
};

struct CodeLabel {
  std::string name;
  Address address = 0;
  friend bool operator==(const CodeLabel&, const CodeLabel&) = default;
};

/// Loop bound: maximal number of executions of the header block per entry
/// into the loop.
struct FlowFact {
  std::string label;
  std::uint32_t bound = 1;
  BlockId header = kNone;  // resolved by build_cfg
  friend bool operator==(const FlowFact&, const FlowFact&) = default;
};

enum class EdgeKind : std::uint8_t { FallThrough, Taken, Jump, Call, Return };

std::string_view to_string(EdgeKind k);

struct Edge {
  EdgeId id = 0;
  BlockId src = 0;
  BlockId dst = 0;
  EdgeKind kind = EdgeKind::FallThrough;
  /// For Call and Return edges: the block ending with the `jal` of this site.
  BlockId call_block = kNone;
};

struct BasicBlock {
  BlockId id = 0;
  FuncId function = 0;
  InstrIndex first = 0;
  std::uint32_t count = 0;
  std::vector<EdgeId> succs;
  std::vector<EdgeId> preds;

  InstrIndex last() const { return first + count - 1; }
};

struct Function {
  std::string name;
  InstrIndex first = 0;
  std::uint32_t count = 0;
  std::vector<BlockId> blocks;
  BlockId entry_block = kNone;
};

/// Assembled program plus (after build_cfg) its control flow graph.
struct Program {
  MemoryLayout layout;
  std::vector<Instruction> text;
  std::vector<Function> functions;
  std::vector<CodeLabel> code_labels;  // declaration order, includes function names
  std::vector<DataSymbol> data;
  std::vector<FlowFact> flow_facts;

  // Populated by build_cfg.
  std::vector<BasicBlock> blocks;
  std::vector<Edge> edges;
  std::vector<BlockId> block_of;  // per instruction
  bool cfg_built = false;

  AnnotationStore annotations;

  FuncId entry_function() const;
  std::uint32_t text_bytes() const { return static_cast<std::uint32_t>(text.size()) * 4; }
  std::optional<Address> code_label(std::string_view name) const;
  const DataSymbol* find_data(std::string_view name) const;
  /// Data symbol containing `a`, if any.
  const DataSymbol* data_at(Address a) const;
  std::optional<FuncId> find_function(std::string_view name) const;
  Address data_end() const;
  bool is_leader(InstrIndex i) const { return blocks[block_of[i]].first == i; }

  /// Checks the entity exists, then writes the annotation.
  void annotate(EntityId entity, std::string_view key, AnnotationValue value);
  std::optional<AnnotationValue> get_annotation(EntityId entity, std::string_view key) const;

  /// Structural equality (text, functions, labels, data, flow facts, layout).
  bool same_image(const Program& other) const;
};

}  // namespace critbench
