#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "critbench/program.hpp"

namespace critbench {

inline constexpr std::uint32_t kDictionaryCapacity = 256;

/// Word -> count histograms over the text.
struct InstructionHistograms {
  std::map<Word, std::uint64_t> static_counts;   // occurrences in the text
  std::map<Word, std::uint64_t> dynamic_counts;  // executions summed over occurrences
};

enum class FillSource : std::uint8_t { Dynamic, Static };

struct DictionaryEntry {
  Word word = 0;
  std::uint64_t static_count = 0;
  std::uint64_t dynamic_count = 0;
  FillSource source = FillSource::Static;

  friend bool operator==(const DictionaryEntry&, const DictionaryEntry&) = default;
};

struct Dictionary {
  std::vector<DictionaryEntry> entries;
  std::uint32_t capacity = kDictionaryCapacity;
  std::uint32_t percent_dynamic = 0;  // P

  std::optional<std::uint8_t> index_of(Word w) const;
  std::uint32_t bytes() const { return static_cast<std::uint32_t>(entries.size()) * 4; }
};

enum class EscapeKind : std::uint8_t { Esc2, Esc3 };

struct EncodingGroup {
  BlockId block = 0;
  std::vector<InstrIndex> members;      // 2 or 3 consecutive instructions
  std::vector<std::uint8_t> indices;    // dictionary index per member
  EscapeKind kind = EscapeKind::Esc2;

  friend bool operator==(const EncodingGroup&, const EncodingGroup&) = default;
};

/// Emulated compressed image: nothing is re-emitted, every instruction just
/// carries the address it would have in the compressed text.
struct CompressionLayout {
  Dictionary dictionary;
  std::vector<EncodingGroup> groups;
  std::vector<Address> compressed_address;  // per instruction
  std::vector<std::uint32_t> group_of;      // per instruction, kNone if ungrouped
  std::uint32_t original_bytes = 0;
  std::uint32_t compressed_bytes = 0;

  std::uint32_t dictionary_bytes() const { return dictionary.bytes(); }
  bool empty() const { return groups.empty(); }
};

struct CompressionReport {
  std::uint32_t original_bytes = 0;
  std::uint32_t compressed_bytes = 0;
  std::uint32_t dictionary_bytes = 0;
  std::uint32_t group_count = 0;
  double ratio = 1.0;                  // compressed / original
  double ratio_with_dictionary = 1.0;  // (compressed + dictionary) / original
};

/// Control transfers and halt are never compressed.
bool is_compressible(Opcode op);

InstructionHistograms profile_counts(const Program& program,
                                     std::span<const std::uint64_t> executions);

/// P% of `capacity` (rounded half up) filled with the most executed eligible
/// words, the rest with the most statically repeated words (static count >= 2)
/// not already chosen. Ties: higher other-count, then lower word value.
Dictionary build_dictionary(const InstructionHistograms& hist, std::uint32_t percent_dynamic,
                            std::uint32_t capacity = kDictionaryCapacity);

/// Greedy left-to-right per block: ESC3 when three consecutive dictionary
/// words qualify, else ESC2, else skip one.
CompressionLayout select_groups(const Program& program, const Dictionary& dictionary);

/// An empty layout (identity addresses, no groups, empty dictionary).
CompressionLayout identity_layout(const Program& program);

Word encode_group(const EncodingGroup& group);
/// Member words of an encoding word. Throws Error("dictzip", ...) for a word
/// that is not an escape or indexes past the dictionary.
std::vector<Word> decode_group(Word encoding, const Dictionary& dictionary);

CompressionReport compression_report(const CompressionLayout& layout);

/// Writes "compressed_addr" (address) and "compressed" (flag) annotations.
void annotate_compression(Program& program, const CompressionLayout& layout);

/// Checks the layout invariants against the program; throws on violation.
void validate_layout(const Program& program, const CompressionLayout& layout);

std::string serialize_layout(const CompressionLayout& layout);
CompressionLayout parse_layout(const std::string& text);
CompressionLayout load_layout(const std::string& path);

}  // namespace critbench
