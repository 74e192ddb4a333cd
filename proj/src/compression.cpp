#include "critbench/compression.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "critbench/error.hpp"

namespace critbench {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("dictzip", message); }

bool word_compressible(Word w) {
  const auto byte = static_cast<std::uint8_t>(w >> 24);
  if (is_reserved_opcode(byte)) return false;
  return is_compressible(decode(w).op);
}

}  // namespace

bool is_compressible(Opcode op) { return !is_control(op); }

std::optional<std::uint8_t> Dictionary::index_of(Word w) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].word == w) return static_cast<std::uint8_t>(i);
  }
  return std::nullopt;
}

InstructionHistograms profile_counts(const Program& program,
                                     std::span<const std::uint64_t> executions) {
  InstructionHistograms h;
  for (std::size_t i = 0; i < program.text.size(); ++i) {
    const Word w = program.text[i].word;
    h.static_counts[w]++;
    const std::uint64_t n = i < executions.size() ? executions[i] : 0;
    if (n > 0) h.dynamic_counts[w] += n;
  }
  return h;
}

Dictionary build_dictionary(const InstructionHistograms& hist, std::uint32_t percent_dynamic,
                            std::uint32_t capacity) {
  if (percent_dynamic > 100) fail("P must be within 0..100");
  if (capacity > kDictionaryCapacity) fail("dictionary capacity exceeds 256 entries");
  auto count_in = [](const std::map<Word, std::uint64_t>& m, Word w) -> std::uint64_t {
    auto it = m.find(w);
    return it == m.end() ? 0 : it->second;
  };

  Dictionary dict;
  dict.capacity = capacity;
  dict.percent_dynamic = percent_dynamic;
  const std::uint32_t dynamic_slots = (percent_dynamic * capacity + 50) / 100;

  std::vector<DictionaryEntry> dynamic;
  for (const auto& [w, n] : hist.dynamic_counts) {
    if (n > 0 && word_compressible(w)) {
      dynamic.push_back({w, count_in(hist.static_counts, w), n, FillSource::Dynamic});
    }
  }
  std::sort(dynamic.begin(), dynamic.end(), [](const auto& a, const auto& b) {
    if (a.dynamic_count != b.dynamic_count) return a.dynamic_count > b.dynamic_count;
    if (a.static_count != b.static_count) return a.static_count > b.static_count;
    return a.word < b.word;
  });
  if (dynamic.size() > dynamic_slots) dynamic.resize(dynamic_slots);
  dict.entries = dynamic;

  std::vector<DictionaryEntry> repeated;
  for (const auto& [w, n] : hist.static_counts) {
    if (n < 2 || !word_compressible(w) || dict.index_of(w)) continue;
    repeated.push_back({w, n, count_in(hist.dynamic_counts, w), FillSource::Static});
  }
  std::sort(repeated.begin(), repeated.end(), [](const auto& a, const auto& b) {
    if (a.static_count != b.static_count) return a.static_count > b.static_count;
    if (a.dynamic_count != b.dynamic_count) return a.dynamic_count > b.dynamic_count;
    return a.word < b.word;
  });
  const std::size_t static_slots = capacity - dynamic_slots;
  if (repeated.size() > static_slots) repeated.resize(static_slots);
  dict.entries.insert(dict.entries.end(), repeated.begin(), repeated.end());
  return dict;
}

namespace {

void assign_addresses(const Program& program, CompressionLayout& layout) {
  layout.compressed_address.assign(program.text.size(), 0);
  Address cursor = 0;
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    const std::uint32_t g = layout.group_of[i];
    if (g != kNone && layout.groups[g].members.front() != i) {
      layout.compressed_address[i] = layout.compressed_address[layout.groups[g].members.front()];
      continue;
    }
    layout.compressed_address[i] = cursor;
    cursor += kInstructionBytes;
  }
  layout.original_bytes = program.text_bytes();
  layout.compressed_bytes = cursor;
}

}  // namespace

CompressionLayout identity_layout(const Program& program) {
  CompressionLayout layout;
  layout.group_of.assign(program.text.size(), kNone);
  assign_addresses(program, layout);
  return layout;
}

CompressionLayout select_groups(const Program& program, const Dictionary& dictionary) {
  if (!program.cfg_built) fail("select_groups needs a CFG");
  CompressionLayout layout;
  layout.dictionary = dictionary;
  layout.group_of.assign(program.text.size(), kNone);
  auto qualifies = [&](InstrIndex i) {
    return is_compressible(program.text[i].op()) && dictionary.index_of(program.text[i].word);
  };
  for (const auto& b : program.blocks) {
    InstrIndex i = b.first;
    const InstrIndex end = b.first + b.count;
    while (i < end) {
      std::uint32_t run = 0;
      while (run < 3 && i + run < end && qualifies(i + run)) ++run;
      if (run < 2) {
        ++i;
        continue;
      }
      EncodingGroup g;
      g.block = b.id;
      g.kind = run == 3 ? EscapeKind::Esc3 : EscapeKind::Esc2;
      for (std::uint32_t k = 0; k < run; ++k) {
        g.members.push_back(i + k);
        g.indices.push_back(*dictionary.index_of(program.text[i + k].word));
        layout.group_of[i + k] = static_cast<std::uint32_t>(layout.groups.size());
      }
      layout.groups.push_back(std::move(g));
      i += run;
    }
  }
  assign_addresses(program, layout);
  return layout;
}

Word encode_group(const EncodingGroup& group) {
  const std::size_t n = group.members.size();
  if ((n != 2 && n != 3) || group.indices.size() != n) fail("a group has 2 or 3 members");
  if ((group.kind == EscapeKind::Esc3) != (n == 3)) fail("escape kind does not match group size");
  const Word op = n == 3 ? kEsc3Opcode : kEsc2Opcode;
  Word w = (op << 24) | (Word{group.indices[0]} << 16) | (Word{group.indices[1]} << 8);
  if (n == 3) w |= group.indices[2];
  return w;
}

std::vector<Word> decode_group(Word encoding, const Dictionary& dictionary) {
  const auto op = static_cast<std::uint8_t>(encoding >> 24);
  if (op != kEsc2Opcode && op != kEsc3Opcode) fail("not an encoding instruction");
  std::vector<std::uint8_t> idx{static_cast<std::uint8_t>(encoding >> 16),
                                static_cast<std::uint8_t>(encoding >> 8)};
  if (op == kEsc3Opcode) {
    idx.push_back(static_cast<std::uint8_t>(encoding));
  } else if ((encoding & 0xFFu) != 0) {
    fail("ESC2 encoding with a non-zero third byte");
  }
  std::vector<Word> words;
  for (auto i : idx) {
    if (i >= dictionary.entries.size()) fail("dictionary index out of range");
    words.push_back(dictionary.entries[i].word);
  }
  return words;
}

CompressionReport compression_report(const CompressionLayout& layout) {
  CompressionReport r;
  r.original_bytes = layout.original_bytes;
  r.compressed_bytes = layout.compressed_bytes;
  r.dictionary_bytes = layout.dictionary_bytes();
  r.group_count = static_cast<std::uint32_t>(layout.groups.size());
  if (r.original_bytes > 0) {
    r.ratio = static_cast<double>(r.compressed_bytes) / r.original_bytes;
    r.ratio_with_dictionary =
        static_cast<double>(r.compressed_bytes + r.dictionary_bytes) / r.original_bytes;
  }
  return r;
}

void annotate_compression(Program& program, const CompressionLayout& layout) {
  for (InstrIndex i = 0; i < program.text.size(); ++i) {
    program.annotate(instr_entity(i), "compressed_addr", AddressValue{layout.compressed_address[i]});
    program.annotate(instr_entity(i), "compressed", layout.group_of[i] != kNone);
  }
}

void validate_layout(const Program& program, const CompressionLayout& layout) {
  const std::size_t n = program.text.size();
  if (layout.compressed_address.size() != n || layout.group_of.size() != n) {
    fail("layout does not match the program size");
  }
  std::vector<std::uint32_t> owner(n, kNone);
  for (std::uint32_t g = 0; g < layout.groups.size(); ++g) {
    const auto& grp = layout.groups[g];
    encode_group(grp);  // shape check
    for (std::size_t k = 0; k < grp.members.size(); ++k) {
      const InstrIndex i = grp.members[k];
      if (i >= n) fail("group member out of range");
      if (k > 0 && i != grp.members[k - 1] + 1) fail("group members are not consecutive");
      if (program.block_of[i] != grp.block) fail("group crosses a basic block boundary");
      if (!is_compressible(program.text[i].op())) fail("control transfer inside a group");
      if (grp.indices[k] >= layout.dictionary.entries.size() ||
          layout.dictionary.entries[grp.indices[k]].word != program.text[i].word) {
        fail("group member word is not the dictionary entry it names");
      }
      if (owner[i] != kNone) fail("groups overlap");
      owner[i] = g;
    }
  }
  if (owner != layout.group_of) fail("group_of does not match the groups");
  CompressionLayout check;
  check.groups = layout.groups;
  check.group_of = layout.group_of;
  assign_addresses(program, check);
  if (check.compressed_address != layout.compressed_address ||
      check.compressed_bytes != layout.compressed_bytes) {
    fail("compressed addresses are inconsistent with the groups");
  }
}

std::string serialize_layout(const CompressionLayout& layout) {
  std::ostringstream out;
  char buf[96];
  out << "# compression layout\n";
  out << "P " << layout.dictionary.percent_dynamic << "\n";
  out << "capacity " << layout.dictionary.capacity << "\n";
  out << "original_bytes " << layout.original_bytes << "\n";
  out << "compressed_bytes " << layout.compressed_bytes << "\n";
  for (std::size_t i = 0; i < layout.dictionary.entries.size(); ++i) {
    const auto& e = layout.dictionary.entries[i];
    std::snprintf(buf, sizeof buf, "dict %zu 0x%08x %llu %llu %s\n", i, e.word,
                  static_cast<unsigned long long>(e.static_count),
                  static_cast<unsigned long long>(e.dynamic_count),
                  e.source == FillSource::Dynamic ? "dynamic" : "static");
    out << buf;
  }
  for (const auto& g : layout.groups) {
    out << "group " << g.block << " " << (g.kind == EscapeKind::Esc3 ? "ESC3" : "ESC2");
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      out << " " << g.members[k] << ":" << static_cast<unsigned>(g.indices[k]);
    }
    out << "\n";
  }
  for (std::size_t i = 0; i < layout.compressed_address.size(); ++i) {
    std::snprintf(buf, sizeof buf, "addr %zu 0x%08x\n", i, layout.compressed_address[i]);
    out << buf;
  }
  return out.str();
}

CompressionLayout parse_layout(const std::string& text) {
  CompressionLayout layout;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream f(line);
      std::string key;
      f >> key;
      if (key == "P") {
        f >> layout.dictionary.percent_dynamic;
      } else if (key == "capacity") {
        f >> layout.dictionary.capacity;
      } else if (key == "original_bytes") {
        f >> layout.original_bytes;
      } else if (key == "compressed_bytes") {
        f >> layout.compressed_bytes;
      } else if (key == "dict") {
        std::size_t idx = 0;
        std::string word, source;
        DictionaryEntry e;
        f >> idx >> word >> e.static_count >> e.dynamic_count >> source;
        if (idx != layout.dictionary.entries.size()) fail("dictionary entries out of order");
        e.word = static_cast<Word>(std::stoul(word, nullptr, 16));
        e.source = source == "dynamic" ? FillSource::Dynamic : FillSource::Static;
        layout.dictionary.entries.push_back(e);
      } else if (key == "group") {
        EncodingGroup g;
        std::string kind, member;
        f >> g.block >> kind;
        g.kind = kind == "ESC3" ? EscapeKind::Esc3 : EscapeKind::Esc2;
        while (f >> member) {
          auto colon = member.find(':');
          g.members.push_back(static_cast<InstrIndex>(std::stoul(member.substr(0, colon))));
          g.indices.push_back(static_cast<std::uint8_t>(std::stoul(member.substr(colon + 1))));
        }
        layout.groups.push_back(std::move(g));
      } else if (key == "addr") {
        std::size_t idx = 0;
        std::string addr;
        f >> idx >> addr;
        if (idx != layout.compressed_address.size()) fail("addresses out of order");
        layout.compressed_address.push_back(static_cast<Address>(std::stoul(addr, nullptr, 16)));
      } else {
        fail("unknown record '" + key + "'");
      }
      if (f.fail() && !f.eof()) fail("malformed record");
    }
  } catch (const std::logic_error&) {
    fail("line " + std::to_string(lineno) + ": malformed number");
  }
  layout.group_of.assign(layout.compressed_address.size(), kNone);
  for (std::uint32_t g = 0; g < layout.groups.size(); ++g) {
    for (InstrIndex i : layout.groups[g].members) {
      if (i >= layout.group_of.size()) fail("group member out of range");
      layout.group_of[i] = g;
    }
  }
  return layout;
}

CompressionLayout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str());
}

}  // namespace critbench
