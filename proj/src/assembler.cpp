#include "critbench/assembler.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "critbench/cfg.hpp"
#include "critbench/error.hpp"

namespace critbench {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
  throw Error("asm", "line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

std::vector<std::string_view> split_operands(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return negative ? -v : v;
}

std::optional<std::uint8_t> parse_register(std::string_view s) {
  s = trim(s);
  if (s == "sp") return kStackRegister;
  if (s == "lr") return kLinkRegister;
  if (s.size() < 2 || s[0] != 'r') return std::nullopt;
  auto n = parse_int(s.substr(1));
  if (!n || *n < 0 || *n >= kRegisterCount) return std::nullopt;
  return static_cast<std::uint8_t>(*n);
}

/// Immediate operand: integer, label, label+int or label-int.
struct ImmOperand {
  std::string label;
  std::int64_t value = 0;  // integer or addend
};

std::optional<ImmOperand> parse_imm(std::string_view s) {
  s = trim(s);
  if (auto n = parse_int(s)) return ImmOperand{"", *n};
  auto pos = s.find_first_of("+-", 1);
  std::string_view name = pos == std::string_view::npos ? s : trim(s.substr(0, pos));
  if (!is_identifier(name)) return std::nullopt;
  ImmOperand op{std::string(name), 0};
  if (pos != std::string_view::npos) {
    auto addend = parse_int(s.substr(pos));
    if (!addend) return std::nullopt;
    op.value = *addend;
  }
  return op;
}

struct PendingInstr {
  int line = 0;
  std::string mnemonic;
  std::string operands;
  FuncId function = 0;
  Region region = Region::None;
};

struct PendingData {
  int line = 0;
  std::string symbol;
  std::vector<ImmOperand> words;  // .word entries; .space adds zero words
};

class Assembler {
 public:
  explicit Assembler(const AssembleOptions& options) { program_.layout = options.layout; }

  Program run(std::string_view source) {
    first_pass(source);
    layout_data();
    encode_text();
    resolve_flow_facts();
    return std::move(program_);
  }

 private:
  void first_pass(std::string_view source) {
    std::istringstream in{std::string(source)};
    std::string raw;
    int line = 0;
    bool in_text = true;
    std::optional<FuncId> current_func;
    Region region = Region::None;
    std::vector<std::pair<std::string, int>> pending_labels;  // code labels awaiting an instr

    while (std::getline(in, raw)) {
      ++line;
      std::string_view s = raw;
      if (auto c = s.find(';'); c != std::string_view::npos) s = s.substr(0, c);
      s = trim(s);
      // Leading labels.
      while (true) {
        auto colon = s.find(':');
        if (colon == std::string_view::npos) break;
        std::string_view name = trim(s.substr(0, colon));
        if (!is_identifier(name) || name.find(' ') != std::string_view::npos) break;
        define_label(std::string(name), line);
        if (in_text) {
          if (!current_func) fail(line, "code label '" + std::string(name) + "' outside .func");
          pending_labels.emplace_back(name, line);
        } else {
          data_items_.push_back(PendingData{line, std::string(name), {}});
        }
        s = trim(s.substr(colon + 1));
      }
      if (s.empty()) continue;

      auto space = s.find_first_of(" \t");
      std::string_view head = s.substr(0, space);
      std::string_view rest = space == std::string_view::npos ? "" : trim(s.substr(space));

      if (head[0] == '.') {
        if (head == ".text") {
          in_text = true;
        } else if (head == ".data") {
          if (current_func) fail(line, ".data inside .func");
          in_text = false;
        } else if (head == ".func") {
          if (!in_text) fail(line, ".func outside .text");
          if (current_func) fail(line, "nested .func");
          if (!is_identifier(rest)) fail(line, "bad function name");
          define_label(std::string(rest), line);
          current_func = static_cast<FuncId>(program_.functions.size());
          Function f;
          f.name = std::string(rest);
          f.first = static_cast<InstrIndex>(instrs_.size());
          program_.functions.push_back(f);
          pending_labels.emplace_back(std::string(rest), line);
        } else if (head == ".endfunc") {
          if (!current_func) fail(line, ".endfunc without .func");
          if (region != Region::None) fail(line, "unterminated .region");
          if (!pending_labels.empty()) {
            fail(pending_labels.front().second,
                 "label '" + pending_labels.front().first + "' not followed by an instruction");
          }
          auto& f = program_.functions[*current_func];
          f.count = static_cast<std::uint32_t>(instrs_.size()) - f.first;
          current_func.reset();
        } else if (head == ".region") {
          if (!current_func) fail(line, ".region outside .func");
          if (region != Region::None) fail(line, "nested .region");
          if (rest == "prologue") {
            region = Region::Prologue;
          } else if (rest == "epilogue") {
            region = Region::Epilogue;
          } else {
            fail(line, "unknown region kind '" + std::string(rest) + "'");
          }
        } else if (head == ".endregion") {
          if (region == Region::None) fail(line, ".endregion without .region");
          region = Region::None;
        } else if (head == ".word") {
          if (in_text) fail(line, ".word in .text");
          if (data_items_.empty()) fail(line, "data without a label");
          for (auto op : split_operands(rest)) {
            auto imm = parse_imm(op);
            if (!imm) fail(line, "bad .word value '" + std::string(op) + "'");
            if (imm->label.empty() && (imm->value < -2147483648LL || imm->value > 0xFFFFFFFFLL)) {
              fail(line, "word value out of range");
            }
            data_items_.back().words.push_back(*imm);
          }
          data_items_.back().line = line;
        } else if (head == ".space") {
          if (in_text) fail(line, ".space in .text");
          if (data_items_.empty()) fail(line, "data without a label");
          auto n = parse_int(rest);
          if (!n || *n <= 0 || *n % 4 != 0) fail(line, ".space needs a positive multiple of 4");
          data_items_.back().words.resize(data_items_.back().words.size() + *n / 4);
        } else if (head == ".loopbound") {
          std::istringstream words{std::string(rest)};
          std::string name, count, extra;
          words >> name >> count >> extra;
          std::vector<std::string_view> ops;
          if (!name.empty()) ops.push_back(name);
          if (!count.empty()) ops.push_back(count);
          if (!extra.empty()) ops.push_back(extra);
          if (ops.size() != 2 || !is_identifier(ops[0])) fail(line, "usage: .loopbound LABEL N");
          auto n = parse_int(ops[1]);
          if (!n || *n < 1) fail(line, "loop bound must be a positive integer");
          program_.flow_facts.push_back(FlowFact{std::string(ops[0]),
                                                 static_cast<std::uint32_t>(*n), kNone});
          loopbound_lines_.push_back(line);
        } else {
          fail(line, "unknown directive '" + std::string(head) + "'");
        }
        continue;
      }

      if (!in_text) fail(line, "instruction in .data");
      if (!current_func) fail(line, "instruction outside .func");
      for (auto& [name, l] : pending_labels) {
        program_.code_labels.push_back(
            CodeLabel{name, static_cast<Address>(instrs_.size() * kInstructionBytes)});
      }
      pending_labels.clear();
      instrs_.push_back(PendingInstr{line, std::string(head), std::string(rest), *current_func,
                                     region});
    }
    if (current_func) fail(line, "missing .endfunc");
    if (program_.functions.empty()) fail(line, "no functions");
    for (const auto& f : program_.functions) {
      if (f.count == 0) fail(line, "function '" + f.name + "' is empty");
    }
  }

  void define_label(const std::string& name, int line) {
    if (!label_lines_.emplace(name, line).second) fail(line, "duplicate label '" + name + "'");
  }

  void layout_data() {
    Address cursor = program_.layout.data_base;
    for (const auto& item : data_items_) {
      DataSymbol sym;
      sym.name = item.symbol;
      sym.base = cursor;
      sym.size = static_cast<std::uint32_t>(item.words.size() * 4);
      if (sym.size == 0) fail(item.line, "data symbol '" + sym.name + "' has no storage");
      cursor += sym.size;
      program_.data.push_back(sym);
    }
    if (cursor > program_.layout.stack_base) {
      throw Error("asm", "data segment overlaps the stack region");
    }
    // Initial words need all data addresses, so resolve after layout.
    for (std::size_t i = 0; i < data_items_.size(); ++i) {
      auto& sym = program_.data[i];
      for (const auto& w : data_items_[i].words) {
        sym.init.push_back(static_cast<Word>(resolve(w, data_items_[i].line)));
      }
      sym.init.resize(sym.size / 4, 0);
    }
  }

  std::int64_t resolve(const ImmOperand& op, int line) const {
    if (op.label.empty()) return op.value;
    if (auto a = program_.code_label(op.label)) return static_cast<std::int64_t>(*a) + op.value;
    if (const auto* d = program_.find_data(op.label)) return d->base + op.value;
    fail(line, "unresolved label '" + op.label + "'");
  }

  void encode_text() {
    for (std::size_t idx = 0; idx < instrs_.size(); ++idx) {
      const auto& p = instrs_[idx];
      Instruction ins;
      ins.address = static_cast<Address>(idx * kInstructionBytes);
      ins.function = p.function;
      ins.region = p.region;
      auto op = opcode_from_mnemonic(p.mnemonic);
      if (!op) fail(p.line, "unknown mnemonic '" + p.mnemonic + "'");
      Decoded d;
      d.op = *op;
      auto ops = split_operands(p.operands);
      auto expect = [&](std::size_t n) {
        if (ops.size() != n) {
          fail(p.line, p.mnemonic + " takes " + std::to_string(n) + " operand(s)");
        }
      };
      auto reg = [&](std::size_t i) {
        auto r = parse_register(ops[i]);
        if (!r) fail(p.line, "bad register '" + std::string(ops[i]) + "'");
        return *r;
      };
      auto dest = [&](std::size_t i) {
        auto r = reg(i);
        if (r == 0) fail(p.line, "r0 cannot be a destination");
        return r;
      };
      auto imm = [&](std::string_view text) {
        auto v = parse_imm(text);
        if (!v) fail(p.line, "bad immediate '" + std::string(text) + "'");
        ins.label = v->label;
        ins.addend = v->label.empty() ? 0 : static_cast<std::int32_t>(v->value);
        auto value = resolve(*v, p.line);
        if (!fits_signed16(value)) fail(p.line, "immediate out of range");
        return static_cast<std::int32_t>(value);
      };
      auto code_target = [&](std::string_view text) {
        auto v = parse_imm(text);
        if (!v || v->label.empty() || v->value != 0) fail(p.line, "branch target must be a label");
        auto a = program_.code_label(v->label);
        if (!a) {
          if (program_.find_data(v->label)) fail(p.line, "branch to data label '" + v->label + "'");
          fail(p.line, "unresolved label '" + v->label + "'");
        }
        if (*a / 4 > 0xFFFF) fail(p.line, "branch target out of range");
        ins.label = v->label;
        return static_cast<std::int32_t>(*a);
      };
      auto memory = [&](std::string_view text) {
        auto open = text.find('(');
        auto close = text.rfind(')');
        if (open == std::string_view::npos || close != text.size() - 1) {
          fail(p.line, "bad memory operand '" + std::string(text) + "'");
        }
        auto base = parse_register(text.substr(open + 1, close - open - 1));
        if (!base) fail(p.line, "bad base register");
        d.rs1 = *base;
        auto off = trim(text.substr(0, open));
        d.imm = off.empty() ? 0 : imm(off);
      };

      if (is_alu_rtype(d.op)) {
        expect(3);
        d.rd = dest(0);
        d.rs1 = reg(1);
        d.rs2 = reg(2);
      } else if (is_branch(d.op)) {
        expect(3);
        d.rs1 = reg(0);
        d.rs2 = reg(1);
        d.imm = code_target(ops[2]);
      } else {
        switch (d.op) {
          case Opcode::Li: expect(2); d.rd = dest(0); d.imm = imm(ops[1]); break;
          case Opcode::Lw: expect(2); d.rd = dest(0); memory(ops[1]); break;
          case Opcode::Sw: expect(2); d.rs2 = reg(0); memory(ops[1]); break;
          case Opcode::J:
          case Opcode::Jal: expect(1); d.imm = code_target(ops[0]); break;
          case Opcode::Jr: expect(1); d.rs1 = reg(0); break;
          default: expect(0); break;
        }
      }
      ins.fields = d;
      ins.kind = kind_of(d.op);
      ins.word = encode(d);
      program_.text.push_back(std::move(ins));
    }
  }

  void resolve_flow_facts() {
    for (std::size_t i = 0; i < program_.flow_facts.size(); ++i) {
      const auto& f = program_.flow_facts[i];
      if (!program_.code_label(f.label)) {
        fail(loopbound_lines_[i], "loopbound names unknown code label '" + f.label + "'");
      }
    }
  }

  Program program_;
  std::vector<PendingInstr> instrs_;
  std::vector<PendingData> data_items_;
  std::map<std::string, int> label_lines_;
  std::vector<int> loopbound_lines_;
};

std::string hex_word(Word w) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", w);
  return buf;
}

std::string reg(int r) { return "r" + std::to_string(r); }

std::string imm_text(const Instruction& ins, std::int32_t value) {
  if (ins.label.empty()) return std::to_string(value);
  if (ins.addend > 0) return ins.label + "+" + std::to_string(ins.addend);
  if (ins.addend < 0) return ins.label + std::to_string(ins.addend);
  return ins.label;
}

}  // namespace

Program assemble(std::string_view source, const AssembleOptions& options) {
  return Assembler(options).run(source);
}

std::string format_instruction(const Instruction& ins) {
  const auto& d = ins.fields;
  std::string m(mnemonic(d.op));
  if (is_alu_rtype(d.op)) return m + " " + reg(d.rd) + ", " + reg(d.rs1) + ", " + reg(d.rs2);
  if (is_branch(d.op)) return m + " " + reg(d.rs1) + ", " + reg(d.rs2) + ", " + ins.label;
  switch (d.op) {
    case Opcode::Li: return m + " " + reg(d.rd) + ", " + imm_text(ins, d.imm);
    case Opcode::Lw: return m + " " + reg(d.rd) + ", " + imm_text(ins, d.imm) + "(" + reg(d.rs1) + ")";
    case Opcode::Sw: return m + " " + reg(d.rs2) + ", " + imm_text(ins, d.imm) + "(" + reg(d.rs1) + ")";
    case Opcode::J:
    case Opcode::Jal: return m + " " + ins.label;
    case Opcode::Jr: return m + " " + reg(d.rs1);
    default: return m;
  }
}

std::string disassemble(const Program& program) {
  std::ostringstream out;
  out << ".text\n";
  for (const auto& f : program.functions) {
    out << ".func " << f.name << "\n";
    Region open = Region::None;
    for (InstrIndex i = f.first; i < f.first + f.count; ++i) {
      const auto& ins = program.text[i];
      if (ins.region != open) {
        if (open != Region::None) out << "  .endregion\n";
        if (ins.region != Region::None) {
          out << "  .region " << (ins.region == Region::Prologue ? "prologue" : "epilogue") << "\n";
        }
        open = ins.region;
      }
      for (const auto& l : program.code_labels) {
        if (l.address == ins.address && l.name != f.name) out << l.name << ":\n";
      }
      out << "  " << format_instruction(ins) << "\n";
    }
    if (open != Region::None) out << "  .endregion\n";
    out << ".endfunc\n";
  }
  for (const auto& ff : program.flow_facts) out << ".loopbound " << ff.label << " " << ff.bound << "\n";
  if (!program.data.empty()) out << ".data\n";
  for (const auto& d : program.data) {
    out << d.name << ":\n";
    bool all_zero = true;
    for (Word w : d.init) all_zero = all_zero && w == 0;
    if (all_zero) {
      out << "  .space " << d.size << "\n";
      continue;
    }
    for (std::size_t i = 0; i < d.init.size(); i += 8) {
      out << "  .word ";
      for (std::size_t j = i; j < std::min(d.init.size(), i + 8); ++j) {
        out << (j == i ? "" : ", ") << hex_word(d.init[j]);
      }
      out << "\n";
    }
  }
  return out.str();
}

Program load_program(std::string_view source, const AssembleOptions& options) {
  return build_cfg(assemble(source, options));
}

Program load_program_file(const std::string& path, const AssembleOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("asm", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_program(ss.str(), options);
}

}  // namespace critbench
