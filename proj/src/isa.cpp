#include "critbench/isa.hpp"

#include <array>
#include <utility>

#include "critbench/error.hpp"

namespace critbench {

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 20> kMnemonics{{
    {Opcode::Nop, "nop"}, {Opcode::Add, "add"}, {Opcode::Sub, "sub"}, {Opcode::Mul, "mul"},
    {Opcode::And, "and"}, {Opcode::Or, "or"},   {Opcode::Xor, "xor"}, {Opcode::Sll, "sll"},
    {Opcode::Srl, "srl"}, {Opcode::Li, "li"},   {Opcode::Lw, "lw"},   {Opcode::Sw, "sw"},
    {Opcode::Beq, "beq"}, {Opcode::Bne, "bne"}, {Opcode::Blt, "blt"}, {Opcode::Bge, "bge"},
    {Opcode::J, "j"},     {Opcode::Jal, "jal"}, {Opcode::Jr, "jr"},   {Opcode::Halt, "halt"},
}};

std::int32_t sign_extend16(Word w) { return static_cast<std::int16_t>(w & 0xFFFFu); }

}  // namespace

std::string_view mnemonic(Opcode op) {
  for (const auto& [code, name] : kMnemonics) {
    if (code == op) return name;
  }
  return "?";
}

std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
  for (const auto& [code, text] : kMnemonics) {
    if (text == name) return code;
  }
  return std::nullopt;
}

bool is_alu_rtype(Opcode op) {
  return op >= Opcode::Add && op <= Opcode::Srl;
}

bool is_branch(Opcode op) {
  return op == Opcode::Beq || op == Opcode::Bne || op == Opcode::Blt || op == Opcode::Bge;
}

bool is_control(Opcode op) {
  return is_branch(op) || op == Opcode::J || op == Opcode::Jal || op == Opcode::Jr ||
         op == Opcode::Halt;
}

bool is_reserved_opcode(std::uint8_t byte) { return byte >= kReservedOpcodeFirst; }

InstrKind kind_of(Opcode op) {
  if (is_alu_rtype(op) || op == Opcode::Li) return InstrKind::Compute;
  switch (op) {
    case Opcode::Lw: return InstrKind::Load;
    case Opcode::Sw: return InstrKind::Store;
    case Opcode::Jal: return InstrKind::Call;
    case Opcode::Jr: return InstrKind::Return;
    case Opcode::J: return InstrKind::Jump;
    default: break;
  }
  if (is_branch(op)) return InstrKind::Branch;
  return InstrKind::Other;
}

Word encode(const Decoded& d) {
  const Word op = static_cast<Word>(d.op) << 24;
  const Word imm16 = static_cast<Word>(d.imm) & 0xFFFFu;
  switch (d.op) {
    case Opcode::Nop:
    case Opcode::Halt: return op;
    case Opcode::Li: return op | (Word{d.rd} << 20) | imm16;
    case Opcode::Lw: return op | (Word{d.rd} << 20) | (Word{d.rs1} << 16) | imm16;
    case Opcode::Sw: return op | (Word{d.rs2} << 20) | (Word{d.rs1} << 16) | imm16;
    case Opcode::J:
    case Opcode::Jal: return op | ((static_cast<Word>(d.imm) / 4) & 0xFFFFu);
    case Opcode::Jr: return op | (Word{d.rs1} << 16);
    default: break;
  }
  if (is_branch(d.op)) {
    return op | (Word{d.rs1} << 20) | (Word{d.rs2} << 16) |
           ((static_cast<Word>(d.imm) / 4) & 0xFFFFu);
  }
  return op | (Word{d.rd} << 20) | (Word{d.rs1} << 16) | (Word{d.rs2} << 12);
}

Decoded decode(Word word) {
  const auto byte = static_cast<std::uint8_t>(word >> 24);
  if (is_reserved_opcode(byte)) {
    throw Error("decode", "reserved opcode " + std::to_string(byte));
  }
  const auto op = static_cast<Opcode>(byte);
  if (mnemonic(op) == "?") throw Error("decode", "undefined opcode " + std::to_string(byte));
  const auto ra = static_cast<std::uint8_t>((word >> 20) & 0xF);
  const auto rb = static_cast<std::uint8_t>((word >> 16) & 0xF);
  const auto rc = static_cast<std::uint8_t>((word >> 12) & 0xF);
  Decoded d;
  d.op = op;
  switch (op) {
    case Opcode::Nop:
    case Opcode::Halt: break;
    case Opcode::Li: d.rd = ra; d.imm = sign_extend16(word); break;
    case Opcode::Lw: d.rd = ra; d.rs1 = rb; d.imm = sign_extend16(word); break;
    case Opcode::Sw: d.rs2 = ra; d.rs1 = rb; d.imm = sign_extend16(word); break;
    case Opcode::J:
    case Opcode::Jal: d.imm = static_cast<std::int32_t>((word & 0xFFFFu) * 4); break;
    case Opcode::Jr: d.rs1 = rb; break;
    default:
      if (is_branch(op)) {
        d.rs1 = ra;
        d.rs2 = rb;
        d.imm = static_cast<std::int32_t>((word & 0xFFFFu) * 4);
      } else {
        d.rd = ra;
        d.rs1 = rb;
        d.rs2 = rc;
      }
  }
  return d;
}

std::uint16_t reads_mask(const Decoded& d) {
  auto bit = [](int r) { return static_cast<std::uint16_t>(r == 0 ? 0 : 1u << r); };
  if (is_alu_rtype(d.op) || is_branch(d.op)) return bit(d.rs1) | bit(d.rs2);
  switch (d.op) {
    case Opcode::Lw:
    case Opcode::Jr: return bit(d.rs1);
    case Opcode::Sw: return bit(d.rs1) | bit(d.rs2);
    default: return 0;
  }
}

std::uint16_t writes_mask(const Decoded& d) {
  auto bit = [](int r) { return static_cast<std::uint16_t>(r == 0 ? 0 : 1u << r); };
  if (is_alu_rtype(d.op) || d.op == Opcode::Li || d.op == Opcode::Lw) return bit(d.rd);
  if (d.op == Opcode::Jal) return bit(kLinkRegister);
  return 0;
}

bool fits_signed16(std::int64_t v) { return v >= -32768 && v <= 32767; }

}  // namespace critbench
