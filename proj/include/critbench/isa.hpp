#pragma once

// MR32: a 16-register, fixed 32-bit word, load/store toy ISA.
//
// Word layout (bit 31 on the left):
//   [31:24] opcode  [23:20] ra  [19:16] rb  [15:0] imm16 | [15:12] rc
//
//   R-type   add rd, rs1, rs2      ra=rd  rb=rs1 rc=rs2
//   li       li rd, imm            ra=rd  imm sign-extended
//   lw       lw rd, imm(rs1)       ra=rd  rb=rs1 imm sign-extended offset
//   sw       sw rs2, imm(rs1)      ra=rs2 rb=rs1 imm sign-extended offset
//   branch   beq rs1, rs2, label   ra=rs1 rb=rs2 imm=target word index
//   j / jal  j label               imm=target word index (jal links r15)
//   jr       jr rs1                rb=rs1
//
// Opcodes 0xF0..0xFF are reserved invalid; the assembler never emits them.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace critbench {

using Word = std::uint32_t;
using Address = std::uint32_t;

inline constexpr int kRegisterCount = 16;
inline constexpr int kLinkRegister = 15;
inline constexpr int kStackRegister = 14;
inline constexpr Address kInstructionBytes = 4;

enum class Opcode : std::uint8_t {
  Nop = 0x00,
  Add = 0x01,
  Sub = 0x02,
  Mul = 0x03,
  And = 0x04,
  Or = 0x05,
  Xor = 0x06,
  Sll = 0x07,
  Srl = 0x08,
  Li = 0x10,
  Lw = 0x20,
  Sw = 0x21,
  Beq = 0x30,
  Bne = 0x31,
  Blt = 0x32,
  Bge = 0x33,
  J = 0x40,
  Jal = 0x41,
  Jr = 0x42,
  Halt = 0x7F,
};

inline constexpr std::uint8_t kReservedOpcodeFirst = 0xF0;
inline constexpr std::uint8_t kEsc2Opcode = 0xF2;
inline constexpr std::uint8_t kEsc3Opcode = 0xF3;

enum class InstrKind : std::uint8_t { Compute, Load, Store, Branch, Call, Return, Jump, Other };

/// Decoded instruction fields. `imm` holds the sign-extended immediate, or the
/// target byte address for branches and jumps.
struct Decoded {
  Opcode op = Opcode::Nop;
  std::uint8_t rd = 0;   // destination (R-type, li, lw)
  std::uint8_t rs1 = 0;  // first source / base register
  std::uint8_t rs2 = 0;  // second source / store value
  std::int32_t imm = 0;

  friend bool operator==(const Decoded&, const Decoded&) = default;
};

std::string_view mnemonic(Opcode op);
std::optional<Opcode> opcode_from_mnemonic(std::string_view name);
InstrKind kind_of(Opcode op);

bool is_alu_rtype(Opcode op);
bool is_branch(Opcode op);
/// Any instruction that ends a basic block.
bool is_control(Opcode op);
bool is_reserved_opcode(std::uint8_t byte);

Word encode(const Decoded& d);
/// Throws critbench::Error for undefined or reserved opcodes.
Decoded decode(Word word);

/// Register read/write sets; r0 is never reported as written.
std::uint16_t reads_mask(const Decoded& d);
std::uint16_t writes_mask(const Decoded& d);

bool fits_signed16(std::int64_t v);

}  // namespace critbench
