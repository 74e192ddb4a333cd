#pragma once

#include <string>
#include <string_view>

#include "critbench/program.hpp"

namespace critbench {

struct AssembleOptions {
  MemoryLayout layout;
};

/// Assembles MR32 source text. Addresses are assigned from 0 in declaration
/// order; data symbols are laid out from `layout.data_base`. The CFG is not
/// built (see build_cfg). Throws critbench::Error("asm", ...) with a line
/// number on malformed input.
Program assemble(std::string_view source, const AssembleOptions& options = {});

/// Canonical, stable text form. assemble(disassemble(p)) reproduces p.
std::string disassemble(const Program& program);

/// Text of one instruction operand list, e.g. "lw r3, 4(r14)".
std::string format_instruction(const Instruction& instr);

/// assemble + build_cfg.
Program load_program(std::string_view source, const AssembleOptions& options = {});
Program load_program_file(const std::string& path, const AssembleOptions& options = {});

}  // namespace critbench
