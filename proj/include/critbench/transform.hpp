#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "critbench/program.hpp"

namespace critbench {

/// `jal CALLEE` number `ordinal` (0-based, counting only calls to CALLEE) in
/// function `caller`.
struct CallSite {
  std::string callee;
  std::string caller;
  std::uint32_t ordinal = 0;
};

struct InlineCommand {
  std::string callee;
  bool all = false;   // every call to callee, anywhere
  std::string caller; // used when !all
  std::uint32_t ordinal = 0;
};

struct UnrollCommand {
  std::string label;
  std::uint32_t factor = 1;
};

using TransformCommand = std::variant<InlineCommand, UnrollCommand>;

/// Lines: `inline CALLEE at FUNC:INDEX`, `inline CALLEE at all`,
/// `unroll LABEL by FACTOR`; '#' starts a comment.
struct TransformScript {
  std::vector<TransformCommand> commands;
};

TransformScript parse_script(const std::string& text);
TransformScript load_script(const std::string& path);

/// Replaces one call by the callee body. Prologue/epilogue regions, the `jal`
/// and the returns are removed; labels and loop bounds of the callee are
/// cloned under fresh names. The callee itself stays in the image. Throws
/// Error("transform", ...) on recursion, on a body that touches the stack
/// pointer once its frame is gone, or when the body overwrites a register the
/// dropped prologue saved and the caller still needs.
Program inline_call(const Program& program, const CallSite& site,
                    std::vector<std::string>* warnings = nullptr);

/// Inlines every call to `callee` (including calls exposed by earlier
/// inlining steps of the same callee).
Program inline_all(const Program& program, const std::string& callee,
                   std::vector<std::string>* warnings = nullptr);

/// Inlines calls reachable from the entry function until it executes no
/// `jal` at all.
Program inline_everything(const Program& program, std::vector<std::string>* warnings = nullptr);

/// Replicates the loop headed by `label` `factor` times. The loop must occupy
/// a contiguous range ending in its single back edge, carry a loop bound, and
/// `factor` must divide the bound. Factor 1 returns the program unchanged.
Program unroll_loop(const Program& program, const std::string& label, std::uint32_t factor);

Program apply_script(const Program& program, const TransformScript& script,
                     std::vector<std::string>* warnings = nullptr);

}  // namespace critbench
