#pragma once

#include <vector>

#include "critbench/program.hpp"

namespace critbench {

/// Partitions every function into basic blocks and builds the interprocedural
/// CFG. Leaders: function entries, branch/jump targets, instructions after a
/// control transfer. A `jal` block gets a Call edge to the callee entry; every
/// return block of the callee gets a Return edge back to the block after the
/// `jal`. Throws Error("cfg", ...) for computed jumps, targets outside the
/// function, or fall-through off the end of a function.
Program build_cfg(Program program);

/// Edges a block leaves through inside its own function, with a call block's
/// summary successor (the post-call block) in place of its Call edge.
std::vector<BlockId> intra_successors(const Program& p, BlockId b);

/// Natural loop of one header (loops sharing a header are merged).
struct Loop {
  BlockId header = 0;
  FuncId function = 0;
  std::vector<BlockId> blocks;       // sorted, includes header
  std::vector<EdgeId> back_edges;    // edges into the header from inside
  std::vector<EdgeId> entry_edges;   // edges into the header from outside
  int parent = -1;                   // enclosing loop index
  std::uint32_t depth = 1;

  bool contains(BlockId b) const;
};

struct LoopForest {
  std::vector<Loop> loops;
  std::vector<int> innermost;  // per block, -1 if none

  /// Loops containing `b`, innermost first.
  std::vector<int> nest_of(BlockId b) const;
  const Loop* find_header(BlockId header) const;
};

/// Throws Error("cfg", ...) on irreducible control flow.
LoopForest find_loops(const Program& p);

/// Callees of each function (direct jal targets), deduplicated, in call order.
std::vector<std::vector<FuncId>> call_graph(const Program& p);

/// Functions reachable from the entry function, entry first.
std::vector<FuncId> reachable_functions(const Program& p);

/// True when the call graph reachable from the entry has a cycle.
bool has_recursion(const Program& p);

/// Functions called (transitively) from `f`, including `f`.
std::vector<FuncId> transitive_callees(const Program& p, FuncId f);

}  // namespace critbench
