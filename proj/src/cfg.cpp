#include "critbench/cfg.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "critbench/error.hpp"

namespace critbench {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("cfg", message); }

std::string where(const Program& p, InstrIndex i) {
  return "instruction " + std::to_string(i) + " (" + p.functions[p.text[i].function].name + ")";
}

}  // namespace

Program build_cfg(Program p) {
  p.blocks.clear();
  p.edges.clear();
  p.block_of.assign(p.text.size(), kNone);
  for (auto& f : p.functions) {
    f.blocks.clear();
    f.entry_block = kNone;
  }

  auto func_at = [&](Address a) -> std::optional<FuncId> {
    const InstrIndex i = a / kInstructionBytes;
    if (a % kInstructionBytes != 0 || i >= p.text.size()) return std::nullopt;
    return p.text[i].function;
  };

  for (FuncId fid = 0; fid < p.functions.size(); ++fid) {
    auto& f = p.functions[fid];
    const InstrIndex end = f.first + f.count;
    std::vector<bool> leader(f.count, false);
    leader[0] = true;
    for (InstrIndex i = f.first; i < end; ++i) {
      const auto& ins = p.text[i];
      const Opcode op = ins.op();
      if (op == Opcode::Jr && ins.fields.rs1 != kLinkRegister) {
        fail("computed jump at " + where(p, i) + " (jr is return-only)");
      }
      if (is_branch(op) || op == Opcode::J) {
        auto target = func_at(static_cast<Address>(ins.fields.imm));
        if (!target || *target != fid) {
          fail("branch target outside the function at " + where(p, i));
        }
        leader[ins.fields.imm / kInstructionBytes - f.first] = true;
      }
      if (op == Opcode::Jal) {
        auto target = func_at(static_cast<Address>(ins.fields.imm));
        if (!target || p.functions[*target].first * kInstructionBytes !=
                           static_cast<Address>(ins.fields.imm)) {
          fail("call target is not a function entry at " + where(p, i));
        }
      }
      if (is_control(op) && i + 1 < end) leader[i + 1 - f.first] = true;
    }
    for (InstrIndex i = f.first; i < end; ++i) {
      if (leader[i - f.first]) {
        BasicBlock b;
        b.id = static_cast<BlockId>(p.blocks.size());
        b.function = fid;
        b.first = i;
        p.blocks.push_back(b);
        f.blocks.push_back(b.id);
      }
      p.blocks.back().count++;
      p.block_of[i] = p.blocks.back().id;
    }
    f.entry_block = f.blocks.front();
  }

  auto add_edge = [&](BlockId src, BlockId dst, EdgeKind kind, BlockId call_block = kNone) {
    Edge e;
    e.id = static_cast<EdgeId>(p.edges.size());
    e.src = src;
    e.dst = dst;
    e.kind = kind;
    e.call_block = call_block;
    p.edges.push_back(e);
    p.blocks[src].succs.push_back(e.id);
    p.blocks[dst].preds.push_back(e.id);
  };

  struct CallSite {
    BlockId call_block;
    BlockId post_block;
    FuncId callee;
  };
  std::vector<CallSite> sites;

  for (auto& b : p.blocks) {
    const auto& f = p.functions[b.function];
    const InstrIndex last = b.last();
    const auto& ins = p.text[last];
    const bool has_next = last + 1 < f.first + f.count;
    auto next_block = [&] {
      if (!has_next) fail("control falls off the end of function '" + f.name + "'");
      return p.block_of[last + 1];
    };
    switch (ins.op()) {
      case Opcode::Halt:
      case Opcode::Jr: break;
      case Opcode::J:
        add_edge(b.id, p.block_of[ins.fields.imm / kInstructionBytes], EdgeKind::Jump);
        break;
      case Opcode::Jal: {
        const FuncId callee = *func_at(static_cast<Address>(ins.fields.imm));
        const BlockId post = next_block();
        add_edge(b.id, p.functions[callee].entry_block, EdgeKind::Call, b.id);
        sites.push_back({b.id, post, callee});
        break;
      }
      default:
        if (is_branch(ins.op())) {
          const BlockId taken = p.block_of[ins.fields.imm / kInstructionBytes];
          const BlockId fall = next_block();
          add_edge(b.id, fall, EdgeKind::FallThrough);
          add_edge(b.id, taken, EdgeKind::Taken);
        } else {
          add_edge(b.id, next_block(), EdgeKind::FallThrough);
        }
    }
  }

  for (const auto& site : sites) {
    for (BlockId rb : p.functions[site.callee].blocks) {
      if (p.text[p.blocks[rb].last()].op() == Opcode::Jr) {
        add_edge(rb, site.post_block, EdgeKind::Return, site.call_block);
      }
    }
  }

  for (auto& ff : p.flow_facts) {
    auto a = p.code_label(ff.label);
    if (!a) fail("loop bound on unknown label '" + ff.label + "'");
    const InstrIndex i = *a / kInstructionBytes;
    if (!p.is_leader(i)) fail("loop bound label '" + ff.label + "' does not start a block");
    ff.header = p.block_of[i];
  }
  p.cfg_built = true;
  return p;
}

std::vector<BlockId> intra_successors(const Program& p, BlockId b) {
  std::vector<BlockId> out;
  for (EdgeId e : p.blocks[b].succs) {
    const auto& edge = p.edges[e];
    if (edge.kind == EdgeKind::Call) {
      out.push_back(b + 1);  // post-call block follows the call block in layout
    } else if (edge.kind != EdgeKind::Return) {
      out.push_back(edge.dst);
    }
  }
  return out;
}

bool Loop::contains(BlockId b) const { return std::binary_search(blocks.begin(), blocks.end(), b); }

std::vector<int> LoopForest::nest_of(BlockId b) const {
  std::vector<int> out;
  for (int l = innermost[b]; l >= 0; l = loops[l].parent) out.push_back(l);
  return out;
}

const Loop* LoopForest::find_header(BlockId header) const {
  for (const auto& l : loops) {
    if (l.header == header) return &l;
  }
  return nullptr;
}

LoopForest find_loops(const Program& p) {
  LoopForest forest;
  forest.innermost.assign(p.blocks.size(), -1);

  for (FuncId fid = 0; fid < p.functions.size(); ++fid) {
    const auto& f = p.functions[fid];
    const BlockId base = f.blocks.front();
    const std::size_t n = f.blocks.size();
    std::vector<std::vector<std::size_t>> succ(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (BlockId s : intra_successors(p, base + static_cast<BlockId>(i))) {
        succ[i].push_back(s - base);
        pred[s - base].push_back(i);
      }
    }
    // Reverse postorder from the entry.
    std::vector<std::size_t> rpo;
    std::vector<int> state(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> retreating;
    std::function<void(std::size_t)> dfs = [&](std::size_t v) {
      state[v] = 1;
      for (std::size_t s : succ[v]) {
        if (state[s] == 0) {
          dfs(s);
        } else if (state[s] == 1) {
          retreating.emplace_back(v, s);
        }
      }
      state[v] = 2;
      rpo.push_back(v);
    };
    dfs(0);
    std::reverse(rpo.begin(), rpo.end());
    std::vector<std::size_t> order_of(n, n);
    for (std::size_t k = 0; k < rpo.size(); ++k) order_of[rpo[k]] = k;

    // Cooper-Harvey-Kennedy dominators.
    std::vector<std::size_t> idom(n, n);
    idom[0] = 0;
    auto intersect = [&](std::size_t a, std::size_t b) {
      while (a != b) {
        while (order_of[a] > order_of[b]) a = idom[a];
        while (order_of[b] > order_of[a]) b = idom[b];
      }
      return a;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = 1; k < rpo.size(); ++k) {
        const std::size_t v = rpo[k];
        std::size_t new_idom = n;
        for (std::size_t u : pred[v]) {
          if (idom[u] == n) continue;
          new_idom = new_idom == n ? u : intersect(u, new_idom);
        }
        if (new_idom != idom[v]) {
          idom[v] = new_idom;
          changed = true;
        }
      }
    }
    auto dominates = [&](std::size_t a, std::size_t b) {
      if (idom[b] == n) return false;
      for (std::size_t v = b;; v = idom[v]) {
        if (v == a) return true;
        if (v == 0) return false;
      }
    };

    std::map<std::size_t, std::set<std::size_t>> bodies;
    for (auto [u, h] : retreating) {
      if (!dominates(h, u)) fail("irreducible control flow in function '" + f.name + "'");
      auto& body = bodies[h];
      body.insert(h);
      std::vector<std::size_t> work{u};
      while (!work.empty()) {
        std::size_t v = work.back();
        work.pop_back();
        if (!body.insert(v).second) continue;
        for (std::size_t w : pred[v]) work.push_back(w);
      }
    }

    for (auto& [h, body] : bodies) {
      Loop loop;
      loop.header = base + static_cast<BlockId>(h);
      loop.function = fid;
      for (std::size_t v : body) loop.blocks.push_back(base + static_cast<BlockId>(v));
      for (EdgeId e : p.blocks[loop.header].preds) {
        const auto& edge = p.edges[e];
        const BlockId origin = edge.kind == EdgeKind::Return ? edge.call_block : edge.src;
        const bool inside = edge.kind != EdgeKind::Call && p.blocks[origin].function == fid &&
                            body.count(origin - base) > 0;
        (inside ? loop.back_edges : loop.entry_edges).push_back(e);
      }
      forest.loops.push_back(std::move(loop));
    }
  }

  // Nesting: the parent is the smallest strictly larger loop containing the header.
  for (std::size_t i = 0; i < forest.loops.size(); ++i) {
    auto& li = forest.loops[i];
    std::size_t best = forest.loops.size();
    for (std::size_t j = 0; j < forest.loops.size(); ++j) {
      const auto& lj = forest.loops[j];
      if (i == j || lj.function != li.function || !lj.contains(li.header) ||
          lj.blocks.size() <= li.blocks.size()) {
        continue;
      }
      if (best == forest.loops.size() || lj.blocks.size() < forest.loops[best].blocks.size()) {
        best = j;
      }
    }
    li.parent = best == forest.loops.size() ? -1 : static_cast<int>(best);
  }
  for (auto& l : forest.loops) {
    for (int q = l.parent; q >= 0; q = forest.loops[q].parent) ++l.depth;
  }
  for (std::size_t i = 0; i < forest.loops.size(); ++i) {
    for (BlockId b : forest.loops[i].blocks) {
      const int cur = forest.innermost[b];
      if (cur < 0 || forest.loops[cur].depth < forest.loops[i].depth) {
        forest.innermost[b] = static_cast<int>(i);
      }
    }
  }
  return forest;
}

std::vector<std::vector<FuncId>> call_graph(const Program& p) {
  std::vector<std::vector<FuncId>> g(p.functions.size());
  for (const auto& ins : p.text) {
    if (ins.op() != Opcode::Jal) continue;
    const FuncId callee = p.text[ins.fields.imm / kInstructionBytes].function;
    auto& out = g[ins.function];
    if (std::find(out.begin(), out.end(), callee) == out.end()) out.push_back(callee);
  }
  return g;
}

std::vector<FuncId> reachable_functions(const Program& p) {
  auto g = call_graph(p);
  std::vector<FuncId> order{p.entry_function()};
  std::vector<bool> seen(p.functions.size(), false);
  seen[order[0]] = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (FuncId c : g[order[k]]) {
      if (!seen[c]) {
        seen[c] = true;
        order.push_back(c);
      }
    }
  }
  return order;
}

bool has_recursion(const Program& p) {
  auto g = call_graph(p);
  std::vector<int> state(p.functions.size(), 0);
  std::function<bool(FuncId)> visit = [&](FuncId f) {
    state[f] = 1;
    for (FuncId c : g[f]) {
      if (state[c] == 1) return true;
      if (state[c] == 0 && visit(c)) return true;
    }
    state[f] = 2;
    return false;
  };
  return visit(p.entry_function());
}

std::vector<FuncId> transitive_callees(const Program& p, FuncId f) {
  auto g = call_graph(p);
  std::vector<FuncId> order{f};
  std::vector<bool> seen(p.functions.size(), false);
  seen[f] = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    for (FuncId c : g[order[k]]) {
      if (!seen[c]) {
        seen[c] = true;
        order.push_back(c);
      }
    }
  }
  return order;
}

}  // namespace critbench
