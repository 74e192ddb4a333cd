#include "critbench/transform.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "critbench/assembler.hpp"
#include "critbench/cfg.hpp"
#include "critbench/error.hpp"

namespace critbench {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("transform", message); }

constexpr std::uint16_t kAllRegs = 0xFFFE;  // r1..r15

std::uint16_t bit(int r) { return static_cast<std::uint16_t>(1u << r); }

// Editable source form of a program: functions as lists of labelled lines.
struct Line {
  std::vector<std::string> labels;
  Instruction ins;
};

struct Func {
  std::string name;
  std::vector<Line> lines;
};

struct Source {
  std::vector<Func> funcs;
  std::vector<std::pair<std::string, std::uint32_t>> bounds;
  std::set<std::string> names;  // every label and symbol in use
};

Source to_source(const Program& p) {
  Source s;
  std::multimap<Address, std::string> labels;
  for (const auto& l : p.code_labels) {
    s.names.insert(l.name);
    if (!p.find_function(l.name)) labels.emplace(l.address, l.name);
  }
  for (const auto& d : p.data) s.names.insert(d.name);
  for (const auto& f : p.functions) {
    Func fn{f.name, {}};
    for (InstrIndex i = f.first; i < f.first + f.count; ++i) {
      Line line{{}, p.text[i]};
      auto [lo, hi] = labels.equal_range(p.text[i].address);
      for (auto it = lo; it != hi; ++it) line.labels.push_back(it->second);
      fn.lines.push_back(std::move(line));
    }
    s.funcs.push_back(std::move(fn));
  }
  for (const auto& ff : p.flow_facts) s.bounds.emplace_back(ff.label, ff.bound);
  return s;
}

std::string fresh(Source& s, const std::string& base, const std::string& tag) {
  for (int n = 1;; ++n) {
    std::string name = base + "_" + tag + std::to_string(n);
    if (s.names.insert(name).second) return name;
  }
}

Program from_source(const Source& s, const Program& original) {
  std::ostringstream out;
  out << ".text\n";
  for (const auto& f : s.funcs) {
    out << ".func " << f.name << "\n";
    Region open = Region::None;
    for (const auto& line : f.lines) {
      if (line.ins.region != open) {
        if (open != Region::None) out << "  .endregion\n";
        if (line.ins.region != Region::None) {
          out << "  .region " << (line.ins.region == Region::Prologue ? "prologue" : "epilogue")
              << "\n";
        }
        open = line.ins.region;
      }
      for (const auto& l : line.labels) out << l << ":\n";
      out << "  " << format_instruction(line.ins) << "\n";
    }
    if (open != Region::None) out << "  .endregion\n";
    out << ".endfunc\n";
  }
  for (const auto& [label, bound] : s.bounds) out << ".loopbound " << label << " " << bound << "\n";
  if (!original.data.empty()) out << ".data\n";
  char buf[16];
  for (const auto& d : original.data) {
    out << d.name << ":\n";
    for (std::size_t i = 0; i < d.init.size(); ++i) {
      std::snprintf(buf, sizeof buf, "0x%08x", d.init[i]);
      out << "  .word " << buf << "\n";
    }
  }
  try {
    return load_program(out.str(), AssembleOptions{original.layout});
  } catch (const Error& e) {
    fail(std::string("transformed program is malformed: ") + e.what());
  }
}

Func& func_named(Source& s, const std::string& name) {
  for (auto& f : s.funcs) {
    if (f.name == name) return f;
  }
  fail("no function '" + name + "'");
}

std::uint16_t uses(const Decoded& d) {
  switch (d.op) {
    case Opcode::Jal: return kAllRegs & ~bit(kLinkRegister);
    case Opcode::Jr:
    case Opcode::Halt: return kAllRegs;
    default: return reads_mask(d);
  }
}

// Registers live on entry to each instruction of the caller's function.
std::vector<std::uint16_t> liveness(const Program& p, FuncId f) {
  std::vector<std::uint16_t> live_in(p.text.size(), 0);
  const auto& fn = p.functions[f];
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = fn.blocks.rbegin(); it != fn.blocks.rend(); ++it) {
      const auto& b = p.blocks[*it];
      std::uint16_t live = 0;
      for (BlockId s : intra_successors(p, b.id)) live |= live_in[p.blocks[s].first];
      for (InstrIndex i = b.last() + 1; i-- > b.first;) {
        const auto& d = p.text[i].fields;
        live = static_cast<std::uint16_t>((live & ~writes_mask(d)) | uses(d));
        if (live_in[i] != live) {
          live_in[i] = live;
          changed = true;
        }
      }
    }
  }
  return live_in;
}

std::string mask_names(std::uint16_t m) {
  std::string out;
  for (int r = 0; r < kRegisterCount; ++r) {
    if (m & bit(r)) out += (out.empty() ? "r" : ", r") + std::to_string(r);
  }
  return out;
}

bool calls_itself(const Program& p, FuncId f) {
  const auto graph = call_graph(p);
  std::vector<bool> seen(p.functions.size(), false);
  std::vector<FuncId> stack(graph[f].begin(), graph[f].end());
  while (!stack.empty()) {
    FuncId g = stack.back();
    stack.pop_back();
    if (g == f) return true;
    if (seen[g]) continue;
    seen[g] = true;
    stack.insert(stack.end(), graph[g].begin(), graph[g].end());
  }
  return false;
}

// Index of the call's jal in the program text.
std::optional<InstrIndex> find_call(const Program& p, const CallSite& site) {
  const auto caller = p.find_function(site.caller);
  const auto callee = p.find_function(site.callee);
  if (!caller) fail("no function '" + site.caller + "'");
  if (!callee) fail("no function '" + site.callee + "'");
  const auto& fn = p.functions[*caller];
  const Address entry = p.text[p.functions[*callee].first].address;
  std::uint32_t n = 0;
  for (InstrIndex i = fn.first; i < fn.first + fn.count; ++i) {
    const auto& d = p.text[i].fields;
    if (d.op == Opcode::Jal && static_cast<Address>(d.imm) == entry && n++ == site.ordinal) return i;
  }
  return std::nullopt;
}

}  // namespace

TransformScript parse_script(const std::string& text) {
  TransformScript script;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream f(line);
    std::vector<std::string> w;
    for (std::string t; f >> t;) w.push_back(t);
    if (w.empty()) continue;
    auto bad = [&] { fail("script line " + std::to_string(lineno) + ": cannot parse '" + line + "'"); };
    if (w[0] == "inline" && w.size() == 4 && w[2] == "at") {
      InlineCommand c;
      c.callee = w[1];
      if (w[3] == "all") {
        c.all = true;
      } else {
        auto colon = w[3].find(':');
        if (colon == std::string::npos || colon == 0) bad();
        c.caller = w[3].substr(0, colon);
        try {
          std::size_t used = 0;
          c.ordinal = static_cast<std::uint32_t>(std::stoul(w[3].substr(colon + 1), &used));
          if (used != w[3].size() - colon - 1) bad();
        } catch (const std::logic_error&) {
          bad();
        }
      }
      script.commands.emplace_back(c);
    } else if (w[0] == "unroll" && w.size() == 4 && w[2] == "by") {
      UnrollCommand c;
      c.label = w[1];
      try {
        std::size_t used = 0;
        c.factor = static_cast<std::uint32_t>(std::stoul(w[3], &used));
        if (used != w[3].size() || c.factor == 0) bad();
      } catch (const std::logic_error&) {
        bad();
      }
      script.commands.emplace_back(c);
    } else {
      bad();
    }
  }
  return script;
}

TransformScript load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_script(ss.str());
}

Program inline_call(const Program& program, const CallSite& site,
                    std::vector<std::string>* warnings) {
  if (!program.cfg_built) fail("inline needs a CFG");
  const auto site_index = find_call(program, site);
  if (!site_index) {
    fail("no call " + std::to_string(site.ordinal) + " to '" + site.callee + "' in '" +
         site.caller + "'");
  }
  const InstrIndex jal = *site_index;
  const FuncId callee = *program.find_function(site.callee);
  const FuncId caller = *program.find_function(site.caller);
  if (callee == caller || calls_itself(program, callee)) {
    fail("recursion through '" + site.callee + "'");
  }
  const auto& cf = program.functions[callee];

  bool has_regions = false;
  std::uint16_t saved = 0;
  for (InstrIndex i = cf.first; i < cf.first + cf.count; ++i) {
    const auto& ins = program.text[i];
    has_regions = has_regions || ins.region != Region::None;
    if (ins.region == Region::Prologue && ins.op() == Opcode::Sw &&
        ins.fields.rs1 == kStackRegister) {
      saved |= bit(ins.fields.rs2);
    }
  }
  if (!has_regions && warnings) {
    warnings->push_back("callee '" + site.callee +
                        "' has no prologue/epilogue regions; inlined with its frame code");
  }
  auto kept = [&](const Instruction& ins) {
    return !has_regions || ins.region == Region::None || ins.op() == Opcode::Jr;
  };

  if (has_regions) {
    std::uint16_t written = 0;
    for (InstrIndex i = cf.first; i < cf.first + cf.count; ++i) {
      const auto& ins = program.text[i];
      if (!kept(ins) || ins.op() == Opcode::Jr) continue;
      if ((reads_mask(ins.fields) | writes_mask(ins.fields)) & bit(kStackRegister)) {
        fail("body of '" + site.callee + "' uses the stack pointer; its frame would be gone");
      }
      written |= writes_mask(ins.fields);
    }
    const auto live = liveness(program, caller);
    const std::uint16_t clobbered = written & saved & live[jal + 1];
    if (clobbered) {
      fail("inlining '" + site.callee + "' into '" + site.caller + "' clobbers " +
           mask_names(clobbered) + ", saved by the dropped prologue and live after the call");
    }
  }

  Source src = to_source(program);
  std::map<std::string, std::string> rename;
  const auto callee_src = func_named(src, site.callee);  // copy: src is edited below
  for (const auto& line : callee_src.lines) {
    for (const auto& l : line.labels) rename[l] = fresh(src, l, "in");
  }
  const std::string ret = fresh(src, site.caller + "_ret", "in");

  int last_kept = -1;
  for (int k = 0; k < static_cast<int>(callee_src.lines.size()); ++k) {
    if (kept(callee_src.lines[k].ins)) last_kept = k;
  }

  std::vector<Line> body;
  std::vector<std::string> pending;
  for (int k = 0; k < static_cast<int>(callee_src.lines.size()); ++k) {
    Line line = callee_src.lines[k];
    for (auto& l : line.labels) pending.push_back(rename[l]);
    if (!kept(line.ins)) continue;
    if (line.ins.op() == Opcode::Jr) {
      if (k == last_kept) continue;
      Instruction j;
      j.fields.op = Opcode::J;
      j.kind = kind_of(Opcode::J);
      j.label = ret;
      line.ins = j;
    } else if (auto it = rename.find(line.ins.label); it != rename.end()) {
      line.ins.label = it->second;
    }
    line.ins.region = Region::None;
    line.labels = std::move(pending);
    pending.clear();
    body.push_back(std::move(line));
  }

  Func& target = func_named(src, site.caller);
  const InstrIndex local = jal - program.functions[caller].first;
  std::vector<std::string> jal_labels = target.lines[local].labels;
  auto& after = target.lines[local + 1].labels;
  std::vector<std::string> after_labels{ret};
  after_labels.insert(after_labels.end(), pending.begin(), pending.end());
  if (body.empty()) {
    after_labels.insert(after_labels.end(), jal_labels.begin(), jal_labels.end());
  } else {
    body.front().labels.insert(body.front().labels.begin(), jal_labels.begin(), jal_labels.end());
  }
  after.insert(after.begin(), after_labels.begin(), after_labels.end());
  target.lines.erase(target.lines.begin() + local);
  target.lines.insert(target.lines.begin() + local, body.begin(), body.end());

  const auto bounds = src.bounds;
  for (const auto& [label, bound] : bounds) {
    if (auto it = rename.find(label); it != rename.end()) src.bounds.emplace_back(it->second, bound);
  }
  return from_source(src, program);
}

Program inline_all(const Program& program, const std::string& callee,
                   std::vector<std::string>* warnings) {
  if (!program.find_function(callee)) fail("no function '" + callee + "'");
  Program p = program;
  for (;;) {
    const FuncId target = *p.find_function(callee);
    std::optional<CallSite> site;
    for (const auto& f : p.functions) {
      if (f.name == callee) continue;
      for (InstrIndex i = f.first; i < f.first + f.count && !site; ++i) {
        const auto& d = p.text[i].fields;
        if (d.op == Opcode::Jal && static_cast<Address>(d.imm) == p.text[p.functions[target].first].address) {
          site = CallSite{callee, f.name, 0};
        }
      }
      if (site) break;
    }
    if (!site) return p;
    p = inline_call(p, *site, warnings);
  }
}

Program inline_everything(const Program& program, std::vector<std::string>* warnings) {
  if (has_recursion(program)) fail("cannot fully inline a recursive program");
  Program p = program;
  for (;;) {
    const auto& main = p.functions[p.entry_function()];
    std::optional<CallSite> site;
    for (InstrIndex i = main.first; i < main.first + main.count; ++i) {
      const auto& d = p.text[i].fields;
      if (d.op != Opcode::Jal) continue;
      for (const auto& f : p.functions) {
        if (p.text[f.first].address == static_cast<Address>(d.imm)) {
          site = CallSite{f.name, main.name, 0};
          break;
        }
      }
      break;
    }
    if (!site) return p;
    p = inline_call(p, *site, warnings);
  }
}

Program unroll_loop(const Program& program, const std::string& label, std::uint32_t factor) {
  if (!program.cfg_built) fail("unroll needs a CFG");
  if (factor == 0) fail("unroll factor must be positive");
  if (factor == 1) return program;
  const auto addr = program.code_label(label);
  if (!addr || program.find_function(label)) fail("no loop label '" + label + "'");
  const InstrIndex head_index = *addr / kInstructionBytes;
  if (!program.is_leader(head_index)) fail("'" + label + "' does not start a block");
  const BlockId header = program.block_of[head_index];

  const LoopForest forest = find_loops(program);
  const Loop* loop = forest.find_header(header);
  if (!loop) fail("'" + label + "' is not a loop header");
  if (loop->back_edges.size() != 1) fail("loop '" + label + "' has several back edges");
  const auto fact = std::find_if(program.flow_facts.begin(), program.flow_facts.end(),
                                 [&](const FlowFact& f) { return f.header == header; });
  if (fact == program.flow_facts.end()) fail("loop '" + label + "' has no loop bound");
  if (fact->bound % factor != 0) {
    fail("factor " + std::to_string(factor) + " does not divide the bound " +
         std::to_string(fact->bound) + " of '" + label + "'");
  }
  const auto& back = program.edges[loop->back_edges.front()];
  const BlockId latch = back.src;
  if (back.kind != EdgeKind::Taken && back.kind != EdgeKind::Jump) {
    fail("loop '" + label + "' does not close with a branch to its header");
  }
  for (BlockId b = header; b <= latch; ++b) {
    if (!loop->contains(b)) fail("loop '" + label + "' is not a contiguous range");
  }
  if (loop->blocks.size() != latch - header + 1) fail("loop '" + label + "' is not a contiguous range");

  const InstrIndex first = program.blocks[header].first;
  const InstrIndex last = program.blocks[latch].last();
  const FuncId fid = program.blocks[header].function;
  const InstrIndex local_first = first - program.functions[fid].first;
  const std::uint32_t length = last - first + 1;

  Source src = to_source(program);
  Func& fn = func_named(src, program.functions[fid].name);
  const std::vector<Line> range(fn.lines.begin() + local_first,
                                fn.lines.begin() + local_first + length);
  std::set<std::string> inside;
  for (const auto& line : range) inside.insert(line.labels.begin(), line.labels.end());

  std::vector<Line> unrolled;
  std::vector<std::map<std::string, std::string>> renames(factor);
  std::vector<std::string> pending;
  for (std::uint32_t copy = 0; copy < factor; ++copy) {
    auto& rename = renames[copy];
    for (const auto& l : inside) rename[l] = copy == 0 ? l : fresh(src, l, "u");
    for (std::uint32_t k = 0; k < length; ++k) {
      Line line = range[k];
      for (auto& l : line.labels) l = rename[l];
      const bool closing = k + 1 == length;
      if (closing && copy + 1 < factor) {
        // The back branch of an intermediate copy falls into the next copy.
        pending = line.labels;
        continue;
      }
      line.labels.insert(line.labels.begin(), pending.begin(), pending.end());
      pending.clear();
      if (closing && copy + 1 == factor) {
        line.ins.label = label;
      } else if (auto it = rename.find(line.ins.label); it != rename.end() && is_control(line.ins.op())) {
        line.ins.label = it->second;
      }
      unrolled.push_back(std::move(line));
    }
  }
  fn.lines.erase(fn.lines.begin() + local_first, fn.lines.begin() + local_first + length);
  fn.lines.insert(fn.lines.begin() + local_first, unrolled.begin(), unrolled.end());

  const auto bounds = src.bounds;
  src.bounds.clear();
  for (const auto& [l, bound] : bounds) {
    if (l == label) {
      src.bounds.emplace_back(l, bound / factor);
    } else if (inside.count(l)) {
      for (std::uint32_t copy = 0; copy < factor; ++copy) src.bounds.emplace_back(renames[copy][l], bound);
    } else {
      src.bounds.emplace_back(l, bound);
    }
  }
  return from_source(src, program);
}

Program apply_script(const Program& program, const TransformScript& script,
                     std::vector<std::string>* warnings) {
  Program p = program;
  for (const auto& cmd : script.commands) {
    if (const auto* in = std::get_if<InlineCommand>(&cmd)) {
      p = in->all ? inline_all(p, in->callee, warnings)
                  : inline_call(p, CallSite{in->callee, in->caller, in->ordinal}, warnings);
    } else {
      const auto& un = std::get<UnrollCommand>(cmd);
      p = unroll_loop(p, un.label, un.factor);
    }
  }
  return p;
}

}  // namespace critbench
