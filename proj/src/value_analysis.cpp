#include <deque>

#include "critbench/error.hpp"
#include "critbench/wcet.hpp"

namespace critbench {

int region_of(const Program& p, Address a) {
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    if (p.data[i].contains(a)) return static_cast<int>(i);
  }
  if (a >= p.layout.stack_base && a < p.layout.stack_top) return static_cast<int>(p.data.size());
  return -1;
}

std::pair<Address, Address> region_range(const Program& p, int region) {
  if (region == static_cast<int>(p.data.size())) return {p.layout.stack_base, p.layout.stack_top};
  const auto& d = p.data.at(static_cast<std::size_t>(region));
  return {d.base, d.end()};
}

namespace {

using Kind = AbsValue::Kind;

class Values {
 public:
  explicit Values(const Program& p) : p_(p) {}

  AbsValue join(const AbsValue& a, const AbsValue& b) const {
    if (a.kind == Kind::Bottom) return b;
    if (b.kind == Kind::Bottom) return a;
    if (a == b) return a;
    if (a.kind == Kind::Top || b.kind == Kind::Top) return AbsValue::top();
    const int ra = region(a), rb = region(b);
    if (ra >= 0 && ra == rb) return AbsValue::in_region(ra);
    return AbsValue::top();
  }

  AbsRegs join(const AbsRegs& a, const AbsRegs& b) const {
    AbsRegs out;
    for (int r = 0; r < kRegisterCount; ++r) out[r] = join(a[r], b[r]);
    return out;
  }

  // Address arithmetic keeps a region pointer inside its region.
  AbsValue add(const AbsValue& a, const AbsValue& b, bool subtract) const {
    if (a.kind == Kind::Const && b.kind == Kind::Const) {
      return AbsValue::constant(subtract ? a.value - b.value : a.value + b.value);
    }
    if (a.kind == Kind::Bottom || b.kind == Kind::Bottom) return AbsValue::top();
    if (subtract && b.kind == Kind::Region) return AbsValue::top();
    const int ra = region(a);
    const int rb = subtract ? -1 : region(b);
    if (ra >= 0 && rb >= 0) {
      // Two pointers (or a pointer and an address constant): only a constant
      // offset from a plain number is trusted.
      if (b.kind == Kind::Const && a.kind == Kind::Region) return a;
      if (a.kind == Kind::Const && b.kind == Kind::Region) return b;
      return AbsValue::top();
    }
    if (ra >= 0) return AbsValue::in_region(ra);
    if (rb >= 0) return AbsValue::in_region(rb);
    return AbsValue::top();
  }

  AbsValue alu(Opcode op, const AbsValue& a, const AbsValue& b) const {
    if (op == Opcode::Add) return add(a, b, false);
    if (op == Opcode::Sub) return add(a, b, true);
    if (a.kind != Kind::Const || b.kind != Kind::Const) return AbsValue::top();
    const Word x = a.value, y = b.value;
    switch (op) {
      case Opcode::Mul: return AbsValue::constant(x * y);
      case Opcode::And: return AbsValue::constant(x & y);
      case Opcode::Or: return AbsValue::constant(x | y);
      case Opcode::Xor: return AbsValue::constant(x ^ y);
      case Opcode::Sll: return AbsValue::constant(x << (y & 31));
      case Opcode::Srl: return AbsValue::constant(x >> (y & 31));
      default: return AbsValue::top();
    }
  }

  void step(AbsRegs& regs, InstrIndex i, DataTarget* target) const {
    const auto& ins = p_.text[i];
    const auto& d = ins.fields;
    auto set = [&](int r, AbsValue v) {
      if (r != 0) regs[r] = v;
    };
    if (is_alu_rtype(d.op)) {
      set(d.rd, alu(d.op, regs[d.rs1], regs[d.rs2]));
    } else if (d.op == Opcode::Li) {
      set(d.rd, AbsValue::constant(static_cast<Word>(d.imm)));
    } else if (d.op == Opcode::Lw || d.op == Opcode::Sw) {
      if (target) *target = resolve(add(regs[d.rs1], AbsValue::constant(static_cast<Word>(d.imm)), false), d.op);
      if (d.op == Opcode::Lw) set(d.rd, AbsValue::top());
    } else if (d.op == Opcode::Jal) {
      set(kLinkRegister, AbsValue::constant(ins.address + kInstructionBytes));
    }
    regs[0] = AbsValue::constant(0);
  }

 private:
  int region(const AbsValue& v) const {
    if (v.kind == Kind::Region) return v.region;
    if (v.kind == Kind::Const) return region_of(p_, v.value);
    return -1;
  }

  DataTarget resolve(const AbsValue& addr, Opcode op) const {
    DataTarget t;
    if (addr.kind == Kind::Const) {
      if (op == Opcode::Sw && addr.value == p_.layout.output_port) {
        t.kind = DataTarget::Kind::Output;
        return t;
      }
      const int r = region_of(p_, addr.value);
      if (r < 0) {
        t.kind = DataTarget::Kind::Unknown;
        return t;
      }
      t.kind = DataTarget::Kind::Exact;
      t.address = addr.value;
      t.region = r;
    } else if (addr.kind == Kind::Region) {
      t.kind = DataTarget::Kind::Region;
      t.region = addr.region;
    } else {
      t.kind = DataTarget::Kind::Unknown;
    }
    return t;
  }

  const Program& p_;
};

}  // namespace

ValueAnalysis analyze_values(const Program& program) {
  if (!program.cfg_built) throw Error("wcet", "value analysis needs a CFG");
  Values v(program);
  ValueAnalysis out;
  out.block_in.assign(program.blocks.size(), std::nullopt);
  out.targets.assign(program.text.size(), DataTarget{});

  AbsRegs init;
  init.fill(AbsValue::constant(0));
  init[kStackRegister] = AbsValue::constant(program.layout.stack_top);
  const BlockId entry = program.functions[program.entry_function()].entry_block;
  out.block_in[entry] = init;

  std::deque<BlockId> work{entry};
  std::vector<bool> queued(program.blocks.size(), false);
  queued[entry] = true;
  while (!work.empty()) {
    const BlockId b = work.front();
    work.pop_front();
    queued[b] = false;
    AbsRegs regs = *out.block_in[b];
    const auto& blk = program.blocks[b];
    for (InstrIndex i = blk.first; i <= blk.last(); ++i) v.step(regs, i, nullptr);
    for (EdgeId e : blk.succs) {
      const BlockId s = program.edges[e].dst;
      auto& in = out.block_in[s];
      AbsRegs joined = in ? v.join(*in, regs) : regs;
      if (!in || joined != *in) {
        in = joined;
        if (!queued[s]) {
          queued[s] = true;
          work.push_back(s);
        }
      }
    }
  }
  for (const auto& blk : program.blocks) {
    if (!out.block_in[blk.id]) continue;
    AbsRegs regs = *out.block_in[blk.id];
    for (InstrIndex i = blk.first; i <= blk.last(); ++i) v.step(regs, i, &out.targets[i]);
  }
  return out;
}

}  // namespace critbench
