#include <gtest/gtest.h>

#include "critbench/error.hpp"
#include "critbench/transform.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

namespace {

const char* kCounted =
    ".text\n.func main\n  li r1, 0\n  li r2, 16\n  li r3, 1\n  li r4, 0\nbody:\n  add r4, r4, r1\n"
    "  add r1, r1, r3\n  blt r1, r2, body\n  halt\n.endfunc\n.loopbound body 16\n";

SimResult run(const Program& p, const InputData* in = nullptr) {
  SimOptions o;
  o.input = in;
  return simulate(p, preset_config1(), o);
}

std::string stage_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.stage();
  }
  return "";
}

}  // namespace

TEST(Script, Parse) {
  const auto s = parse_script("# plan\ninline f at main:1\ninline g at all\nunroll body by 4\n\n");
  ASSERT_EQ(s.commands.size(), 3u);
  const auto& a = std::get<InlineCommand>(s.commands[0]);
  EXPECT_EQ(a.callee, "f");
  EXPECT_EQ(a.caller, "main");
  EXPECT_EQ(a.ordinal, 1u);
  EXPECT_FALSE(a.all);
  EXPECT_TRUE(std::get<InlineCommand>(s.commands[1]).all);
  EXPECT_EQ(std::get<UnrollCommand>(s.commands[2]).factor, 4u);
  EXPECT_THROW(parse_script("unroll body 4\n"), Error);
  EXPECT_THROW(parse_script("inline f at main\n"), Error);
  EXPECT_THROW(parse_script("fold x\n"), Error);
}

TEST(Inline, LeafCalleeCounting) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, 3\n  jal f\n  halt\n.endfunc\n.func f\n  add r1, r1, r1\n  jr r15\n"
      ".endfunc\n");
  std::vector<std::string> warnings;
  const auto q = inline_call(p, {"f", "main", 0}, &warnings);
  // jal replaced by the one-instruction body; jr falls through and is dropped.
  EXPECT_EQ(q.text.size(), p.text.size() + 1 - 1);
  for (InstrIndex i = 0; i < q.functions[q.entry_function()].count; ++i) {
    EXPECT_NE(q.text[q.functions[q.entry_function()].first + i].op(), Opcode::Jal);
  }
  EXPECT_FALSE(warnings.empty());  // no prologue/epilogue regions
  EXPECT_EQ(run(q).registers[1], 6u);
}

TEST(Inline, RegionsDropped) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, 3\n  jal f\n  li r12, 0\n  li r15, 0\n  halt\n.endfunc\n"
      ".func f\n.region prologue\n  or r12, r15, r0\n.endregion\n  jal g\n"
      ".region epilogue\n  or r15, r12, r0\n.endregion\n  jr r15\n.endfunc\n"
      ".func g\n  add r1, r1, r1\n  jr r15\n.endfunc\n");
  const auto q = inline_call(p, {"f", "main", 0});
  const auto& m = q.functions[q.entry_function()];
  for (InstrIndex i = m.first; i < m.first + m.count; ++i) EXPECT_EQ(q.text[i].region, Region::None);
  EXPECT_EQ(m.count, p.functions[p.entry_function()].count - 1 + 1);  // jal f -> jal g
  EXPECT_TRUE(run(q).same_state(run(p)));
}

TEST(Inline, RecursionRejected) {
  const auto p = load_program(
      ".text\n.func main\n  jal f\n  halt\n.endfunc\n.func f\n  beq r0, r0, out\n  jal f\nout:\n  jr r15\n"
      ".endfunc\n");
  EXPECT_EQ(stage_of([&] { inline_call(p, {"f", "main", 0}); }), "transform");
}

TEST(Inline, FullInliningPreservesStateAndGrowsCode) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto q = inline_everything(p);
    EXPECT_GT(q.text_bytes(), p.text_bytes()) << name;
    for (int k = 0; k < 3; ++k) {
      const auto in = bench_input(name, k);
      const auto a = run(p, &in), b = run(q, &in);
      EXPECT_TRUE(a.same_state(b)) << name << " in" << k;
      std::uint64_t calls = 0;
      for (InstrIndex i = 0; i < q.text.size(); ++i) {
        if (q.text[i].op() == Opcode::Jal) calls += b.instr_exec[i];
      }
      EXPECT_EQ(calls, 0u) << name;
    }
  }
}

TEST(Unroll, FactorOneIsIdentity) {
  const auto p = load_program(kCounted);
  EXPECT_TRUE(unroll_loop(p, "body", 1).same_image(p));
}

TEST(Unroll, CountedLoopByFour) {
  const auto p = load_program(kCounted);
  const auto q = unroll_loop(p, "body", 4);
  EXPECT_EQ(q.text.size(), p.text.size() + 3 * 2);
  ASSERT_EQ(q.flow_facts.size(), 1u);
  EXPECT_EQ(q.flow_facts[0].bound, 4u);
  const auto a = run(p), b = run(q);
  EXPECT_TRUE(a.same_state(b));
  EXPECT_EQ(a.counters.taken_branches, 15u);
  EXPECT_EQ(b.counters.taken_branches, 3u);
}

TEST(Unroll, Refusals) {
  const auto p = load_program(kCounted);
  EXPECT_EQ(stage_of([&] { unroll_loop(p, "body", 3); }), "transform");
  EXPECT_EQ(stage_of([&] { unroll_loop(p, "nowhere", 2); }), "transform");
  const auto unbounded = load_program(
      ".text\n.func main\n  li r1, 0\n  li r2, 4\n  li r3, 1\nl:\n  add r1, r1, r3\n  blt r1, r2, l\n"
      "  halt\n.endfunc\n");
  EXPECT_EQ(stage_of([&] { unroll_loop(unbounded, "l", 2); }), "transform");
}

TEST(Unroll, ShippedScriptsPreserveState) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto script = load_script(source_path("benchmarks/" + name + "/unroll.xform"));
    const auto q = apply_script(p, script);
    EXPECT_GT(q.text.size(), p.text.size());
    for (int k = 0; k < 3; ++k) {
      const auto in = bench_input(name, k);
      const auto a = run(p, &in), b = run(q, &in);
      EXPECT_TRUE(a.same_state(b)) << name;
      EXPECT_LT(b.counters.taken_branches, a.counters.taken_branches) << name;
    }
  }
}
