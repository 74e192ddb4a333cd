#include <gtest/gtest.h>

#include <set>

#include "critbench/assembler.hpp"
#include "critbench/cfg.hpp"
#include "critbench/error.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

namespace {

std::string stage_of(const std::string& src) {
  try {
    load_program(src);
  } catch (const Error& e) {
    return e.stage();
  }
  return "";
}

}  // namespace

TEST(Assemble, HaltOnlyProgram) {
  const auto p = load_program(".text\n.func main\n  halt\n.endfunc\n");
  ASSERT_EQ(p.functions.size(), 1u);
  ASSERT_EQ(p.blocks.size(), 1u);
  ASSERT_EQ(p.text.size(), 1u);
  EXPECT_EQ(p.text[0].address, 0u);
  EXPECT_EQ(p.text[0].op(), Opcode::Halt);
}

TEST(Assemble, DenseLayout) {
  const auto p = load_program(".text\n.func main\n  li r1, 1\n  add r2, r1, r1\n  halt\n.endfunc\n");
  ASSERT_EQ(p.text.size(), 3u);
  EXPECT_EQ(p.text[0].address, 0u);
  EXPECT_EQ(p.text[1].address, 4u);
  EXPECT_EQ(p.text[2].address, 8u);
  EXPECT_EQ(p.blocks.size(), 1u);
  EXPECT_TRUE(p.edges.empty());
}

TEST(Assemble, EncodingFields) {
  const auto p = load_program(
      ".text\n.func main\n  li r3, -2\n  lw r4, 8(r3)\n  sw r4, x+4(r0)\n  sub r1, r2, r3\n  halt\n"
      ".endfunc\n.data\nx: .word 1, 2\n");
  EXPECT_EQ(p.text[0].word, 0x1030FFFEu);
  EXPECT_EQ(p.text[1].word, 0x20430008u);
  EXPECT_EQ(p.text[2].word, 0x21404004u);
  EXPECT_EQ(p.text[3].word, 0x02123000u);
  ASSERT_EQ(p.data.size(), 1u);
  EXPECT_EQ(p.data[0].base, 0x4000u);
  EXPECT_EQ(p.data[0].size, 8u);
}

TEST(Assemble, Errors) {
  EXPECT_EQ(stage_of(".text\n.func main\na:\na:\n  halt\n.endfunc\n"), "asm");
  EXPECT_EQ(stage_of(".text\n.func main\n  j nowhere\n  halt\n.endfunc\n"), "asm");
  EXPECT_EQ(stage_of(".text\n.func main\n  li r1, 70000\n  halt\n.endfunc\n"), "asm");
  EXPECT_FALSE(stage_of(".text\n.func main\n  halt\n.endfunc\n.loopbound nowhere 3\n").empty());
  EXPECT_EQ(stage_of(".text\n.func main\n  frob r1\n  halt\n.endfunc\n"), "asm");
}

TEST(Assemble, SkewedMatchesGolden) {
  const auto p = bench("skewed");
  std::ostringstream got;
  got << "instructions " << p.text.size() << "\n";
  char buf[64];
  for (const auto& d : p.data) {
    std::snprintf(buf, sizeof buf, "%s 0x%04x %u\n", d.name.c_str(), d.base, d.size);
    got << buf;
  }
  EXPECT_EQ(got.str(), slurp(source_path("tests/golden/skewed.symbols")));
}

TEST(Assemble, DisassemblyRoundTrip) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto again = load_program(disassemble(p));
    EXPECT_TRUE(again.same_image(p)) << name;
    EXPECT_EQ(disassemble(again), disassemble(p)) << name;
  }
}

TEST(Cfg, StraightLineHasNoEdges) {
  const auto p = load_program(".text\n.func main\n  nop\n  nop\n  halt\n.endfunc\n");
  EXPECT_EQ(p.blocks.size(), 1u);
  EXPECT_TRUE(p.edges.empty());
}

TEST(Cfg, SelfLoopWithExit) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, 0\n  li r2, 4\n  li r3, 1\nloop:\n  add r1, r1, r3\n"
      "  blt r1, r2, loop\n  halt\n.endfunc\n.loopbound loop 4\n");
  ASSERT_EQ(p.blocks.size(), 3u);
  const auto& body = p.blocks[1];
  ASSERT_EQ(body.succs.size(), 2u);
  std::set<std::pair<BlockId, EdgeKind>> out;
  for (EdgeId e : body.succs) out.insert({p.edges[e].dst, p.edges[e].kind});
  EXPECT_TRUE(out.count({1, EdgeKind::Taken}));
  EXPECT_TRUE(out.count({2, EdgeKind::FallThrough}));
  const auto loops = find_loops(p);
  ASSERT_EQ(loops.loops.size(), 1u);
  EXPECT_EQ(loops.loops[0].header, 1u);
  EXPECT_EQ(loops.loops[0].back_edges.size(), 1u);
  EXPECT_EQ(loops.loops[0].entry_edges.size(), 1u);
  EXPECT_EQ(p.flow_facts[0].header, 1u);
}

TEST(Cfg, CallAndReturnEdges) {
  const auto p = load_program(
      ".text\n.func main\n  jal f\n  jal f\n  halt\n.endfunc\n.func f\n  nop\n  jr r15\n.endfunc\n");
  std::size_t calls = 0, returns = 0;
  for (const auto& e : p.edges) {
    if (e.kind == EdgeKind::Call) ++calls;
    if (e.kind == EdgeKind::Return) {
      ++returns;
      EXPECT_EQ(p.blocks[e.dst].first, p.blocks[e.call_block].last() + 1);
    }
  }
  EXPECT_EQ(calls, 2u);
  EXPECT_EQ(returns, 2u);
}

TEST(Cfg, ComputedJumpRejected) {
  EXPECT_EQ(stage_of(".text\n.func main\n  li r1, 0\n  jr r1\n.endfunc\n"), "cfg");
}

TEST(Cfg, AdpcmMatchesGolden) {
  const auto p = bench("adpcm_like");
  std::ostringstream got;
  got << "blocks " << p.blocks.size() << "\nedges " << p.edges.size() << "\nfunctions "
      << p.functions.size() << "\n";
  EXPECT_EQ(got.str(), slurp(source_path("tests/golden/adpcm_like.cfg")));
}

TEST(Cfg, StructuralInvariants) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    std::vector<int> seen(p.text.size(), 0);
    for (const auto& b : p.blocks) {
      for (InstrIndex i = b.first; i <= b.last(); ++i) {
        ++seen[i];
        EXPECT_EQ(p.block_of[i], b.id);
      }
      for (EdgeId e : b.succs) EXPECT_EQ(p.edges[e].src, b.id);
      for (EdgeId e : b.preds) EXPECT_EQ(p.edges[e].dst, b.id);
    }
    for (const auto& e : p.edges) {
      const auto& s = p.blocks[e.src].succs;
      const auto& d = p.blocks[e.dst].preds;
      EXPECT_NE(std::find(s.begin(), s.end(), e.id), s.end());
      EXPECT_NE(std::find(d.begin(), d.end(), e.id), d.end());
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; })) << name;
    for (InstrIndex i = 0; i < p.text.size(); ++i) EXPECT_EQ(p.text[i].address, 4 * i);
  }
}

TEST(Annotations, RoundTripAbsenceAndLastWrite) {
  auto p = load_program(".text\n.func main\n  nop\n  halt\n.endfunc\n");
  p.annotate(instr_entity(1), "compressed_addr", AddressValue{0x40});
  EXPECT_EQ(p.annotations.get_as<AddressValue>(instr_entity(1), "compressed_addr")->value, 0x40u);
  EXPECT_FALSE(p.get_annotation(instr_entity(0), "compressed_addr").has_value());
  p.annotate(instr_entity(1), "compressed_addr", AddressValue{0x44});
  EXPECT_EQ(p.annotations.get_as<AddressValue>(instr_entity(1), "compressed_addr")->value, 0x44u);
  p.annotate(instr_entity(0), "count", std::int64_t{0});
  EXPECT_EQ(p.annotations.get_as<std::int64_t>(instr_entity(0), "count"), std::int64_t{0});
  EXPECT_THROW(p.annotate(instr_entity(9), "x", true), Error);
}
