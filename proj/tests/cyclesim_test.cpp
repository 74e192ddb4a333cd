#include <gtest/gtest.h>

#include "critbench/energy.hpp"
#include "critbench/error.hpp"
#include "critbench/trace.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

TEST(Simulator, HaltOnly) {
  const auto p = load_program(".text\n.func main\n  halt\n.endfunc\n");
  const auto r = simulate(p, preset_config1());
  EXPECT_EQ(r.counters.executed, 1u);
  EXPECT_EQ(r.counters.dcache, AccessCounts{});
  EXPECT_EQ(r.counters.spm, AccessCounts{});
  EXPECT_EQ(r.counters.dcache_stats, CacheStats{});
}

TEST(Simulator, SecondLoadHitsFilledLine) {
  const auto p = load_program(
      ".text\n.func main\n  lw r1, x(r0)\n  lw r2, x+4(r0)\n  halt\n.endfunc\n.data\nx: .word 5, 6\n");
  const auto hw = preset_config1();
  const auto r = simulate(p, hw);
  EXPECT_EQ(r.counters.dcache_stats.misses, 1u);
  EXPECT_EQ(r.counters.dcache_stats.hits, 1u);
  const auto icache_fill = r.counters.icache_stats.misses * hw.icache.line_size / hw.dram.bus_width;
  EXPECT_EQ(r.counters.dram.reads - icache_fill, hw.dcache->line_size / hw.dram.bus_width);
  EXPECT_EQ(r.registers[1], 5u);
  EXPECT_EQ(r.registers[2], 6u);
}

TEST(Simulator, OutputPortAndInput) {
  const auto p = load_program(
      ".text\n.func main\n  lw r1, x(r0)\n  li r2, 0x7FFC\n  sw r1, 0(r2)\n  halt\n.endfunc\n"
      ".data\nx: .word 5\n");
  const auto in = parse_input("x 0x2a\n");
  SimOptions o;
  o.input = &in;
  const auto r = simulate(p, preset_config1(), o);
  ASSERT_EQ(r.output.size(), 1u);
  EXPECT_EQ(r.output[0], 42u);
}

TEST(Simulator, Errors) {
  const auto unaligned = load_program(".text\n.func main\n  li r1, 0x4001\n  lw r2, 0(r1)\n  halt\n.endfunc\n"
                                      ".data\nx: .word 1\n");
  EXPECT_THROW(simulate(unaligned, preset_config1()), Error);
  const auto forever = load_program(".text\n.func main\nl:\n  j l\n  halt\n.endfunc\n");
  SimOptions o;
  o.cycle_limit = 1000;
  try {
    simulate(forever, preset_config1(), o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "sim");
  }
}

TEST(Simulator, TimingOfPairedAndDependentInstructions) {
  const auto hw = preset_config1();
  const auto pair =
      load_program(".text\n.func main\n  li r1, 1\n  li r2, 2\n  li r3, 3\n  halt\n.endfunc\n");
  const auto dep =
      load_program(".text\n.func main\n  li r1, 1\n  add r2, r1, r1\n  li r3, 3\n  halt\n.endfunc\n");
  // Same fetch misses; {li,li}{li,halt} against {li}{add,li}{halt}.
  EXPECT_EQ(simulate(dep, hw).cycles, simulate(pair, hw).cycles + 1);
}

// Functional state and memory-side counters against the plain interpreter.
TEST(Simulator, AgreesWithReferenceInterpreter) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    for (int k = 0; k < 3; ++k) {
      const auto in = bench_input(name, k);
      for (const auto& hw : {preset_config1(), preset_config2()}) {
        SimOptions o;
        o.input = &in;
        const auto sim = simulate(p, hw, o);
        auto ref = reference_run(p, hw, &in);
        EXPECT_EQ(std::vector<Word>(sim.registers.begin(), sim.registers.end()), ref.registers) << name;
        EXPECT_EQ(sim.output, ref.output) << name;
        for (std::size_t i = 0; i < sim.data_image.size(); ++i) {
          ASSERT_EQ(sim.data_image[i], ref.memory[p.layout.data_base + 4 * i]) << name;
        }
        EXPECT_EQ(sim.counters.executed, ref.executed) << name;
        EXPECT_EQ(sim.counters.icache, ref.icache) << name;
        EXPECT_EQ(sim.counters.dcache, ref.dcache) << name << " " << hw.name;
        EXPECT_EQ(sim.counters.spm, ref.spm) << name;
        EXPECT_EQ(sim.counters.dram, ref.dram) << name << " " << hw.name;
      }
    }
  }
}

TEST(Simulator, SkewedHighFrequencyEnergyFromReferenceCounters) {
  const auto p = bench("skewed");
  const auto in = bench_input("skewed", 0);
  const auto c1 = preset_config1(), c2 = preset_config2();
  SimOptions o;
  o.input = &in;
  o.record_trace = true;
  const auto pre = simulate(p, c2, o);
  const auto map = make_placement(PlacementStrategy::HighFrequency, build_objects(p, *pre.trace),
                                  *pre.trace, c2.spm->size);
  const auto energy = [](const ReferenceRun& r, const EnergyTable& t) {
    std::uint64_t fj = 0;
    const std::pair<const AccessCounts*, const std::optional<AccessEnergy>*> parts[] = {
        {&r.icache, &t.icache}, {&r.dcache, &t.dcache}, {&r.spm, &t.spm}, {&r.dram, &t.dram}};
    for (const auto& [a, e] : parts) {
      if (*e) fj += a->reads * (*e)->read_fj + a->writes * (*e)->write_fj;
    }
    return fj;
  };
  const auto base = energy(reference_run(p, c1, &in), c1.energy);
  const auto placed_ref = reference_run(p, c2, &in, &map);
  const auto placed = energy(placed_ref, c2.energy);
  EXPECT_LT(placed, base);
  o.record_trace = false;
  o.placement = &map;
  EXPECT_EQ(estimate_energy(simulate(p, c2, o).counters, c2.energy).total_fj, placed);
}

TEST(Trace, SerializeParseRoundTrip) {
  const auto p = bench("skewed");
  const auto in = bench_input("skewed", 1);
  SimOptions o;
  o.input = &in;
  o.record_trace = true;
  const auto t = *simulate(p, preset_config1(), o).trace;
  const auto text = serialize_trace(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "0,W,0x00004300,4,mid");
  EXPECT_EQ(parse_trace(text), t);
  EXPECT_EQ(parse_trace(text).digest(), t.digest());
}
