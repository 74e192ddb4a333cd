#include <gtest/gtest.h>

#include <set>

#include "critbench/error.hpp"
#include "critbench/experiment.hpp"
#include "critbench/ilp.hpp"
#include "critbench/wcet.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

namespace {

CacheClass iclass(const WcetReport& r, InstrIndex i) { return r.icache.classes[i].cls; }

CacheClass dclass(const WcetReport& r, InstrIndex i) {
  return r.data.cache.classes.empty() ? CacheClass::NotClassified : r.data.cache.classes[i].cls;
}

std::int64_t ipet(const Program& p, const std::vector<std::uint64_t>& t,
                  const std::vector<PersistentLine>& persistent = {}) {
  const auto loops = find_loops(p);
  const auto model = build_ipet(p, t, persistent, build_scopes(p, loops), loops);
  const auto sol = solve_ilp(model.ilp);
  EXPECT_EQ(sol.status, IlpStatus::Optimal);
  return sol.objective;
}

}  // namespace

TEST(MustCache, AccessAgesAndJoin) {
  const CacheConfig c{64, 2, 16, 1, 10};
  AbstractCacheState s(c.sets());
  must_access(s, c, 0);
  must_access(s, c, 2);
  EXPECT_EQ(s.age_of(2, 0), 0u);
  EXPECT_EQ(s.age_of(0, 0), 1u);
  must_access(s, c, 4);
  EXPECT_FALSE(s.age_of(0, 0).has_value());
  AbstractCacheState t(c.sets());
  must_access(t, c, 4);
  const auto j = must_join(s, t);
  EXPECT_EQ(j.age_of(4, 0), 0u);
  EXPECT_FALSE(j.age_of(2, 0).has_value());
  must_age_set(t, c, 0);
  EXPECT_EQ(t.age_of(4, 0), 1u);
}

TEST(ICache, SameLineFallThroughAlwaysHits) {
  const auto p = load_program(".text\n.func main\n  nop\n  nop\n  halt\n.endfunc\n");
  const auto r = compute_wcet(p, preset_config1());
  EXPECT_EQ(iclass(r, 1), CacheClass::AlwaysHit);
  EXPECT_EQ(iclass(r, 2), CacheClass::AlwaysHit);
}

TEST(ICache, SingleLineLoopMissesOnce) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, 0\n  li r2, 8\n  li r3, 1\n  nop\nloop:\n  add r1, r1, r3\n"
      "  blt r1, r2, loop\n  halt\n.endfunc\n.loopbound loop 8\n");
  const auto r = compute_wcet(p, preset_config1());
  EXPECT_EQ(iclass(r, 4), CacheClass::Persistent);
  EXPECT_EQ(iclass(r, 5), CacheClass::AlwaysHit);
  const auto sim = simulate(p, preset_config1());
  EXPECT_LE(sim.fetch_misses[4], 1u);
  EXPECT_GE(r.wcet, sim.cycles);
}

TEST(ICache, IterationCap) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto hw = preset_config1();
    const auto r = compute_wcet(p, hw);
    const auto cap = p.blocks.size() * hw.icache.associativity * hw.icache.sets();
    EXPECT_LE(r.icache.iterations, cap) << name;
    EXPECT_LE(r.data.cache.iterations, p.blocks.size() * hw.dcache->associativity * hw.dcache->sets());
  }
}

TEST(DCache, ScratchpadAccessesLeaveNothingUnclassified) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, x\n  lw r2, 0(r1)\n  lw r3, 4(r1)\n  sw r3, 8(r1)\n  halt\n.endfunc\n"
      ".data\nx: .word 1, 2, 3\n");
  PlacementMap map;
  map.spm_size = 512;
  map.symbols = {"x"};
  WcetOptions o;
  o.placement = &map;
  const auto r = compute_wcet(p, preset_config2(), o);
  EXPECT_EQ(r.dcache_stats.not_classified, 0u);
  EXPECT_EQ(r.spm_accesses, 3u);
  EXPECT_EQ(r.data.route[1], DataRoute::Spm);
}

TEST(DCache, RepeatedGlobalLoadInLoop) {
  const auto p = load_program(
      ".text\n.func main\n  li r1, 0\n  li r2, 5\n  li r3, 1\nloop:\n  lw r4, x(r0)\n  add r1, r1, r3\n"
      "  blt r1, r2, loop\n  halt\n.endfunc\n.loopbound loop 5\n.data\nx: .word 9\n");
  const auto r = compute_wcet(p, preset_config1());
  const auto c = dclass(r, 3);
  EXPECT_TRUE(c == CacheClass::Persistent || c == CacheClass::AlwaysHit);
}

TEST(DCache, UnresolvedStoreClearsState) {
  const auto p = load_program(
      ".text\n.func main\n  lw r1, x(r0)\n  lw r5, ptr(r0)\n  sw r1, 0(r5)\n  lw r2, x+4(r0)\n  halt\n"
      ".endfunc\n.data\nx: .word 1, 2\nptr: .word 0x4000\n");
  const auto r = compute_wcet(p, preset_config1());
  EXPECT_EQ(r.data.route[2], DataRoute::Unknown);
  EXPECT_NE(dclass(r, 3), CacheClass::AlwaysHit);
  EXPECT_EQ(r.data.cache.classes[3].cls, CacheClass::NotClassified);
}

TEST(BlockTime, PairedAluAndMissPenalty) {
  const auto p = load_program(
      ".text\n.func main\n  add r1, r2, r3\n  add r4, r5, r6\nl:\n  lw r7, x(r0)\n  bne r1, r1, l\n"
      "  halt\n.endfunc\n.data\nx: .word 0\n");
  const auto hw = preset_config1();
  const auto fetch = fetch_map(p, nullptr);
  CacheAnalysis ic;
  ic.classes.assign(p.text.size(), AccessClass{true, CacheClass::AlwaysHit, -1, 0});
  DataAnalysis data;
  data.route.assign(p.text.size(), DataRoute::None);
  data.route[2] = DataRoute::Cache;
  data.cache.classes.assign(p.text.size(), AccessClass{});
  data.cache.classes[2] = AccessClass{true, CacheClass::AlwaysHit, -1, 0};
  EXPECT_EQ(block_time(p, 0, hw, fetch, ic, data), 1u);
  const auto hit = block_time(p, 1, hw, fetch, ic, data);
  data.cache.classes[2].cls = CacheClass::NotClassified;
  EXPECT_EQ(block_time(p, 1, hw, fetch, ic, data) - hit, hw.dcache->miss_penalty);
  EXPECT_EQ(persistent_miss_cost(hw.icache), hw.icache.miss_penalty + 1);
}

// Every simulated block visit costs at most its bound plus the persistent
// misses it actually took.
TEST(BlockTime, BoundsEverySimulatedVisit) {
  for (const auto& name : suite()) {
    const auto base = bench(name);
    for (const auto& hw : {preset_config1(), preset_config2()}) {
      std::vector<TransformSpec> specs{TransformSpec{}, TransformSpec::compression(50),
                                       TransformSpec::inline_all()};
      if (hw.spm) specs.push_back(TransformSpec::placement(PlacementStrategy::HighFrequency));
      for (const auto& spec : specs) {
        const auto in = bench_input(name, 1);
        const auto v = make_variant(base, hw, spec, bench_input(name, 0));
        WcetOptions wo;
        wo.placement = v.placement ? &*v.placement : nullptr;
        wo.compression = v.compression ? &*v.compression : nullptr;
        const auto w = compute_wcet(v.program, hw, wo);
        std::uint64_t visits = 0, bad = 0;
        auto o = v.sim_options(&in);
        o.on_block = [&](const BlockVisit& b) {
          std::uint64_t extra = 0;
          for (auto i : b.fetch_missed) {
            if (w.icache.classes[i].cls == CacheClass::Persistent) extra += persistent_miss_cost(hw.icache);
          }
          for (auto i : b.data_missed) {
            if (w.data.cache.classes[i].cls == CacheClass::Persistent) {
              extra += persistent_miss_cost(*hw.dcache);
            }
          }
          ++visits;
          if (b.cycles > w.block_times[b.block] + extra) ++bad;
        };
        const auto sim = simulate(v.program, hw, o);
        EXPECT_GT(visits, 0u);
        EXPECT_EQ(bad, 0u) << name << " " << hw.name << " " << spec.label();
        // The simulated path is a feasible IPET solution.
        std::uint64_t witness = 0;
        for (BlockId b = 0; b < v.program.blocks.size(); ++b) witness += w.block_times[b] * sim.block_exec[b];
        EXPECT_LE(witness, w.wcet);
      }
    }
  }
}

TEST(Ipet, StraightLine) {
  const auto p = load_program(".text\n.func main\n  nop\n  j a\na:\n  nop\n  j b\nb:\n  halt\n.endfunc\n");
  ASSERT_EQ(p.blocks.size(), 3u);
  EXPECT_EQ(ipet(p, {3, 4, 5}), 12);
}

TEST(Ipet, DiamondTakesLongerArm) {
  const auto p = load_program(
      ".text\n.func main\n  beq r1, r2, other\n  nop\n  j join\nother:\n  nop\njoin:\n  halt\n.endfunc\n");
  ASSERT_EQ(p.blocks.size(), 4u);
  EXPECT_EQ(ipet(p, {1, 5, 9, 1}), 11);
  EXPECT_EQ(ipet(p, {1, 9, 5, 1}), 11);
}

TEST(Ipet, BoundedLoopWithPersistentLine) {
  const auto p = load_program(
      ".text\n.func main\n  nop\nh:\n  bge r1, r2, out\n  nop\n  j h\nout:\n  halt\n.endfunc\n"
      ".loopbound h 10\n");
  ASSERT_EQ(p.blocks.size(), 4u);
  const auto loops = find_loops(p);
  const auto scopes = build_scopes(p, loops);
  int loop_scope = -1;
  for (std::size_t s = 0; s < scopes.size(); ++s) {
    if (scopes[s].kind == Scope::Kind::Loop) loop_scope = static_cast<int>(s);
  }
  ASSERT_GE(loop_scope, 0);
  PersistentLine line{true, 7, loop_scope, 10, {2}};
  // Path enumeration: entry, ten header visits, nine body visits, exit, one
  // miss of the persistent line.
  EXPECT_EQ(ipet(p, {1, 2, 7, 1}, {line}), 1 + 10 * 2 + 9 * 7 + 1 + 10);
  EXPECT_EQ(ipet(p, {1, 2, 7, 1}), 1 + 10 * 2 + 9 * 7 + 1);
}

TEST(Ipet, LoopAtProgramEntry) {
  const auto p = load_program(
      ".text\n.func main\nh:\n  nop\n  blt r1, r2, h\n  halt\n.endfunc\n.loopbound h 4\n");
  EXPECT_EQ(ipet(p, {5, 1}), 4 * 5 + 1);
}

TEST(Ipet, MissingBoundRefused) {
  const auto p = load_program(".text\n.func main\nh:\n  nop\n  blt r1, r2, h\n  halt\n.endfunc\n");
  try {
    compute_wcet(p, preset_config1());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "wcet");
    EXPECT_NE(std::string(e.what()).find("loop bound"), std::string::npos);
  }
}

TEST(Ilp, ForcedRounding) {
  IlpModel m;
  const auto x1 = m.add_var("x1", 1), x2 = m.add_var("x2", 1);
  m.add_constraint({{x1, 2}, {x2, 2}}, Sense::LessEq, 3);
  const auto s = solve_ilp(m);
  EXPECT_EQ(s.status, IlpStatus::Optimal);
  EXPECT_EQ(s.objective, 1);
  EXPECT_EQ(solve_lp_relaxation(m), "3/2");
}

TEST(Ilp, IntegralFlowSolvedAtRoot) {
  IlpModel m;
  const auto a = m.add_var("a", 3), b = m.add_var("b", 4);
  m.add_constraint({{a, 1}, {b, 1}}, Sense::Equal, 5);
  m.add_constraint({{b, 1}}, Sense::LessEq, 2);
  const auto s = solve_ilp(m);
  EXPECT_EQ(s.objective, 3 * 3 + 4 * 2);
  EXPECT_EQ(s.nodes, 1u);
}

TEST(Ilp, InfeasibleAndUnbounded) {
  IlpModel m;
  const auto a = m.add_var("a", 1);
  m.add_constraint({{a, 1}}, Sense::GreaterEq, 3);
  m.add_constraint({{a, 1}}, Sense::LessEq, 2);
  EXPECT_EQ(solve_ilp(m).status, IlpStatus::Infeasible);
  IlpModel u;
  const auto x = u.add_var("x", 1);
  u.add_constraint({{x, 1}}, Sense::GreaterEq, 1);
  EXPECT_EQ(solve_ilp(u).status, IlpStatus::Unbounded);
}

TEST(Wcet, RecursionRejected) {
  const auto p = load_program(
      ".text\n.func main\n  jal f\n  halt\n.endfunc\n.func f\n  beq r0, r0, out\n  jal f\nout:\n  jr r15\n"
      ".endfunc\n");
  EXPECT_THROW(compute_wcet(p, preset_config1()), Error);
}

TEST(Wcet, BoundsSimulationOnSuite) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    for (const auto& hw : {preset_config1(), preset_config2()}) {
      const auto w = compute_wcet(p, hw);
      for (int k = 0; k < 3; ++k) {
        const auto in = bench_input(name, k);
        SimOptions o;
        o.input = &in;
        EXPECT_GE(w.wcet, simulate(p, hw, o).cycles) << name << " " << hw.name;
      }
    }
  }
}

TEST(Wcet, PlacementNeverRaisesBound) {
  const auto hw = preset_config2();
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto base = compute_wcet(p, hw).wcet;
    for (auto s : {PlacementStrategy::FirstUsed, PlacementStrategy::SmallSizeFirst,
                   PlacementStrategy::HighFrequency}) {
      const auto v = make_variant(p, hw, TransformSpec::placement(s), bench_input(name, 0));
      WcetOptions o;
      o.placement = &*v.placement;
      EXPECT_LE(compute_wcet(p, hw, o).wcet, base) << name << " " << to_string(s);
    }
  }
}

TEST(Wcet, Directions) {
  const auto c1 = preset_config1(), c2 = preset_config2();
  const auto adpcm = bench("adpcm_like");
  const auto v = make_variant(adpcm, c2, TransformSpec::placement(PlacementStrategy::HighFrequency),
                              bench_input("adpcm_like", 0));
  WcetOptions o;
  o.placement = &*v.placement;
  EXPECT_LT(compute_wcet(adpcm, c2, o).wcet, compute_wcet(adpcm, c1).wcet);
  const auto helico = bench("helico_like");
  EXPECT_LT(compute_wcet(inline_everything(helico), c1).wcet, compute_wcet(helico, c1).wcet);
}

TEST(Wcet, AnnotationsAndJson) {
  auto p = bench("skewed");
  const auto r = compute_wcet(p, preset_config1());
  annotate_classes(p, r);
  EXPECT_EQ(p.annotations.get_as<CacheClass>(instr_entity(1), "icache_class"), r.icache.classes[1].cls);
  const auto j = to_json(r);
  EXPECT_EQ(j["wcet_cycles"].get<std::uint64_t>(), r.wcet);
  EXPECT_EQ(j["block_counts"].size(), p.blocks.size());
}
