#include <gtest/gtest.h>

#include <random>

#include "critbench/cache.hpp"
#include "critbench/energy.hpp"
#include "critbench/error.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

TEST(HwConfig, ShippedConfigsMatchPresets) {
  const auto c1 = load_hw_config(source_path("configs/config1.json"));
  const auto c2 = load_hw_config(source_path("configs/config2.json"));
  EXPECT_EQ(c1, preset_config1());
  EXPECT_EQ(c2, preset_config2());
  EXPECT_EQ(c1.icache.size, 1024u);
  EXPECT_EQ(c1.icache.associativity, 2u);
  ASSERT_TRUE(c1.dcache);
  EXPECT_EQ(c1.dcache->size, 1024u);
  EXPECT_FALSE(c1.spm);
  ASSERT_TRUE(c2.dcache && c2.spm);
  EXPECT_EQ(c2.dcache->size, 512u);
  EXPECT_EQ(c2.spm->size, 512u);
  EXPECT_EQ(c1.icache, c2.icache);
  EXPECT_EQ(c1.pipeline, c2.pipeline);
}

TEST(HwConfig, SerializeLoadFixedPoint) {
  for (const auto& hw : {preset_config1(), preset_config2()}) {
    const auto text = serialize_hw_config(hw);
    const auto back = hw_config_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, hw);
    EXPECT_EQ(serialize_hw_config(back), text);
  }
}

TEST(HwConfig, Rejections) {
  auto j = nlohmann::json::parse(serialize_hw_config(preset_config1()));
  auto bad = j;
  bad["icache"]["size"] = 1000;
  try {
    hw_config_from_json(bad);
    FAIL() << "size 1000 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "hw");
  }
  auto no_energy = nlohmann::json::parse(serialize_hw_config(preset_config2()));
  no_energy["energy"].erase("spm");
  EXPECT_THROW(hw_config_from_json(no_energy), Error);
}

TEST(Cache, ColdReadMissesWithoutDirtyEviction) {
  CacheState s(CacheConfig{});
  const auto out = cache_access(s, 0x100, AccessKind::Read);
  EXPECT_FALSE(out.hit);
  EXPECT_FALSE(out.evicted);
  EXPECT_FALSE(out.evicted_dirty);
}

TEST(Cache, LruEvictsLeastRecent) {
  const CacheConfig c{64, 2, 16, 1, 10};  // 2 sets
  CacheState s(c);
  const Address A = 0x000, B = 0x020, C = 0x040;  // all map to set 0
  EXPECT_FALSE(cache_access(s, A, AccessKind::Read).hit);
  EXPECT_FALSE(cache_access(s, B, AccessKind::Write).hit);
  EXPECT_TRUE(cache_access(s, A, AccessKind::Read).hit);
  const auto out = cache_access(s, C, AccessKind::Read);
  EXPECT_FALSE(out.hit);
  ASSERT_TRUE(out.evicted);
  EXPECT_EQ(out.evicted_line, B / 16);
  EXPECT_TRUE(out.evicted_dirty);
  EXPECT_TRUE(s.holds(A));
  EXPECT_FALSE(s.holds(B));
}

TEST(Cache, RandomSequenceMatchesNaiveLru) {
  for (const auto& c : {CacheConfig{1024, 2, 16, 1, 10}, CacheConfig{256, 4, 16, 1, 10},
                        CacheConfig{64, 1, 16, 1, 10}}) {
    CacheState s(c);
    NaiveLru ref(c);
    std::mt19937 rng(7);
    for (int i = 0; i < 1000; ++i) {
      const Address a = (rng() % (c.size * 3)) & ~3u;
      const bool w = rng() % 4 == 0;
      const auto got = cache_access(s, a, w ? AccessKind::Write : AccessKind::Read);
      const auto want = ref.access(a, w);
      ASSERT_EQ(got.hit, want.hit) << "access " << i;
      ASSERT_EQ(got.evicted_dirty, want.dirty_victim) << "access " << i;
    }
  }
}

TEST(Energy, ZeroCounters) {
  const auto r = estimate_energy(Counters{}, preset_config2().energy);
  EXPECT_EQ(r.total_fj, 0u);
  EXPECT_EQ(format_pj(r.total_fj), "0.000");
}

TEST(Energy, DirectFormula) {
  EnergyTable t;
  t.dram = AccessEnergy{100'000, 120'000};
  Counters c;
  c.dram = {4, 2};
  const auto r = estimate_energy(c, t);
  EXPECT_EQ(r.total_fj, 640'000u);
  EXPECT_EQ(format_pj(r.total_fj), "640.000");
  ASSERT_EQ(r.components.size(), 1u);
  EXPECT_DOUBLE_EQ(r.components[0].share, 1.0);
}

TEST(Energy, MissingTableEntryRejected) {
  EnergyTable t;
  Counters c;
  c.spm = {1, 0};
  EXPECT_THROW(estimate_energy(c, t), Error);
}

TEST(Energy, PicojouleRendering) {
  EXPECT_EQ(format_pj(1), "0.001");
  EXPECT_EQ(format_pj(1234567), "1234.567");
  EXPECT_EQ(format_pj(18446744073709551615ull), "18446744073709551.615");
}

// Counters from a saved report, recomputed line by line from the JSON alone.
TEST(Energy, SkewedHighFrequencyRecomputedFromCounterFile) {
  const auto hw = preset_config2();
  const auto p = bench("skewed");
  const auto in = bench_input("skewed", 0);
  SimOptions o;
  o.input = &in;
  o.record_trace = true;
  const auto pre = simulate(p, hw, o);
  const auto map = make_placement(PlacementStrategy::HighFrequency, build_objects(p, *pre.trace),
                                  *pre.trace, hw.spm->size);
  o.record_trace = false;
  o.placement = &map;
  const auto run = simulate(p, hw, o);
  const auto file = nlohmann::json::parse(to_json(run.counters).dump());
  const auto table = nlohmann::json::parse(serialize_hw_config(hw))["energy"];
  std::uint64_t fj = 0;
  for (const char* comp : {"icache", "dcache", "spm", "dram"}) {
    const auto& e = table[comp];
    const auto& a = file[comp];
    const auto pj = [](const nlohmann::json& v) {
      return static_cast<std::uint64_t>(std::llround(v.get<double>() * 1000));
    };
    fj += a["reads"].get<std::uint64_t>() * pj(e["read"]) +
          a["writes"].get<std::uint64_t>() * pj(e["write"]);
  }
  EXPECT_EQ(estimate_energy(counters_from_json(file), hw.energy).total_fj, fj);
  EXPECT_EQ(estimate_energy(run.counters, hw.energy).total_fj, fj);
}
