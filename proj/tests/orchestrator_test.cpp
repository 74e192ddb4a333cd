#include <gtest/gtest.h>

#include "critbench/error.hpp"
#include "critbench/experiment.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

namespace {

ExperimentPoint point(const std::string& name, const std::string& hw, TransformSpec t, int input = 1) {
  return {bench_path(name), hw, std::move(t),
          source_path("benchmarks/" + name + "/in" + std::to_string(input) + ".txt"), ""};
}

}  // namespace

TEST(TransformSpec, LabelsAndParsing) {
  EXPECT_EQ(TransformSpec::parse("none").label(), "none");
  EXPECT_EQ(TransformSpec::parse("place:high-frequency").label(), "place:high-frequency");
  EXPECT_EQ(TransformSpec::parse("compress:25").label(), "compress:25");
  EXPECT_EQ(TransformSpec::parse("inline-all").label(), "inline-all");
  EXPECT_EQ(TransformSpec::parse("script:" + source_path("benchmarks/skewed/unroll.xform")).kind,
            TransformSpec::Kind::Script);
  try {
    TransformSpec::parse("compress:150");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "dictzip");
  }
  EXPECT_THROW(TransformSpec::parse("shuffle"), Error);
}

TEST(RunPoint, BaselineMatchesGolden) {
  const auto r = run_point(point("adpcm_like", "config1", {}));
  EXPECT_EQ(to_json(r).dump(2) + "\n", slurp(source_path("tests/golden/adpcm_like.config1.none.json")));
}

TEST(RunPoint, Deterministic) {
  for (const auto& t : {TransformSpec{}, TransformSpec::compression(50),
                        TransformSpec::placement(PlacementStrategy::FirstUsed)}) {
    const auto a = to_json(run_point(point("compress_like", "config2", t))).dump();
    const auto b = to_json(run_point(point("compress_like", "config2", t))).dump();
    EXPECT_EQ(a, b);
  }
}

TEST(RunPoint, PlacementKeepsCodeSize) {
  const auto base = run_point(point("helico_like", "config2", {}));
  const auto placed = run_point(point("helico_like", "config2", TransformSpec::placement(PlacementStrategy::HighFrequency)));
  EXPECT_EQ(placed.code_size, base.code_size);
  EXPECT_EQ(placed.code_size_with_dictionary, base.code_size_with_dictionary);
  EXPECT_EQ(placed.state_digest, base.state_digest);
  EXPECT_GT(placed.counters.spm_hits, 0u);
}

TEST(RunPoint, PlacementNeedsScratchpad) {
  try {
    run_point(point("skewed", "config1", TransformSpec::placement(PlacementStrategy::HighFrequency)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.stage(), "place");
  }
}

TEST(RunPoint, MissingLoopBoundSkipsWcet) {
  const std::string path = testing::TempDir() + "unbounded.masm";
  {
    std::ofstream out(path);
    out << ".text\n.func main\n  li r1, 0\n  li r2, 3\n  li r3, 1\nl:\n  add r1, r1, r3\n"
           "  blt r1, r2, l\n  halt\n.endfunc\n";
  }
  const auto r = run_point({path, "config1", {}, "", ""});
  EXPECT_FALSE(r.wcet_cycles.has_value());
  EXPECT_NE(r.wcet_note.find("l"), std::string::npos);
  const auto j = to_json(r);
  EXPECT_TRUE(j["wcet_cycles"].is_null());
  EXPECT_GT(r.acet_cycles, 0u);
}

TEST(Sweep, PercentGrid) {
  for (const auto& name : suite()) {
    const auto res = run_sweep(point(name, "config1", {}), SweepSpec::parse("P=0,100"));
    ASSERT_EQ(res.records.size(), 2u);
    EXPECT_LE(res.records[0].code_size_with_dictionary, res.records[1].code_size_with_dictionary) << name;
    EXPECT_EQ(res.csv.substr(0, res.csv.find('\n')), "param,code_size,energy_pj,acet_cycles,wcet_cycles");
    EXPECT_EQ(std::count(res.csv.begin(), res.csv.end(), '\n'), 3);
  }
}

TEST(Sweep, EmptyGrid) {
  const auto res = run_sweep(point("skewed", "config1", {}), SweepSpec::parse("P="));
  EXPECT_TRUE(res.records.empty());
  EXPECT_EQ(res.csv, std::string(kSweepHeader) + "\n");
}

TEST(Sweep, BaselineSameInsideAndOutside) {
  const auto standalone = run_point(point("skewed", "config2", {}));
  const auto res = run_sweep(point("skewed", "config2", {}), SweepSpec::parse("strategy=none,high-frequency"));
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_EQ(to_json(res.records[0]).dump(), to_json(standalone).dump());
  EXPECT_LT(res.records[1].energy.total_fj, res.records[0].energy.total_fj);
}

TEST(Sweep, BadSpecs) {
  EXPECT_THROW(SweepSpec::parse("Q=1"), Error);
  EXPECT_THROW(SweepSpec::parse("P=0,x"), Error);
  EXPECT_THROW(SweepSpec::parse("strategy=biggest"), std::exception);
}

TEST(Hw, Resolve) {
  EXPECT_EQ(resolve_hw("config1"), preset_config1());
  EXPECT_EQ(resolve_hw(source_path("configs/config2.json")), preset_config2());
  EXPECT_THROW(resolve_hw("/nonexistent/hw.json"), Error);
}
