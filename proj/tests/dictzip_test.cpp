#include <gtest/gtest.h>

#include "critbench/compression.hpp"
#include "critbench/error.hpp"
#include "support.hpp"

using namespace critbench;
using namespace testing_support;

namespace {

Dictionary dict_of(std::initializer_list<Word> words) {
  Dictionary d;
  for (Word w : words) d.entries.push_back({w, 2, 0, FillSource::Static});
  return d;
}

InstructionHistograms profile(const Program& p, const InputData& in) {
  SimOptions o;
  o.input = &in;
  return profile_counts(p, simulate(p, preset_config1(), o).instr_exec);
}

}  // namespace

TEST(Histograms, UniqueWordsAndRepeatedNop) {
  const auto p = load_program(".text\n.func main\n  li r1, 1\n  li r2, 2\n  halt\n.endfunc\n");
  const auto h = profile_counts(p, std::vector<std::uint64_t>(p.text.size(), 1));
  for (const auto& [w, n] : h.static_counts) EXPECT_EQ(n, 1u);

  const auto q = load_program(
      ".text\n.func main\n  nop\n  nop\n  nop\n  li r1, 0\n  li r2, 100\n  li r3, 1\nl:\n  nop\n"
      "  add r1, r1, r3\n  blt r1, r2, l\n  nop\n  nop\n  nop\n  halt\n.endfunc\n.loopbound l 100\n");
  const auto hq = profile(q, {});
  EXPECT_EQ(hq.static_counts.at(0), 7u);
  EXPECT_GE(hq.dynamic_counts.at(0), 100u);
}

TEST(Histograms, CompressLikeStaticMatchesGolden) {
  const auto h = profile_counts(bench("compress_like"), std::vector<std::uint64_t>(170, 0));
  std::ostringstream got;
  char buf[32];
  for (const auto& [w, n] : h.static_counts) {
    std::snprintf(buf, sizeof buf, "0x%08x %llu\n", w, static_cast<unsigned long long>(n));
    got << buf;
  }
  EXPECT_EQ(got.str(), slurp(source_path("tests/golden/compress_like.static")));
}

TEST(Dictionary, HandRunOfFillRule) {
  const Word w1 = 0x01117000, w2 = 0x01227000, w3 = 0x01337000;
  InstructionHistograms h;
  h.static_counts = {{w1, 5}, {w2, 3}, {w3, 1}};
  h.dynamic_counts = {{w3, 900}, {w1, 2}};
  const auto d = build_dictionary(h, 50, 2);
  ASSERT_EQ(d.entries.size(), 2u);
  EXPECT_EQ(d.entries[0].word, w3);
  EXPECT_EQ(d.entries[0].source, FillSource::Dynamic);
  EXPECT_EQ(d.entries[1].word, w1);
  EXPECT_EQ(d.entries[1].source, FillSource::Static);
}

TEST(Dictionary, Boundaries) {
  const auto p = bench("adpcm_like");
  const auto h = profile(p, bench_input("adpcm_like", 0));
  const auto d0 = build_dictionary(h, 0);
  ASSERT_FALSE(d0.entries.empty());
  for (const auto& e : d0.entries) {
    EXPECT_EQ(e.source, FillSource::Static);
    EXPECT_GE(e.static_count, 2u);
  }
  const auto d100 = build_dictionary(h, 100);
  for (const auto& e : d100.entries) {
    EXPECT_EQ(e.source, FillSource::Dynamic);
    EXPECT_GT(e.dynamic_count, 0u);
  }
  EXPECT_LE(d100.entries.size(), kDictionaryCapacity);
  EXPECT_THROW(build_dictionary(h, 101), Error);
}

TEST(Groups, NoDictionaryWords) {
  const auto p = bench("segmentation_like");
  const auto l = select_groups(p, Dictionary{});
  EXPECT_TRUE(l.groups.empty());
  EXPECT_EQ(l.compressed_bytes, l.original_bytes);
  EXPECT_DOUBLE_EQ(compression_report(l).ratio, 1.0);
}

TEST(Groups, ThreeWordBlockBecomesOneEsc3) {
  const auto p = load_program(".text\n.func main\n  add r1, r2, r3\n  add r1, r2, r3\n  add r1, r2, r3\n"
                              "  halt\n.endfunc\n");
  const auto l = select_groups(p, dict_of({p.text[0].word}));
  ASSERT_EQ(l.groups.size(), 1u);
  EXPECT_EQ(l.groups[0].kind, EscapeKind::Esc3);
  EXPECT_EQ(l.original_bytes - l.compressed_bytes, 8u);
}

TEST(Groups, GreedyPattern) {
  const auto p = load_program(
      ".text\n.func main\n  add r1, r2, r3\n  add r1, r2, r3\n  sub r4, r4, r4\n  add r1, r2, r3\n"
      "  add r1, r2, r3\n  add r1, r2, r3\n  halt\n.endfunc\n");
  const auto l = select_groups(p, dict_of({p.text[0].word}));
  ASSERT_EQ(l.groups.size(), 2u);
  EXPECT_EQ(l.groups[0].members, (std::vector<InstrIndex>{0, 1}));
  EXPECT_EQ(l.groups[1].members, (std::vector<InstrIndex>{3, 4, 5}));
  // The six-instruction stretch takes three words; halt stays uncompressed.
  EXPECT_EQ(l.compressed_address[6] - l.compressed_address[0], 12u);
  EXPECT_EQ(l.compressed_bytes, 16u);
  EXPECT_EQ(l.compressed_address[4], l.compressed_address[3]);
  validate_layout(p, l);
}

TEST(Groups, ControlTransfersNeverGrouped) {
  for (const auto& name : suite()) {
    const auto p = bench(name);
    const auto l = select_groups(p, build_dictionary(profile(p, bench_input(name, 0)), 50));
    for (const auto& g : l.groups) {
      for (auto m : g.members) EXPECT_TRUE(is_compressible(p.text[m].op())) << name;
      EXPECT_EQ(p.block_of[g.members.front()], p.block_of[g.members.back()]);
    }
  }
}

TEST(Encoding, Esc3Bytes) {
  EncodingGroup g;
  g.kind = EscapeKind::Esc3;
  g.members = {0, 1, 2};
  g.indices = {0, 1, 2};
  EXPECT_EQ(encode_group(g), 0xF3000102u);
}

TEST(Encoding, Esc2RoundTrip) {
  const auto d = dict_of({0x01117000, 0x01227000, 0x01337000});
  EncodingGroup g;
  g.kind = EscapeKind::Esc2;
  g.members = {4, 5};
  g.indices = {2, 0};
  const Word w = encode_group(g);
  EXPECT_EQ(w, 0xF2020000u);
  EXPECT_EQ(decode_group(w, d), (std::vector<Word>{0x01337000, 0x01117000}));
  EXPECT_THROW(decode_group(0xF2090000u, d), Error);
  EXPECT_THROW(decode_group(0x01117000u, d), Error);
}

TEST(Encoding, SegmentationGroupsRoundTrip) {
  const auto p = bench("segmentation_like");
  for (std::uint32_t pct : {0u, 25u, 50u, 75u, 100u}) {
    const auto l = select_groups(p, build_dictionary(profile(p, bench_input("segmentation_like", 0)), pct));
    for (const auto& g : l.groups) {
      std::vector<Word> words;
      for (auto m : g.members) words.push_back(p.text[m].word);
      EXPECT_EQ(decode_group(encode_group(g), l.dictionary), words);
    }
  }
}

TEST(Report, Arithmetic) {
  CompressionLayout l;
  l.original_bytes = 400;
  l.compressed_bytes = (100 - 20 + 10) * 4;
  EXPECT_DOUBLE_EQ(compression_report(l).ratio, 0.9);
}

// Measured once with the sweep and checked by hand against the layouts.
TEST(Report, SuiteReductionAtPZero) {
  const std::map<std::string, std::pair<std::uint32_t, std::uint32_t>> golden = {
      {"adpcm_like", {672, 472}},   {"compress_like", {680, 540}}, {"helico_like", {644, 540}},
      {"skewed", {452, 432}},       {"segmentation_like", {376, 304}}};
  for (const auto& [name, sizes] : golden) {
    const auto p = bench(name);
    const auto l = select_groups(p, build_dictionary(profile(p, bench_input(name, 0)), 0));
    EXPECT_EQ(l.original_bytes, sizes.first) << name;
    EXPECT_EQ(l.compressed_bytes, sizes.second) << name;
  }
}

TEST(Layout, FileRoundTripAndAnnotations) {
  auto p = bench("compress_like");
  const auto l = select_groups(p, build_dictionary(profile(p, bench_input("compress_like", 0)), 25));
  const auto back = parse_layout(serialize_layout(l));
  EXPECT_EQ(back.groups, l.groups);
  EXPECT_EQ(back.compressed_address, l.compressed_address);
  EXPECT_EQ(back.dictionary.entries, l.dictionary.entries);
  annotate_compression(p, l);
  for (InstrIndex i = 0; i < p.text.size(); ++i) {
    EXPECT_EQ(p.annotations.get_as<AddressValue>(instr_entity(i), "compressed_addr")->value,
              l.compressed_address[i]);
  }
}
