// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <gmpxx.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "critbench/assembler.hpp"
#include "critbench/cache.hpp"
#include "critbench/cfg.hpp"
#include "critbench/error.hpp"
#include "critbench/experiment.hpp"
#include "critbench/ilp.hpp"
#include "critbench/wcet.hpp"

using namespace critbench;
namespace fs = std::filesystem;

#ifndef CRITBENCH_SOURCE_DIR
#define CRITBENCH_SOURCE_DIR "."
#endif

namespace {

const std::vector<std::string> kMain = {"adpcm_like", "compress_like", "helico_like", "skewed"};
const std::vector<std::string> kSuite = {"adpcm_like", "compress_like", "helico_like", "skewed",
                                         "segmentation_like"};
const std::vector<std::uint32_t> kGrid = {0, 25, 50, 75, 100};

struct Bench {
  std::string name;
  Program program;
  std::vector<std::pair<std::string, InputData>> inputs;
  TransformScript unroll;
};

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << o.detail << "\n";
  if (!o.pass) ++failures;
}

std::string pct(double base, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.1f%%", 100.0 * (v - base) / base);
  return buf;
}

Bench load_bench(const fs::path& root, const std::string& name) {
  Bench b;
  b.name = name;
  const auto dir = root / "benchmarks" / name;
  b.program = load_program_file((dir / (name + ".masm")).string());
  for (int i = 0;; ++i) {
    const auto f = dir / ("in" + std::to_string(i) + ".txt");
    if (!fs::exists(f)) break;
    b.inputs.emplace_back(f.filename().string(), load_input(f.string()));
  }
  b.unroll = load_script((dir / "unroll.xform").string());
  return b;
}

// ------------------------------------------------------------ criterion 1

std::string pj_text(const mpz_class& fj) {
  mpz_class whole = fj / 1000, frac = fj % 1000;
  std::string f = frac.get_str();
  while (f.size() < 3) f = "0" + f;
  return whole.get_str() + "." + f;
}

bool energy_matches(const Counters& c, const EnergyTable& t, std::string* why) {
  const auto rep = estimate_energy(c, t);
  mpz_class total = 0;
  for (Component comp : kComponents) {
    const auto& e = t.at(comp);
    if (!e) continue;
    const auto& a = c.at(comp);
    mpz_class part = mpz_class(std::to_string(a.reads)) * mpz_class(std::to_string(e->read_fj)) +
                     mpz_class(std::to_string(a.writes)) * mpz_class(std::to_string(e->write_fj));
    const auto* got = rep.find(comp);
    if (!got || mpz_class(std::to_string(got->energy_fj)) != part) {
      *why = "component " + to_string(comp) + " differs";
      return false;
    }
    total += part;
  }
  if (mpz_class(std::to_string(rep.total_fj)) != total) {
    *why = "total differs";
    return false;
  }
  if (format_pj(rep.total_fj) != pj_text(total)) {
    *why = "pJ rendering differs";
    return false;
  }
  return true;
}

Outcome criterion_energy(const std::vector<Counters>& observed) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> count(0, 2'000'000'000), unit(0, 500'000);
  std::string why;
  std::size_t checked = 0;
  for (int k = 0; k < 2000; ++k) {
    Counters c;
    EnergyTable t;
    for (Component comp : kComponents) {
      c.at(comp) = {count(rng), count(rng)};
      t.at(comp) = AccessEnergy{unit(rng), unit(rng)};
    }
    if (!energy_matches(c, t, &why)) return {false, "random counters: " + why};
    ++checked;
  }
  for (const auto& c : observed) {
    for (const auto& hw : {preset_config1(), preset_config2()}) {
      Counters cc = c;
      if (!hw.spm) cc.spm = {};
      if (!energy_matches(cc, hw.energy, &why)) return {false, "simulated counters: " + why};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " counter sets equal an independent big-integer recomputation"};
}

// ------------------------------------------------------------ criterion 2

struct RefLine {
  std::uint32_t line;
  std::uint64_t stamp;
  bool dirty;
};

Outcome criterion_lru() {
  const std::vector<CacheConfig> geoms = {{1024, 2, 16, 1, 10}, {512, 2, 16, 1, 10}, {64, 1, 16, 1, 10}};
  std::mt19937 rng(2);
  std::ostringstream detail;
  for (const auto& g : geoms) {
    CacheState model(g);
    std::vector<std::vector<RefLine>> ref(g.size / (g.associativity * g.line_size));
    std::uniform_int_distribution<std::uint32_t> addr(0, g.size * 4 - 1);
    std::bernoulli_distribution write(0.3);
    for (std::uint64_t n = 1; n <= 10000; ++n) {
      const Address a = addr(rng) & ~3u;
      const bool w = write(rng);
      const std::uint32_t line = a / g.line_size;
      auto& set = ref[line % ref.size()];
      bool hit = false, evicted = false, evicted_dirty = false;
      std::uint32_t victim = 0;
      auto it = std::find_if(set.begin(), set.end(), [&](const RefLine& l) { return l.line == line; });
      if (it != set.end()) {
        hit = true;
        it->stamp = n;
        it->dirty = it->dirty || w;
      } else {
        if (set.size() == g.associativity) {
          auto old = std::min_element(set.begin(), set.end(),
                                      [](const RefLine& x, const RefLine& y) { return x.stamp < y.stamp; });
          evicted = true;
          evicted_dirty = old->dirty;
          victim = old->line;
          set.erase(old);
        }
        set.push_back({line, n, w});
      }
      const auto out = cache_access(model, a, w ? AccessKind::Write : AccessKind::Read);
      if (out.hit != hit || out.evicted != evicted || out.evicted_dirty != evicted_dirty ||
          (evicted && out.evicted_line != victim)) {
        return {false, "geometry " + std::to_string(g.size) + "B/" + std::to_string(g.associativity) +
                           "-way diverges at access " + std::to_string(n)};
      }
    }
    detail << g.size << "B/" << g.associativity << "way/" << g.line_size << "B ";
  }
  return {true, "10000 random accesses each on " + detail.str() + "match the reference LRU"};
}

// ------------------------------------------------------------ criterion 4

struct Gen {
  std::mt19937 rng;
  int labels = 0;
  std::vector<std::string> bounds;

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  std::string block() {
    std::string s;
    for (int i = pick(1, 4); i > 0; --i) s += "  nop\n";
    return s;
  }

  std::string segment(int depth) {
    const int kind = depth >= 3 ? 0 : pick(0, 2);
    if (kind == 0) return block();
    const std::string id = std::to_string(labels++);
    if (kind == 1) {
      return block() + "  beq r1, r2, else" + id + "\n" + segment(depth + 1) + "  j join" + id +
             "\nelse" + id + ":\n" + segment(depth + 1) + "join" + id + ":\n" + block();
    }
    const int bound = pick(1, 3);
    bounds.push_back(".loopbound loop" + id + " " + std::to_string(bound));
    return "loop" + id + ":\n" + block() + segment(depth + 1) + "  blt r1, r2, loop" + id + "\n" + block();
  }
};

struct Enumerator {
  const Program& p;
  const std::vector<std::uint64_t>& t;
  const LoopForest& loops;
  std::vector<std::uint32_t> bound;  // per loop
  std::uint64_t paths = 0, best = 0;
  bool overflow = false;

  void walk(BlockId b, std::uint64_t acc, std::vector<std::uint32_t> iters) {
    if (overflow) return;
    acc += t[b];
    const auto& blk = p.blocks[b];
    if (p.text[blk.last()].op() == Opcode::Halt) {
      best = std::max(best, acc);
      if (++paths > 100000) overflow = true;
      return;
    }
    for (EdgeId e : blk.succs) {
      const BlockId d = p.edges[e].dst;
      auto next = iters;
      bool ok = true;
      for (std::size_t l = 0; l < loops.loops.size(); ++l) {
        const auto& loop = loops.loops[l];
        if (loop.header != d) continue;
        if (loop.contains(b)) {
          if (++next[l] > bound[l]) ok = false;
        } else {
          next[l] = 1;
        }
      }
      if (ok) walk(d, acc, std::move(next));
    }
  }
};

Outcome criterion_ilp() {
  Gen gen{std::mt19937(4)};
  int done = 0, attempts = 0;
  std::uint64_t max_paths = 0;
  while (done < 50 && attempts < 1000) {
    ++attempts;
    gen.bounds.clear();
    std::string body;
    for (int k = gen.pick(1, 4); k > 0; --k) body += gen.segment(0);
    std::string src = ".text\n.func main\n" + body + "  halt\n.endfunc\n";
    for (const auto& b : gen.bounds) src += b + "\n";
    const Program p = load_program(src);
    std::vector<std::uint64_t> t(p.blocks.size());
    for (auto& x : t) x = static_cast<std::uint64_t>(gen.pick(1, 40));
    const auto loops = find_loops(p);
    Enumerator en{p, t, loops, {}};
    for (const auto& loop : loops.loops) {
      for (const auto& f : p.flow_facts) {
        if (f.header == loop.header) en.bound.push_back(f.bound);
      }
    }
    const BlockId entry = p.functions[p.entry_function()].entry_block;
    std::vector<std::uint32_t> iters(loops.loops.size(), 0);
    for (std::size_t l = 0; l < loops.loops.size(); ++l) {
      if (loops.loops[l].header == entry) iters[l] = 1;
    }
    en.walk(entry, 0, std::move(iters));
    if (en.overflow) continue;
    const auto scopes = build_scopes(p, loops);
    const auto model = build_ipet(p, t, {}, scopes, loops);
    const auto sol = solve_ilp(model.ilp);
    if (sol.status != IlpStatus::Optimal || static_cast<std::uint64_t>(sol.objective) != en.best) {
      return {false, "model " + std::to_string(done) + ": solver " + std::to_string(sol.objective) +
                         " vs enumeration " + std::to_string(en.best)};
    }
    max_paths = std::max(max_paths, en.paths);
    ++done;
  }
  if (done < 50) return {false, "only " + std::to_string(done) + " models generated"};
  return {true, "50 random IPET models agree with exhaustive path enumeration (up to " +
                    std::to_string(max_paths) + " paths)"};
}

// ------------------------------------------------------------ matrix (3, 5, 6)

struct MatrixStats {
  std::uint64_t runs = 0, wcet_violations = 0, semantic_mismatches = 0;
  std::uint64_t ah_violations = 0, persistence_violations = 0, persistent_groups = 0;
  double worst_ratio = 0;
  std::vector<std::string> notes;
  std::vector<Counters> counters;
};

std::vector<TransformSpec> matrix_specs(const Bench& b, const HardwareConfig& hw) {
  std::vector<TransformSpec> specs{TransformSpec{}};
  if (hw.spm) {
    for (auto s : {PlacementStrategy::FirstUsed, PlacementStrategy::SmallSizeFirst,
                   PlacementStrategy::HighFrequency}) {
      specs.push_back(TransformSpec::placement(s));
    }
  }
  for (std::uint32_t p : {0u, 50u, 100u}) specs.push_back(TransformSpec::compression(p));
  specs.push_back(TransformSpec::inline_all());
  specs.push_back(TransformSpec::from_script(b.unroll, "unroll.xform"));
  return specs;
}

void check_classes(const Program& p, const WcetReport& w, const SimResult& r,
                   const HardwareConfig& hw, MatrixStats& st, const std::string& where) {
  std::map<std::tuple<bool, std::uint32_t, int>, std::uint64_t> misses;
  for (InstrIndex i = 0; i < p.text.size(); ++i) {
    const auto& ic = w.icache.classes[i];
    if (ic.present) {
      if (ic.cls == CacheClass::AlwaysHit && r.fetch_misses[i] > 0) {
        ++st.ah_violations;
        st.notes.push_back(where + ": always-hit fetch missed at " + std::to_string(i));
      }
      if (ic.cls == CacheClass::Persistent) misses[{true, ic.line, ic.scope}] += r.fetch_misses[i];
    }
    if (w.data.route[i] == DataRoute::Cache) {
      const auto& dc = w.data.cache.classes[i];
      if (dc.present && dc.cls == CacheClass::AlwaysHit && r.data_misses[i] > 0) {
        ++st.ah_violations;
        st.notes.push_back(where + ": always-hit data access missed at " + std::to_string(i));
      }
      if (dc.present && dc.cls == CacheClass::Persistent) {
        misses[{false, dc.line, dc.scope}] += r.data_misses[i];
      }
    }
  }
  (void)hw;
  for (const auto& [key, n] : misses) {
    const auto& scope = w.scopes[static_cast<std::size_t>(std::get<2>(key))];
    std::uint64_t entries = scope.at_start ? 1 : 0;
    for (EdgeId e : scope.entries) entries += r.edge_exec[e];
    ++st.persistent_groups;
    if (n > entries) {
      ++st.persistence_violations;
      st.notes.push_back(where + ": persistent line missed " + std::to_string(n) + " times, " +
                         std::to_string(entries) + " scope entries");
    }
  }
}

MatrixStats run_matrix(const std::vector<Bench>& benches) {
  MatrixStats st;
  for (const auto& b : benches) {
    for (const auto& hw : {preset_config1(), preset_config2()}) {
      std::vector<SimResult> base;
      for (const auto& [name, in] : b.inputs) {
        SimOptions o;
        o.input = &in;
        base.push_back(simulate(b.program, hw, o));
      }
      for (const auto& spec : matrix_specs(b, hw)) {
        const auto v = make_variant(b.program, hw, spec, b.inputs.front().second);
        WcetOptions wo;
        wo.placement = v.placement ? &*v.placement : nullptr;
        wo.compression = v.compression ? &*v.compression : nullptr;
        const auto w = compute_wcet(v.program, hw, wo);
        for (std::size_t k = 0; k < b.inputs.size(); ++k) {
          const std::string where = b.name + "/" + hw.name + "/" + spec.label() + "/" + b.inputs[k].first;
          const auto r = simulate(v.program, hw, v.sim_options(&b.inputs[k].second));
          ++st.runs;
          st.counters.push_back(r.counters);
          if (w.wcet < r.cycles) {
            ++st.wcet_violations;
            st.notes.push_back(where + ": WCET " + std::to_string(w.wcet) + " < " + std::to_string(r.cycles));
          }
          st.worst_ratio = std::max(st.worst_ratio, static_cast<double>(r.cycles) / static_cast<double>(w.wcet));
          if (!r.same_state(base[k])) {
            ++st.semantic_mismatches;
            st.notes.push_back(where + ": final state differs from the untransformed run");
          }
          check_classes(v.program, w, r, hw, st, where);
        }
      }
    }
  }
  return st;
}

// ------------------------------------------------------------ criterion 7

Outcome criterion_compression(const std::vector<Bench>& benches) {
  std::size_t layouts = 0, groups = 0;
  for (const auto& b : benches) {
    const auto hw = preset_config1();
    for (std::uint32_t p : kGrid) {
      const auto v = make_variant(b.program, hw, TransformSpec::compression(p), b.inputs.front().second);
      const auto& l = *v.compression;
      std::size_t members = 0;
      for (const auto& g : l.groups) {
        members += g.members.size();
        std::vector<Word> original;
        for (auto m : g.members) original.push_back(b.program.text[m].word);
        if (decode_group(encode_group(g), l.dictionary) != original) {
          return {false, b.name + " P=" + std::to_string(p) + ": a group does not expand to its members"};
        }
      }
      const std::size_t uncompressed = b.program.text.size() - members;
      if (l.compressed_bytes != 4 * (uncompressed + l.groups.size())) {
        return {false, b.name + " P=" + std::to_string(p) + ": compressed size accounting is off"};
      }
      groups += l.groups.size();
      ++layouts;
    }
    const auto hw2 = preset_config2();
    const auto baseline = evaluate(b.name, make_variant(b.program, hw2, {}, b.inputs.front().second), hw2,
                                   b.inputs.front().second, "in0");
    for (auto s : {PlacementStrategy::FirstUsed, PlacementStrategy::SmallSizeFirst,
                   PlacementStrategy::HighFrequency}) {
      const auto v = make_variant(b.program, hw2, TransformSpec::placement(s), b.inputs.front().second);
      const auto rec = evaluate(b.name, v, hw2, b.inputs.front().second, "in0");
      if (rec.code_size != baseline.code_size ||
          rec.code_size_with_dictionary != baseline.code_size_with_dictionary) {
        return {false, b.name + ": placement " + to_string(s) + " changed the code size"};
      }
    }
  }
  return {true, std::to_string(layouts) + " layouts, " + std::to_string(groups) +
                    " groups: size = 4 x (uncompressed + groups), every group expands to its members, "
                    "placement leaves code size unchanged"};
}

// ------------------------------------------------------------ directional

struct Records {
  // benchmark -> config/transform label -> per-input records
  std::map<std::string, std::map<std::string, std::vector<CriteriaRecord>>> by;

  const std::vector<CriteriaRecord>& at(const std::string& b, const std::string& key) const {
    return by.at(b).at(key);
  }
};

std::string key(const HardwareConfig& hw, const TransformSpec& t) { return hw.name + "|" + t.label(); }

Records collect(const std::vector<Bench>& benches) {
  Records rs;
  for (const auto& b : benches) {
    for (const auto& hw : {preset_config1(), preset_config2()}) {
      std::vector<TransformSpec> specs{TransformSpec{}, TransformSpec::inline_all()};
      for (auto p : kGrid) specs.push_back(TransformSpec::compression(p));
      if (hw.spm) {
        for (auto s : {PlacementStrategy::FirstUsed, PlacementStrategy::SmallSizeFirst,
                       PlacementStrategy::HighFrequency}) {
          specs.push_back(TransformSpec::placement(s));
        }
      }
      for (const auto& spec : specs) {
        const auto v = make_variant(b.program, hw, spec, b.inputs.front().second);
        auto& out = rs.by[b.name][key(hw, spec)];
        for (const auto& [name, in] : b.inputs) {
          auto r = evaluate(b.name, v, hw, in, name);
          r.transform = spec.label();
          out.push_back(std::move(r));
        }
      }
    }
  }
  return rs;
}

const std::string kBase1 = "config1|none";
const std::string kHf2 = "config2|place:high-frequency";

Outcome criterion_spm(const Records& rs) {
  int energy_wins = 0;
  bool wcet_ok = true;
  std::ostringstream d;
  for (const auto& b : kMain) {
    const auto& base = rs.at(b, kBase1);
    const auto& hf = rs.at(b, kHf2);
    bool all = true;
    double e0 = 0, e1 = 0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      all = all && hf[k].energy.total_fj < base[k].energy.total_fj;
      e0 += static_cast<double>(base[k].energy.total_fj);
      e1 += static_cast<double>(hf[k].energy.total_fj);
    }
    if (all) ++energy_wins;
    d << b << " E " << pct(e0, e1);
    if (b != "skewed") {
      const auto w0 = *base[0].wcet_cycles, w1 = *hf[0].wcet_cycles;
      wcet_ok = wcet_ok && w1 < w0;
      d << " WCET " << pct(static_cast<double>(w0), static_cast<double>(w1));
    }
    d << "; ";
  }
  const bool pass = energy_wins >= 3 && wcet_ok;
  return {pass, "high-frequency on config2 vs config1: " + d.str() + "energy lower on " +
                    std::to_string(energy_wins) + "/4 for every input"};
}

Outcome criterion_skewed(const Records& rs) {
  const auto& base = rs.at("skewed", kBase1);
  const auto& hf = rs.at("skewed", kHf2);
  const auto& fu = rs.at("skewed", "config2|place:first-used");
  const auto& ss = rs.at("skewed", "config2|place:small-size-first");
  bool ok = true;
  for (std::size_t k = 0; k < base.size(); ++k) {
    const auto b = base[k].energy.total_fj;
    ok = ok && hf[k].energy.total_fj < b && ss[k].energy.total_fj >= fu[k].energy.total_fj &&
         fu[k].energy.total_fj >= b;
  }
  const double b0 = static_cast<double>(base[0].energy.total_fj);
  std::ostringstream d;
  d << "skewed energy vs config1 (in0): high-frequency "
    << pct(b0, static_cast<double>(hf[0].energy.total_fj)) << ", first-used "
    << pct(b0, static_cast<double>(fu[0].energy.total_fj)) << ", small-size-first "
    << pct(b0, static_cast<double>(ss[0].energy.total_fj)) << "; ordering holds on "
    << (ok ? "every input" : "not every input");
  return {ok, d.str()};
}

bool monotone(const std::vector<double>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    up = up && v[i] >= v[i - 1];
    down = down && v[i] <= v[i - 1];
  }
  return up || down;
}

Outcome criterion_sweep(const Records& rs) {
  bool max_at_zero = true;
  std::ostringstream d, nonmono;
  int curves = 0;
  for (const auto& b : kSuite) {
    const double orig = rs.at(b, kBase1)[0].code_size;
    std::vector<double> red;
    std::map<std::string, std::vector<double>> series;
    for (auto p : kGrid) {
      const auto& r = rs.at(b, "config1|compress:" + std::to_string(p))[0];
      red.push_back(orig - r.code_size_with_dictionary);
      series["code size"].push_back(r.code_size_with_dictionary);
      series["energy"].push_back(static_cast<double>(r.energy.total_fj));
      series["ACET"].push_back(static_cast<double>(r.acet_cycles));
      series["WCET"].push_back(static_cast<double>(*r.wcet_cycles));
    }
    const bool best = std::all_of(red.begin(), red.end(), [&](double x) { return x <= red[0]; });
    max_at_zero = max_at_zero && best;
    d << b << " " << pct(orig, orig - red[0]) << "; ";
    for (const auto& [name, s] : series) {
      if (!monotone(s)) {
        ++curves;
        if (curves <= 3) nonmono << b << " " << name << ", ";
      }
    }
  }
  const bool pass = max_at_zero && curves > 0;
  return {pass, "code size incl. dictionary at P=0: " + d.str() +
                    (max_at_zero ? "P=0 is the best grid point everywhere" : "P=0 is NOT always best") +
                    "; " + std::to_string(curves) + " non-monotone criterion curves (" + nonmono.str() + "...)"};
}

Outcome criterion_inline(const Records& rs) {
  bool size_up = true;
  int wcet_down = 0;
  std::ostringstream d;
  for (const auto& b : kSuite) {
    const auto& base = rs.at(b, kBase1)[0];
    const auto& inl = rs.at(b, "config1|inline-all")[0];
    size_up = size_up && inl.code_size > base.code_size;
    const auto w0 = static_cast<double>(*base.wcet_cycles), w1 = static_cast<double>(*inl.wcet_cycles);
    if (b == "adpcm_like" || b == "compress_like" || b == "helico_like") {
      if (w1 < w0) ++wcet_down;
    }
    d << b << " size " << pct(base.code_size, inl.code_size) << " WCET " << pct(w0, w1) << "; ";
  }
  return {size_up && wcet_down >= 2, "full inlining on config1: " + d.str() + "WCET lower on " +
                                          std::to_string(wcet_down) + "/3 analysed applications"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path(CRITBENCH_SOURCE_DIR);
  const auto start = std::chrono::steady_clock::now();
  try {
    std::vector<Bench> benches;
    for (const auto& n : kSuite) benches.push_back(load_bench(root, n));

    const auto m = run_matrix(benches);
    report(1, criterion_energy(m.counters));
    report(2, criterion_lru());
    {
      std::ostringstream d;
      d << m.runs << " runs (" << benches.size() << " benchmarks x 2 configs x transforms x inputs), "
        << m.wcet_violations << " with WCET below simulated cycles; tightest cycles/WCET = " << m.worst_ratio;
      report(3, {m.wcet_violations == 0, d.str()});
    }
    report(4, criterion_ilp());
    report(5, {m.semantic_mismatches == 0,
               std::to_string(m.runs) + " transformed runs, " + std::to_string(m.semantic_mismatches) +
                   " differ from the untransformed registers/memory/output"});
    report(6, {m.ah_violations == 0 && m.persistence_violations == 0,
               std::to_string(m.ah_violations) + " always-hit misses, " +
                   std::to_string(m.persistence_violations) + " of " + std::to_string(m.persistent_groups) +
                   " persistent lines over their scope entries"});
    for (std::size_t i = 0; i < m.notes.size() && i < 10; ++i) std::cout << "      " << m.notes[i] << "\n";
    report(7, criterion_compression(benches));
    const auto rs = collect(benches);
    report(8, criterion_spm(rs));
    report(9, criterion_skewed(rs));
    report(10, criterion_sweep(rs));
    report(11, criterion_inline(rs));
  } catch (const std::exception& e) {
    std::cout << "FAIL  aborted: " << e.what() << "\n";
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d failing criteria, %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
