#include "critbench/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

#include "critbench/assembler.hpp"
#include "critbench/cfg.hpp"
#include "critbench/error.hpp"
#include "critbench/trace.hpp"
#include "critbench/wcet.hpp"

namespace critbench {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw Error("run", msg); }

std::uint32_t parse_percent(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used == s.size() && v <= 100) return static_cast<std::uint32_t>(v);
  } catch (const std::logic_error&) {
  }
  throw Error("dictzip", "P must be an integer within 0..100, got '" + s + "'");
}

class Fnv {
 public:
  void add(Word w) {
    for (int b = 0; b < 4; ++b) {
      h_ ^= (w >> (8 * b)) & 0xFF;
      h_ *= 1099511628211ULL;
    }
  }
  template <class Range>
  void add_all(const Range& r) {
    add(static_cast<Word>(r.size()));
    for (Word w : r) add(w);
  }
  std::string hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 1469598103934665603ULL;
};

}  // namespace

std::string TransformSpec::label() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Placement: return "place:" + to_string(strategy);
    case Kind::Compression: return "compress:" + std::to_string(percent);
    case Kind::Script: return "script:" + script_path;
    case Kind::InlineAll: return "inline-all";
  }
  return "none";
}

TransformSpec TransformSpec::parse(const std::string& text) {
  if (text.empty() || text == "none") return {};
  if (text == "inline-all") return inline_all();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "place") return placement(placement_strategy_from_string(arg));
  if (head == "compress") return compression(parse_percent(arg));
  if (head == "script") {
    auto spec = from_script(load_script(arg), arg);
    return spec;
  }
  fail("unknown transform '" + text + "'");
}

TransformSpec TransformSpec::placement(PlacementStrategy s) {
  TransformSpec t;
  t.kind = s == PlacementStrategy::None ? Kind::None : Kind::Placement;
  t.strategy = s;
  return t;
}

TransformSpec TransformSpec::compression(std::uint32_t percent) {
  TransformSpec t;
  t.kind = Kind::Compression;
  t.percent = percent;
  return t;
}

TransformSpec TransformSpec::inline_all() {
  TransformSpec t;
  t.kind = Kind::InlineAll;
  return t;
}

TransformSpec TransformSpec::from_script(TransformScript script, std::string name) {
  TransformSpec t;
  t.kind = Kind::Script;
  t.script = std::move(script);
  t.script_path = std::move(name);
  return t;
}

SimOptions Variant::sim_options(const InputData* input) const {
  SimOptions o;
  o.placement = placement ? &*placement : nullptr;
  o.compression = compression ? &*compression : nullptr;
  o.input = input;
  return o;
}

Variant make_variant(const Program& base, const HardwareConfig& hw, const TransformSpec& spec,
                     const InputData& profile) {
  Variant v{base, std::nullopt, std::nullopt, {}};
  switch (spec.kind) {
    case TransformSpec::Kind::None: break;
    case TransformSpec::Kind::Placement: {
      if (!hw.spm) throw Error("place", "configuration " + hw.name + " has no scratchpad");
      SimOptions o;
      o.input = &profile;
      o.record_trace = true;
      const auto pre = simulate(base, hw, o);
      const auto objects = build_objects(base, *pre.trace);
      v.placement = make_placement(spec.strategy, objects, *pre.trace, hw.spm->size);
      break;
    }
    case TransformSpec::Kind::Compression: {
      if (!hw.pipeline.decompression_stage) {
        throw Error("dictzip", "configuration " + hw.name + " has no decompression stage");
      }
      SimOptions o;
      o.input = &profile;
      const auto pre = simulate(base, hw, o);
      const auto hist = profile_counts(base, pre.instr_exec);
      v.compression = select_groups(base, build_dictionary(hist, spec.percent));
      break;
    }
    case TransformSpec::Kind::Script:
      v.program = apply_script(base, spec.script, &v.warnings);
      break;
    case TransformSpec::Kind::InlineAll:
      v.program = inline_everything(base, &v.warnings);
      break;
  }
  return v;
}

std::vector<std::string> missing_loop_bounds(const Program& program) {
  std::vector<std::string> out;
  const auto loops = find_loops(program);
  const auto reachable = reachable_blocks(program);
  for (const auto& loop : loops.loops) {
    if (!reachable[loop.header]) continue;
    const bool bounded = std::any_of(program.flow_facts.begin(), program.flow_facts.end(),
                                     [&](const FlowFact& f) { return f.header == loop.header; });
    if (bounded) continue;
    const Address addr = program.text[program.blocks[loop.header].first].address;
    std::string name;
    for (const auto& l : program.code_labels) {
      if (l.address == addr) name = l.name;
    }
    if (name.empty()) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "0x%x", addr);
      name = buf;
    }
    out.push_back(name);
  }
  return out;
}

CriteriaRecord evaluate(const std::string& benchmark, const Variant& variant,
                        const HardwareConfig& hw, const InputData& input,
                        const std::string& input_name) {
  CriteriaRecord r;
  r.benchmark = benchmark;
  r.configuration = hw.name;
  r.input = input_name;
  const auto& p = variant.program;
  if (variant.compression) {
    r.code_size = variant.compression->compressed_bytes;
    r.code_size_with_dictionary = r.code_size + variant.compression->dictionary_bytes();
  } else {
    r.code_size = p.text_bytes();
    r.code_size_with_dictionary = r.code_size;
  }

  const auto sim = simulate(p, hw, variant.sim_options(&input));
  r.acet_cycles = sim.cycles;
  r.counters = sim.counters;
  r.output = sim.output;
  r.energy = estimate_energy(sim.counters, hw.energy);
  Fnv h;
  h.add_all(sim.registers);
  h.add_all(sim.data_image);
  h.add_all(sim.stack_image);
  h.add_all(sim.output);
  r.state_digest = h.hex();

  if (const auto missing = missing_loop_bounds(p); !missing.empty()) {
    r.wcet_note = "no loop bound for " + missing.front();
  } else {
    WcetOptions o;
    o.placement = variant.placement ? &*variant.placement : nullptr;
    o.compression = variant.compression ? &*variant.compression : nullptr;
    r.wcet_cycles = compute_wcet(p, hw, o).wcet;
  }
  return r;
}

HardwareConfig resolve_hw(const std::string& name) {
  if (name == "config1") return preset_config1();
  if (name == "config2") return preset_config2();
  return load_hw_config(name);
}

CriteriaRecord run_point(const ExperimentPoint& point) {
  const auto hw = resolve_hw(point.hw);
  const Program base = load_program_file(point.benchmark);
  std::string profile_path = point.profile_input;
  if (profile_path.empty()) {
    const auto beside = fs::path(point.benchmark).parent_path() / "in0.txt";
    if (fs::exists(beside)) profile_path = beside.string();
  }
  const InputData profile = profile_path.empty() ? InputData{} : load_input(profile_path);
  const InputData input = point.input.empty() ? InputData{} : load_input(point.input);
  const auto variant = make_variant(base, hw, point.transform, profile);
  auto r = evaluate(fs::path(point.benchmark).stem().string(), variant, hw, input,
                    point.input.empty() ? "builtin" : fs::path(point.input).filename().string());
  r.transform = point.transform.label();
  return r;
}

nlohmann::json to_json(const CriteriaRecord& r) {
  nlohmann::json j;
  j["benchmark"] = r.benchmark;
  j["configuration"] = r.configuration;
  j["transform"] = r.transform;
  j["input"] = r.input;
  j["code_size"] = r.code_size;
  j["code_size_with_dictionary"] = r.code_size_with_dictionary;
  j["energy"] = to_json(r.energy);
  j["acet_cycles"] = r.acet_cycles;
  if (r.wcet_cycles) {
    j["wcet_cycles"] = *r.wcet_cycles;
  } else {
    j["wcet_cycles"] = nullptr;
    j["wcet_note"] = r.wcet_note;
  }
  j["counters"] = to_json(r.counters);
  j["output"] = r.output;
  j["state_digest"] = r.state_digest;
  return j;
}

SweepSpec SweepSpec::parse(const std::string& text) {
  SweepSpec s;
  const auto eq = text.find('=');
  if (eq == std::string::npos) fail("sweep spec must look like P=0,50,100");
  const std::string name = text.substr(0, eq);
  if (name == "P") {
    s.parameter = Parameter::Percent;
  } else if (name == "strategy") {
    s.parameter = Parameter::Strategy;
  } else {
    fail("unknown sweep parameter '" + name + "'");
  }
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (s.parameter == Parameter::Percent) {
      parse_percent(item);
    } else {
      placement_strategy_from_string(item);
    }
    s.values.push_back(item);
  }
  return s;
}

SweepResult run_sweep(const ExperimentPoint& base, const SweepSpec& spec, unsigned threads) {
  SweepResult out;
  std::vector<ExperimentPoint> points;
  for (const auto& v : spec.values) {
    ExperimentPoint p = base;
    p.transform = spec.parameter == SweepSpec::Parameter::Percent
                      ? TransformSpec::compression(parse_percent(v))
                      : TransformSpec::placement(placement_strategy_from_string(v));
    points.push_back(std::move(p));
    out.params.push_back(v);
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  out.records.resize(points.size());
  for (std::size_t start = 0; start < points.size(); start += threads) {
    std::vector<std::future<CriteriaRecord>> batch;
    const std::size_t end = std::min(points.size(), start + threads);
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(std::launch::async, [&points, i] { return run_point(points[i]); }));
    }
    for (std::size_t i = start; i < end; ++i) out.records[i] = batch[i - start].get();
  }
  std::ostringstream csv;
  csv << kSweepHeader << "\n";
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const auto& r = out.records[i];
    csv << out.params[i] << ',' << r.code_size_with_dictionary << ',' << format_pj(r.energy.total_fj)
        << ',' << r.acet_cycles << ',' << (r.wcet_cycles ? std::to_string(*r.wcet_cycles) : "NA")
        << "\n";
  }
  out.csv = csv.str();
  return out;
}

}  // namespace critbench
