#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "critbench/assembler.hpp"
#include "critbench/error.hpp"
#include "critbench/experiment.hpp"
#include "critbench/trace.hpp"
#include "critbench/wcet.hpp"

using namespace critbench;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path, const char* stage) {
  std::ifstream in(path);
  if (!in) throw Error(stage, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary so readers never see half a report.
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("io", "cannot write " + path);
    out << text;
  }
  fs::rename(tmp, path);
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::string hw = "config1";
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--hw", c.hw, "hardware config file or preset (config1, config2)");
  cmd->add_option("-o,--output", c.out, "output file (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"critbench: code transformations evaluated on size, energy, ACET and WCET"};
  app.require_subcommand(1);

  Common c;
  std::string program, input, profile, placement, compression, trace, strategy, script, counters,
      transform = "none", grid, records;
  std::uint32_t percent = 50;

  auto* asm_cmd = app.add_subcommand("asm", "assemble and print the canonical disassembly");
  asm_cmd->add_option("program", program)->required();
  add_common(asm_cmd, c);

  auto* sim_cmd = app.add_subcommand("sim", "cycle-level simulation, JSON report");
  sim_cmd->add_option("program", program)->required();
  sim_cmd->add_option("--input", input);
  sim_cmd->add_option("--placement", placement);
  sim_cmd->add_option("--compression", compression);
  add_common(sim_cmd, c);

  auto* trace_cmd = app.add_subcommand("trace", "record the data access trace");
  trace_cmd->add_option("program", program)->required();
  trace_cmd->add_option("--input", input);
  add_common(trace_cmd, c);

  auto* place_cmd = app.add_subcommand("place", "choose scratchpad-resident data");
  place_cmd->add_option("program", program)->required();
  place_cmd->add_option("--strategy", strategy)->required();
  place_cmd->add_option("--trace", trace, "trace file; a pre-run is done when absent");
  place_cmd->add_option("--input", input, "pre-run input");
  add_common(place_cmd, c);

  auto* compress_cmd = app.add_subcommand("compress", "build a dictionary and compressed layout");
  compress_cmd->add_option("program", program)->required();
  compress_cmd->add_option("-P,--percent", percent, "dictionary share filled by execution count");
  compress_cmd->add_option("--input", input, "pre-run input");
  add_common(compress_cmd, c);

  auto* transform_cmd = app.add_subcommand("transform", "apply an inline/unroll script");
  transform_cmd->add_option("program", program)->required();
  transform_cmd->add_option("--script", script)->required();
  add_common(transform_cmd, c);

  auto* wcet_cmd = app.add_subcommand("wcet", "static WCET bound");
  wcet_cmd->add_option("program", program)->required();
  wcet_cmd->add_option("--placement", placement);
  wcet_cmd->add_option("--compression", compression);
  add_common(wcet_cmd, c);

  auto* energy_cmd = app.add_subcommand("energy", "energy from a saved counters or sim report");
  energy_cmd->add_option("counters", counters)->required();
  add_common(energy_cmd, c);

  auto* run_cmd = app.add_subcommand("run", "evaluate one experiment point");
  run_cmd->add_option("program", program)->required();
  run_cmd->add_option("--transform", transform,
                      "none | place:STRATEGY | compress:P | script:FILE | inline-all");
  run_cmd->add_option("--input", input);
  run_cmd->add_option("--profile", profile, "pre-run input (default in0.txt beside the program)");
  add_common(run_cmd, c);

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a parameter grid, CSV series");
  sweep_cmd->add_option("program", program)->required();
  sweep_cmd->add_option("--grid", grid, "P=0,25,50,75,100 or strategy=none,high-frequency")
      ->required();
  sweep_cmd->add_option("--input", input);
  sweep_cmd->add_option("--profile", profile);
  sweep_cmd->add_option("--records", records, "directory for per-point JSON records");
  add_common(sweep_cmd, c);

  CLI11_PARSE(app, argc, argv);

  try {
    const HardwareConfig hw = resolve_hw(c.hw);
    const auto load = [&] { return load_program_file(program); };
    const auto load_in = [&](const std::string& path) {
      return path.empty() ? InputData{} : load_input(path);
    };

    if (asm_cmd->parsed()) {
      const Program p = load();
      emit(c.out, disassemble(p));
      std::cerr << p.text.size() << " instructions, " << p.blocks.size() << " blocks, "
                << p.edges.size() << " edges, " << p.functions.size() << " functions\n";
    } else if (sim_cmd->parsed()) {
      const Program p = load();
      const InputData in = load_in(input);
      std::optional<PlacementMap> pm;
      std::optional<CompressionLayout> layout;
      if (!placement.empty()) pm = load_placement(placement);
      if (!compression.empty()) layout = load_layout(compression);
      SimOptions o;
      o.input = &in;
      o.placement = pm ? &*pm : nullptr;
      o.compression = layout ? &*layout : nullptr;
      const auto r = simulate(p, hw, o);
      auto j = to_json(r);
      j["energy"] = to_json(estimate_energy(r.counters, hw.energy));
      emit(c.out, dump(j));
    } else if (trace_cmd->parsed()) {
      const Program p = load();
      const InputData in = load_in(input);
      SimOptions o;
      o.input = &in;
      o.record_trace = true;
      emit(c.out, serialize_trace(*simulate(p, hw, o).trace));
    } else if (place_cmd->parsed()) {
      const Program p = load();
      if (!hw.spm) throw Error("place", "configuration " + hw.name + " has no scratchpad");
      AccessTrace t;
      if (!trace.empty()) {
        t = load_trace(trace);
      } else {
        const InputData in = load_in(input);
        SimOptions o;
        o.input = &in;
        o.record_trace = true;
        t = *simulate(p, hw, o).trace;
      }
      const auto objects = build_objects(p, t);
      emit(c.out, serialize_placement(
                      make_placement(placement_strategy_from_string(strategy), objects, t,
                                     hw.spm->size)));
    } else if (compress_cmd->parsed()) {
      const Program p = load();
      const auto v = make_variant(p, hw, TransformSpec::compression(percent), load_in(input));
      emit(c.out, serialize_layout(*v.compression));
      const auto rep = compression_report(*v.compression);
      std::fprintf(stderr, "%u -> %u bytes (+%u dictionary), %u groups\n", rep.original_bytes,
                   rep.compressed_bytes, rep.dictionary_bytes, rep.group_count);
    } else if (transform_cmd->parsed()) {
      std::vector<std::string> warnings;
      const Program out = apply_script(load(), parse_script(read_file(script, "transform")), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      emit(c.out, disassemble(out));
    } else if (wcet_cmd->parsed()) {
      const Program p = load();
      std::optional<PlacementMap> pm;
      std::optional<CompressionLayout> layout;
      if (!placement.empty()) pm = load_placement(placement);
      if (!compression.empty()) layout = load_layout(compression);
      WcetOptions o;
      o.placement = pm ? &*pm : nullptr;
      o.compression = layout ? &*layout : nullptr;
      emit(c.out, dump(to_json(compute_wcet(p, hw, o))));
    } else if (energy_cmd->parsed()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(counters, "energy"));
      } catch (const nlohmann::json::exception& e) {
        throw Error("energy", std::string("bad counters file: ") + e.what());
      }
      if (j.contains("counters")) j = j["counters"];
      emit(c.out, dump(to_json(estimate_energy(counters_from_json(j), hw.energy))));
    } else if (run_cmd->parsed()) {
      ExperimentPoint pt{program, c.hw, TransformSpec::parse(transform), input, profile};
      emit(c.out, dump(to_json(run_point(pt))));
    } else if (sweep_cmd->parsed()) {
      ExperimentPoint pt{program, c.hw, {}, input, profile};
      const auto res = run_sweep(pt, SweepSpec::parse(grid));
      if (!records.empty()) {
        fs::create_directories(records);
        for (std::size_t i = 0; i < res.records.size(); ++i) {
          emit((fs::path(records) / (res.params[i] + ".json")).string(), dump(to_json(res.records[i])));
        }
      }
      emit(c.out, res.csv);
    }
  } catch (const Error& e) {
    std::cerr << "critbench: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "critbench: io: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
