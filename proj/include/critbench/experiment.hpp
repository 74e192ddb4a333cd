#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critbench/compression.hpp"
#include "critbench/energy.hpp"
#include "critbench/hw_config.hpp"
#include "critbench/placement.hpp"
#include "critbench/program.hpp"
#include "critbench/simulator.hpp"
#include "critbench/transform.hpp"
#include "json.hpp"

namespace critbench {

/// One step applied to the benchmark before evaluation.
struct TransformSpec {
  enum class Kind : std::uint8_t { None, Placement, Compression, Script, InlineAll };
  Kind kind = Kind::None;
  PlacementStrategy strategy = PlacementStrategy::None;
  std::uint32_t percent = 0;
  std::string script_path;
  TransformScript script;

  /// "none", "place:STRATEGY", "compress:P", "script:PATH", "inline-all".
  std::string label() const;
  static TransformSpec parse(const std::string& text);
  static TransformSpec placement(PlacementStrategy s);
  static TransformSpec compression(std::uint32_t percent);
  static TransformSpec inline_all();
  static TransformSpec from_script(TransformScript script, std::string name);
};

struct ExperimentPoint {
  std::string benchmark;      // .masm path
  std::string hw;             // config file, or "config1" / "config2"
  TransformSpec transform;
  std::string input;          // input file, empty for the built-in data
  std::string profile_input;  // pre-run input; empty picks in0.txt beside the benchmark
};

/// A transformed program plus the emulation artefacts sim and wcet need.
struct Variant {
  Program program;
  std::optional<PlacementMap> placement;
  std::optional<CompressionLayout> compression;
  std::vector<std::string> warnings;

  SimOptions sim_options(const InputData* input) const;
};

/// Runs the pre-run with `profile` when the transform needs one.
Variant make_variant(const Program& base, const HardwareConfig& hw, const TransformSpec& spec,
                     const InputData& profile);

struct CriteriaRecord {
  std::string benchmark;
  std::string configuration;
  std::string transform;
  std::string input;
  std::uint32_t code_size = 0;                  // text bytes
  std::uint32_t code_size_with_dictionary = 0;  // plus dictionary entries
  EnergyReport energy;
  std::uint64_t acet_cycles = 0;
  std::optional<std::uint64_t> wcet_cycles;
  std::string wcet_note;  // why WCET was not computed
  Counters counters;
  std::vector<Word> output;
  std::string state_digest;  // registers, data, stack and output
};

/// Loop headers reachable from the entry that have no loop bound.
std::vector<std::string> missing_loop_bounds(const Program& program);

CriteriaRecord evaluate(const std::string& benchmark, const Variant& variant,
                        const HardwareConfig& hw, const InputData& input,
                        const std::string& input_name);

CriteriaRecord run_point(const ExperimentPoint& point);

nlohmann::json to_json(const CriteriaRecord& r);

/// "config1" and "config2" name the presets; anything else is a file path.
HardwareConfig resolve_hw(const std::string& name);

struct SweepSpec {
  enum class Parameter : std::uint8_t { Percent, Strategy };
  Parameter parameter = Parameter::Percent;
  std::vector<std::string> values;

  /// "P=0,25,50" or "strategy=none,high-frequency".
  static SweepSpec parse(const std::string& text);
};

struct SweepResult {
  std::vector<std::string> params;
  std::vector<CriteriaRecord> records;
  std::string csv;
};

inline constexpr const char* kSweepHeader = "param,code_size,energy_pj,acet_cycles,wcet_cycles";

/// One point per grid value (transform of `base` replaced), evaluated in
/// parallel. CSV rows follow the grid order.
SweepResult run_sweep(const ExperimentPoint& base, const SweepSpec& spec, unsigned threads = 0);

}  // namespace critbench
