#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace critbench {

/// Set-associative LRU cache geometry and timing.
struct CacheConfig {
  std::uint32_t size = 1024;
  std::uint32_t associativity = 2;
  std::uint32_t line_size = 16;
  std::uint32_t hit_latency = 1;
  std::uint32_t miss_penalty = 10;

  std::uint32_t sets() const { return size / (associativity * line_size); }
  std::uint32_t set_of(std::uint32_t address) const { return (address / line_size) % sets(); }
  std::uint32_t line_of(std::uint32_t address) const { return address / line_size; }
  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

struct SpmConfig {
  std::uint32_t size = 512;
  std::uint32_t latency = 1;
  friend bool operator==(const SpmConfig&, const SpmConfig&) = default;
};

struct DramConfig {
  std::uint32_t read_latency = 10;
  std::uint32_t write_latency = 10;
  std::uint32_t bus_width = 8;  // bytes moved per DRAM access
  friend bool operator==(const DramConfig&, const DramConfig&) = default;
};

struct PipelineConfig {
  std::uint32_t issue_width = 2;
  bool decompression_stage = false;
  std::uint32_t dictionary_latency = 1;
  std::uint32_t load_use_penalty = 1;
  std::uint32_t mul_latency = 2;
  std::uint32_t branch_redirect_penalty = 2;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Per-access energy in femtojoules (1/1000 pJ) so the energy formula is exact
/// integer arithmetic.
struct AccessEnergy {
  std::uint64_t read_fj = 0;
  std::uint64_t write_fj = 0;
  friend bool operator==(const AccessEnergy&, const AccessEnergy&) = default;
};

enum class Component : std::uint8_t { ICache, DCache, Spm, Dram };
inline constexpr Component kComponents[] = {Component::ICache, Component::DCache, Component::Spm,
                                            Component::Dram};
std::string to_string(Component c);

struct EnergyTable {
  std::optional<AccessEnergy> icache, dcache, spm, dram;

  const std::optional<AccessEnergy>& at(Component c) const;
  std::optional<AccessEnergy>& at(Component c);
  friend bool operator==(const EnergyTable&, const EnergyTable&) = default;
};

struct HardwareConfig {
  std::string name;
  PipelineConfig pipeline;
  CacheConfig icache;
  std::optional<CacheConfig> dcache;
  std::optional<SpmConfig> spm;
  DramConfig dram;
  EnergyTable energy;

  std::uint32_t spm_size() const { return spm ? spm->size : 0; }
  bool has(Component c) const;
  friend bool operator==(const HardwareConfig&, const HardwareConfig&) = default;
};

/// Throws Error("hw", ...) on geometry or energy-table violations.
void validate(const HardwareConfig& hw);

HardwareConfig hw_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HardwareConfig& hw);
HardwareConfig load_hw_config(const std::string& path);
std::string serialize_hw_config(const HardwareConfig& hw);

/// 1KB 2-way I-cache, 1KB 2-way D-cache, no SPM.
HardwareConfig preset_config1();
/// 1KB 2-way I-cache, 512B 2-way D-cache, 512B SPM.
HardwareConfig preset_config2();

}  // namespace critbench
