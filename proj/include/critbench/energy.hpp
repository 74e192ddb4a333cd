#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "critbench/hw_config.hpp"
#include "critbench/simulator.hpp"
#include "json.hpp"

namespace critbench {

struct ComponentEnergy {
  Component component = Component::ICache;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t energy_fj = 0;  // reads * E_read + writes * E_write
  double share = 0.0;           // fraction of the total
};

struct EnergyReport {
  std::vector<ComponentEnergy> components;  // only components in the table
  std::uint64_t total_fj = 0;

  double total_pj() const { return static_cast<double>(total_fj) / 1000.0; }
  const ComponentEnergy* find(Component c) const;
};

/// Sum over memories of reads * E_read + writes * E_write, in exact integer
/// femtojoules. Throws Error("energy", ...) when a component with accesses
/// has no table entry.
EnergyReport estimate_energy(const Counters& counters, const EnergyTable& table);

/// "123.456" style exact rendering of a femtojoule amount in picojoules.
std::string format_pj(std::uint64_t fj);

nlohmann::json to_json(const EnergyReport& r);

}  // namespace critbench
