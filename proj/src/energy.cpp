#include "critbench/energy.hpp"

#include <cstdio>

#include "critbench/error.hpp"

namespace critbench {

const ComponentEnergy* EnergyReport::find(Component c) const {
  for (const auto& e : components) {
    if (e.component == c) return &e;
  }
  return nullptr;
}

EnergyReport estimate_energy(const Counters& counters, const EnergyTable& table) {
  EnergyReport r;
  for (Component c : kComponents) {
    const auto& n = counters.at(c);
    const auto& cost = table.at(c);
    if (!cost) {
      if (n.reads != 0 || n.writes != 0) {
        throw Error("energy", "no energy entry for " + to_string(c) + " which has accesses");
      }
      continue;
    }
    ComponentEnergy e;
    e.component = c;
    e.reads = n.reads;
    e.writes = n.writes;
    e.energy_fj = n.reads * cost->read_fj + n.writes * cost->write_fj;
    r.total_fj += e.energy_fj;
    r.components.push_back(e);
  }
  for (auto& e : r.components) {
    e.share = r.total_fj == 0 ? 0.0 : static_cast<double>(e.energy_fj) / r.total_fj;
  }
  return r;
}

std::string format_pj(std::uint64_t fj) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%03llu", static_cast<unsigned long long>(fj / 1000),
                static_cast<unsigned long long>(fj % 1000));
  return buf;
}

nlohmann::json to_json(const EnergyReport& r) {
  nlohmann::json j;
  j["total_fj"] = r.total_fj;
  j["total_pj"] = format_pj(r.total_fj);
  for (const auto& e : r.components) {
    j["components"][to_string(e.component)] = {{"reads", e.reads},
                                               {"writes", e.writes},
                                               {"energy_fj", e.energy_fj},
                                               {"energy_pj", format_pj(e.energy_fj)},
                                               {"share", e.share}};
  }
  return j;
}

}  // namespace critbench
