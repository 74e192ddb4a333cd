#include "critbench/hw_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "critbench/error.hpp"

namespace critbench {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("hw", message); }

bool power_of_two(std::uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::uint32_t get_u32(const json& obj, const char* key, std::uint32_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint32_t>();
}

// Energies are given in pJ with at most three decimals.
std::uint64_t pj_to_fj(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + " must be a number");
  const double pj = v.get<double>();
  if (pj < 0) fail(where + " must be >= 0");
  const double fj = std::round(pj * 1000.0);
  if (std::abs(fj - pj * 1000.0) > 1e-6) fail(where + " has more than 3 decimals (pJ)");
  return static_cast<std::uint64_t>(fj);
}

json fj_to_pj(std::uint64_t fj) {
  if (fj % 1000 == 0) return fj / 1000;
  return static_cast<double>(fj) / 1000.0;
}

CacheConfig cache_from_json(const json& j, const DramConfig& dram) {
  CacheConfig c;
  c.size = get_u32(j, "size", c.size);
  c.associativity = get_u32(j, "associativity", c.associativity);
  c.line_size = get_u32(j, "line_size", c.line_size);
  c.hit_latency = get_u32(j, "hit_latency", 1);
  c.miss_penalty = get_u32(j, "miss_penalty", dram.read_latency);
  return c;
}

json cache_to_json(const CacheConfig& c) {
  return {{"size", c.size},
          {"associativity", c.associativity},
          {"line_size", c.line_size},
          {"hit_latency", c.hit_latency},
          {"miss_penalty", c.miss_penalty}};
}

void validate_cache(const CacheConfig& c, const std::string& name, const DramConfig& dram) {
  if (!power_of_two(c.size) || !power_of_two(c.associativity) || !power_of_two(c.line_size)) {
    fail(name + " geometry must use powers of two");
  }
  if (c.size < c.associativity * c.line_size) fail(name + " has fewer than one set");
  if (c.sets() * c.associativity * c.line_size != c.size) {
    fail(name + " size != sets x associativity x line");
  }
  if (c.line_size % dram.bus_width != 0) fail(name + " line size is not a multiple of the bus width");
  if (c.line_size < 4) fail(name + " line size must hold at least one word");
  if (c.hit_latency < 1) fail(name + " hit latency must be >= 1");
}

}  // namespace

std::string to_string(Component c) {
  switch (c) {
    case Component::ICache: return "icache";
    case Component::DCache: return "dcache";
    case Component::Spm: return "spm";
    case Component::Dram: return "dram";
  }
  return "?";
}

const std::optional<AccessEnergy>& EnergyTable::at(Component c) const {
  switch (c) {
    case Component::ICache: return icache;
    case Component::DCache: return dcache;
    case Component::Spm: return spm;
    case Component::Dram: break;
  }
  return dram;
}

std::optional<AccessEnergy>& EnergyTable::at(Component c) {
  return const_cast<std::optional<AccessEnergy>&>(std::as_const(*this).at(c));
}

bool HardwareConfig::has(Component c) const {
  switch (c) {
    case Component::DCache: return dcache.has_value();
    case Component::Spm: return spm.has_value();
    default: return true;
  }
}

void validate(const HardwareConfig& hw) {
  if (hw.pipeline.issue_width < 1) fail("issue width must be >= 1");
  if (hw.pipeline.mul_latency < 1) fail("mul latency must be >= 1");
  if (!power_of_two(hw.dram.bus_width)) fail("DRAM bus width must be a power of two");
  validate_cache(hw.icache, "icache", hw.dram);
  if (hw.dcache) validate_cache(*hw.dcache, "dcache", hw.dram);
  if (!hw.dcache && !hw.spm) fail("at least one of dcache/spm is required");
  if (hw.spm) {
    if (hw.spm->size == 0 || hw.spm->size % 4 != 0) fail("spm size must be a positive multiple of 4");
    if (hw.spm->latency < 1) fail("spm latency must be >= 1");
  }
  for (Component c : kComponents) {
    if (hw.has(c) && !hw.energy.at(c)) fail("missing energy entry for " + to_string(c));
  }
}

HardwareConfig hw_config_from_json(const json& j) {
  if (!j.is_object()) fail("config must be a JSON object");
  HardwareConfig hw;
  hw.name = j.value("name", "");
  if (j.contains("dram")) {
    const auto& d = j.at("dram");
    hw.dram.read_latency = get_u32(d, "read_latency", hw.dram.read_latency);
    hw.dram.write_latency = get_u32(d, "write_latency", hw.dram.write_latency);
    hw.dram.bus_width = get_u32(d, "bus_width", hw.dram.bus_width);
  }
  if (j.contains("pipeline")) {
    const auto& p = j.at("pipeline");
    auto& pc = hw.pipeline;
    pc.issue_width = get_u32(p, "issue_width", pc.issue_width);
    pc.decompression_stage = p.value("decompression_stage", pc.decompression_stage);
    pc.dictionary_latency = get_u32(p, "dictionary_latency", pc.dictionary_latency);
    pc.load_use_penalty = get_u32(p, "load_use_penalty", pc.load_use_penalty);
    pc.mul_latency = get_u32(p, "mul_latency", pc.mul_latency);
    pc.branch_redirect_penalty = get_u32(p, "branch_redirect_penalty", pc.branch_redirect_penalty);
  }
  if (!j.contains("icache")) fail("missing icache section");
  hw.icache = cache_from_json(j.at("icache"), hw.dram);
  if (j.contains("dcache")) hw.dcache = cache_from_json(j.at("dcache"), hw.dram);
  if (j.contains("spm")) {
    SpmConfig s;
    s.size = get_u32(j.at("spm"), "size", s.size);
    s.latency = get_u32(j.at("spm"), "latency", s.latency);
    hw.spm = s;
  }
  if (j.contains("energy")) {
    const auto& e = j.at("energy");
    for (Component c : kComponents) {
      const auto name = to_string(c);
      if (!e.contains(name)) continue;
      const auto& entry = e.at(name);
      if (!entry.contains("read") || !entry.contains("write")) {
        fail("energy." + name + " needs read and write");
      }
      hw.energy.at(c) = AccessEnergy{pj_to_fj(entry.at("read"), "energy." + name + ".read"),
                                     pj_to_fj(entry.at("write"), "energy." + name + ".write")};
    }
  }
  validate(hw);
  return hw;
}

json to_json(const HardwareConfig& hw) {
  json j;
  j["name"] = hw.name;
  j["pipeline"] = {{"issue_width", hw.pipeline.issue_width},
                   {"decompression_stage", hw.pipeline.decompression_stage},
                   {"dictionary_latency", hw.pipeline.dictionary_latency},
                   {"load_use_penalty", hw.pipeline.load_use_penalty},
                   {"mul_latency", hw.pipeline.mul_latency},
                   {"branch_redirect_penalty", hw.pipeline.branch_redirect_penalty}};
  j["icache"] = cache_to_json(hw.icache);
  if (hw.dcache) j["dcache"] = cache_to_json(*hw.dcache);
  if (hw.spm) j["spm"] = {{"size", hw.spm->size}, {"latency", hw.spm->latency}};
  j["dram"] = {{"read_latency", hw.dram.read_latency},
               {"write_latency", hw.dram.write_latency},
               {"bus_width", hw.dram.bus_width}};
  json e = json::object();
  for (Component c : kComponents) {
    if (const auto& a = hw.energy.at(c)) {
      e[to_string(c)] = {{"read", fj_to_pj(a->read_fj)}, {"write", fj_to_pj(a->write_fj)}};
    }
  }
  j["energy"] = e;
  return j;
}

HardwareConfig load_hw_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    fail(path + ": " + ex.what());
  }
  return hw_config_from_json(j);
}

std::string serialize_hw_config(const HardwareConfig& hw) { return to_json(hw).dump(2) + "\n"; }

namespace {

HardwareConfig base_preset() {
  HardwareConfig hw;
  hw.pipeline.decompression_stage = true;
  hw.icache = CacheConfig{1024, 2, 16, 1, 10};
  hw.energy.icache = AccessEnergy{25000, 27000};
  hw.energy.dram = AccessEnergy{150000, 170000};
  return hw;
}

}  // namespace

HardwareConfig preset_config1() {
  HardwareConfig hw = base_preset();
  hw.name = "config1";
  hw.dcache = CacheConfig{1024, 2, 16, 1, 10};
  hw.energy.dcache = AccessEnergy{25000, 27000};
  return hw;
}

HardwareConfig preset_config2() {
  HardwareConfig hw = base_preset();
  hw.name = "config2";
  hw.dcache = CacheConfig{512, 2, 16, 1, 10};
  hw.spm = SpmConfig{512, 1};
  hw.energy.dcache = AccessEnergy{18000, 20000};
  hw.energy.spm = AccessEnergy{8000, 9000};
  return hw;
}

}  // namespace critbench
