#include "critbench/placement.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "critbench/error.hpp"

namespace critbench {

std::string to_string(PlacementStrategy s) {
  switch (s) {
    case PlacementStrategy::None: return "none";
    case PlacementStrategy::FirstUsed: return "first-used";
    case PlacementStrategy::SmallSizeFirst: return "small-size-first";
    case PlacementStrategy::HighFrequency: return "high-frequency";
  }
  return "?";
}

PlacementStrategy placement_strategy_from_string(const std::string& name) {
  for (auto s : {PlacementStrategy::None, PlacementStrategy::FirstUsed,
                 PlacementStrategy::SmallSizeFirst, PlacementStrategy::HighFrequency}) {
    if (to_string(s) == name) return s;
  }
  throw Error("place", "unknown strategy '" + name + "'");
}

bool PlacementMap::contains(std::string_view symbol) const {
  return std::find(symbols.begin(), symbols.end(), symbol) != symbols.end();
}

std::uint32_t PlacementMap::occupied_bytes(const Program& program) const {
  std::uint32_t total = 0;
  for (const auto& s : symbols) {
    const auto* d = program.find_data(s);
    if (!d) throw Error("place", "placed symbol '" + s + "' not in program");
    total += d->size;
  }
  return total;
}

std::vector<std::pair<Address, Address>> PlacementMap::ranges(const Program& program) const {
  std::vector<std::pair<Address, Address>> out;
  for (const auto& s : symbols) {
    const auto* d = program.find_data(s);
    if (!d) throw Error("place", "placed symbol '" + s + "' not in program");
    out.emplace_back(d->base, d->end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ObjectTable build_objects(const Program& program, const AccessTrace& trace) {
  ObjectTable table;
  for (const auto& d : program.data) table.objects.push_back(DataObject{d.name, d.size, kNeverUsed, 0});
  for (const auto& r : trace.records) {
    bool found = false;
    for (std::size_t i = 0; i < program.data.size(); ++i) {
      if (program.data[i].contains(r.address)) {
        auto& obj = table.objects[i];
        obj.access_count++;
        obj.first_use = std::min(obj.first_use, r.index);
        found = true;
        break;
      }
    }
    if (found) continue;
    if (r.symbol == "stack") {
      table.stack_accesses++;
    } else {
      table.unknown_accesses++;
    }
  }
  return table;
}

namespace {

PlacementMap greedy(PlacementStrategy strategy, const std::vector<const DataObject*>& order,
                    std::uint32_t spm_size) {
  PlacementMap map;
  map.strategy = strategy;
  map.spm_size = spm_size;
  std::uint32_t remaining = spm_size;
  for (const auto* obj : order) {
    if (obj->size <= remaining) {
      map.symbols.push_back(obj->name);
      remaining -= obj->size;
    }
  }
  return map;
}

}  // namespace

PlacementMap place_first_used(const ObjectTable& objects, const AccessTrace& trace,
                              std::uint32_t spm_size) {
  std::map<std::string, const DataObject*, std::less<>> by_name;
  for (const auto& o : objects.objects) by_name.emplace(o.name, &o);
  PlacementMap map;
  map.strategy = PlacementStrategy::FirstUsed;
  map.spm_size = spm_size;
  map.trace_digest = trace.digest();
  std::uint32_t remaining = spm_size;
  std::vector<std::string> seen;
  for (const auto& r : trace.records) {
    auto it = by_name.find(r.symbol);
    if (it == by_name.end()) continue;
    if (std::find(seen.begin(), seen.end(), r.symbol) != seen.end()) continue;
    seen.push_back(r.symbol);
    if (it->second->size <= remaining) {
      map.symbols.push_back(r.symbol);
      remaining -= it->second->size;
    }
  }
  return map;
}

PlacementMap place_small_first(const ObjectTable& objects, std::uint32_t spm_size) {
  std::vector<const DataObject*> order;
  for (const auto& o : objects.objects) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(), [](const DataObject* a, const DataObject* b) {
    return std::tie(a->size, a->first_use, a->name) < std::tie(b->size, b->first_use, b->name);
  });
  return greedy(PlacementStrategy::SmallSizeFirst, order, spm_size);
}

PlacementMap place_high_frequency(const ObjectTable& objects, std::uint32_t spm_size) {
  std::vector<const DataObject*> order;
  for (const auto& o : objects.objects) order.push_back(&o);
  std::stable_sort(order.begin(), order.end(), [](const DataObject* a, const DataObject* b) {
    if (a->access_count != b->access_count) return a->access_count > b->access_count;
    return std::tie(a->size, a->first_use, a->name) < std::tie(b->size, b->first_use, b->name);
  });
  return greedy(PlacementStrategy::HighFrequency, order, spm_size);
}

PlacementMap make_placement(PlacementStrategy strategy, const ObjectTable& objects,
                            const AccessTrace& trace, std::uint32_t spm_size) {
  PlacementMap map;
  switch (strategy) {
    case PlacementStrategy::None: map.spm_size = spm_size; break;
    case PlacementStrategy::FirstUsed: map = place_first_used(objects, trace, spm_size); break;
    case PlacementStrategy::SmallSizeFirst: map = place_small_first(objects, spm_size); break;
    case PlacementStrategy::HighFrequency: map = place_high_frequency(objects, spm_size); break;
  }
  map.trace_digest = trace.digest();
  return map;
}

std::string serialize_placement(const PlacementMap& map) {
  std::ostringstream out;
  out << "# strategy " << to_string(map.strategy) << "\n";
  out << "# spm_size " << map.spm_size << "\n";
  out << "# trace " << (map.trace_digest.empty() ? "-" : map.trace_digest) << "\n";
  for (const auto& s : map.symbols) out << s << "\n";
  return out.str();
}

PlacementMap parse_placement(const std::string& text) {
  PlacementMap map;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string key, value;
      fields >> key >> value;
      if (key == "strategy") {
        map.strategy = placement_strategy_from_string(value);
      } else if (key == "spm_size") {
        map.spm_size = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "trace") {
        map.trace_digest = value == "-" ? "" : value;
      }
      continue;
    }
    map.symbols.push_back(line);
  }
  return map;
}

PlacementMap load_placement(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("place", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_placement(ss.str());
}

}  // namespace critbench
