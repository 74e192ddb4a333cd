#include "critbench/program.hpp"

#include "critbench/error.hpp"

namespace critbench {

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::FallThrough: return "fallthrough";
    case EdgeKind::Taken: return "taken";
    case EdgeKind::Jump: return "jump";
    case EdgeKind::Call: return "call";
    case EdgeKind::Return: return "return";
  }
  return "?";
}

FuncId Program::entry_function() const {
  if (auto f = find_function("main")) return *f;
  return 0;
}

std::optional<Address> Program::code_label(std::string_view name) const {
  for (const auto& l : code_labels) {
    if (l.name == name) return l.address;
  }
  return std::nullopt;
}

const DataSymbol* Program::find_data(std::string_view name) const {
  for (const auto& d : data) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

const DataSymbol* Program::data_at(Address a) const {
  for (const auto& d : data) {
    if (d.contains(a)) return &d;
  }
  return nullptr;
}

std::optional<FuncId> Program::find_function(std::string_view name) const {
  for (FuncId f = 0; f < functions.size(); ++f) {
    if (functions[f].name == name) return f;
  }
  return std::nullopt;
}

Address Program::data_end() const {
  Address end = layout.data_base;
  for (const auto& d : data) end = std::max(end, d.end());
  return end;
}

void Program::annotate(EntityId entity, std::string_view key, AnnotationValue value) {
  std::size_t limit = 1;
  switch (entity.kind) {
    case EntityKind::Instruction: limit = text.size(); break;
    case EntityKind::Block: limit = blocks.size(); break;
    case EntityKind::Edge: limit = edges.size(); break;
    case EntityKind::Function: limit = functions.size(); break;
    case EntityKind::Program: limit = 1; break;
  }
  if (entity.index >= limit) {
    throw Error("annotate", "no such entity (index " + std::to_string(entity.index) + ")");
  }
  annotations.set(entity, key, value);
}

std::optional<AnnotationValue> Program::get_annotation(EntityId entity,
                                                       std::string_view key) const {
  return annotations.get(entity, key);
}

bool Program::same_image(const Program& other) const {
  if (!(layout == other.layout && text == other.text && code_labels == other.code_labels &&
        data == other.data && functions.size() == other.functions.size())) {
    return false;
  }
  for (std::size_t i = 0; i < functions.size(); ++i) {
    const auto& a = functions[i];
    const auto& b = other.functions[i];
    if (a.name != b.name || a.first != b.first || a.count != b.count) return false;
  }
  if (flow_facts.size() != other.flow_facts.size()) return false;
  for (std::size_t i = 0; i < flow_facts.size(); ++i) {
    if (flow_facts[i].label != other.flow_facts[i].label ||
        flow_facts[i].bound != other.flow_facts[i].bound) {
      return false;
    }
  }
  return true;
}

}  // namespace critbench
