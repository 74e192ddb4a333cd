#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "critbench/isa.hpp"

namespace critbench {

enum class EntityKind : std::uint8_t { Instruction, Block, Edge, Function, Program };

struct EntityId {
  EntityKind kind = EntityKind::Program;
  std::uint32_t index = 0;

  friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

inline EntityId instr_entity(std::uint32_t i) { return {EntityKind::Instruction, i}; }
inline EntityId block_entity(std::uint32_t b) { return {EntityKind::Block, b}; }
inline EntityId edge_entity(std::uint32_t e) { return {EntityKind::Edge, e}; }

/// Cache behaviour of one static memory access.
enum class CacheClass : std::uint8_t { AlwaysHit, Persistent, NotClassified };

std::string_view to_string(CacheClass c);

struct AddressValue {
  Address value = 0;
  friend bool operator==(const AddressValue&, const AddressValue&) = default;
};

using AnnotationValue = std::variant<std::int64_t, bool, AddressValue, CacheClass>;

/// Single-valued (entity, key) -> value store. Reads may run concurrently;
/// writers are expected to own the program exclusively.
class AnnotationStore {
 public:
  AnnotationStore() = default;
  AnnotationStore(const AnnotationStore& other);
  AnnotationStore& operator=(const AnnotationStore& other);

  void set(EntityId entity, std::string_view key, AnnotationValue value);
  std::optional<AnnotationValue> get(EntityId entity, std::string_view key) const;

  template <class T>
  std::optional<T> get_as(EntityId entity, std::string_view key) const {
    auto v = get(entity, key);
    if (!v) return std::nullopt;
    if (const T* p = std::get_if<T>(&*v)) return *p;
    return std::nullopt;
  }

  void erase_key(std::string_view key);
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::pair<EntityId, std::string>, AnnotationValue, std::less<>> values_;
};

}  // namespace critbench
