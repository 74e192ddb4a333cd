#include "critbench/annotations.hpp"

#include <mutex>

namespace critbench {

std::string_view to_string(CacheClass c) {
  switch (c) {
    case CacheClass::AlwaysHit: return "always_hit";
    case CacheClass::Persistent: return "persistent";
    case CacheClass::NotClassified: return "not_classified";
  }
  return "?";
}

AnnotationStore::AnnotationStore(const AnnotationStore& other) {
  std::shared_lock lock(other.mutex_);
  values_ = other.values_;
}

AnnotationStore& AnnotationStore::operator=(const AnnotationStore& other) {
  if (this == &other) return *this;
  std::map<std::pair<EntityId, std::string>, AnnotationValue, std::less<>> copy;
  {
    std::shared_lock lock(other.mutex_);
    copy = other.values_;
  }
  std::unique_lock lock(mutex_);
  values_ = std::move(copy);
  return *this;
}

void AnnotationStore::set(EntityId entity, std::string_view key, AnnotationValue value) {
  std::unique_lock lock(mutex_);
  values_.insert_or_assign({entity, std::string(key)}, value);
}

std::optional<AnnotationValue> AnnotationStore::get(EntityId entity, std::string_view key) const {
  std::shared_lock lock(mutex_);
  auto it = values_.find(std::pair{entity, std::string(key)});
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void AnnotationStore::erase_key(std::string_view key) {
  std::unique_lock lock(mutex_);
  for (auto it = values_.begin(); it != values_.end();) {
    if (it->first.second == key) {
      it = values_.erase(it);
    } else {
      ++it;
    }
  }
}

std::size_t AnnotationStore::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

}  // namespace critbench
