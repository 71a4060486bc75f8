#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cookar/types.hpp"

namespace cookar {

struct ClassEntry {
  int class_id = 0;
  std::string name;
  Role default_role = Role::hazardous;
};

/// The 18 kitchen-tool part classes. Ids are contiguous from 0; even ids are
/// the functional part of a tool, odd ids its handle.
class ClassTaxonomy {
 public:
  static const ClassTaxonomy& kitchen();

  const std::vector<ClassEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(int class_id) const noexcept {
    return class_id >= 0 && static_cast<std::size_t>(class_id) < entries_.size();
  }
  /// Throws InvalidArgument for ids outside the taxonomy.
  const ClassEntry& at(int class_id) const;
  std::optional<int> find(std::string_view name) const noexcept;

 private:
  explicit ClassTaxonomy(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {}
  std::vector<ClassEntry> entries_;
};

using RoleOverrides = std::map<int, Role>;

/// Handles are grabbable, every other part hazardous, unless overridden.
Role role_of(int class_id, const ClassTaxonomy& taxonomy = ClassTaxonomy::kitchen(),
             const RoleOverrides& overrides = {});

}  // namespace cookar
