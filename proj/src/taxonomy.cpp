#include "cookar/taxonomy.hpp"

#include "cookar/error.hpp"

namespace cookar {

namespace {

std::vector<ClassEntry> kitchen_entries() {
  static constexpr std::string_view kNames[] = {
      "Knife Blade",   "Knife Handle",   "Spoon Bowl",    "Spoon Handle",   "Fork Tines",   "Fork Handle",
      "Scissor Blade", "Scissor Handle", "Ladle Bowl",    "Ladle Handle",   "Spatula Head", "Spatula Handle",
      "Pan Base",      "Pan Handle",     "Cup Base",      "Cup Handle",     "Carafe Base",  "Carafe Handle",
  };
  std::vector<ClassEntry> out;
  int id = 0;
  for (std::string_view name : kNames) {
    const bool handle = name.ends_with("Handle");
    out.push_back({id++, std::string(name), handle ? Role::grabbable : Role::hazardous});
  }
  return out;
}

}  // namespace

const ClassTaxonomy& ClassTaxonomy::kitchen() {
  static const ClassTaxonomy taxonomy(kitchen_entries());
  return taxonomy;
}

const ClassEntry& ClassTaxonomy::at(int class_id) const {
  if (!contains(class_id)) throw InvalidArgument("unknown class id " + std::to_string(class_id));
  return entries_[static_cast<std::size_t>(class_id)];
}

std::optional<int> ClassTaxonomy::find(std::string_view name) const noexcept {
  for (const auto& e : entries_) {
    if (e.name == name) return e.class_id;
  }
  return std::nullopt;
}

Role role_of(int class_id, const ClassTaxonomy& taxonomy, const RoleOverrides& overrides) {
  const ClassEntry& entry = taxonomy.at(class_id);
  if (auto it = overrides.find(class_id); it != overrides.end()) return it->second;
  return entry.default_role;
}

}  // namespace cookar
