#include "cookar/style.hpp"

#include <cctype>
#include <cstdio>

#include "cookar/annotations.hpp"
#include "cookar/error.hpp"

namespace cookar {

namespace {

constexpr Role kExtendedRoles[] = {Role::entry, Role::exit, Role::containment, Role::intersection,
                                   Role::activation};

OverlayMode mode_from_name(std::string_view name) {
  if (name == "solid") return OverlayMode::solid;
  if (name == "outline") return OverlayMode::outline;
  if (name == "off") return OverlayMode::off;
  throw ConfigError("unknown overlay mode '" + std::string(name) + "'");
}

}  // namespace

std::string_view mode_name(OverlayMode mode) noexcept {
  switch (mode) {
    case OverlayMode::solid: return "solid";
    case OverlayMode::outline: return "outline";
    case OverlayMode::off: return "off";
  }
  return "off";
}

void StyleSpec::validate() const {
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const RoleStyle& r = roles[i];
    const std::string name(role_name(static_cast<Role>(i)));
    if (!(r.alpha >= 0.0 && r.alpha <= 1.0)) throw ConfigError(name + ": alpha must be in [0,1]");
    if (r.mode == OverlayMode::outline && r.thickness < 1) throw ConfigError(name + ": outline thickness must be >= 1");
  }
}

StyleSpec style_preset(std::string_view name) {
  StyleSpec s;
  for (Role r : kExtendedRoles) s[r] = {OverlayMode::outline, kContrastWhite, 1.0, 2};
  if (name == "cookar-study") {
    s[Role::grabbable] = {OverlayMode::solid, kGrabbableGreen, 1.0, 1};
    s[Role::hazardous] = {OverlayMode::solid, kHazardRed, 1.0, 1};
    return s;
  }
  if (name == "preferred") {
    s[Role::grabbable] = {OverlayMode::solid, kGrabbableGreen, 1.0, 1};
    s[Role::hazardous] = {OverlayMode::outline, kHazardRed, 1.0, 3};
    for (Role r : kExtendedRoles) s[r].thickness = 3;
    s[Role::containment].mode = OverlayMode::off;
    return s;
  }
  throw ConfigError("unknown style preset '" + std::string(name) + "'");
}

Rgb parse_hex_color(std::string_view text) {
  if (!text.empty() && text.front() == '#') text.remove_prefix(1);
  if (text.size() != 6) throw ConfigError("color must be #RRGGBB");
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u >= 'A' && u <= 'F') return u - 'A' + 10;
    throw ConfigError("invalid hex digit in color");
  };
  auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(text[i]) * 16 + nibble(text[i + 1])); };
  return {byte(0), byte(2), byte(4)};
}

std::string to_hex(Rgb color) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", color.r, color.g, color.b);
  return buf;
}

StyleSpec style_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("style file must be a JSON object keyed by role name");
  StyleSpec s;
  try {
    for (const auto& [key, value] : doc.items()) {
      const auto role = role_from_name(key);
      if (!role) throw ConfigError("unknown role '" + key + "' in style file");
      RoleStyle rs;
      for (const auto& [field, v] : value.items()) {
        if (field == "mode") rs.mode = mode_from_name(v.get<std::string>());
        else if (field == "color") rs.color = parse_hex_color(v.get<std::string>());
        else if (field == "alpha") rs.alpha = v.get<double>();
        else if (field == "thickness") rs.thickness = v.get<int>();
        else throw ConfigError("unknown key '" + field + "' for role '" + key + "'");
      }
      s[*role] = rs;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed style file: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json style_to_json(const StyleSpec& style) {
  nlohmann::json doc = nlohmann::json::object();
  for (std::size_t i = 0; i < style.roles.size(); ++i) {
    const RoleStyle& r = style.roles[i];
    doc[std::string(role_name(static_cast<Role>(i)))] = {
        {"mode", std::string(mode_name(r.mode))}, {"color", to_hex(r.color)}, {"alpha", r.alpha},
        {"thickness", r.thickness}};
  }
  return doc;
}

StyleSpec resolve_style(const std::string& name_or_path) {
  if (name_or_path == "cookar-study" || name_or_path == "preferred") return style_preset(name_or_path);
  return style_from_json(read_json_file(name_or_path));
}

}  // namespace cookar
