#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "cookar/types.hpp"

namespace cookar {

enum class OverlayMode { solid, outline, off };

struct RoleStyle {
  OverlayMode mode = OverlayMode::off;
  Rgb color{};
  double alpha = 1.0;
  int thickness = 1;
  friend bool operator==(const RoleStyle&, const RoleStyle&) = default;
};

inline constexpr Rgb kGrabbableGreen{0x3B, 0xE8, 0xB0};
inline constexpr Rgb kHazardRed{0xFC, 0x62, 0x6A};
inline constexpr Rgb kContrastWhite{0xFF, 0xFF, 0xFF};

/// Rendering rule per role.
struct StyleSpec {
  std::array<RoleStyle, kRoleCount> roles{};

  const RoleStyle& operator[](Role role) const noexcept { return roles[static_cast<std::size_t>(role)]; }
  RoleStyle& operator[](Role role) noexcept { return roles[static_cast<std::size_t>(role)]; }
  /// Throws ConfigError (alpha outside [0,1], outline thickness < 1).
  void validate() const;
  friend bool operator==(const StyleSpec&, const StyleSpec&) = default;
};

/// "cookar-study": grabbable and hazardous both solid (green / red).
/// "preferred": grabbable solid green, hazardous red outline of 3 px.
/// Extended roles are white outlines in both, except containment, which
/// "preferred" leaves unrendered.
StyleSpec style_preset(std::string_view name);

/// Role name -> {mode, color "#RRGGBB", alpha, thickness}. Roles missing
/// from the file are off; unknown roles or keys are a ConfigError.
StyleSpec style_from_json(const nlohmann::json& doc);
nlohmann::json style_to_json(const StyleSpec& style);

/// Preset name or path to a style JSON file.
StyleSpec resolve_style(const std::string& name_or_path);

Rgb parse_hex_color(std::string_view text);
std::string to_hex(Rgb color);
std::string_view mode_name(OverlayMode mode) noexcept;

}  // namespace cookar
