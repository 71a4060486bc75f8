#include "cookar/types.hpp"

#include <algorithm>
#include <array>

#include "cookar/error.hpp"

namespace cookar {

namespace {
constexpr std::array<std::string_view, kRoleCount> kRoleNames = {
    "grabbable", "hazardous", "entry", "exit", "containment", "intersection", "activation"};
}

std::string_view role_name(Role role) noexcept {
  const auto i = static_cast<std::size_t>(role);
  return i < kRoleNames.size() ? kRoleNames[i] : std::string_view("invalid");
}

std::optional<Role> role_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  return std::nullopt;
}

std::optional<Role> role_from_wire(std::uint8_t value) noexcept {
  if (value >= kRoleCount) return std::nullopt;
  return static_cast<Role>(value);
}

Bitmask::Bitmask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("bitmask dimensions must be non-negative");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t Bitmask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be non-negative");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  data_.resize(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    data_[3 * i] = fill.r;
    data_[3 * i + 1] = fill.g;
    data_[3 * i + 2] = fill.b;
  }
}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw InvalidArgument("image dimensions must be non-negative");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw InvalidArgument("pixel buffer length must equal width*height*3");
  }
}

DepthMap::DepthMap(int width, int height, std::uint16_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0)), fill) {
  if (width < 0 || height < 0) throw InvalidArgument("depth dimensions must be non-negative");
}

DepthMap::DepthMap(int width, int height, std::vector<std::uint16_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw InvalidArgument("depth dimensions must be non-negative");
  if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidArgument("depth buffer length must equal width*height");
  }
}

}  // namespace cookar
