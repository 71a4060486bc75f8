#pragma once

#include <filesystem>

#include "cookar/types.hpp"

namespace cookar {

/// 8-bit RGB PNG. Grey, palette, alpha and 16-bit inputs are converted on read.
/// Throws ConfigError.
RgbImage read_png(const std::filesystem::path& path);
void write_png(const RgbImage& image, const std::filesystem::path& path);

/// Binary PGM (P5) with maxval 65535, big-endian samples in millimetres.
DepthMap read_depth_pgm(const std::filesystem::path& path);
void write_depth_pgm(const DepthMap& depth, const std::filesystem::path& path);

}  // namespace cookar
