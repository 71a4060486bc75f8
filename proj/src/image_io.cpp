#include "cookar/image_io.hpp"

#include <png.h>

#include <fstream>
#include <vector>

#include "cookar/error.hpp"

namespace cookar {

RgbImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw ConfigError("cannot read " + path.string() + ": " + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  const int w = static_cast<int>(img.width);
  const int h = static_cast<int>(img.height);
  std::vector<std::uint8_t> data(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, data.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw ConfigError("cannot decode " + path.string() + ": " + msg);
  }
  return RgbImage(w, h, std::move(data));
}

void write_png(const RgbImage& image, const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.data().data(), 0, nullptr)) {
    throw ConfigError("cannot write " + path.string() + ": " + img.message);
  }
}

DepthMap read_depth_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw ConfigError(path.string() + ": not a binary PGM");
  auto next_int = [&]() {
    for (;;) {
      in >> std::ws;
      if (in.peek() == '#') {
        std::string comment;
        std::getline(in, comment);
        continue;
      }
      int v = -1;
      in >> v;
      if (!in) throw ConfigError(path.string() + ": malformed PGM header");
      return v;
    }
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0) throw ConfigError(path.string() + ": bad PGM dimensions");
  if (maxval != 65535) throw ConfigError(path.string() + ": depth PGM must have maxval 65535");
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw ConfigError(path.string() + ": truncated PGM");
  std::vector<std::uint16_t> data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  }
  return DepthMap(w, h, std::move(data));
}

void write_depth_pgm(const DepthMap& depth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "P5\n" << depth.width() << ' ' << depth.height() << "\n65535\n";
  for (std::uint16_t v : depth.data()) {
    const char b[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xFF)};
    out.write(b, 2);
  }
}

}  // namespace cookar
