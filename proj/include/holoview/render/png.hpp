#pragma once

#include <png.h>

#include <string>

#include "holoview/render/image.hpp"

namespace holoview::render {

// Requires linking libpng (PNG::PNG).
inline void write_png(const Image8& img, const std::string& path) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  desc.width = static_cast<png_uint_32>(img.width);
  desc.height = static_cast<png_uint_32>(img.height);
  desc.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&desc, path.c_str(), 0, img.data.data(), 0, nullptr))
    throw Error(ErrorKind::kIo, "cannot write " + path + ": " + desc.message);
}

inline Image8 read_png(const std::string& path) {
  png_image desc{};
  desc.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&desc, path.c_str()))
    throw Error(ErrorKind::kFormat, "cannot read " + path + ": " + desc.message);
  desc.format = PNG_FORMAT_RGBA;
  Image8 img(static_cast<int>(desc.width), static_cast<int>(desc.height));
  if (!png_image_finish_read(&desc, nullptr, img.data.data(), 0, nullptr)) {
    png_image_free(&desc);
    throw Error(ErrorKind::kFormat, "cannot decode " + path + ": " + desc.message);
  }
  return img;
}

}  // namespace holoview::render
