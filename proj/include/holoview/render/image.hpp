#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/hash.hpp"

namespace holoview::render {

struct RgbaF {
  float r = 0, g = 0, b = 0, a = 0;
  friend bool operator==(const RgbaF&, const RgbaF&) = default;
};

/// Linear RGBA in [0, 1], row-major from the top-left.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<RgbaF> pixels;

  FloatImage() = default;
  FloatImage(int w, int h, RgbaF fill = {}) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw Error(ErrorKind::kDimension, "image must have positive area");
    pixels.assign(std::size_t(w) * std::size_t(h), fill);
  }
  RgbaF& at(int x, int y) { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  const RgbaF& at(int x, int y) const { return pixels[std::size_t(y) * std::size_t(width) + std::size_t(x)]; }
  friend bool operator==(const FloatImage&, const FloatImage&) = default;
};

/// Interleaved 8-bit RGBA.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Image8() = default;
  Image8(int w, int h) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw Error(ErrorKind::kDimension, "image must have positive area");
    data.assign(std::size_t(w) * std::size_t(h) * 4, 0);
  }
  std::uint8_t* px(int x, int y) { return data.data() + (std::size_t(y) * std::size_t(width) + std::size_t(x)) * 4; }
  const std::uint8_t* px(int x, int y) const {
    return data.data() + (std::size_t(y) * std::size_t(width) + std::size_t(x)) * 4;
  }
  std::uint64_t hash() const { return fnv1a64(data); }
  friend bool operator==(const Image8&, const Image8&) = default;
};

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline Image8 to_rgba8(const FloatImage& img) {
  Image8 out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const auto& p = img.pixels[i];
    out.data[4 * i + 0] = to_byte(p.r);
    out.data[4 * i + 1] = to_byte(p.g);
    out.data[4 * i + 2] = to_byte(p.b);
    out.data[4 * i + 3] = to_byte(p.a);
  }
  return out;
}

/// Peak signal-to-noise ratio over the RGB channels, in dB.
inline double psnr(const Image8& a, const Image8& b) {
  if (a.width != b.width || a.height != b.height) throw Error(ErrorKind::kDimension, "psnr: size mismatch");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    if (i % 4 == 3) continue;
    const double d = double(a.data[i]) - double(b.data[i]);
    se += d * d;
  }
  const double mse = se / (double(a.data.size()) * 0.75);
  return mse == 0.0 ? INFINITY : 10.0 * std::log10(255.0 * 255.0 / mse);
}

/// Headerless RGBA8 dump.
inline void write_raw(const Image8& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path);
}

inline Image8 read_raw(const std::string& path, int width, int height) {
  Image8 img(width, height);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path);
  f.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.data.size()) || f.peek() != EOF)
    throw Error(ErrorKind::kFormat, path + ": size does not match " + std::to_string(width) + "x" + std::to_string(height));
  return img;
}

}  // namespace holoview::render
