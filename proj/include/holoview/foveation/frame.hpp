#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/foveation/mapping.hpp"
#include "holoview/render/image.hpp"
#include "holoview/render/renderer.hpp"

namespace holoview::foveation {

using render::Eye;
using render::Image8;

/// One eye's image in reduced space plus everything needed to undo the warp.
struct FoveatedFrame {
  FoveaMapping mapping;
  Eye eye = Eye::kMono;
  std::uint64_t frame_id = 0;
  std::vector<std::uint8_t> pixels;  // RGBA8, reduced_width x reduced_height

  friend bool operator==(const FoveatedFrame&, const FoveatedFrame&) = default;
};

/// Casts one ray per reduced pixel through its warped full-frame position.
inline FoveatedFrame encode_frame(const render::RenderAssets& assets, const render::SceneState& scene, Eye eye,
                                  const FoveaMapping& mapping, std::uint64_t frame_id,
                                  render::SampleStats* stats = nullptr) {
  if (mapping.width != scene.camera.width || mapping.height != scene.camera.height)
    throw Error(ErrorKind::kDimension, "mapping does not match the camera image size");
  std::vector<double> fx(std::size_t(mapping.reduced_width)), fy(std::size_t(mapping.reduced_height));
  for (int i = 0; i < mapping.reduced_width; ++i) fx[std::size_t(i)] = mapping.x.to_full(i + 0.5);
  for (int j = 0; j < mapping.reduced_height; ++j) fy[std::size_t(j)] = mapping.y.to_full(j + 0.5);
  const auto img = render::render_mapped(
      assets, scene, eye, mapping.reduced_width, mapping.reduced_height,
      [&](int x, int y) { return std::pair{fx[std::size_t(x)], fy[std::size_t(y)]}; }, render::MarchStrategy::kIntervals,
      stats);
  return {mapping, eye, frame_id, render::to_rgba8(img).data};
}

/// Mapping for the scene's current gaze and reduction.
inline FoveaMapping scene_mapping(const render::SceneState& scene, float fovea_radius = -1.0f) {
  const int w = scene.camera.width, h = scene.camera.height;
  return build_mapping(w, h, float(scene.reduction), std::clamp(float(scene.gaze_x), 0.0f, std::nextafter(float(w), 0.0f)),
                       std::clamp(float(scene.gaze_y), 0.0f, std::nextafter(float(h), 0.0f)),
                       fovea_radius < 0.0f ? default_fovea_radius(w, h) : fovea_radius);
}

/// Bilinear reconstruction at full resolution through the inverse warp.
/// Weights are quantized to 1/256 so the result is exact integer arithmetic:
///   v = (((p00*(256-wx) + p01*wx) * (256-wy) + (p10*(256-wx) + p11*wx) * wy) + 32768) >> 16
inline Image8 decode_frame(const FoveatedFrame& frame) {
  const auto& m = frame.mapping;
  const int w = m.reduced_width, h = m.reduced_height;
  if (frame.pixels.size() != std::size_t(w) * std::size_t(h) * 4)
    throw Error(ErrorKind::kFormat, "frame pixel buffer does not match its mapping");
  struct Tap {
    int i0, i1;
    std::uint32_t w1;  // weight of i1 in 1/256 units
  };
  auto taps = [](const AxisWarp& a, int full, int reduced) {
    std::vector<Tap> out(static_cast<std::size_t>(full));
    for (int i = 0; i < full; ++i) {
      const double u = a.to_reduced(i + 0.5) - 0.5;
      const int i0 = std::clamp(int(std::floor(u)), 0, reduced - 1);
      const int i1 = std::min(i0 + 1, reduced - 1);
      const double t = std::clamp(u - i0, 0.0, 1.0);
      out[std::size_t(i)] = {i0, i1, static_cast<std::uint32_t>(std::lround(t * 256.0))};
    }
    return out;
  };
  const auto tx = taps(m.x, m.width, w), ty = taps(m.y, m.height, h);
  Image8 out(m.width, m.height);
  const auto* src = frame.pixels.data();
  std::vector<std::uint32_t> top(std::size_t(m.width) * 4), bottom(std::size_t(m.width) * 4);
  for (int y = 0; y < m.height; ++y) {
    const Tap& b = ty[std::size_t(y)];
    const auto* r0 = src + std::size_t(b.i0) * std::size_t(w) * 4;
    const auto* r1 = src + std::size_t(b.i1) * std::size_t(w) * 4;
    for (int x = 0; x < m.width; ++x) {
      const Tap& a = tx[std::size_t(x)];
      const std::uint32_t wa = 256 - a.w1;
      for (int c = 0; c < 4; ++c) {
        top[std::size_t(x) * 4 + std::size_t(c)] = r0[a.i0 * 4 + c] * wa + r0[a.i1 * 4 + c] * a.w1;
        bottom[std::size_t(x) * 4 + std::size_t(c)] = r1[a.i0 * 4 + c] * wa + r1[a.i1 * 4 + c] * a.w1;
      }
    }
    const std::uint32_t wb = 256 - b.w1;
    std::uint8_t* dst = out.px(0, y);
    for (std::size_t i = 0; i < top.size(); ++i)
      dst[i] = static_cast<std::uint8_t>((top[i] * wb + bottom[i] * b.w1 + 32768u) >> 16);
  }
  return out;
}

// Wire layout, little-endian:
//   u64 frame_id, u8 eye, u16 W, u16 H, u16 w, u16 h,
//   f32 gaze_x, f32 gaze_y, f32 fovea_radius, f32 reduction, RGBA8[w*h]
inline constexpr std::size_t kFrameHeaderSize = 8 + 1 + 2 * 4 + 4 * 4;

namespace wire {
static_assert(std::endian::native == std::endian::little, "little-endian host required");
template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}
template <class T>
T get(std::string_view in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::kFormat, "frame truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}
}  // namespace wire

inline std::string serialize_frame(const FoveatedFrame& f) {
  const auto& m = f.mapping;
  std::string out;
  out.reserve(kFrameHeaderSize + f.pixels.size());
  wire::put(out, f.frame_id);
  wire::put(out, static_cast<std::uint8_t>(f.eye));
  wire::put(out, static_cast<std::uint16_t>(m.width));
  wire::put(out, static_cast<std::uint16_t>(m.height));
  wire::put(out, static_cast<std::uint16_t>(m.reduced_width));
  wire::put(out, static_cast<std::uint16_t>(m.reduced_height));
  wire::put(out, m.gaze_x);
  wire::put(out, m.gaze_y);
  wire::put(out, m.fovea_radius);
  wire::put(out, m.reduction);
  out.append(reinterpret_cast<const char*>(f.pixels.data()), f.pixels.size());
  return out;
}

/// Parses and validates a frame; any inconsistency is a format error.
inline FoveatedFrame parse_frame(std::string_view bytes) {
  std::size_t pos = 0;
  FoveatedFrame f;
  f.frame_id = wire::get<std::uint64_t>(bytes, pos);
  const auto eye = wire::get<std::uint8_t>(bytes, pos);
  if (eye > 2) throw Error(ErrorKind::kFormat, "bad eye value");
  f.eye = static_cast<Eye>(eye);
  const int W = wire::get<std::uint16_t>(bytes, pos), H = wire::get<std::uint16_t>(bytes, pos);
  const int w = wire::get<std::uint16_t>(bytes, pos), h = wire::get<std::uint16_t>(bytes, pos);
  const float gx = wire::get<float>(bytes, pos), gy = wire::get<float>(bytes, pos);
  const float r = wire::get<float>(bytes, pos), k = wire::get<float>(bytes, pos);
  if (bytes.size() - pos != std::size_t(w) * std::size_t(h) * 4)
    throw Error(ErrorKind::kFormat, "frame payload length does not match w*h*4");
  try {
    f.mapping = build_mapping(W, H, k, gx, gy, r);
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, std::string("frame header: ") + e.what());
  }
  if (f.mapping.reduced_width != w || f.mapping.reduced_height != h)
    throw Error(ErrorKind::kFormat, "reduced size disagrees with the mapping");
  f.pixels.assign(bytes.begin() + std::ptrdiff_t(pos), bytes.end());
  return f;
}

}  // namespace holoview::foveation
