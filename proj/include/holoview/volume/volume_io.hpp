#pragma once

#include <bit>
#include <cstring>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::volume {

static_assert(std::endian::native == std::endian::little, "volume blobs are written in host order");

// Container layout: <base>.manifest (key = value lines), <base>.intensity.raw
// (u8 per voxel), <base>.labels.raw (u16 LE per voxel), all x-fastest.
inline constexpr const char* kVolumeMagic = "VXS1";

struct ContainerPaths {
  std::string manifest;
  std::string intensity;
  std::string labels;
  std::string hierarchy;
};

/// Accepts either the base path or the path of the manifest itself.
inline ContainerPaths container_paths(std::string base) {
  const std::string suffix = ".manifest";
  if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
    base.resize(base.size() - suffix.size());
  return {base + ".manifest", base + ".intensity.raw", base + ".labels.raw", base + ".hierarchy"};
}

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path);
}

inline std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::kFormat, "manifest line without '=': " + line);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace detail

inline void save_volume(const LabeledVolume& volume, const std::string& base) {
  const ContainerPaths paths = container_paths(base);
  const Dims& d = volume.dims();
  const Spacing& s = volume.spacing();
  std::ostringstream m;
  m << std::setprecision(17);
  m << "magic = " << kVolumeMagic << '\n'
    << "dims = " << d.nx << ' ' << d.ny << ' ' << d.nz << '\n'
    << "spacing_mm = " << s.sx << ' ' << s.sy << ' ' << s.sz << '\n'
    << "intensity_bits = 8\n"
    << "label_bits = 16\n"
    << "byte_order = LE\n";
  const std::string text = m.str();
  detail::write_file(paths.manifest, text.data(), text.size());
  detail::write_file(paths.intensity, volume.intensity_data().data(), volume.intensity_data().size());
  detail::write_file(paths.labels, volume.label_data().data(), volume.label_data().size() * sizeof(std::uint16_t));
}

inline LabeledVolume load_volume(const std::string& base) {
  const ContainerPaths paths = container_paths(base);
  const auto kv = detail::parse_manifest(detail::read_file(paths.manifest));
  auto field = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::kFormat, "manifest missing '" + key + "'");
    return it->second;
  };
  if (field("magic") != kVolumeMagic) throw Error(ErrorKind::kFormat, "bad magic '" + field("magic") + "'");
  if (field("intensity_bits") != "8" || field("label_bits") != "16")
    throw Error(ErrorKind::kFormat, "unsupported bit depth");
  if (field("byte_order") != "LE") throw Error(ErrorKind::kFormat, "unsupported byte order");

  Dims d;
  Spacing s;
  {
    std::istringstream in(field("dims"));
    if (!(in >> d.nx >> d.ny >> d.nz) || d.nx <= 0 || d.ny <= 0 || d.nz <= 0)
      throw Error(ErrorKind::kFormat, "bad dims");
  }
  {
    std::istringstream in(field("spacing_mm"));
    if (!(in >> s.sx >> s.sy >> s.sz)) throw Error(ErrorKind::kFormat, "bad spacing_mm");
  }

  const std::string intensity = detail::read_file(paths.intensity);
  const std::string labels = detail::read_file(paths.labels);
  if (intensity.size() != d.count())
    throw Error(ErrorKind::kFormat, "intensity blob has " + std::to_string(intensity.size()) + " bytes, expected " +
                                        std::to_string(d.count()));
  if (labels.size() != 2 * d.count())
    throw Error(ErrorKind::kFormat,
                "label blob has " + std::to_string(labels.size()) + " bytes, expected " + std::to_string(2 * d.count()));

  std::vector<std::uint8_t> ivec(intensity.begin(), intensity.end());
  std::vector<std::uint16_t> lvec(d.count());
  std::memcpy(lvec.data(), labels.data(), labels.size());
  try {
    return LabeledVolume(d, s, std::move(ivec), std::move(lvec));
  } catch (const Error& e) {
    throw Error(ErrorKind::kFormat, e.what());
  }
}

}  // namespace holoview::volume
