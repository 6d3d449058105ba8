#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/mesh/surface_mesh.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::mesh {

inline constexpr char kMeshMagic[4] = {'M', 'S', 'H', '1'};

namespace detail {
template <class T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}
template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::kFormat, "mesh file truncated");
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}
}  // namespace detail

inline std::string encode_mesh(const SurfaceMesh& mesh) {
  std::string out(kMeshMagic, 4);
  detail::put_le(out, static_cast<std::uint32_t>(mesh.vertices.size()));
  detail::put_le(out, static_cast<std::uint32_t>(mesh.triangles.size()));
  for (const auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) detail::put_le(out, static_cast<float>(v[a]));
  for (const auto& t : mesh.triangles)
    for (auto i : t) detail::put_le(out, i);
  return out;
}

inline SurfaceMesh decode_mesh(const std::string& bytes, volume::OrganId label = {}) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMeshMagic, 4) != 0)
    throw Error(ErrorKind::kFormat, "bad mesh magic");
  std::size_t pos = 4;
  const auto nv = detail::get_le<std::uint32_t>(bytes, pos);
  const auto nt = detail::get_le<std::uint32_t>(bytes, pos);
  if (bytes.size() - pos != std::uint64_t(nv) * 12 + std::uint64_t(nt) * 12)
    throw Error(ErrorKind::kFormat, "mesh file size does not match its header");
  SurfaceMesh mesh;
  mesh.label = label;
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices)
    for (int a = 0; a < 3; ++a) v[a] = detail::get_le<float>(bytes, pos);
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles)
    for (auto& i : t) {
      i = detail::get_le<std::uint32_t>(bytes, pos);
      if (i >= nv) throw Error(ErrorKind::kFormat, "mesh index out of range");
    }
  return mesh;
}

inline std::string mesh_filename(volume::OrganId organ) {
  return "organ_" + std::to_string(organ.l1) + "_" + std::to_string(organ.l2) + ".msh";
}

inline void save_mesh(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  const auto bytes = encode_mesh(mesh);
  if (!f.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

inline SurfaceMesh load_mesh(const std::filesystem::path& path, volume::OrganId label = {}) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_mesh(bytes, label);
}

/// Wavefront OBJ, for inspection in external tools.
inline void export_obj(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  f << "# organ " << mesh.label.str() << "\n";
  f.precision(9);
  for (const auto& v : mesh.vertices) f << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& t : mesh.triangles) f << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace holoview::mesh
