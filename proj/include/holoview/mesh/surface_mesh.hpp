#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::mesh {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh in millimeters, tagged with its organ.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  volume::OrganId label;

  bool empty() const { return triangles.empty(); }
  friend bool operator==(const SurfaceMesh&, const SurfaceMesh&) = default;
};

inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(a) << 32) | b;
}

inline std::uint64_t directed_edge_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t(a) << 32) | b; }

struct MeshReport {
  bool indices_in_range = true;
  bool has_degenerate = false;
  bool closed_manifold = true;  // every edge borders exactly two triangles
  bool edge_manifold = true;    // every edge borders one or two triangles
  bool consistently_oriented = true;
  double signed_volume = 0.0;
  int euler_characteristic = 0;
  std::size_t components = 0;
  std::size_t vertex_count = 0;  // referenced vertices only
  std::size_t edge_count = 0;

  bool valid_closed_surface() const {
    return indices_in_range && !has_degenerate && closed_manifold && consistently_oriented && signed_volume > 0.0;
  }
};

inline double signed_volume(const SurfaceMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) v += dot(m.vertices[t[0]], cross(m.vertices[t[1]], m.vertices[t[2]]));
  return v / 6.0;
}

inline Aabb mesh_bounds(const SurfaceMesh& m) {
  Aabb box;
  for (const auto& t : m.triangles)
    for (auto i : t) box.expand(m.vertices[i]);
  return box;
}

/// Union-find over triangle connectivity; returns a component id per vertex
/// (unreferenced vertices get their own ids) and the number of components
/// that contain at least one triangle.
inline std::size_t count_components(const SurfaceMesh& m, std::vector<std::uint32_t>* vertex_component = nullptr) {
  std::vector<std::uint32_t> parent(m.vertices.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& t : m.triangles) {
    const auto a = find(t[0]), b = find(t[1]), c = find(t[2]);
    parent[b] = a;
    parent[find(c)] = a;
  }
  std::vector<bool> used(m.vertices.size(), false);
  for (const auto& t : m.triangles)
    for (auto i : t) used[i] = true;
  std::size_t roots = 0;
  for (std::uint32_t v = 0; v < m.vertices.size(); ++v)
    if (used[v] && find(v) == v) ++roots;
  if (vertex_component) {
    vertex_component->resize(m.vertices.size());
    for (std::uint32_t v = 0; v < m.vertices.size(); ++v) (*vertex_component)[v] = find(v);
  }
  return roots;
}

inline MeshReport inspect(const SurfaceMesh& m) {
  MeshReport r;
  std::unordered_map<std::uint64_t, int> edges;
  std::unordered_map<std::uint64_t, int> directed;
  std::vector<bool> used(m.vertices.size(), false);
  edges.reserve(m.triangles.size() * 2);
  directed.reserve(m.triangles.size() * 3);
  for (const auto& t : m.triangles) {
    bool in_range = true;
    for (auto i : t) in_range = in_range && i < m.vertices.size();
    if (!in_range) {
      r.indices_in_range = false;
      continue;
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) r.has_degenerate = true;
    for (int k = 0; k < 3; ++k) {
      used[t[static_cast<std::size_t>(k)]] = true;
      const auto a = t[static_cast<std::size_t>(k)], b = t[static_cast<std::size_t>((k + 1) % 3)];
      ++edges[edge_key(a, b)];
      ++directed[directed_edge_key(a, b)];
    }
  }
  for (const auto& [key, count] : edges) {
    if (count != 2) r.closed_manifold = false;
    if (count > 2) r.edge_manifold = false;
  }
  for (const auto& [key, count] : directed)
    if (count != 1) r.consistently_oriented = false;
  r.edge_count = edges.size();
  for (bool u : used) r.vertex_count += u;
  r.euler_characteristic = int(r.vertex_count) - int(r.edge_count) + int(m.triangles.size());
  if (r.indices_in_range) {
    r.signed_volume = signed_volume(m);
    r.components = count_components(m);
  }
  return r;
}

inline void require_closed_manifold(const SurfaceMesh& m, const char* op) {
  const MeshReport r = inspect(m);
  if (!r.indices_in_range || r.has_degenerate || !r.closed_manifold)
    throw Error(ErrorKind::kTopology, std::string(op) + " requires a closed 2-manifold mesh");
}

/// Like require_closed_manifold but allows boundary edges.
inline void require_manifold(const SurfaceMesh& m, const char* op) {
  const MeshReport r = inspect(m);
  if (!r.indices_in_range || r.has_degenerate || !r.edge_manifold)
    throw Error(ErrorKind::kTopology, std::string(op) + " requires a 2-manifold mesh");
}

/// Drops unreferenced vertices and renumbers the rest in first-use order.
inline SurfaceMesh compact(const SurfaceMesh& m) {
  SurfaceMesh out;
  out.label = m.label;
  std::vector<std::uint32_t> remap(m.vertices.size(), UINT32_MAX);
  for (const auto& t : m.triangles) {
    Triangle nt;
    for (int k = 0; k < 3; ++k) {
      auto& r = remap[t[static_cast<std::size_t>(k)]];
      if (r == UINT32_MAX) {
        r = static_cast<std::uint32_t>(out.vertices.size());
        out.vertices.push_back(m.vertices[t[static_cast<std::size_t>(k)]]);
      }
      nt[static_cast<std::size_t>(k)] = r;
    }
    out.triangles.push_back(nt);
  }
  return out;
}

}  // namespace holoview::mesh
