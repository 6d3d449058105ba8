#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "holoview/core/vec.hpp"
#include "holoview/mesh/surface_mesh.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::mesh {

namespace mc {

// Cube corner c sits at (c & 1, (c >> 1) & 1, (c >> 2) & 1). The 12 edges
// join corners that differ in one bit.
struct CubeEdge {
  int c0, c1, axis;
};

inline constexpr std::array<CubeEdge, 12> kEdges = [] {
  std::array<CubeEdge, 12> e{};
  int n = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (int c = 0; c < 8; ++c)
      if (!(c & (1 << axis))) e[static_cast<std::size_t>(n++)] = {c, c | (1 << axis), axis};
  return e;
}();

constexpr int edge_between(int a, int b) {
  for (int i = 0; i < 12; ++i)
    if ((kEdges[static_cast<std::size_t>(i)].c0 == a && kEdges[static_cast<std::size_t>(i)].c1 == b) ||
        (kEdges[static_cast<std::size_t>(i)].c0 == b && kEdges[static_cast<std::size_t>(i)].c1 == a))
      return i;
  return -1;
}

constexpr Vec3 corner_pos(int c) { return {double(c & 1), double((c >> 1) & 1), double((c >> 2) & 1)}; }

constexpr Vec3 edge_mid(int e) {
  return (corner_pos(kEdges[static_cast<std::size_t>(e)].c0) + corner_pos(kEdges[static_cast<std::size_t>(e)].c1)) *
         0.5;
}

/// Surface loops for one cube configuration, as cycles of cube edge ids.
using CaseLoops = std::vector<std::vector<int>>;

// Builds the loops for `config` (bit c set = corner c inside). Each cube face
// is resolved from its own four corners only, so neighbouring cubes agree on
// shared faces: ambiguous faces always separate the two inside corners.
// Segments are oriented with the inside region on their left as seen from
// outside the cube; chaining them yields closed, consistently oriented loops.
inline CaseLoops build_case(int config) {
  auto inside = [&](int c) { return (config >> c) & 1; };
  std::array<int, 12> next;
  next.fill(-1);
  for (int axis = 0; axis < 3; ++axis)
    for (int side = 0; side < 2; ++side) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const int base = side << axis;
      // Cyclic corner order around the face.
      const int q[4] = {base, base | (1 << u), base | (1 << u) | (1 << v), base | (1 << v)};
      Vec3 normal{};
      normal[axis] = side ? 1.0 : -1.0;
      std::vector<std::pair<int, int>> segments;  // (edge a, edge b, cut-off corner)
      std::vector<int> cut_corner;
      int crossing[4];
      int n_cross = 0;
      for (int i = 0; i < 4; ++i)
        if (inside(q[i]) != inside(q[(i + 1) % 4])) crossing[n_cross++] = i;
      if (n_cross == 2) {
        const int ea = edge_between(q[crossing[0]], q[(crossing[0] + 1) % 4]);
        const int eb = edge_between(q[crossing[1]], q[(crossing[1] + 1) % 4]);
        int ref = -1;
        for (int i = 0; i < 4; ++i)
          if (inside(q[i])) ref = q[i];
        segments.emplace_back(ea, eb);
        cut_corner.push_back(ref);
      } else if (n_cross == 4) {
        for (int i = 0; i < 4; ++i)
          if (inside(q[i])) {
            segments.emplace_back(edge_between(q[(i + 3) % 4], q[i]), edge_between(q[i], q[(i + 1) % 4]));
            cut_corner.push_back(q[i]);
          }
      }
      for (std::size_t s = 0; s < segments.size(); ++s) {
        auto [a, b] = segments[s];
        const Vec3 pa = edge_mid(a), pb = edge_mid(b);
        const Vec3 left = cross(normal, pb - pa);
        if (dot(corner_pos(cut_corner[s]) - pa, left) < 0.0) std::swap(a, b);
        next[static_cast<std::size_t>(a)] = b;
      }
    }
  CaseLoops loops;
  std::array<bool, 12> seen{};
  for (int start = 0; start < 12; ++start) {
    if (next[static_cast<std::size_t>(start)] < 0 || seen[static_cast<std::size_t>(start)]) continue;
    std::vector<int> loop;
    for (int e = start; !seen[static_cast<std::size_t>(e)]; e = next[static_cast<std::size_t>(e)]) {
      seen[static_cast<std::size_t>(e)] = true;
      loop.push_back(e);
    }
    // Boundary traversal runs against the outward surface normal; flip.
    std::reverse(loop.begin(), loop.end());
    loops.push_back(std::move(loop));
  }
  return loops;
}

inline const std::array<CaseLoops, 256>& case_table() {
  static const std::array<CaseLoops, 256> table = [] {
    std::array<CaseLoops, 256> t;
    for (int c = 0; c < 256; ++c) t[static_cast<std::size_t>(c)] = build_case(c);
    return t;
  }();
  return table;
}

}  // namespace mc

/// Binary occupancy grid, x fastest.
struct Indicator {
  volume::Dims dims;
  std::vector<std::uint8_t> data;

  bool at(int x, int y, int z) const {
    if (x < 0 || y < 0 || z < 0 || x >= dims.nx || y >= dims.ny || z >= dims.nz) return false;
    return data[(std::size_t(z) * std::size_t(dims.ny) + std::size_t(y)) * std::size_t(dims.nx) + std::size_t(x)] != 0;
  }
};

inline Indicator organ_indicator(const volume::LabeledVolume& vol, volume::OrganId organ) {
  Indicator ind{vol.dims(), std::vector<std::uint8_t>(vol.dims().count(), 0)};
  const auto& labels = vol.label_data();
  for (std::size_t i = 0; i < labels.size(); ++i)
    ind.data[i] = labels[i] != 0 && volume::organ_of(labels[i]) == organ ? 1 : 0;
  return ind;
}

/// Chebyshev (26-neighbourhood) dilation by `radius` voxels, done per axis.
inline Indicator dilate(Indicator ind, int radius) {
  if (radius <= 0) return ind;
  const auto d = ind.dims;
  const int n[3] = {d.nx, d.ny, d.nz};
  const std::size_t stride[3] = {1, std::size_t(d.nx), std::size_t(d.nx) * std::size_t(d.ny)};
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<std::uint8_t> out(ind.data.size(), 0);
    for (int z = 0; z < d.nz; ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) {
          const int c[3] = {x, y, z};
          const std::size_t i = std::size_t(x) + std::size_t(y) * stride[1] + std::size_t(z) * stride[2];
          if (!ind.data[i]) continue;
          for (int o = -radius; o <= radius; ++o) {
            const int p = c[axis] + o;
            if (p < 0 || p >= n[axis]) continue;
            out[i + std::size_t(std::ptrdiff_t(o) * std::ptrdiff_t(stride[axis]))] = 1;
          }
        }
    ind.data = std::move(out);
  }
  return ind;
}

/// Marching cubes over the 0/1 indicator; the grid is treated as zero outside
/// its bounds, so the result is closed. `iso` places each vertex that fraction
/// of the edge away from the inside corner (0.5 = midpoint). Loops of more
/// than three vertices are fanned around an added centroid vertex.
inline SurfaceMesh extract_indicator_mesh(const Indicator& ind, const volume::Spacing& spacing,
                                          volume::OrganId label = {}, double iso = 0.5) {
  SurfaceMesh mesh;
  mesh.label = label;
  const auto& d = ind.dims;
  int lo[3] = {d.nx, d.ny, d.nz}, hi[3] = {-1, -1, -1};
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x)
        if (ind.at(x, y, z)) {
          const int c[3] = {x, y, z};
          for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], c[a]);
            hi[a] = std::max(hi[a], c[a]);
          }
        }
  if (hi[0] < 0) return mesh;

  const auto& table = mc::case_table();
  const Vec3 sp = spacing.vec();
  // Key: lower grid point of the edge (offset by 1 for the padded ring) and axis.
  const std::int64_t ex = d.nx + 2, ey = d.ny + 2;
  std::unordered_map<std::int64_t, std::uint32_t> edge_vertex;
  auto vertex_on = [&](int gx, int gy, int gz, int e) -> std::uint32_t {
    const auto& edge = mc::kEdges[static_cast<std::size_t>(e)];
    const int x0 = gx + (edge.c0 & 1), y0 = gy + ((edge.c0 >> 1) & 1), z0 = gz + ((edge.c0 >> 2) & 1);
    const std::int64_t key = (((std::int64_t(z0) + 1) * ey + (y0 + 1)) * ex + (x0 + 1)) * 3 + edge.axis;
    auto [it, fresh] = edge_vertex.try_emplace(key, 0u);
    if (fresh) {
      it->second = static_cast<std::uint32_t>(mesh.vertices.size());
      const bool c0_inside = ind.at(x0, y0, z0);
      Vec3 p{double(x0), double(y0), double(z0)};
      p[edge.axis] += c0_inside ? iso : 1.0 - iso;
      mesh.vertices.push_back(cwise_mul(p, sp));
    }
    return it->second;
  };

  for (int z = lo[2] - 1; z <= hi[2]; ++z)
    for (int y = lo[1] - 1; y <= hi[1]; ++y)
      for (int x = lo[0] - 1; x <= hi[0]; ++x) {
        int config = 0;
        for (int c = 0; c < 8; ++c)
          if (ind.at(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1))) config |= 1 << c;
        if (config == 0 || config == 255) continue;
        for (const auto& loop : table[static_cast<std::size_t>(config)]) {
          std::vector<std::uint32_t> ids;
          ids.reserve(loop.size());
          for (int e : loop) ids.push_back(vertex_on(x, y, z, e));
          if (ids.size() == 3) {
            mesh.triangles.push_back({ids[0], ids[1], ids[2]});
            continue;
          }
          Vec3 centroid{};
          for (auto id : ids) centroid += mesh.vertices[id];
          centroid = centroid / double(ids.size());
          const auto c = static_cast<std::uint32_t>(mesh.vertices.size());
          mesh.vertices.push_back(centroid);
          for (std::size_t k = 0; k < ids.size(); ++k) mesh.triangles.push_back({c, ids[k], ids[(k + 1) % ids.size()]});
        }
      }
  return mesh;
}

/// Surface of one organ's voxels (all L3 codes under that L1/L2).
inline SurfaceMesh extract_mesh(const volume::LabeledVolume& vol, volume::OrganId organ, double iso = 0.5) {
  return extract_indicator_mesh(organ_indicator(vol, organ), vol.spacing(), organ, iso);
}

/// Conservative ray-skipping proxy: surface of the organ dilated by
/// `dilation` voxels. With dilation >= 1 the nearest-voxel cell of every
/// organ voxel lies strictly inside the proxy.
inline SurfaceMesh extract_proxy_mesh(const volume::LabeledVolume& vol, volume::OrganId organ, int dilation = 1) {
  return extract_indicator_mesh(dilate(organ_indicator(vol, organ), dilation), vol.spacing(), organ);
}

}  // namespace holoview::mesh
