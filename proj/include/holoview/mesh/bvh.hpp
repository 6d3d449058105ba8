#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/mesh/surface_mesh.hpp"

namespace holoview::mesh {

struct RayHit {
  double t = 0.0;
  bool entering = false;
  friend bool operator==(const RayHit&, const RayHit&) = default;
};

/// Binary AABB hierarchy over a mesh's triangles. Built once; queries are const
/// and safe to share across threads. The mesh must outlive the hierarchy.
class MeshBvh {
 public:
  MeshBvh() = default;
  explicit MeshBvh(const SurfaceMesh& mesh) : mesh_(&mesh) {
    order_.resize(mesh.triangles.size());
    std::iota(order_.begin(), order_.end(), 0u);
    centroids_.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles)
      centroids_.push_back((mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0);
    if (!order_.empty()) {
      nodes_.push_back({});
      build_into(0, 0, static_cast<std::uint32_t>(order_.size()));
    }
    centroids_.clear();
    centroids_.shrink_to_fit();
  }

  const SurfaceMesh* mesh() const { return mesh_; }
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

  /// Every crossing of the infinite line origin + t*dir, sorted by t. Hits on
  /// shared edges/vertices are reported once.
  std::vector<RayHit> intersect_line(const Vec3& origin, const Vec3& dir) const {
    std::vector<RayHit> hits;
    if (nodes_.empty()) return hits;
    const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    std::uint32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      double t0, t1;
      if (!node.box.intersect(origin, inv, t0, t1)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) intersect_triangle(order_[i], origin, dir, hits);
      } else {
        stack[sp++] = node.first;
        stack[sp++] = node.first + 1;
      }
    }
    std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
      return a.t != b.t ? a.t < b.t : a.entering > b.entering;
    });
    // Merge duplicates from edge/vertex hits.
    std::vector<RayHit> merged;
    const double eps = 1e-9 * std::max(1.0, norm(bounds().extent())) / std::max(norm(dir), 1e-300);
    for (const auto& h : hits) {
      if (!merged.empty() && merged.back().entering == h.entering && h.t - merged.back().t <= eps) continue;
      merged.push_back(h);
    }
    return merged;
  }

 private:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // child index (inner) or first triangle (leaf)
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  void build_into(std::uint32_t slot, std::uint32_t begin, std::uint32_t end) {
    Aabb box, cbox;
    for (std::uint32_t i = begin; i < end; ++i) {
      const auto& t = mesh_->triangles[order_[i]];
      for (auto v : t) box.expand(mesh_->vertices[v]);
      cbox.expand(centroids_[order_[i]]);
    }
    nodes_[slot].box = box;
    if (end - begin <= 4) {
      nodes_[slot].first = begin;
      nodes_[slot].count = end - begin;
      return;
    }
    const Vec3 ext = cbox.extent();
    const int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return centroids_[a][axis] != centroids_[b][axis] ? centroids_[a][axis] < centroids_[b][axis]
                                                                         : a < b;
                     });
    const auto left_slot = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_.push_back({});
    nodes_[slot].first = left_slot;
    nodes_[slot].count = 0;
    build_into(left_slot, begin, mid);
    build_into(left_slot + 1, mid, end);
  }

  // Moller-Trumbore with inclusive edges; orientation gives entering/exiting
  // for outward-facing triangles.
  void intersect_triangle(std::uint32_t tri, const Vec3& o, const Vec3& d, std::vector<RayHit>& hits) const {
    const auto& t = mesh_->triangles[tri];
    const Vec3& a = mesh_->vertices[t[0]];
    const Vec3 e1 = mesh_->vertices[t[1]] - a;
    const Vec3 e2 = mesh_->vertices[t[2]] - a;
    const Vec3 p = cross(d, e2);
    const double det = dot(e1, p);
    if (det == 0.0) return;
    const double inv = 1.0 / det;
    const Vec3 s = o - a;
    const double u = dot(s, p) * inv;
    constexpr double kSlack = 1e-12;
    if (u < -kSlack || u > 1.0 + kSlack) return;
    const Vec3 q = cross(s, e1);
    const double v = dot(d, q) * inv;
    if (v < -kSlack || u + v > 1.0 + kSlack) return;
    hits.push_back({dot(e2, q) * inv, det > 0.0});
  }

  const SurfaceMesh* mesh_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> centroids_;
};

/// Crossings with t >= 0, ascending.
inline std::vector<RayHit> ray_mesh_intersections(const MeshBvh& bvh, const Vec3& origin, const Vec3& direction) {
  if (direction == Vec3{}) throw Error(ErrorKind::kGeometry, "ray direction must be non-zero");
  auto hits = bvh.intersect_line(origin, direction);
  std::erase_if(hits, [](const RayHit& h) { return h.t < 0.0; });
  return hits;
}

}  // namespace holoview::mesh
