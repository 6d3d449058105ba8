#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/mesh/surface_mesh.hpp"

namespace holoview::mesh {

namespace detail {

// Symmetric 4x4 quadric: a00 a01 a02 a11 a12 a22 (plane normal outer product),
// b (d * n) and c (d^2).
struct Quadric {
  std::array<double, 6> a{};
  Vec3 b;
  double c = 0.0;

  static Quadric plane(const Vec3& n, double d, double weight) {
    Quadric q;
    q.a = {n.x * n.x * weight, n.x * n.y * weight, n.x * n.z * weight,
           n.y * n.y * weight, n.y * n.z * weight, n.z * n.z * weight};
    q.b = n * (d * weight);
    q.c = d * d * weight;
    return q;
  }
  Quadric& operator+=(const Quadric& o) {
    for (std::size_t i = 0; i < 6; ++i) a[i] += o.a[i];
    b += o.b;
    c += o.c;
    return *this;
  }
  double error(const Vec3& p) const {
    const double ax = a[0] * p.x + a[1] * p.y + a[2] * p.z;
    const double ay = a[1] * p.x + a[3] * p.y + a[4] * p.z;
    const double az = a[2] * p.x + a[4] * p.y + a[5] * p.z;
    return p.x * ax + p.y * ay + p.z * az + 2.0 * dot(b, p) + c;
  }
  /// Minimizer of the quadric, if the system is well conditioned.
  bool optimum(Vec3& out) const {
    const double m00 = a[0], m01 = a[1], m02 = a[2], m11 = a[3], m12 = a[4], m22 = a[5];
    const double c00 = m11 * m22 - m12 * m12;
    const double c01 = m02 * m12 - m01 * m22;
    const double c02 = m01 * m12 - m02 * m11;
    const double det = m00 * c00 + m01 * c01 + m02 * c02;
    const double scale = std::max({std::abs(m00), std::abs(m11), std::abs(m22), 1e-300});
    if (std::abs(det) < 1e-9 * scale * scale * scale) return false;
    const double c11 = m00 * m22 - m02 * m02;
    const double c12 = m01 * m02 - m00 * m12;
    const double c22 = m00 * m11 - m01 * m01;
    const Vec3 rhs = -b;
    out = Vec3{c00 * rhs.x + c01 * rhs.y + c02 * rhs.z, c01 * rhs.x + c11 * rhs.y + c12 * rhs.z,
               c02 * rhs.x + c12 * rhs.y + c22 * rhs.z} /
          det;
    return true;
  }
};

inline Vec3 face_normal(const Vec3& a, const Vec3& b, const Vec3& c) { return cross(b - a, c - a); }

}  // namespace detail

/// Quadric-error edge collapse down to `target_triangles` (or until no collapse
/// keeps the mesh a closed 2-manifold). Collapses are rejected when they would
/// break the link condition, drop any vertex below degree 3, or flip a face.
inline SurfaceMesh decimate_mesh(const SurfaceMesh& mesh, std::size_t target_triangles) {
  if (target_triangles < 4) throw Error(ErrorKind::kRange, "decimation target must be >= 4");
  if (mesh.triangles.size() <= target_triangles) return mesh;
  require_closed_manifold(mesh, "decimate_mesh");

  using detail::Quadric;
  const std::size_t nv = mesh.vertices.size();
  std::vector<Vec3> pos = mesh.vertices;
  std::vector<Triangle> tris = mesh.triangles;
  std::vector<bool> tri_alive(tris.size(), true);
  std::vector<bool> vert_alive(nv, true);
  std::vector<std::vector<std::uint32_t>> vtris(nv);
  std::vector<Quadric> quadric(nv);
  std::vector<std::uint32_t> stamp(nv, 0);

  for (std::uint32_t t = 0; t < tris.size(); ++t) {
    const auto& tr = tris[t];
    const Vec3 n = detail::face_normal(pos[tr[0]], pos[tr[1]], pos[tr[2]]);
    const double area2 = norm(n);
    if (area2 > 0.0) {
      const Vec3 un = n / area2;
      const Quadric q = Quadric::plane(un, -dot(un, pos[tr[0]]), area2 * 0.5);
      for (auto v : tr) quadric[v] += q;
    }
    for (auto v : tr) vtris[v].push_back(t);
  }

  auto neighbors = [&](std::uint32_t v) {
    std::vector<std::uint32_t> out;
    for (auto t : vtris[v])
      for (auto w : tris[t])
        if (w != v) out.push_back(w);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  struct Candidate {
    double cost;
    std::uint32_t u, v;
    std::uint32_t su, sv;
    Vec3 target;
    bool operator<(const Candidate& o) const {
      if (cost != o.cost) return cost > o.cost;  // min-heap
      if (u != o.u) return u > o.u;
      return v > o.v;
    }
  };
  std::priority_queue<Candidate> heap;

  auto evaluate = [&](std::uint32_t u, std::uint32_t v) {
    if (u > v) std::swap(u, v);
    Quadric q = quadric[u];
    q += quadric[v];
    Vec3 best;
    double best_cost = 0.0;
    if (!q.optimum(best)) {
      const Vec3 options[3] = {pos[u], pos[v], (pos[u] + pos[v]) * 0.5};
      best = options[0];
      best_cost = q.error(best);
      for (int i = 1; i < 3; ++i) {
        const double c = q.error(options[i]);
        if (c < best_cost) {
          best_cost = c;
          best = options[i];
        }
      }
    } else {
      best_cost = q.error(best);
    }
    heap.push({std::max(best_cost, 0.0), u, v, stamp[u], stamp[v], best});
  };

  for (std::uint32_t t = 0; t < tris.size(); ++t)
    for (int k = 0; k < 3; ++k) {
      const auto a = tris[t][static_cast<std::size_t>(k)], b = tris[t][static_cast<std::size_t>((k + 1) % 3)];
      if (a < b) evaluate(a, b);
    }

  std::size_t alive = tris.size();
  while (alive > target_triangles && !heap.empty()) {
    const Candidate cand = heap.top();
    heap.pop();
    const auto u = cand.u, v = cand.v;
    if (!vert_alive[u] || !vert_alive[v] || stamp[u] != cand.su || stamp[v] != cand.sv) continue;

    const auto nu = neighbors(u), nv2 = neighbors(v);
    if (!std::binary_search(nu.begin(), nu.end(), v)) continue;
    std::vector<std::uint32_t> common;
    std::set_intersection(nu.begin(), nu.end(), nv2.begin(), nv2.end(), std::back_inserter(common));
    if (common.size() != 2) continue;  // link condition
    std::vector<std::uint32_t> merged;
    std::set_union(nu.begin(), nu.end(), nv2.begin(), nv2.end(), std::back_inserter(merged));
    if (merged.size() - 2 < 3) continue;
    bool degree_ok = true;
    for (auto w : common) degree_ok = degree_ok && neighbors(w).size() - 1 >= 3;
    if (!degree_ok) continue;

    // Faces around u and v that survive must keep their orientation.
    bool flips = false;
    for (auto w : {u, v})
      for (auto t : vtris[w]) {
        const auto& tr = tris[t];
        const bool has_u = tr[0] == u || tr[1] == u || tr[2] == u;
        const bool has_v = tr[0] == v || tr[1] == v || tr[2] == v;
        if (has_u && has_v) continue;
        std::array<Vec3, 3> p{pos[tr[0]], pos[tr[1]], pos[tr[2]]};
        const Vec3 before = detail::face_normal(p[0], p[1], p[2]);
        for (int k = 0; k < 3; ++k)
          if (tr[static_cast<std::size_t>(k)] == w) p[static_cast<std::size_t>(k)] = cand.target;
        const Vec3 after = detail::face_normal(p[0], p[1], p[2]);
        const double nb = norm(before), na = norm(after);
        if (na <= 1e-12 * (nb + 1e-300) || dot(before, after) < 0.2 * nb * na) flips = true;
      }
    if (flips) continue;

    // Collapse v into u.
    pos[u] = cand.target;
    quadric[u] += quadric[v];
    vert_alive[v] = false;
    for (auto t : vtris[v]) {
      auto& tr = tris[t];
      const bool has_u = tr[0] == u || tr[1] == u || tr[2] == u;
      if (has_u) {
        tri_alive[t] = false;
        --alive;
        for (auto w : tr)
          if (w != v) std::erase(vtris[w], t);
      } else {
        for (auto& w : tr)
          if (w == v) w = u;
        vtris[u].push_back(t);
      }
    }
    vtris[v].clear();
    ++stamp[u];
    for (auto w : neighbors(u)) {
      ++stamp[w];
    }
    for (auto w : neighbors(u)) {
      evaluate(u, w);
      for (auto x : neighbors(w))
        if (x != u) evaluate(w, x);
    }
  }

  SurfaceMesh out;
  out.label = mesh.label;
  out.vertices = std::move(pos);
  for (std::uint32_t t = 0; t < tris.size(); ++t)
    if (tri_alive[t]) out.triangles.push_back(tris[t]);
  return compact(out);
}

}  // namespace holoview::mesh
