#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/mesh/surface_mesh.hpp"

namespace holoview::mesh {

struct TaubinParams {
  int iterations = 20;
  double lambda = 0.5;
  double mu = -0.53;
};

inline std::vector<std::vector<std::uint32_t>> vertex_neighbors(const SurfaceMesh& m) {
  std::vector<std::vector<std::uint32_t>> nbr(m.vertices.size());
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      nbr[t[static_cast<std::size_t>(k)]].push_back(t[static_cast<std::size_t>((k + 1) % 3)]);
      nbr[t[static_cast<std::size_t>(k)]].push_back(t[static_cast<std::size_t>((k + 2) % 3)]);
    }
  for (auto& n : nbr) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return nbr;
}

/// Alternating shrink (lambda) / inflate (mu) umbrella-Laplacian passes.
/// Connectivity is untouched; only positions move.
inline SurfaceMesh taubin_smooth(const SurfaceMesh& mesh, const TaubinParams& params = {}) {
  if (params.iterations < 0) throw Error(ErrorKind::kRange, "taubin iterations must be >= 0");
  if (!(params.lambda > 0.0) || !(params.mu < -params.lambda))
    throw Error(ErrorKind::kRange, "taubin requires lambda > 0 and mu < -lambda");
  if (params.iterations == 0 || mesh.empty()) return mesh;
  require_manifold(mesh, "taubin_smooth");

  SurfaceMesh out = mesh;
  const auto nbr = vertex_neighbors(mesh);
  std::vector<Vec3> delta(mesh.vertices.size());
  auto pass = [&](double factor) {
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
      if (nbr[v].empty()) {
        delta[v] = {};
        continue;
      }
      Vec3 avg{};
      for (auto n : nbr[v]) avg += out.vertices[n];
      delta[v] = (avg / double(nbr[v].size()) - out.vertices[v]) * factor;
    }
    for (std::size_t v = 0; v < out.vertices.size(); ++v) out.vertices[v] += delta[v];
  };
  for (int it = 0; it < params.iterations; ++it) {
    pass(params.lambda);
    pass(params.mu);
  }
  return out;
}

/// Plain Laplacian smoothing (no inflate pass); kept for comparison.
inline SurfaceMesh laplacian_smooth(const SurfaceMesh& mesh, int iterations, double lambda) {
  SurfaceMesh out = mesh;
  const auto nbr = vertex_neighbors(mesh);
  std::vector<Vec3> next(mesh.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t v = 0; v < out.vertices.size(); ++v) {
      Vec3 avg{};
      for (auto n : nbr[v]) avg += out.vertices[n];
      next[v] = nbr[v].empty() ? out.vertices[v]
                               : out.vertices[v] + (avg / double(nbr[v].size()) - out.vertices[v]) * lambda;
    }
    out.vertices = next;
  }
  return out;
}

}  // namespace holoview::mesh
