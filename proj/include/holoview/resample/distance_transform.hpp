#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <span>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::resample {

/// Per-label 2D signed distance field for one slice, in millimeters,
/// negative inside. Pixel (x, y) is stored at y * nx + x.
struct SignedDistanceSlice {
  volume::OrganId label;
  int nx = 0;
  int ny = 0;
  int slice_index = 0;
  double pixel_size = 1.0;
  std::vector<double> grid;

  double at(int x, int y) const { return grid[static_cast<std::size_t>(y) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)]; }

  /// Bilinear interpolation at continuous pixel coordinates (pixel centers at
  /// integers), clamped to the grid.
  double sample(double x, double y) const {
    x = std::clamp(x, 0.0, double(nx - 1));
    y = std::clamp(y, 0.0, double(ny - 1));
    const int x0 = std::min(int(x), nx - 1), y0 = std::min(int(y), ny - 1);
    const int x1 = std::min(x0 + 1, nx - 1), y1 = std::min(y0 + 1, ny - 1);
    const double fx = x - x0, fy = y - y0;
    if (fx == 0.0 && fy == 0.0) return at(x0, y0);
    const double top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
    const double bottom = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
  }

  /// Sentinel magnitude used when the mask has no boundary; at least the grid diagonal.
  double large() const { return large_value(nx, ny, pixel_size); }
  static double large_value(int nx, int ny, double pixel_size) { return double(nx + ny) * pixel_size; }
};

namespace detail {

// 1D squared distance transform of sampled function f (lower envelope of
// parabolas). `v` and `z` are scratch buffers of size n and n + 1.
inline void edt_1d(std::span<const double> f, std::span<double> out, std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(q)] = double(q - p) * double(q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace detail

/// Exact squared Euclidean distance (in pixels) from every pixel center to the
/// nearest pixel where `feature` is nonzero. Pixels are +inf-like (1e30) when
/// there are no features.
inline std::vector<double> squared_distance_transform(std::span<const std::uint8_t> feature, int nx, int ny) {
  constexpr double kFar = 1e30;
  std::vector<double> g(feature.size());
  for (std::size_t i = 0; i < feature.size(); ++i) g[i] = feature[i] ? 0.0 : kFar;
  const int n = std::max(nx, ny);
  std::vector<double> f(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);
  // Columns, then rows.
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) f[static_cast<std::size_t>(y)] = g[static_cast<std::size_t>(y * nx + x)];
    detail::edt_1d(std::span(f).first(static_cast<std::size_t>(ny)), std::span(out).first(static_cast<std::size_t>(ny)), v, z);
    for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>(y * nx + x)] = out[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) f[static_cast<std::size_t>(x)] = g[static_cast<std::size_t>(y * nx + x)];
    detail::edt_1d(std::span(f).first(static_cast<std::size_t>(nx)), std::span(out).first(static_cast<std::size_t>(nx)), v, z);
    for (int x = 0; x < nx; ++x) g[static_cast<std::size_t>(y * nx + x)] = out[static_cast<std::size_t>(x)];
  }
  return g;
}

/// Signed distance to the mask boundary. The boundary lies half a pixel
/// beyond the outermost mask pixel centers: an outside pixel gets
/// (distance to nearest inside pixel - 0.5), an inside pixel the negated
/// (distance to nearest outside pixel - 0.5). Empty masks are +large(),
/// full masks -large().
inline SignedDistanceSlice signed_distance_2d(std::span<const std::uint8_t> mask, int nx, int ny, double pixel_size,
                                              volume::OrganId label = {}, int slice_index = 0) {
  if (nx <= 0 || ny <= 0 || mask.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw Error(ErrorKind::kDimension, "signed distance needs a non-empty mask matching its dims");
  if (!(pixel_size > 0.0)) throw Error(ErrorKind::kGeometry, "pixel size must be positive");

  SignedDistanceSlice out{label, nx, ny, slice_index, pixel_size, std::vector<double>(mask.size())};
  const double large = out.large();
  std::size_t inside_count = 0;
  for (auto m : mask) inside_count += m ? 1 : 0;
  if (inside_count == 0 || inside_count == mask.size()) {
    std::fill(out.grid.begin(), out.grid.end(), inside_count == 0 ? large : -large);
    return out;
  }

  std::vector<std::uint8_t> outside(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) outside[i] = mask[i] ? 0 : 1;
  const auto to_inside = squared_distance_transform(mask, nx, ny);
  const auto to_outside = squared_distance_transform(outside, nx, ny);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double d = mask[i] ? -(std::sqrt(to_outside[i]) - 0.5) : std::sqrt(to_inside[i]) - 0.5;
    out.grid[i] = std::clamp(d * pixel_size, -large, large);
  }
  return out;
}

}  // namespace holoview::resample
