#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "holoview/core/error.hpp"

namespace holoview::foveation {

/// One axis of the warp: reduced coordinates [0, reduced] onto full
/// coordinates [0, full], piecewise linear through the knots
/// (0, 0), (ra, fa), (ra + len, fa + len), (reduced, full). The middle piece
/// is the fovea, at one reduced pixel per full pixel.
struct AxisWarp {
  int full = 0;
  int reduced = 0;
  int fa = 0;   // fovea start, full pixels
  int ra = 0;   // fovea start, reduced pixels
  int len = 0;  // fovea length in both

  double to_full(double u) const {
    if (u < 0.0 || u > reduced) throw Error(ErrorKind::kRange, "reduced coordinate out of range");
    if (u <= ra) return ra == 0 ? 0.0 : u * fa / ra;
    if (u <= ra + len) return u - ra + fa;
    const int rn = reduced - ra - len, fn = full - fa - len;
    return fa + len + (u - ra - len) * fn / rn;
  }

  double to_reduced(double x) const {
    if (x < 0.0 || x > full) throw Error(ErrorKind::kRange, "full coordinate out of range");
    double u;
    if (x <= fa) {
      u = fa == 0 ? 0.0 : x * ra / fa;
    } else if (x <= fa + len) {
      u = x - fa + ra;
    } else {
      const int rn = reduced - ra - len, fn = full - fa - len;
      u = ra + len + (x - fa - len) * rn / fn;
    }
    // Undo rounding so sample centers map back exactly.
    const double center = std::floor(u) + 0.5;
    return std::abs(u - center) < 1e-9 ? center : u;
  }

  friend bool operator==(const AxisWarp&, const AxisWarp&) = default;
};

/// Builds one axis. The fovea is capped at half the reduced samples (unless
/// the axis is not reduced at all) and clamped into the frame; the peripheries
/// split the remaining samples in proportion to their lengths, at least one
/// each when non-empty.
inline AxisWarp build_axis(int full, int reduced, double gaze, double radius) {
  AxisWarp a;
  a.full = full;
  a.reduced = reduced;
  if (reduced == full) {
    a.len = full;
    return a;
  }
  a.len = std::clamp(int(std::lround(2.0 * std::max(radius, 0.0))), 0, reduced / 2);
  a.fa = std::clamp(int(std::lround(gaze - a.len / 2.0)), 0, full - a.len);
  const int spare = reduced - a.len;
  const int left = a.fa, right = full - a.fa - a.len;
  int pl = int(std::lround(double(spare) * left / double(left + right)));
  pl = std::clamp(pl, left > 0 ? 1 : 0, spare - (right > 0 ? 1 : 0));
  pl = std::min(pl, left);
  if (spare - pl > right) pl = spare - right;
  a.ra = pl;
  return a;
}

/// Gaze-centred rectangular warp between a W x H full frame and a w x h
/// reduced frame. Parameters are held in single precision so the wire header
/// reproduces the mapping exactly.
struct FoveaMapping {
  int width = 0, height = 0;                 // full
  int reduced_width = 0, reduced_height = 0;
  float gaze_x = 0, gaze_y = 0;
  float fovea_radius = 0;
  float reduction = 1;
  AxisWarp x, y;

  /// Full-frame position of a reduced-frame position.
  std::pair<double, double> map_to_full(double u, double v) const { return {x.to_full(u), y.to_full(v)}; }
  std::pair<double, double> map_to_reduced(double px, double py) const { return {x.to_reduced(px), y.to_reduced(py)}; }

  /// Full-resolution rectangle [x0, x1) x [y0, y1) reproduced exactly.
  struct Rect {
    int x0, y0, x1, y1;
  };
  Rect fovea() const { return {x.fa, y.fa, x.fa + x.len, y.fa + y.len}; }

  friend bool operator==(const FoveaMapping&, const FoveaMapping&) = default;
};

inline int reduced_size(int full, float reduction) { return int(std::lround(double(full) / double(reduction))); }

inline float default_fovea_radius(int width, int height) { return float(std::min(width, height)) / 6.0f; }

inline FoveaMapping build_mapping(int width, int height, float reduction, float gaze_x, float gaze_y,
                                  float fovea_radius) {
  if (width <= 0 || height <= 0 || width > 65535 || height > 65535)
    throw Error(ErrorKind::kDimension, "frame dimensions must be in [1, 65535]");
  if (!(reduction >= 1.0f) || !std::isfinite(reduction)) throw Error(ErrorKind::kRange, "reduction must be >= 1");
  if (!(gaze_x >= 0.0f && gaze_x < float(width) && gaze_y >= 0.0f && gaze_y < float(height)))
    throw Error(ErrorKind::kRange, "gaze must lie inside the frame");
  if (!(fovea_radius >= 0.0f) || !std::isfinite(fovea_radius)) throw Error(ErrorKind::kRange, "fovea radius must be >= 0");
  FoveaMapping m;
  m.width = width;
  m.height = height;
  m.reduced_width = reduced_size(width, reduction);
  m.reduced_height = reduced_size(height, reduction);
  if (m.reduced_width < 4 || m.reduced_height < 4)
    throw Error(ErrorKind::kCapacity, "reduced frame would be smaller than 4 px");
  m.gaze_x = gaze_x;
  m.gaze_y = gaze_y;
  m.fovea_radius = fovea_radius;
  m.reduction = reduction;
  m.x = build_axis(width, m.reduced_width, gaze_x, fovea_radius);
  m.y = build_axis(height, m.reduced_height, gaze_y, fovea_radius);
  return m;
}

}  // namespace holoview::foveation
