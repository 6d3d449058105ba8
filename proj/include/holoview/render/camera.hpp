#pragma once

#include <cmath>
#include <numbers>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"

namespace holoview::render {

enum class Eye : std::uint8_t { kMono = 0, kLeft = 1, kRight = 2 };

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length in world space
};

/// Pinhole camera. Image y grows downward.
struct Camera {
  Vec3 position{0, 0, -100};
  Vec3 forward{0, 0, 1};
  Vec3 up{0, -1, 0};
  double vertical_fov = std::numbers::pi / 3.0;
  int width = 64;
  int height = 64;
  double ipd = 64.0;

  void validate() const {
    if (norm(forward) == 0.0 || norm(up) == 0.0) throw Error(ErrorKind::kGeometry, "camera axes must be non-zero");
    if (norm(cross(forward, up)) <= 1e-12 * norm(forward) * norm(up))
      throw Error(ErrorKind::kGeometry, "camera forward and up must not be parallel");
    if (!(vertical_fov > 0.0 && vertical_fov < std::numbers::pi)) throw Error(ErrorKind::kRange, "fov must be in (0, pi)");
    if (!(ipd >= 0.0)) throw Error(ErrorKind::kRange, "ipd must be >= 0");
    if (width <= 0 || height <= 0) throw Error(ErrorKind::kDimension, "image must have positive area");
  }

  Vec3 f() const { return normalized(forward); }
  Vec3 right() const { return normalized(cross(forward, up)); }
  Vec3 true_up() const { return cross(right(), f()); }

  /// Focal length in pixels.
  double focal_px() const { return 0.5 * height / std::tan(0.5 * vertical_fov); }

  Vec3 eye_position(Eye eye) const {
    switch (eye) {
      case Eye::kLeft: return position - right() * (0.5 * ipd);
      case Eye::kRight: return position + right() * (0.5 * ipd);
      default: return position;
    }
  }

  /// Ray through a continuous full-image position; pixel (i, j) has its
  /// center at (i + 0.5, j + 0.5).
  Ray ray(Eye eye, double px, double py) const {
    const double fpx = focal_px();
    const Vec3 d = f() * fpx + right() * (px - 0.5 * width) - true_up() * (py - 0.5 * height);
    return {eye_position(eye), normalized(d)};
  }

  friend bool operator==(const Camera&, const Camera&) = default;
};

}  // namespace holoview::render
