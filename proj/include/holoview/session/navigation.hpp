#pragma once

#include <algorithm>
#include <cmath>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/render/scene.hpp"

namespace holoview::session {

using render::NavDirection;
using render::SceneState;

/// Full speed beyond d0, exponential falloff with length scale tau inside it.
inline double navigation_speed(double distance, double v_max, double d0, double tau) {
  if (!(v_max > 0.0) || !(d0 > 0.0) || !(tau > 0.0))
    throw Error(ErrorKind::kRange, "navigation parameters must be > 0");
  const double d = std::max(distance, 0.0);
  if (d >= d0) return v_max;
  return v_max * std::exp((d - d0) / tau);
}

struct NavigationParams {
  double v_max = 1.0;  // mm/s
  double d0 = 1.0;     // mm
  double tau = 1.0;    // mm
  Aabb model_box;      // model space
};

/// Constants scaled to the model as currently placed in the world.
inline NavigationParams navigation_params(const Aabb& model_box, const render::ModelTransform& model) {
  const double d0 = model.box_to_world(model_box).diagonal();
  if (!(d0 > 0.0)) throw Error(ErrorKind::kGeometry, "navigation needs a non-empty model box");
  return {d0 / 2.0, d0, d0 / 3.0, model_box};
}

inline double distance_to_box(const Vec3& p, const Aabb& b) {
  const Vec3 q = cwise_max(cwise_min(p, b.hi), b.lo);
  return norm(p - q);
}

/// Unit vector of a commanded user motion, in world space.
inline Vec3 direction_vector(const render::Camera& cam, NavDirection d) {
  switch (d) {
    case NavDirection::kLeft: return -cam.right();
    case NavDirection::kRight: return cam.right();
    case NavDirection::kUp: return cam.true_up();
    case NavDirection::kDown: return -cam.true_up();
    case NavDirection::kForward: return cam.f();
    case NavDirection::kBackward: return -cam.f();
  }
  return {};
}

/// Moves the model opposite the commanded motion. Bioscope mode holds still.
inline SceneState step_navigation(const SceneState& state, NavDirection direction, double dt,
                                  const NavigationParams& params) {
  if (!(dt >= 0.0)) throw Error(ErrorKind::kRange, "dt must be >= 0");
  if (state.mode == render::Mode::kBioscope || dt == 0.0) return state;
  const double d = distance_to_box(state.camera.position, state.model.box_to_world(params.model_box));
  const double v = navigation_speed(d, params.v_max, params.d0, params.tau);
  SceneState out = state;
  out.model.translation = out.model.translation - direction_vector(state.camera, direction) * (v * dt);
  return out;
}

}  // namespace holoview::session
