#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <set>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/render/camera.hpp"
#include "holoview/render/image.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::render {

using volume::OrganId;
using SelectionSet = std::set<OrganId>;

struct ClipPlane {
  Vec3 point;
  Vec3 normal{0, 0, 1};
  bool enabled = false;

  /// Normal flipped, if needed, so that `viewer` lies on its positive side.
  /// Points with dot(p - point, n') > 0 are clipped.
  Vec3 oriented_normal(const Vec3& viewer) const { return dot(viewer - point, normal) >= 0.0 ? normal : -normal; }

  friend bool operator==(const ClipPlane&, const ClipPlane&) = default;
};

inline ClipPlane make_clip_plane(const Vec3& point, const Vec3& normal, bool enabled = true) {
  if (enabled && !(norm(normal) > 0.0)) throw Error(ErrorKind::kGeometry, "clip normal must be non-zero");
  return {point, enabled ? normalized(normal) : normal, enabled};
}

struct RenderSettings {
  double step_size = 0.5;  // mm, model space
  int max_steps = 4096;
  double early_termination_alpha = 0.98;
  RgbaF background{0.0f, 0.0f, 0.0f, 1.0f};

  void validate() const {
    if (!(step_size > 0.0)) throw Error(ErrorKind::kRange, "step_size must be > 0");
    if (max_steps <= 0) throw Error(ErrorKind::kRange, "max_steps must be > 0");
    if (!(early_termination_alpha > 0.0 && early_termination_alpha <= 1.0))
      throw Error(ErrorKind::kRange, "early_termination_alpha must be in (0, 1]");
  }
  friend bool operator==(const RenderSettings&, const RenderSettings&) = default;
};

/// world = scale * rotation * model + translation
struct ModelTransform {
  Mat3 rotation = Mat3::identity();
  double scale = 1.0;
  Vec3 translation;

  Vec3 to_world(const Vec3& m) const { return rotation * m * scale + translation; }
  Vec3 to_model(const Vec3& w) const { return rotation.transposed() * (w - translation) / scale; }
  Vec3 dir_to_model(const Vec3& d) const { return rotation.transposed() * d / scale; }
  Aabb box_to_world(const Aabb& b) const {
    Aabb out;
    if (b.empty()) return out;
    for (int c = 0; c < 8; ++c)
      out.expand(to_world({c & 1 ? b.hi.x : b.lo.x, c & 2 ? b.hi.y : b.lo.y, c & 4 ? b.hi.z : b.lo.z}));
    return out;
  }
  friend bool operator==(const ModelTransform&, const ModelTransform&) = default;
};

enum class Mode : std::uint8_t { kExplore = 0, kBioscope = 1 };

/// Axis-aligned navigation commands in camera space.
enum class NavDirection : std::uint8_t { kLeft = 0, kRight, kUp, kDown, kForward, kBackward };

/// Everything a frame depends on.
struct SceneState {
  Camera camera;
  SelectionSet selection;
  ClipPlane clip;
  double gaze_x = 32.0, gaze_y = 32.0;
  Mode mode = Mode::kExplore;
  std::optional<OrganId> bioscope_target;
  ModelTransform model;
  RenderSettings settings;
  double reduction = 3.0;
  std::set<NavDirection> navigating;
  std::shared_ptr<const SceneState> before_bioscope;

  void validate() const {
    camera.validate();
    settings.validate();
    if (mode == Mode::kBioscope && !bioscope_target) throw Error(ErrorKind::kPrecondition, "bioscope mode needs a target");
    if (!(model.scale > 0.0)) throw Error(ErrorKind::kRange, "model scale must be > 0");
    if (clip.enabled && std::abs(norm(clip.normal) - 1.0) > 1e-9) throw Error(ErrorKind::kGeometry, "clip normal must be unit");
  }

  friend bool operator==(const SceneState& a, const SceneState& b) {
    const bool same_prev = a.before_bioscope == b.before_bioscope ||
                           (a.before_bioscope && b.before_bioscope && *a.before_bioscope == *b.before_bioscope);
    return same_prev && a.camera == b.camera && a.selection == b.selection && a.clip == b.clip &&
           a.gaze_x == b.gaze_x && a.gaze_y == b.gaze_y && a.mode == b.mode &&
           a.bioscope_target == b.bioscope_target && a.model == b.model && a.settings == b.settings &&
           a.reduction == b.reduction && a.navigating == b.navigating;
  }
};

}  // namespace holoview::render
