#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "holoview/foveation/frame.hpp"
#include "holoview/render/renderer.hpp"
#include "holoview/session/messages.hpp"

namespace holoview::session {

using render::RenderAssets;
using render::SceneState;

struct ControlResult {
  SceneState state;
  std::optional<DataMessage> reply;
};

namespace detail {

inline ControlResult reject(const SceneState& s, std::string code, std::string text) {
  return {s, DataMessage{ErrorMessage{std::move(code), std::move(text)}}};
}

inline void clamp_gaze(SceneState& s) {
  s.gaze_x = std::clamp(s.gaze_x, 0.0, double(s.camera.width));
  s.gaze_y = std::clamp(s.gaze_y, 0.0, double(s.camera.height));
}

inline std::string mapping_problem(const SceneState& s) {
  try {
    foveation::scene_mapping(s);
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

}  // namespace detail

/// Pure state transition. Rejected messages leave the state untouched and
/// carry an Error reply; picks carry a PickResult reply.
inline ControlResult apply_control(const RenderAssets& assets, const SceneState& state, const ControlMessage& msg) {
  const auto& hierarchy = assets.hierarchy();
  return std::visit(
      [&](const auto& m) -> ControlResult {
        using T = std::decay_t<decltype(m)>;
        SceneState s = state;
        if constexpr (std::is_same_v<T, SetCamera>) {
          s.camera = {to_vec3(m.position), to_vec3(m.forward), to_vec3(m.up), m.vertical_fov, m.width, m.height, m.ipd};
          try {
            s.camera.validate();
          } catch (const Error& e) {
            return detail::reject(state, "bad-message", e.what());
          }
          detail::clamp_gaze(s);
          if (auto p = detail::mapping_problem(s); !p.empty()) return detail::reject(state, "bad-message", p);
        } else if constexpr (std::is_same_v<T, SetGaze>) {
          if (!std::isfinite(m.x) || !std::isfinite(m.y)) return detail::reject(state, "bad-message", "gaze not finite");
          s.gaze_x = m.x;
          s.gaze_y = m.y;
          detail::clamp_gaze(s);
        } else if constexpr (std::is_same_v<T, ToggleOrgan>) {
          if (!hierarchy.find(m.organ)) return detail::reject(state, "unknown-organ", m.organ.str());
          if (!s.selection.erase(m.organ)) s.selection.insert(m.organ);
        } else if constexpr (std::is_same_v<T, SelectAllInSystem>) {
          for (const auto& o : hierarchy.organs_in_system(m.l1)) s.selection.insert(o);
        } else if constexpr (std::is_same_v<T, DeselectAllInSystem>) {
          for (const auto& o : hierarchy.organs_in_system(m.l1)) s.selection.erase(o);
        } else if constexpr (std::is_same_v<T, SetClipPlane>) {
          try {
            s.clip = render::make_clip_plane(to_vec3(m.point), to_vec3(m.normal), m.enabled);
          } catch (const Error& e) {
            return detail::reject(state, "bad-message", e.what());
          }
        } else if constexpr (std::is_same_v<T, Navigate>) {
          if (m.active)
            s.navigating.insert(m.direction);
          else
            s.navigating.erase(m.direction);
        } else if constexpr (std::is_same_v<T, EnterBioscope>) {
          if (!hierarchy.find(m.organ)) return detail::reject(state, "unknown-organ", m.organ.str());
          if (!s.selection.contains(m.organ)) return detail::reject(state, "target-not-selected", m.organ.str());
          auto r = render::bioscope_transform(assets, s, m.organ);
          if (!r.applied) return detail::reject(state, "empty-target", m.organ.str());
          s = std::move(r.state);
          s.navigating.clear();
        } else if constexpr (std::is_same_v<T, ExitBioscope>) {
          s = render::exit_bioscope(s);
        } else if constexpr (std::is_same_v<T, PickOrgan>) {
          if (!std::isfinite(m.x) || !std::isfinite(m.y)) return detail::reject(state, "bad-message", "pick not finite");
          const auto hit = render::pick_organ(assets, s, s.camera.ray(render::Eye::kMono, m.x, m.y));
          PickResultMessage reply;
          if (hit) reply = {hit->organ, hit->name};
          return {s, DataMessage{reply}};
        } else if constexpr (std::is_same_v<T, SetReduction>) {
          if (!(m.k >= 1.0)) return detail::reject(state, "bad-message", "reduction must be >= 1");
          s.reduction = m.k;
          if (auto p = detail::mapping_problem(s); !p.empty()) return detail::reject(state, "bad-message", p);
        }
        return {std::move(s), std::nullopt};
      },
      msg);
}

}  // namespace holoview::session
