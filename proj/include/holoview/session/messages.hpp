#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "holoview/foveation/frame.hpp"
#include "holoview/render/scene.hpp"

namespace holoview::session {

using render::NavDirection;
using volume::OrganId;

using Vec3Array = std::array<double, 3>;

inline Vec3 to_vec3(const Vec3Array& a) { return {a[0], a[1], a[2]}; }
inline Vec3Array to_array(const Vec3& v) { return {v.x, v.y, v.z}; }

// Control stream (client to server).
struct SetCamera {
  Vec3Array position{0, 0, -100}, forward{0, 0, 1}, up{0, -1, 0};
  double vertical_fov = 1.0471975511965976;
  int width = 64, height = 64;
  double ipd = 64.0;
  friend bool operator==(const SetCamera&, const SetCamera&) = default;
};
struct SetGaze {
  double x = 0, y = 0;
  friend bool operator==(const SetGaze&, const SetGaze&) = default;
};
struct ToggleOrgan {
  OrganId organ;
  friend bool operator==(const ToggleOrgan&, const ToggleOrgan&) = default;
};
struct SelectAllInSystem {
  int l1 = 0;
  friend bool operator==(const SelectAllInSystem&, const SelectAllInSystem&) = default;
};
struct DeselectAllInSystem {
  int l1 = 0;
  friend bool operator==(const DeselectAllInSystem&, const DeselectAllInSystem&) = default;
};
struct SetClipPlane {
  Vec3Array point{}, normal{0, 0, 1};
  bool enabled = true;
  friend bool operator==(const SetClipPlane&, const SetClipPlane&) = default;
};
struct Navigate {
  NavDirection direction = NavDirection::kForward;
  bool active = true;
  friend bool operator==(const Navigate&, const Navigate&) = default;
};
struct EnterBioscope {
  OrganId organ;
  friend bool operator==(const EnterBioscope&, const EnterBioscope&) = default;
};
struct ExitBioscope {
  friend bool operator==(const ExitBioscope&, const ExitBioscope&) = default;
};
/// Pick along the mono ray through full-frame pixel position (x, y).
struct PickOrgan {
  double x = 0, y = 0;
  friend bool operator==(const PickOrgan&, const PickOrgan&) = default;
};
struct SetReduction {
  double k = 3.0;
  friend bool operator==(const SetReduction&, const SetReduction&) = default;
};

using ControlMessage = std::variant<SetCamera, SetGaze, ToggleOrgan, SelectAllInSystem, DeselectAllInSystem,
                                    SetClipPlane, Navigate, EnterBioscope, ExitBioscope, PickOrgan, SetReduction>;

// Data stream (server to client).
struct FrameMessage {
  foveation::FoveatedFrame frame;
  friend bool operator==(const FrameMessage&, const FrameMessage&) = default;
};
struct PickResultMessage {
  std::optional<OrganId> organ;
  std::string name;
  friend bool operator==(const PickResultMessage&, const PickResultMessage&) = default;
};
struct Ack {
  std::uint64_t frame_id = 0;
  friend bool operator==(const Ack&, const Ack&) = default;
};
struct ErrorMessage {
  std::string code;
  std::string text;
  friend bool operator==(const ErrorMessage&, const ErrorMessage&) = default;
};

using DataMessage = std::variant<FrameMessage, PickResultMessage, Ack, ErrorMessage>;

using Message = std::variant<SetCamera, SetGaze, ToggleOrgan, SelectAllInSystem, DeselectAllInSystem, SetClipPlane,
                             Navigate, EnterBioscope, ExitBioscope, PickOrgan, SetReduction, FrameMessage,
                             PickResultMessage, Ack, ErrorMessage>;

inline Message to_message(const ControlMessage& c) {
  return std::visit([](const auto& m) { return Message{m}; }, c);
}
inline Message to_message(const DataMessage& d) {
  return std::visit([](const auto& m) { return Message{m}; }, d);
}
template <class T, class V>
struct holds_type;
template <class T, class... Ts>
struct holds_type<T, std::variant<Ts...>> : std::bool_constant<(std::is_same_v<T, Ts> || ...)> {};

/// The same message viewed as one of the two stream types, if it belongs there.
template <class Stream>
std::optional<Stream> as_stream(const Message& m) {
  return std::visit(
      [](const auto& v) -> std::optional<Stream> {
        if constexpr (holds_type<std::decay_t<decltype(v)>, Stream>::value)
          return Stream{v};
        else
          return std::nullopt;
      },
      m);
}

inline const char* direction_name(NavDirection d) {
  static constexpr const char* kNames[] = {"left", "right", "up", "down", "forward", "backward"};
  return kNames[static_cast<int>(d)];
}

inline std::optional<NavDirection> parse_direction(const std::string& s) {
  for (int i = 0; i < 6; ++i)
    if (s == direction_name(static_cast<NavDirection>(i))) return static_cast<NavDirection>(i);
  return std::nullopt;
}

}  // namespace holoview::session
