#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <string_view>

#include "holoview/core/error.hpp"
#include "holoview/foveation/frame.hpp"
#include "holoview/session/messages.hpp"
#include "json.hpp"

namespace holoview::session {

// Frame: "HVW1" | u8 type | u32 LE payload length | payload
inline constexpr char kWireMagic[4] = {'H', 'V', 'W', '1'};
inline constexpr std::size_t kWireHeaderSize = 9;
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

enum class WireErrorCode : std::uint8_t { kBadMagic = 1, kTruncated, kUnknownType, kLengthOverflow, kBadPayload, kTrailingBytes };

inline const char* wire_error_name(WireErrorCode c) {
  switch (c) {
    case WireErrorCode::kBadMagic: return "bad-magic";
    case WireErrorCode::kTruncated: return "truncated";
    case WireErrorCode::kUnknownType: return "unknown-type";
    case WireErrorCode::kLengthOverflow: return "length-overflow";
    case WireErrorCode::kBadPayload: return "bad-payload";
    case WireErrorCode::kTrailingBytes: return "trailing-bytes";
  }
  return "unknown";
}

class WireError : public Error {
 public:
  WireError(WireErrorCode code, const std::string& what)
      : Error(ErrorKind::kFormat, std::string(wire_error_name(code)) + ": " + what), code_(code) {}
  WireErrorCode code() const { return code_; }

 private:
  WireErrorCode code_;
};

/// Wire type byte per message; control types are below 0x80.
enum class WireType : std::uint8_t {
  kSetCamera = 0x01,
  kSetGaze = 0x02,
  kToggleOrgan = 0x03,
  kSelectAllInSystem = 0x04,
  kDeselectAllInSystem = 0x05,
  kSetClipPlane = 0x06,
  kNavigate = 0x07,
  kEnterBioscope = 0x08,
  kExitBioscope = 0x09,
  kPickOrgan = 0x0A,
  kSetReduction = 0x0B,
  kFrame = 0x80,
  kPickResult = 0x81,
  kAck = 0x82,
  kError = 0x83,
};

namespace detail {

using nlohmann::json;

inline WireType type_of(const Message& m) {
  static constexpr WireType kTypes[] = {
      WireType::kSetCamera,     WireType::kSetGaze,      WireType::kToggleOrgan, WireType::kSelectAllInSystem,
      WireType::kDeselectAllInSystem, WireType::kSetClipPlane, WireType::kNavigate, WireType::kEnterBioscope,
      WireType::kExitBioscope,  WireType::kPickOrgan,    WireType::kSetReduction, WireType::kFrame,
      WireType::kPickResult,    WireType::kAck,          WireType::kError};
  static_assert(std::size(kTypes) == std::variant_size_v<Message>);
  return kTypes[m.index()];
}

inline json organ_json(OrganId o) { return {{"l1", o.l1}, {"l2", o.l2}}; }

inline json to_json(const Message& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SetCamera>)
          return {{"position", v.position}, {"forward", v.forward}, {"up", v.up}, {"vertical_fov", v.vertical_fov},
                  {"width", v.width},       {"height", v.height},   {"ipd", v.ipd}};
        else if constexpr (std::is_same_v<T, SetGaze> || std::is_same_v<T, PickOrgan>)
          return {{"x", v.x}, {"y", v.y}};
        else if constexpr (std::is_same_v<T, ToggleOrgan> || std::is_same_v<T, EnterBioscope>)
          return organ_json(v.organ);
        else if constexpr (std::is_same_v<T, SelectAllInSystem> || std::is_same_v<T, DeselectAllInSystem>)
          return {{"l1", v.l1}};
        else if constexpr (std::is_same_v<T, SetClipPlane>)
          return {{"point", v.point}, {"normal", v.normal}, {"enabled", v.enabled}};
        else if constexpr (std::is_same_v<T, Navigate>)
          return {{"direction", direction_name(v.direction)}, {"active", v.active}};
        else if constexpr (std::is_same_v<T, ExitBioscope>)
          return json::object();
        else if constexpr (std::is_same_v<T, SetReduction>)
          return {{"k", v.k}};
        else if constexpr (std::is_same_v<T, PickResultMessage>)
          return v.organ ? json{{"hit", true}, {"l1", v.organ->l1}, {"l2", v.organ->l2}, {"name", v.name}}
                         : json{{"hit", false}};
        else if constexpr (std::is_same_v<T, Ack>)
          return {{"frame_id", v.frame_id}};
        else if constexpr (std::is_same_v<T, ErrorMessage>)
          return {{"code", v.code}, {"text", v.text}};
        else
          return {};
      },
      m);
}

[[noreturn]] inline void bad(const std::string& what) { throw WireError(WireErrorCode::kBadPayload, what); }

inline double num(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) bad(std::string(key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad(std::string(key) + " must be finite");
  return d;
}

inline int integer(const json& j, const char* key, int lo, int hi) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) bad(std::string(key) + " must be an integer");
  const auto i = v.get<std::int64_t>();
  if (i < lo || i > hi) bad(std::string(key) + " out of range");
  return int(i);
}

inline Vec3Array vec(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 3) bad(std::string(key) + " must be a 3-vector");
  Vec3Array out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) bad(std::string(key) + " must be numeric");
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) bad(std::string(key) + " must be finite");
  }
  return out;
}

inline bool boolean(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_boolean()) bad(std::string(key) + " must be a boolean");
  return v.get<bool>();
}

inline std::string text(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) bad(std::string(key) + " must be a string");
  return v.get<std::string>();
}

inline OrganId organ(const json& j) {
  return {std::uint8_t(integer(j, "l1", 0, 15)), std::uint8_t(integer(j, "l2", 0, 15))};
}

inline Message from_json(WireType type, const json& j) {
  if (!j.is_object()) bad("payload must be an object");
  switch (type) {
    case WireType::kSetCamera: {
      SetCamera c{vec(j, "position"), vec(j, "forward"), vec(j, "up"), num(j, "vertical_fov"),
                  integer(j, "width", 1, 65535), integer(j, "height", 1, 65535), num(j, "ipd")};
      render::Camera cam{to_vec3(c.position), to_vec3(c.forward), to_vec3(c.up), c.vertical_fov, c.width, c.height, c.ipd};
      try {
        cam.validate();
      } catch (const Error& e) {
        bad(e.what());
      }
      return c;
    }
    case WireType::kSetGaze: return SetGaze{num(j, "x"), num(j, "y")};
    case WireType::kPickOrgan: return PickOrgan{num(j, "x"), num(j, "y")};
    case WireType::kToggleOrgan: return ToggleOrgan{organ(j)};
    case WireType::kEnterBioscope: return EnterBioscope{organ(j)};
    case WireType::kSelectAllInSystem: return SelectAllInSystem{integer(j, "l1", 0, 15)};
    case WireType::kDeselectAllInSystem: return DeselectAllInSystem{integer(j, "l1", 0, 15)};
    case WireType::kSetClipPlane: {
      SetClipPlane c{vec(j, "point"), vec(j, "normal"), boolean(j, "enabled")};
      if (c.enabled && norm(to_vec3(c.normal)) == 0.0) bad("clip normal must be non-zero");
      return c;
    }
    case WireType::kNavigate: {
      const auto d = parse_direction(text(j, "direction"));
      if (!d) bad("unknown navigation direction");
      return Navigate{*d, boolean(j, "active")};
    }
    case WireType::kExitBioscope: return ExitBioscope{};
    case WireType::kSetReduction: {
      const double k = num(j, "k");
      if (!(k >= 1.0 && k <= 64.0)) bad("reduction must be in [1, 64]");
      return SetReduction{k};
    }
    case WireType::kPickResult: {
      if (!boolean(j, "hit")) return PickResultMessage{};
      return PickResultMessage{organ(j), text(j, "name")};
    }
    case WireType::kAck: {
      const auto& v = j.at("frame_id");
      if (!v.is_number_unsigned()) bad("frame_id must be unsigned");
      return Ack{v.get<std::uint64_t>()};
    }
    case WireType::kError: return ErrorMessage{text(j, "code"), text(j, "text")};
    default: throw WireError(WireErrorCode::kUnknownType, "unknown message type");
  }
}

inline bool known_type(std::uint8_t t) { return (t >= 0x01 && t <= 0x0B) || (t >= 0x80 && t <= 0x83); }

}  // namespace detail

inline std::string serialize(const Message& m) {
  const WireType type = detail::type_of(m);
  std::string payload;
  if (const auto* f = std::get_if<FrameMessage>(&m))
    payload = foveation::serialize_frame(f->frame);
  else
    payload = detail::to_json(m).dump();
  if (payload.size() > kMaxPayload) throw WireError(WireErrorCode::kLengthOverflow, "payload too large");
  std::string out(kWireMagic, 4);
  out.push_back(char(type));
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out.push_back(char((len >> (8 * i)) & 0xff));
  out += payload;
  return out;
}

inline std::string serialize(const ControlMessage& m) { return serialize(to_message(m)); }
inline std::string serialize(const DataMessage& m) { return serialize(to_message(m)); }

/// Parses exactly one framed message. Throws WireError and nothing else.
inline Message deserialize(std::string_view bytes) {
  if (bytes.size() < 4) {
    if (std::memcmp(bytes.data(), kWireMagic, bytes.size()) != 0) throw WireError(WireErrorCode::kBadMagic, "bad magic");
    throw WireError(WireErrorCode::kTruncated, "incomplete header");
  }
  if (std::memcmp(bytes.data(), kWireMagic, 4) != 0) throw WireError(WireErrorCode::kBadMagic, "bad magic");
  if (bytes.size() < kWireHeaderSize) throw WireError(WireErrorCode::kTruncated, "incomplete header");
  const auto type = static_cast<std::uint8_t>(bytes[4]);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= std::uint32_t(static_cast<std::uint8_t>(bytes[std::size_t(5 + i)])) << (8 * i);
  if (!detail::known_type(type)) throw WireError(WireErrorCode::kUnknownType, "type " + std::to_string(type));
  if (len > kMaxPayload) throw WireError(WireErrorCode::kLengthOverflow, "declared length " + std::to_string(len));
  if (bytes.size() - kWireHeaderSize < len) throw WireError(WireErrorCode::kTruncated, "payload shorter than declared");
  if (bytes.size() - kWireHeaderSize > len) throw WireError(WireErrorCode::kTrailingBytes, "bytes after payload");
  const std::string_view payload = bytes.substr(kWireHeaderSize);
  const auto wt = static_cast<WireType>(type);
  if (wt == WireType::kFrame) {
    try {
      return FrameMessage{foveation::parse_frame(payload)};
    } catch (const Error& e) {
      throw WireError(WireErrorCode::kBadPayload, e.what());
    }
  }
  try {
    const auto j = nlohmann::json::parse(payload);
    return detail::from_json(wt, j);
  } catch (const WireError&) {
    throw;
  } catch (const std::exception& e) {
    throw WireError(WireErrorCode::kBadPayload, e.what());
  }
}

}  // namespace holoview::session
