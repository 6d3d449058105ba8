#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "holoview/core/error.hpp"

namespace holoview::volume {

// Bit layout of a voxel code: L3 in bits 0-6, L2 in bits 7-10, L1 in bits
// 11-14. Bit 15 is reserved and must stay clear. Zero means background.
inline constexpr int kL3Bits = 7;
inline constexpr int kL2Bits = 4;
inline constexpr int kL1Bits = 4;
inline constexpr int kL2Shift = kL3Bits;
inline constexpr int kL1Shift = kL3Bits + kL2Bits;
inline constexpr std::uint16_t kReservedBit = 0x8000;
inline constexpr int kMajorSystems = 13;

struct VoxelCode {
  std::uint16_t raw = 0;

  constexpr bool is_background() const { return raw == 0; }
  friend constexpr auto operator<=>(const VoxelCode&, const VoxelCode&) = default;
};

struct LabelPath {
  int l1 = 0;
  int l2 = 0;
  int l3 = 0;
  friend constexpr bool operator==(const LabelPath&, const LabelPath&) = default;
};

/// An organ identity at the granularity the renderer and mesh cache use.
struct OrganId {
  std::uint8_t l1 = 0;
  std::uint8_t l2 = 0;

  friend constexpr auto operator<=>(const OrganId&, const OrganId&) = default;
  std::string str() const { return std::to_string(l1) + ":" + std::to_string(l2); }
};

inline VoxelCode encode_code(int l1, int l2, int l3) {
  auto check = [](int v, int max, const char* level) {
    if (v < 0 || v > max)
      throw Error(ErrorKind::kRange, std::string(level) + " component " + std::to_string(v) +
                                         " outside [0, " + std::to_string(max) + "]");
  };
  check(l1, (1 << kL1Bits) - 1, "L1");
  check(l2, (1 << kL2Bits) - 1, "L2");
  check(l3, (1 << kL3Bits) - 1, "L3");
  return VoxelCode{static_cast<std::uint16_t>((l1 << kL1Shift) | (l2 << kL2Shift) | l3)};
}

inline VoxelCode encode_code(OrganId organ, int l3 = 0) { return encode_code(organ.l1, organ.l2, l3); }

inline LabelPath decode_code(VoxelCode code) {
  if (code.raw & kReservedBit)
    throw Error(ErrorKind::kReservedBit, "code " + std::to_string(code.raw) + " has bit 15 set");
  return LabelPath{(code.raw >> kL1Shift) & 0xF, (code.raw >> kL2Shift) & 0xF, code.raw & 0x7F};
}

// Unchecked projection used in hot loops over validated grids.
constexpr OrganId organ_of(std::uint16_t raw) {
  return OrganId{static_cast<std::uint8_t>((raw >> kL1Shift) & 0xF),
                 static_cast<std::uint8_t>((raw >> kL2Shift) & 0xF)};
}

/// Dense index in [0, 256) for per-organ lookup tables.
constexpr int organ_index(OrganId organ) { return organ.l1 * 16 + organ.l2; }

}  // namespace holoview::volume
