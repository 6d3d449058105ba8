#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/volume/voxel_code.hpp"

namespace holoview::volume {

struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t slice_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

struct Spacing {
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;

  double min() const { return std::min({sx, sy, sz}); }
  double max() const { return std::max({sx, sy, sz}); }
  Vec3 vec() const { return {sx, sy, sz}; }
  friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

/// Intensity + hierarchical label grids over the same lattice, x fastest.
/// Voxel (i, j, k) has its center at (i*sx, j*sy, k*sz) millimeters.
class LabeledVolume {
 public:
  LabeledVolume() = default;

  LabeledVolume(Dims dims, Spacing spacing)
      : dims_(dims), spacing_(spacing), intensity_(dims.count(), 0), labels_(dims.count(), 0) {
    validate_geometry();
  }

  LabeledVolume(Dims dims, Spacing spacing, std::vector<std::uint8_t> intensity,
                std::vector<std::uint16_t> labels)
      : dims_(dims), spacing_(spacing), intensity_(std::move(intensity)), labels_(std::move(labels)) {
    validate_geometry();
    if (intensity_.size() != dims_.count() || labels_.size() != dims_.count())
      throw Error(ErrorKind::kDimension, "grid sizes do not match dims");
    for (std::uint16_t raw : labels_) validate_label(raw);
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }

  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * static_cast<std::size_t>(dims_.ny) + static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(dims_.nx) +
           static_cast<std::size_t>(x);
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_.nx && y < dims_.ny && z < dims_.nz;
  }

  std::uint16_t label(int x, int y, int z) const { return labels_[index(x, y, z)]; }
  std::uint8_t intensity(int x, int y, int z) const { return intensity_[index(x, y, z)]; }

  void set_label(int x, int y, int z, VoxelCode code) {
    validate_label(code.raw);
    labels_[index(x, y, z)] = code.raw;
  }
  void set_intensity(int x, int y, int z, std::uint8_t v) { intensity_[index(x, y, z)] = v; }

  const std::vector<std::uint8_t>& intensity_data() const { return intensity_; }
  const std::vector<std::uint16_t>& label_data() const { return labels_; }

  /// World-space extent of the voxel-center lattice, padded by half a voxel.
  Aabb bounds() const {
    Aabb box;
    const Vec3 half = spacing_.vec() * 0.5;
    box.lo = -half;
    box.hi = cwise_mul(Vec3{double(dims_.nx - 1), double(dims_.ny - 1), double(dims_.nz - 1)}, spacing_.vec()) + half;
    return box;
  }

  /// Voxel count per raw label code (background included).
  std::map<std::uint16_t, std::size_t> histogram() const {
    std::map<std::uint16_t, std::size_t> h;
    for (std::uint16_t raw : labels_) ++h[raw];
    return h;
  }

  /// Copy one z-slice of labels from `src_z` to `dst_z`.
  void copy_label_slice(int src_z, int dst_z) {
    const std::size_t n = dims_.slice_count();
    std::copy_n(labels_.begin() + static_cast<std::ptrdiff_t>(n * static_cast<std::size_t>(src_z)), n,
                labels_.begin() + static_cast<std::ptrdiff_t>(n * static_cast<std::size_t>(dst_z)));
  }

  std::vector<std::uint16_t>& mutable_label_data() { return labels_; }
  std::vector<std::uint8_t>& mutable_intensity_data() { return intensity_; }

  friend bool operator==(const LabeledVolume&, const LabeledVolume&) = default;

  static void validate_label(std::uint16_t raw) {
    if (raw & kReservedBit)
      throw Error(ErrorKind::kReservedBit, "label " + std::to_string(raw) + " has bit 15 set");
    if (raw != 0 && ((raw >> kL1Shift) & 0xF) > kMajorSystems)
      throw Error(ErrorKind::kRange, "label " + std::to_string(raw) + " has L1 > 13");
  }

 private:
  void validate_geometry() const {
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0)
      throw Error(ErrorKind::kDimension, "volume dims must be positive");
    if (!(spacing_.sx > 0.0) || !(spacing_.sy > 0.0) || !(spacing_.sz > 0.0))
      throw Error(ErrorKind::kGeometry, "voxel spacing must be strictly positive");
  }

  Dims dims_;
  Spacing spacing_;
  std::vector<std::uint8_t> intensity_;
  std::vector<std::uint16_t> labels_;
};

/// Keeps every `factor`-th voxel along each axis; spacing grows accordingly.
inline LabeledVolume downsample(const LabeledVolume& in, int factor) {
  if (factor < 1) throw Error(ErrorKind::kRange, "downsample factor must be >= 1");
  if (factor == 1) return in;
  const Dims& d = in.dims();
  const Dims out_dims{(d.nx + factor - 1) / factor, (d.ny + factor - 1) / factor, (d.nz + factor - 1) / factor};
  const Spacing& s = in.spacing();
  LabeledVolume out(out_dims, Spacing{s.sx * factor, s.sy * factor, s.sz * factor});
  auto& labels = out.mutable_label_data();
  auto& intensity = out.mutable_intensity_data();
  for (int z = 0; z < out_dims.nz; ++z)
    for (int y = 0; y < out_dims.ny; ++y)
      for (int x = 0; x < out_dims.nx; ++x) {
        const std::size_t src = in.index(x * factor, y * factor, z * factor);
        const std::size_t dst = out.index(x, y, z);
        labels[dst] = in.label_data()[src];
        intensity[dst] = in.intensity_data()[src];
      }
  return out;
}

}  // namespace holoview::volume
