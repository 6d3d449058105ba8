#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "holoview/core/error.hpp"
#include "holoview/core/vec.hpp"
#include "holoview/volume/hierarchy.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::volume {

// Shape coordinates are in voxel units (voxel centers at integers).

/// Solid ellipsoid, or a hollow shell when `shell_thickness` > 0.
struct Ellipsoid {
  Vec3 center;
  Vec3 radii;
  double shell_thickness = 0.0;
};

/// Stack of disks along z whose radius varies linearly from r0 at z0 to r1 at z1.
struct TaperedCylinder {
  double cx = 0.0, cy = 0.0;
  double z0 = 0.0, z1 = 0.0;
  double r0 = 0.0, r1 = 0.0;
};

struct OrganShape {
  OrganId organ;
  std::variant<Ellipsoid, TaperedCylinder> geometry;
};

struct PhantomSpec {
  Dims dims{64, 64, 64};
  Spacing spacing{};
  std::uint64_t seed = 1;
  std::vector<OrganShape> shapes;
  SegmentationHierarchy hierarchy;
};

namespace detail {

inline bool inside(const Ellipsoid& e, double x, double y, double z) {
  auto q = [](double d, double r) { return r > 0.0 ? (d / r) * (d / r) : (d == 0.0 ? 0.0 : INFINITY); };
  const double dx = x - e.center.x, dy = y - e.center.y, dz = z - e.center.z;
  if (q(dx, e.radii.x) + q(dy, e.radii.y) + q(dz, e.radii.z) > 1.0) return false;
  if (e.shell_thickness <= 0.0) return true;
  const Vec3 inner = e.radii - Vec3{e.shell_thickness, e.shell_thickness, e.shell_thickness};
  if (inner.x <= 0.0 || inner.y <= 0.0 || inner.z <= 0.0) return true;
  return q(dx, inner.x) + q(dy, inner.y) + q(dz, inner.z) > 1.0;
}

inline bool inside(const TaperedCylinder& c, double x, double y, double z) {
  if (z < c.z0 || z > c.z1) return false;
  const double t = c.z1 > c.z0 ? (z - c.z0) / (c.z1 - c.z0) : 0.0;
  const double r = c.r0 + t * (c.r1 - c.r0);
  const double dx = x - c.cx, dy = y - c.cy;
  return dx * dx + dy * dy <= r * r;
}

inline Aabb shape_bounds(const Ellipsoid& e) { return {e.center - e.radii, e.center + e.radii}; }
inline Aabb shape_bounds(const TaperedCylinder& c) {
  const double r = std::max(c.r0, c.r1);
  return {{c.cx - r, c.cy - r, c.z0}, {c.cx + r, c.cy + r, c.z1}};
}

}  // namespace detail

/// Rasterizes the organ shapes in order (later shapes overwrite earlier ones)
/// and derives intensity from each voxel's L2 plus a seeded ripple.
inline LabeledVolume generate_phantom(const PhantomSpec& spec) {
  const Dims& d = spec.dims;
  if (d.nx < 8 || d.ny < 8 || d.nz < 8) throw Error(ErrorKind::kDimension, "phantom dims must be >= 8 per axis");
  const Aabb grid{{0, 0, 0}, {double(d.nx - 1), double(d.ny - 1), double(d.nz - 1)}};
  for (const auto& shape : spec.shapes) {
    (void)encode_code(shape.organ);
    if (shape.organ.l1 > kMajorSystems || (shape.organ.l1 == 0 && shape.organ.l2 == 0))
      throw Error(ErrorKind::kRange, "shape organ " + shape.organ.str() + " is not a valid (L1,L2) pair");
    const Aabb b = std::visit([](const auto& g) { return detail::shape_bounds(g); }, shape.geometry);
    for (int a = 0; a < 3; ++a)
      if (b.lo[a] < grid.lo[a] || b.hi[a] > grid.hi[a])
        throw Error(ErrorKind::kGeometry, "shape " + shape.organ.str() + " extends outside the grid");
  }

  LabeledVolume vol(d, spec.spacing);
  auto& labels = vol.mutable_label_data();
  for (const auto& shape : spec.shapes) {
    const std::uint16_t code = encode_code(shape.organ).raw;
    const Aabb b = std::visit([](const auto& g) { return detail::shape_bounds(g); }, shape.geometry);
    for (int z = int(std::floor(b.lo.z)); z <= int(std::ceil(b.hi.z)); ++z)
      for (int y = int(std::floor(b.lo.y)); y <= int(std::ceil(b.hi.y)); ++y)
        for (int x = int(std::floor(b.lo.x)); x <= int(std::ceil(b.hi.x)); ++x) {
          if (!vol.contains(x, y, z)) continue;
          const bool in = std::visit([&](const auto& g) { return detail::inside(g, x, y, z); }, shape.geometry);
          if (in) labels[vol.index(x, y, z)] = code;
        }
  }

  // mt19937_64 output is fully specified, so phases are portable.
  std::mt19937_64 rng(spec.seed);
  const double tau = 2.0 * std::numbers::pi;
  const double p1 = double(rng() % 100000) / 100000.0 * tau;
  const double p2 = double(rng() % 100000) / 100000.0 * tau;
  const double p3 = double(rng() % 100000) / 100000.0 * tau;
  auto& intensity = vol.mutable_intensity_data();
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) {
        const std::size_t i = vol.index(x, y, z);
        if (labels[i] == 0) continue;
        const double ripple = 6.0 * std::sin(0.37 * x + p1) * std::cos(0.29 * y + p2) * std::sin(0.23 * z + p3);
        const double v = 40.0 + 15.0 * organ_of(labels[i]).l2 + std::round(ripple);
        intensity[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return vol;
}

/// Built-in phantoms: "three-organs", "sphere", "growing-disk".
inline PhantomSpec phantom_preset(const std::string& name, Dims dims = {64, 64, 64}, std::uint64_t seed = 1) {
  PhantomSpec spec;
  spec.dims = dims;
  spec.seed = seed;
  const Vec3 c{(dims.nx - 1) / 2.0, (dims.ny - 1) / 2.0, (dims.nz - 1) / 2.0};
  const double m = std::min({dims.nx, dims.ny, dims.nz});
  if (name == "three-organs") {
    spec.shapes = {
        {{3, 5}, Ellipsoid{{c.x - 0.17 * dims.nx, c.y, c.z}, {0.16 * dims.nx, 0.2 * dims.ny, 0.25 * dims.nz}}},
        {{3, 2}, Ellipsoid{{c.x + 0.2 * dims.nx, c.y - 0.12 * dims.ny, c.z + 0.1 * dims.nz},
                           {0.12 * dims.nx, 0.12 * dims.ny, 0.15 * dims.nz}}},
        {{5, 1}, Ellipsoid{{c.x + 0.18 * dims.nx, c.y + 0.2 * dims.ny, c.z - 0.15 * dims.nz},
                           {0.1 * dims.nx, 0.1 * dims.ny, 0.1 * dims.nz}, 0.04 * m}},
    };
    spec.hierarchy = SegmentationHierarchy({{{3, 5}, "liver", {170, 70, 50, 90}},
                                            {{3, 2}, "stomach", {220, 180, 120, 90}},
                                            {{5, 1}, "heart", {200, 30, 40, 110}}});
  } else if (name == "sphere") {
    spec.shapes = {{{3, 5}, Ellipsoid{c, {m / 4, m / 4, m / 4}}}};
    spec.hierarchy = SegmentationHierarchy({{{3, 5}, "liver", {170, 70, 50, 90}}});
  } else if (name == "growing-disk") {
    spec.shapes = {{{3, 5}, TaperedCylinder{c.x, c.y, 0.0, double(dims.nz - 1), 0.1 * m, 0.4 * m}}};
    spec.hierarchy = SegmentationHierarchy({{{3, 5}, "liver", {170, 70, 50, 90}}});
  } else {
    throw Error(ErrorKind::kFormat, "unknown phantom preset '" + name + "'");
  }
  return spec;
}

/// Parses a JSON phantom description. Shape `kind` is "ellipsoid" or "tapered-cylinder".
inline PhantomSpec parse_phantom_spec(const std::string& text) {
  using nlohmann::json;
  PhantomSpec spec;
  try {
    const json j = json::parse(text);
    auto vec3 = [](const json& a) { return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()}; };
    const auto& dims = j.at("dims");
    spec.dims = {dims.at(0).get<int>(), dims.at(1).get<int>(), dims.at(2).get<int>()};
    if (j.contains("spacing")) {
      const Vec3 s = vec3(j.at("spacing"));
      spec.spacing = {s.x, s.y, s.z};
    }
    spec.seed = j.value("seed", std::uint64_t{1});
    for (const auto& s : j.at("shapes")) {
      OrganShape shape;
      shape.organ = OrganId{s.at("l1").get<std::uint8_t>(), s.at("l2").get<std::uint8_t>()};
      const std::string kind = s.at("kind").get<std::string>();
      if (kind == "ellipsoid") {
        shape.geometry = Ellipsoid{vec3(s.at("center")), vec3(s.at("radii")), s.value("shell_thickness", 0.0)};
      } else if (kind == "tapered-cylinder") {
        shape.geometry = TaperedCylinder{s.at("cx").get<double>(), s.at("cy").get<double>(), s.at("z0").get<double>(),
                                         s.at("z1").get<double>(), s.at("r0").get<double>(), s.at("r1").get<double>()};
      } else {
        throw Error(ErrorKind::kFormat, "unknown shape kind '" + kind + "'");
      }
      spec.shapes.push_back(shape);
    }
    if (j.contains("hierarchy")) {
      for (const auto& e : j.at("hierarchy")) {
        const auto& c = e.at("color");
        spec.hierarchy.add({OrganId{e.at("l1").get<std::uint8_t>(), e.at("l2").get<std::uint8_t>()},
                            e.at("name").get<std::string>(),
                            Rgba8{c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(),
                                  c.at(2).get<std::uint8_t>(), c.at(3).get<std::uint8_t>()}});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("phantom spec: ") + e.what());
  }
  for (const auto& shape : spec.shapes)
    if (!spec.hierarchy.find(shape.organ))
      spec.hierarchy.add({shape.organ, "organ-" + std::to_string(shape.organ.l1) + "-" + std::to_string(shape.organ.l2),
                          Rgba8{180, 140, 120, 90}});
  return spec;
}

}  // namespace holoview::volume
