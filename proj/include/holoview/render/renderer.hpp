#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/parallel.hpp"
#include "holoview/mesh/bvh.hpp"
#include "holoview/mesh/marching_cubes.hpp"
#include "holoview/render/image.hpp"
#include "holoview/render/scene.hpp"
#include "holoview/volume/hierarchy.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::render {

using mesh::MeshBvh;
using mesh::SurfaceMesh;
using volume::LabeledVolume;
using volume::SegmentationHierarchy;

/// A mesh and its BVH, pinned in memory since the BVH points into the mesh.
struct OrganGeometry {
  SurfaceMesh mesh;
  MeshBvh bvh;

  explicit OrganGeometry(SurfaceMesh m) : mesh(std::move(m)), bvh(mesh) {}
  OrganGeometry(const OrganGeometry&) = delete;
  OrganGeometry& operator=(const OrganGeometry&) = delete;
};

/// Organs with at least one voxel in the volume.
inline std::set<OrganId> organs_present(const LabeledVolume& vol) {
  std::set<OrganId> out;
  for (const auto& [raw, count] : vol.histogram())
    if (raw != 0) out.insert(volume::organ_of(raw));
  return out;
}

/// Immutable inputs shared by every frame: the label grid, the hierarchy,
/// conservative proxy meshes for ray skipping, and optional display meshes
/// for picking and framing.
class RenderAssets {
 public:
  RenderAssets(LabeledVolume volume, SegmentationHierarchy hierarchy, std::map<OrganId, SurfaceMesh> proxies,
               std::map<OrganId, SurfaceMesh> surfaces = {})
      : volume_(std::move(volume)), hierarchy_(std::move(hierarchy)) {
    for (auto& [organ, m] : proxies) proxies_.emplace(organ, std::make_unique<OrganGeometry>(std::move(m)));
    for (auto& [organ, m] : surfaces) surfaces_.emplace(organ, std::make_unique<OrganGeometry>(std::move(m)));
  }

  /// Extracts proxies (label indicator dilated by `dilation` voxels) for every
  /// organ present in the volume.
  static std::shared_ptr<const RenderAssets> build(LabeledVolume volume, SegmentationHierarchy hierarchy,
                                                   std::map<OrganId, SurfaceMesh> surfaces = {}, int dilation = 1) {
    std::map<OrganId, SurfaceMesh> proxies;
    for (OrganId organ : organs_present(volume)) proxies[organ] = mesh::extract_proxy_mesh(volume, organ, dilation);
    return std::make_shared<const RenderAssets>(std::move(volume), std::move(hierarchy), std::move(proxies),
                                                std::move(surfaces));
  }

  const LabeledVolume& volume() const { return volume_; }
  const SegmentationHierarchy& hierarchy() const { return hierarchy_; }

  const OrganGeometry* proxy(OrganId organ) const {
    auto it = proxies_.find(organ);
    return it == proxies_.end() ? nullptr : it->second.get();
  }
  /// Display mesh, falling back to the proxy.
  const OrganGeometry* surface(OrganId organ) const {
    auto it = surfaces_.find(organ);
    return it == surfaces_.end() ? proxy(organ) : it->second.get();
  }

 private:
  LabeledVolume volume_;
  SegmentationHierarchy hierarchy_;
  std::map<OrganId, std::unique_ptr<OrganGeometry>> proxies_;
  std::map<OrganId, std::unique_ptr<OrganGeometry>> surfaces_;
};

/// Per-label color from the hierarchy, opacity scaled by voxel intensity.
/// Unselected organs and background are fully transparent.
class TransferFunction {
 public:
  TransferFunction(const SegmentationHierarchy& hierarchy, const SelectionSet& selection) {
    for (OrganId organ : selection) {
      const auto* e = hierarchy.find(organ);
      const auto c = e ? e->color : volume::Rgba8{200, 200, 200, 128};
      table_[std::size_t(volume::organ_index(organ))] = {c.r / 255.0f, c.g / 255.0f, c.b / 255.0f, c.a / 255.0f};
    }
  }

  RgbaF operator()(std::uint16_t raw, std::uint8_t intensity) const {
    if (raw == 0) return {};
    RgbaF c = table_[std::size_t(volume::organ_index(volume::organ_of(raw)))];
    c.a *= float(intensity) / 255.0f;
    return c;
  }

 private:
  std::array<RgbaF, 256> table_{};
};

struct Interval {
  double t_enter = 0.0;
  double t_exit = 0.0;
  OrganId label;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Turns sorted crossings of one closed mesh into inside spans with t >= 0.
inline void spans_from_hits(std::span<const mesh::RayHit> hits, OrganId label, std::vector<Interval>& out) {
  int depth = 0;
  for (const auto& h : hits) depth += h.entering ? -1 : 1;  // net exits: how deep the origin sits
  double open_at = 0.0;
  for (const auto& h : hits) {
    if (h.entering) {
      if (depth++ == 0) open_at = h.t;
    } else if (--depth == 0) {
      out.push_back({open_at, h.t, label});
    }
  }
}

/// Inside spans of every selected organ's mesh along a model-space ray, sorted
/// by entry; overlaps between organs are kept, ties broken by (L1, L2).
inline std::vector<Interval> ray_intervals_for_selection(const RenderAssets& assets, const SelectionSet& selection,
                                                         const Vec3& origin, const Vec3& dir, bool display = false) {
  std::vector<Interval> out;
  for (OrganId organ : selection) {
    const OrganGeometry* g = display ? assets.surface(organ) : assets.proxy(organ);
    if (!g || g->mesh.empty()) continue;
    const auto hits = mesh::ray_mesh_intersections(g->bvh, origin, dir);
    spans_from_hits(hits, organ, out);
  }
  std::stable_sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) {
    if (a.t_enter != b.t_enter) return a.t_enter < b.t_enter;
    if (a.label != b.label) return a.label < b.label;
    return a.t_exit < b.t_exit;
  });
  return out;
}

struct SampleStats {
  std::uint64_t rays = 0;
  std::uint64_t marched = 0;       // lattice points visited
  std::uint64_t contributing = 0;  // samples composited with nonzero opacity
  SampleStats& operator+=(const SampleStats& o) {
    rays += o.rays;
    marched += o.marched;
    contributing += o.contributing;
    return *this;
  }
};

/// Called with the world position of every sample that is composited.
using SampleVisitor = std::function<void(const Vec3&)>;

/// Everything composite_ray needs besides the spans.
struct MarchContext {
  const LabeledVolume* volume = nullptr;
  const TransferFunction* transfer = nullptr;
  const ModelTransform* model = nullptr;
  ClipPlane clip;
  Vec3 clip_normal;  // oriented toward the camera
  RenderSettings settings;
  const SampleVisitor* visitor = nullptr;
};

inline MarchContext make_context(const LabeledVolume& vol, const TransferFunction& tf, const SceneState& scene) {
  MarchContext ctx;
  ctx.volume = &vol;
  ctx.transfer = &tf;
  ctx.model = &scene.model;
  ctx.clip = scene.clip;
  ctx.clip_normal = scene.clip.oriented_normal(scene.camera.position);
  ctx.settings = scene.settings;
  return ctx;
}

/// Front-to-back compositing at the lattice points t_k = k * dt that fall in
/// the union of `intervals` (dt = step_size in model space). Samples use the
/// nearest voxel; samples on the camera side of an enabled clip plane are
/// skipped. Returns the color blended over the background.
inline RgbaF composite_ray(const MarchContext& ctx, const Ray& ray, std::span<const Interval> intervals,
                           SampleStats* stats = nullptr) {
  const auto& vol = *ctx.volume;
  const auto& d = vol.dims();
  const Vec3 sp = vol.spacing().vec();
  const Vec3 om = ctx.model->to_model(ray.origin);
  const Vec3 dm = ctx.model->dir_to_model(ray.dir);
  const double dt = ctx.settings.step_size * ctx.model->scale;
  const auto& labels = vol.label_data();
  const auto& intensity = vol.intensity_data();

  double r = 0, g = 0, b = 0, a = 0;
  std::int64_t next_k = 0;
  int steps = 0;
  std::uint64_t marched = 0, contributing = 0;
  bool done = false;
  for (const auto& iv : intervals) {
    if (done) break;
    if (iv.t_exit < 0.0) continue;
    std::int64_t k = std::max<std::int64_t>(next_k, std::int64_t(std::ceil(std::max(iv.t_enter, 0.0) / dt)));
    for (; double(k) * dt <= iv.t_exit; ++k) {
      if (steps++ >= ctx.settings.max_steps) {
        done = true;
        break;
      }
      ++marched;
      const double t = double(k) * dt;
      const Vec3 pm = om + dm * t;
      const long ix = std::lround(pm.x / sp.x), iy = std::lround(pm.y / sp.y), iz = std::lround(pm.z / sp.z);
      if (ix < 0 || iy < 0 || iz < 0 || ix >= d.nx || iy >= d.ny || iz >= d.nz) continue;
      const std::size_t idx = (std::size_t(iz) * std::size_t(d.ny) + std::size_t(iy)) * std::size_t(d.nx) + std::size_t(ix);
      const RgbaF c = (*ctx.transfer)(labels[idx], intensity[idx]);
      if (c.a <= 0.0f) continue;
      const Vec3 pw = ray.origin + ray.dir * t;
      if (ctx.clip.enabled && dot(pw - ctx.clip.point, ctx.clip_normal) > 0.0) continue;
      if (ctx.visitor) (*ctx.visitor)(pw);
      ++contributing;
      const double w = (1.0 - a) * c.a;
      r += w * c.r;
      g += w * c.g;
      b += w * c.b;
      a += w;
      if (a >= ctx.settings.early_termination_alpha) {
        done = true;
        ++k;
        break;
      }
    }
    next_k = std::max(next_k, k);
  }
  if (stats) {
    stats->marched += marched;
    stats->contributing += contributing;
    stats->rays += 1;
  }
  const auto& bg = ctx.settings.background;
  const double rest = 1.0 - a;
  return {float(r + rest * bg.r * bg.a), float(g + rest * bg.g * bg.a), float(b + rest * bg.b * bg.a),
          float(a + rest * bg.a)};
}

/// The single span covering the volume's bounds along a ray (for naive marching).
inline std::vector<Interval> volume_span(const LabeledVolume& vol, const ModelTransform& model, const Ray& ray) {
  const Vec3 om = model.to_model(ray.origin), dm = model.dir_to_model(ray.dir);
  double t0, t1;
  if (!vol.bounds().intersect(om, {1.0 / dm.x, 1.0 / dm.y, 1.0 / dm.z}, t0, t1) || t1 < 0.0) return {};
  return {{std::max(t0, 0.0), t1, {}}};
}

enum class MarchStrategy { kIntervals, kNaive };

/// Renders a w x h image whose pixel (x, y) casts the ray through the full-
/// image position pixel_pos(x, y). Rows run in parallel; output and counts
/// do not depend on thread scheduling.
template <class PixelPos>
FloatImage render_mapped(const RenderAssets& assets, const SceneState& scene, Eye eye, int w, int h,
                         PixelPos&& pixel_pos, MarchStrategy strategy = MarchStrategy::kIntervals,
                         SampleStats* stats = nullptr, const SampleVisitor* visitor = nullptr) {
  scene.validate();
  FloatImage img(w, h);
  const TransferFunction tf(assets.hierarchy(), scene.selection);
  MarchContext ctx = make_context(assets.volume(), tf, scene);
  ctx.visitor = visitor;
  std::vector<SampleStats> row_stats(static_cast<std::size_t>(h));
  parallel_for(std::size_t(h), [&](std::size_t y) {
    for (int x = 0; x < w; ++x) {
      const auto [px, py] = pixel_pos(x, int(y));
      const Ray ray = scene.camera.ray(eye, px, py);
      std::vector<Interval> spans;
      if (strategy == MarchStrategy::kNaive) {
        spans = volume_span(assets.volume(), scene.model, ray);
      } else {
        spans = ray_intervals_for_selection(assets, scene.selection, scene.model.to_model(ray.origin),
                                            scene.model.dir_to_model(ray.dir));
      }
      img.at(x, int(y)) = composite_ray(ctx, ray, spans, &row_stats[y]);
    }
  }, visitor ? 1u : 0u);
  if (stats)
    for (const auto& s : row_stats) *stats += s;
  return img;
}

/// Full-resolution frame for one eye.
inline FloatImage render_frame(const RenderAssets& assets, const SceneState& scene, Eye eye,
                               MarchStrategy strategy = MarchStrategy::kIntervals, SampleStats* stats = nullptr,
                               const SampleVisitor* visitor = nullptr) {
  return render_mapped(
      assets, scene, eye, scene.camera.width, scene.camera.height,
      [](int x, int y) { return std::pair{x + 0.5, y + 0.5}; }, strategy, stats, visitor);
}

struct PickResult {
  OrganId organ;
  std::string name;
  friend bool operator==(const PickResult&, const PickResult&) = default;
};

/// First selected organ whose display-mesh span along the world ray is not
/// entirely on the clipped side of the plane.
inline std::optional<PickResult> pick_organ(const RenderAssets& assets, const SceneState& scene, const Ray& ray) {
  const auto spans = ray_intervals_for_selection(assets, scene.selection, scene.model.to_model(ray.origin),
                                                 scene.model.dir_to_model(ray.dir), true);
  double lo = 0.0, hi = INFINITY;
  if (scene.clip.enabled) {
    const Vec3 n = scene.clip.oriented_normal(scene.camera.position);
    const double a0 = dot(ray.origin - scene.clip.point, n), slope = dot(ray.dir, n);
    if (slope == 0.0) {
      if (a0 > 0.0) return std::nullopt;
    } else if (slope > 0.0) {
      hi = -a0 / slope;
    } else {
      lo = -a0 / slope;
    }
  }
  for (const auto& s : spans) {
    if (std::max(s.t_enter, lo) <= std::min(s.t_exit, hi)) {
      const auto* e = assets.hierarchy().find(s.label);
      return PickResult{s.label, e ? e->name : s.label.str()};
    }
  }
  return std::nullopt;
}

struct BioscopeResult {
  SceneState state;
  bool applied = false;  // false: target mesh empty, scene unchanged
};

/// Brings `target` to 1.5x its (scaled) bounding-box diagonal in front of the
/// camera, doubles the model scale, and shows only the target. The scene as it
/// was before entering is kept for exit_bioscope.
inline BioscopeResult bioscope_transform(const RenderAssets& assets, const SceneState& scene, OrganId target) {
  if (!scene.selection.contains(target))
    throw Error(ErrorKind::kPrecondition, "bioscope target " + target.str() + " is not selected");
  const OrganGeometry* g = assets.surface(target);
  if (!g || g->mesh.empty()) return {scene, false};
  const SceneState& base = scene.mode == Mode::kBioscope && scene.before_bioscope ? *scene.before_bioscope : scene;
  SceneState out = scene;
  out.before_bioscope = scene.mode == Mode::kBioscope && scene.before_bioscope
                            ? scene.before_bioscope
                            : std::make_shared<const SceneState>(scene);
  const Aabb box = mesh::mesh_bounds(g->mesh);
  out.model.rotation = base.model.rotation;
  out.model.scale = base.model.scale * 2.0;
  const double distance = 1.5 * box.diagonal() * out.model.scale;
  const Vec3 anchor = out.camera.position + out.camera.f() * distance;
  out.model.translation = anchor - out.model.rotation * box.center() * out.model.scale;
  out.mode = Mode::kBioscope;
  out.bioscope_target = target;
  out.selection = {target};
  return {out, true};
}

inline SceneState exit_bioscope(const SceneState& scene) {
  if (scene.mode != Mode::kBioscope || !scene.before_bioscope) return scene;
  return *scene.before_bioscope;
}

/// A scene looking down +z at the whole volume with everything selected.
inline SceneState default_scene(const RenderAssets& assets, int width = 64, int height = 64) {
  SceneState s;
  const Aabb box = assets.volume().bounds();
  s.camera.width = width;
  s.camera.height = height;
  s.camera.forward = {0, 0, 1};
  s.camera.up = {0, -1, 0};
  const double fit = 0.5 * box.diagonal() / std::tan(0.5 * s.camera.vertical_fov);
  s.camera.position = box.center() - Vec3{0, 0, fit + 0.5 * box.extent().z};
  s.camera.ipd = 0.05 * box.diagonal();
  s.gaze_x = width / 2.0;
  s.gaze_y = height / 2.0;
  s.settings.step_size = 0.5 * assets.volume().spacing().min();
  for (const auto& e : assets.hierarchy().entries())
    if (assets.proxy(e.organ)) s.selection.insert(e.organ);
  return s;
}

}  // namespace holoview::render
