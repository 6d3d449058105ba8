#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "holoview/mesh/decimate.hpp"
#include "holoview/mesh/marching_cubes.hpp"
#include "holoview/mesh/mesh_io.hpp"
#include "holoview/mesh/taubin.hpp"
#include "holoview/render/renderer.hpp"
#include "holoview/resample/resample.hpp"
#include "holoview/volume/hierarchy.hpp"
#include "holoview/volume/repair.hpp"
#include "holoview/volume/volume_io.hpp"
#include "json.hpp"

namespace holoview::pipeline {

using volume::LabeledVolume;
using volume::OrganId;
using volume::SegmentationHierarchy;

/// A failure inside one named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), stage + " stage failed: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PreprocessOptions {
  int stride = 1;                            // known label slices at z % stride == 0
  int downsample = 1;                        // applied after repair
  std::set<int> gaps;                        // unlabeled slice indices, input numbering
  std::optional<std::set<OrganId>> targets;  // organs to mesh; all present when unset
  mesh::TaubinParams taubin{};
  std::size_t max_triangles = 20000;  // per organ
};

struct MeshStats {
  OrganId organ;
  std::size_t vertices = 0, triangles = 0, extracted_triangles = 0, components = 0;
  int euler_characteristic = 0;
  bool closed_manifold = false;
  double volume_mm3 = 0.0;
};

struct PreprocessReport {
  int stride = 1;
  int downsample = 1;
  std::set<int> gaps;
  std::map<OrganId, double> dice_known_slices;
  std::vector<MeshStats> meshes;

  nlohmann::json to_json() const {
    nlohmann::json dice = nlohmann::json::object(), meshes_json = nlohmann::json::array();
    for (const auto& [o, d] : dice_known_slices) dice[o.str()] = d;
    for (const auto& m : meshes)
      meshes_json.push_back({{"organ", m.organ.str()},
                             {"vertices", m.vertices},
                             {"triangles", m.triangles},
                             {"extracted_triangles", m.extracted_triangles},
                             {"components", m.components},
                             {"euler_characteristic", m.euler_characteristic},
                             {"closed_manifold", m.closed_manifold},
                             {"volume_mm3", m.volume_mm3}});
    return {{"stride", stride},
            {"downsample", downsample},
            {"gaps", gaps},
            {"dice_known_slices", dice},
            {"meshes", meshes_json}};
  }
};

struct PreprocessResult {
  LabeledVolume volume;
  std::map<OrganId, mesh::SurfaceMesh> meshes;
  PreprocessReport report;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

/// Dice of one organ's indicator over the slices z % stride == 0.
inline double organ_dice_on_known(const LabeledVolume& a, const LabeledVolume& b, OrganId organ, int stride) {
  const auto& d = a.dims();
  const std::size_t plane = d.slice_count();
  std::size_t both = 0, na = 0, nb = 0;
  for (int z = 0; z < d.nz; z += stride)
    for (std::size_t i = plane * std::size_t(z), end = i + plane; i < end; ++i) {
      const bool ia = volume::organ_of(a.label_data()[i]) == organ && a.label_data()[i] != 0;
      const bool ib = volume::organ_of(b.label_data()[i]) == organ && b.label_data()[i] != 0;
      na += ia;
      nb += ib;
      both += ia && ib;
    }
  return na + nb == 0 ? 1.0 : 2.0 * double(both) / double(na + nb);
}

}  // namespace detail

/// repair -> downsample -> resample -> per-organ extract, smooth, decimate.
inline PreprocessResult preprocess(const LabeledVolume& input, const PreprocessOptions& opt) {
  if (opt.stride < 1) throw Error(ErrorKind::kRange, "stride must be >= 1");
  if (opt.downsample < 1) throw Error(ErrorKind::kRange, "downsample must be >= 1");
  PreprocessResult out;
  out.report.stride = opt.stride;
  out.report.downsample = opt.downsample;
  out.report.gaps = opt.gaps;

  const LabeledVolume repaired =
      opt.gaps.empty() ? input : detail::stage("repair", [&] { return volume::repair_labels(input, opt.gaps); });
  const LabeledVolume coarse = detail::stage("downsample", [&] { return volume::downsample(repaired, opt.downsample); });
  out.volume = detail::stage("resample", [&] { return resample::resample_segmentation(coarse, opt.stride); });

  const auto present = render::organs_present(coarse);
  for (OrganId o : present) out.report.dice_known_slices[o] = detail::organ_dice_on_known(coarse, out.volume, o, opt.stride);

  std::set<OrganId> targets = opt.targets ? *opt.targets : render::organs_present(out.volume);
  for (OrganId o : targets) {
    auto m = detail::stage("mesh", [&] {
      auto extracted = mesh::extract_mesh(out.volume, o);
      const std::size_t raw = extracted.triangles.size();
      if (extracted.empty()) return std::pair{std::move(extracted), raw};
      auto smooth = mesh::taubin_smooth(extracted, opt.taubin);
      auto reduced = smooth.triangles.size() > opt.max_triangles ? mesh::decimate_mesh(smooth, opt.max_triangles) : smooth;
      return std::pair{std::move(reduced), raw};
    });
    if (m.first.empty()) continue;
    const auto r = mesh::inspect(m.first);
    out.report.meshes.push_back({o, r.vertex_count, m.first.triangles.size(), m.second, mesh::count_components(m.first),
                                 r.euler_characteristic, r.closed_manifold && r.consistently_oriented, r.signed_volume});
    out.meshes.emplace(o, std::move(m.first));
  }
  return out;
}

// Asset directory: volume.{manifest,intensity.raw,labels.raw,hierarchy},
// meshes/organ_<L1>_<L2>.msh, report.json.

inline std::filesystem::path asset_volume_base(const std::filesystem::path& dir) { return dir / "volume"; }

inline void write_assets(const std::filesystem::path& dir, const PreprocessResult& result,
                         const SegmentationHierarchy& hierarchy) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "meshes", ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + (dir / "meshes").string() + ": " + ec.message());
  const std::string base = asset_volume_base(dir).string();
  volume::save_volume(result.volume, base);
  hierarchy.save(volume::container_paths(base).hierarchy);
  for (const auto& [organ, m] : result.meshes) mesh::save_mesh(m, dir / "meshes" / mesh::mesh_filename(organ));
  std::ofstream report(dir / "report.json");
  report << result.report.to_json().dump(2) << '\n';
  if (!report) throw Error(ErrorKind::kIo, "cannot write report.json");
}

/// Hierarchy next to a volume container, or generic names for every organ present.
inline SegmentationHierarchy load_hierarchy_for(const std::string& base, const LabeledVolume& vol) {
  const auto path = volume::container_paths(base).hierarchy;
  if (std::filesystem::exists(path)) return SegmentationHierarchy::load(path);
  std::vector<volume::HierarchyEntry> entries;
  for (OrganId o : render::organs_present(vol))
    entries.push_back({o, "organ " + o.str(), {200, 200, 200, 96}});
  return SegmentationHierarchy(std::move(entries));
}

/// Loads either an asset directory written by write_assets or a bare volume container.
inline std::shared_ptr<const render::RenderAssets> load_assets(const std::filesystem::path& path) {
  const bool is_dir = std::filesystem::is_directory(path);
  const std::string base = is_dir ? asset_volume_base(path).string() : path.string();
  auto vol = volume::load_volume(base);
  auto hierarchy = load_hierarchy_for(base, vol);
  std::map<OrganId, mesh::SurfaceMesh> surfaces;
  if (is_dir && std::filesystem::is_directory(path / "meshes"))
    for (OrganId o : render::organs_present(vol)) {
      const auto file = path / "meshes" / mesh::mesh_filename(o);
      if (std::filesystem::exists(file)) surfaces[o] = mesh::load_mesh(file, o);
    }
  return render::RenderAssets::build(std::move(vol), std::move(hierarchy), std::move(surfaces));
}

}  // namespace holoview::pipeline
