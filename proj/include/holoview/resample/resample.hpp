#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/core/parallel.hpp"
#include "holoview/resample/distance_transform.hpp"
#include "holoview/resample/homotopy.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::resample {

using LabelSlice = std::vector<std::uint16_t>;

/// Dense label grid from label slices known every `stride` slices.
///
/// Each distinct nonzero code is treated as its own label with one homotopy
/// per slab; a voxel takes the label whose interpolated distance is most
/// negative, or background if none is negative. The final slab reuses
/// phi_{i+1} for the missing phi_{i+2}. Output slices past the last known
/// slice repeat it.
inline std::vector<std::uint16_t> resample_slices(std::span<const LabelSlice> sparse, int nx, int ny, int stride,
                                                  int out_nz, double pixel_size = 1.0) {
  if (sparse.size() < 3) throw Error(ErrorKind::kInsufficientData, "homotopy resampling needs at least 3 slices");
  if (stride < 1) throw Error(ErrorKind::kRange, "stride must be >= 1");
  if (nx <= 0 || ny <= 0 || out_nz <= 0) throw Error(ErrorKind::kDimension, "output dims must be positive");
  const std::size_t plane = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  for (const auto& s : sparse)
    if (s.size() != plane) throw Error(ErrorKind::kDimension, "sparse slices differ in dims");

  const int m = static_cast<int>(sparse.size());
  std::vector<std::set<std::uint16_t>> present(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j)
    for (std::uint16_t raw : sparse[static_cast<std::size_t>(j)])
      if (raw) present[static_cast<std::size_t>(j)].insert(raw);

  // Distance fields per (slice, label); missing entries mean "label absent", i.e. +large.
  std::vector<std::map<std::uint16_t, SignedDistanceSlice>> fields(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
    std::vector<std::uint8_t> mask(plane);
    for (std::uint16_t code : present[j]) {
      for (std::size_t i = 0; i < plane; ++i) mask[i] = sparse[j][i] == code ? 1 : 0;
      fields[j].emplace(code, signed_distance_2d(mask, nx, ny, pixel_size, volume::organ_of(code), int(j)));
    }
  });
  const double large = SignedDistanceSlice::large_value(nx, ny, pixel_size);

  std::vector<std::uint16_t> dense(plane * static_cast<std::size_t>(out_nz), 0);
  parallel_for(static_cast<std::size_t>(out_nz), [&](std::size_t zu) {
    const int z = static_cast<int>(zu);
    auto* out = dense.data() + plane * zu;
    const int j = z / stride;
    if (j > m - 1 || (j == m - 1 && z % stride != 0)) {
      std::copy(sparse.back().begin(), sparse.back().end(), out);
      return;
    }
    const double lambda = double(z - j * stride) / double(stride);
    const auto w = hermite_weights(lambda);
    const std::size_t j0 = static_cast<std::size_t>(j);
    const std::size_t j1 = static_cast<std::size_t>(std::min(j + 1, m - 1));
    const std::size_t j2 = static_cast<std::size_t>(std::min(j + 2, m - 1));
    // A label absent from both bounding slices cannot reach a negative value.
    std::set<std::uint16_t> labels = present[j0];
    labels.insert(present[j1].begin(), present[j1].end());

    struct Terms {
      std::uint16_t code;
      const SignedDistanceSlice* phi[3];
    };
    std::vector<Terms> terms;
    for (std::uint16_t code : labels) {
      Terms t{code, {nullptr, nullptr, nullptr}};
      const std::size_t idx[3] = {j0, j1, j2};
      for (int k = 0; k < 3; ++k) {
        auto it = fields[idx[k]].find(code);
        t.phi[k] = it == fields[idx[k]].end() ? nullptr : &it->second;
      }
      terms.push_back(t);
    }
    for (std::size_t p = 0; p < plane; ++p) {
      double best = 0.0;
      std::uint16_t best_code = 0;
      for (const auto& t : terms) {
        const double h = w[0] * (t.phi[0] ? t.phi[0]->grid[p] : large) + w[1] * (t.phi[1] ? t.phi[1]->grid[p] : large) +
                         w[2] * (t.phi[2] ? t.phi[2]->grid[p] : large);
        if (h < best) {
          best = h;
          best_code = t.code;
        }
      }
      out[p] = best_code;
    }
  });
  return dense;
}

/// Volume form: slices with z % stride == 0 carry the known labels; all other
/// label slices are replaced. Intensity passes through unchanged.
inline volume::LabeledVolume resample_segmentation(const volume::LabeledVolume& sparse, int stride) {
  const auto& d = sparse.dims();
  if (stride < 1) throw Error(ErrorKind::kRange, "stride must be >= 1");
  if (stride == 1) return sparse;
  const std::size_t plane = d.slice_count();
  std::vector<LabelSlice> slices;
  for (int z = 0; z < d.nz; z += stride) {
    const auto begin = sparse.label_data().begin() + static_cast<std::ptrdiff_t>(plane * static_cast<std::size_t>(z));
    slices.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(plane));
  }
  const double pixel = std::sqrt(sparse.spacing().sx * sparse.spacing().sy);
  auto labels = resample_slices(slices, d.nx, d.ny, stride, d.nz, pixel);
  return volume::LabeledVolume(d, sparse.spacing(), sparse.intensity_data(), std::move(labels));
}

/// 2|A n B| / (|A| + |B|) for one label code; 1 when the label is absent from both.
inline double dice(std::span<const std::uint16_t> a, std::span<const std::uint16_t> b, std::uint16_t code) {
  if (a.size() != b.size()) throw Error(ErrorKind::kDimension, "dice inputs differ in size");
  std::size_t both = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a[i] == code, in_b = b[i] == code;
    na += in_a;
    nb += in_b;
    both += in_a && in_b;
  }
  return na + nb == 0 ? 1.0 : 2.0 * double(both) / double(na + nb);
}

}  // namespace holoview::resample
