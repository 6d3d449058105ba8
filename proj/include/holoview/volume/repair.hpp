#pragma once

#include <cstdlib>
#include <set>
#include <string>
#include <vector>

#include "holoview/core/error.hpp"
#include "holoview/volume/labeled_volume.hpp"

namespace holoview::volume {

/// Replaces each slice in `unlabeled_slices` with the labels of the nearest
/// labeled slice. Equidistant candidates resolve to the lower z.
inline LabeledVolume repair_labels(const LabeledVolume& volume, const std::set<int>& unlabeled_slices) {
  const int nz = volume.dims().nz;
  for (int z : unlabeled_slices)
    if (z < 0 || z >= nz) throw Error(ErrorKind::kRange, "unlabeled slice " + std::to_string(z) + " outside volume");
  if (static_cast<int>(unlabeled_slices.size()) >= nz)
    throw Error(ErrorKind::kUnrepairable, "every slice is unlabeled");

  std::vector<int> labeled;
  for (int z = 0; z < nz; ++z)
    if (!unlabeled_slices.contains(z)) labeled.push_back(z);

  LabeledVolume out = volume;
  for (int z : unlabeled_slices) {
    int best = labeled.front();
    for (int candidate : labeled)
      if (std::abs(candidate - z) < std::abs(best - z)) best = candidate;
    out.copy_label_slice(best, z);
  }
  return out;
}

}  // namespace holoview::volume
