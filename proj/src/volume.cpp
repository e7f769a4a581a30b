#include "portiontrack/volume.hpp"

#include <limits>
#include <map>

namespace ptrack {

namespace detail {

std::vector<Index3> neighbor_offsets(int connectivity) {
  if (connectivity != 6 && connectivity != 18 && connectivity != 26)
    throw ValidationError("connectivity must be 6, 18 or 26");
  std::vector<Index3> out;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nonzero = (dx != 0) + (dy != 0) + (dz != 0);
        if (nonzero == 0) continue;
        if (connectivity == 6 && nonzero > 1) continue;
        if (connectivity == 18 && nonzero > 2) continue;
        out.emplace_back(dx, dy, dz);
      }
  return out;
}

}  // namespace detail

std::uint32_t max_label(const LabelVolume& labels) {
  return labels.data().size() == 0 ? 0u : labels.data().maxCoeff();
}

std::vector<std::vector<std::size_t>> object_voxels(const LabelVolume& labels) {
  std::vector<std::vector<std::size_t>> out(std::size_t(max_label(labels)) + 1);
  const std::size_t n = labels.dims().voxels();
  for (std::size_t v = 0; v < n; ++v)
    if (const auto l = labels[v]; l != 0) out[l].push_back(v);
  return out;
}

std::vector<ObjectRecord> extract_objects(const LabelVolume& labels) {
  const Dims& dims = labels.dims();
  std::map<std::uint32_t, ObjectRecord> acc;
  std::map<std::uint32_t, Eigen::Vector3d> sums;
  const std::size_t n = dims.voxels();
  for (std::size_t v = 0; v < n; ++v) {
    const auto l = labels[v];
    if (l == 0) continue;
    const Index3 p = dims.coord(v);
    auto [it, fresh] = acc.try_emplace(l);
    ObjectRecord& rec = it->second;
    if (fresh) {
      rec.id = l;
      rec.frame = labels.frame();
      rec.bbox_min = p;
      rec.bbox_max = p;
      sums[l] = Eigen::Vector3d::Zero();
    }
    rec.voxel_count += 1;
    rec.bbox_min = rec.bbox_min.cwiseMin(p);
    rec.bbox_max = rec.bbox_max.cwiseMax(p);
    sums[l] += p.cast<double>();
  }
  std::vector<ObjectRecord> out;
  out.reserve(acc.size());
  for (auto& [l, rec] : acc) {
    rec.centroid = sums[l] / double(rec.voxel_count);
    out.push_back(rec);
  }
  return out;
}

}  // namespace ptrack
