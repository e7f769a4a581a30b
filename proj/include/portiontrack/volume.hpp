#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>
#include <algorithm>

#include <Eigen/Core>

#include "portiontrack/error.hpp"

namespace ptrack {

using Index3 = Eigen::Vector3i;

/// Grid extents. Voxel (x,y,z) of channel m lives at
///   x + X*(y + Y*(z + Z*m))
/// i.e. x fastest, channel slowest. Every module and the V4D payload share
/// this layout.
struct Dims {
  int x = 1;
  int y = 1;
  int z = 1;
  int d = 1;
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::size_t voxels() const { return std::size_t(x) * y * z; }
  std::size_t size() const { return voxels() * d; }
  bool valid() const { return x >= 1 && y >= 1 && z >= 1 && d >= 1; }

  bool contains(int px, int py, int pz) const {
    return px >= 0 && py >= 0 && pz >= 0 && px < x && py < y && pz < z;
  }
  bool contains(const Index3& p) const { return contains(p.x(), p.y(), p.z()); }

  std::size_t index(int px, int py, int pz, int m = 0) const {
    return std::size_t(px) + std::size_t(x) * (std::size_t(py) + std::size_t(y) * (std::size_t(pz) + std::size_t(z) * m));
  }

  Index3 coord(std::size_t voxel) const {
    const int px = int(voxel % x);
    const int py = int((voxel / x) % y);
    const int pz = int(voxel / (std::size_t(x) * y));
    return {px, py, pz};
  }

  /// Same grid, spacing ignored.
  bool same_grid(const Dims& o) const { return x == o.x && y == o.y && z == o.z; }
};

/// Dense volume with `d` channels stored in one Eigen column array.
template <typename Scalar>
class Volume {
public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Volume() = default;
  explicit Volume(const Dims& dims, int frame = 0)
      : dims_(dims), frame_(frame), data_(Storage::Zero(Eigen::Index(dims.size()))) {
    if (!dims.valid()) throw ValidationError("volume dims must all be >= 1");
  }
  Volume(const Dims& dims, Storage data, int frame = 0)
      : dims_(dims), frame_(frame), data_(std::move(data)) {
    if (!dims.valid()) throw ValidationError("volume dims must all be >= 1");
    if (std::size_t(data_.size()) != dims.size())
      throw ValidationError("volume payload size does not match dims");
  }

  const Dims& dims() const { return dims_; }
  int frame() const { return frame_; }
  void set_frame(int t) { frame_ = t; }
  int channels() const { return dims_.d; }

  const Storage& data() const { return data_; }
  Storage& data() { return data_; }

  Scalar operator()(int x, int y, int z, int m = 0) const { return data_[Eigen::Index(dims_.index(x, y, z, m))]; }
  Scalar& operator()(int x, int y, int z, int m = 0) { return data_[Eigen::Index(dims_.index(x, y, z, m))]; }

  Scalar operator[](std::size_t i) const { return data_[Eigen::Index(i)]; }
  Scalar& operator[](std::size_t i) { return data_[Eigen::Index(i)]; }

  /// Edge-replicated read: out-of-range coordinates clamp to the border.
  Scalar clamped(int x, int y, int z, int m = 0) const {
    x = std::clamp(x, 0, dims_.x - 1);
    y = std::clamp(y, 0, dims_.y - 1);
    z = std::clamp(z, 0, dims_.z - 1);
    return (*this)(x, y, z, m);
  }

  /// Channel m as a contiguous segment.
  auto channel(int m) const { return data_.segment(Eigen::Index(dims_.voxels() * m), Eigen::Index(dims_.voxels())); }
  auto channel(int m) { return data_.segment(Eigen::Index(dims_.voxels() * m), Eigen::Index(dims_.voxels())); }

private:
  Dims dims_;
  int frame_ = 0;
  Storage data_;
};

using LabelVolume = Volume<std::uint32_t>;
using IntensityVolume = Volume<float>;
using FeatureVolume = Volume<float>;

struct ObjectRecord {
  std::uint32_t id = 0;
  int frame = 0;
  std::int64_t voxel_count = 0;
  Index3 bbox_min = Index3::Zero();
  Index3 bbox_max = Index3::Zero();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
};

namespace detail {
std::vector<Index3> neighbor_offsets(int connectivity);
}

/// Labels foreground (nonzero) voxels by connectivity 6, 18 or 26.
/// Labels are 1..K in raster-scan order of each component's first voxel.
template <typename Scalar>
LabelVolume connected_components(const Volume<Scalar>& mask, int connectivity = 26) {
  const auto offsets = detail::neighbor_offsets(connectivity);
  const Dims& dims = mask.dims();
  Dims out_dims = dims;
  out_dims.d = 1;
  LabelVolume out(out_dims, mask.frame());
  std::uint32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t v = 0; v < dims.voxels(); ++v) {
    if (mask[v] == Scalar(0) || out[v] != 0) continue;
    ++next;
    out[v] = next;
    stack.assign(1, v);
    while (!stack.empty()) {
      const Index3 p = dims.coord(stack.back());
      stack.pop_back();
      for (const Index3& o : offsets) {
        const Index3 q = p + o;
        if (!dims.contains(q)) continue;
        const std::size_t w = dims.index(q.x(), q.y(), q.z());
        if (mask[w] == Scalar(0) || out[w] != 0) continue;
        out[w] = next;
        stack.push_back(w);
      }
    }
  }
  return out;
}

/// One record per distinct nonzero label, sorted by id.
std::vector<ObjectRecord> extract_objects(const LabelVolume& labels);

/// Linear voxel indices of each label, keyed by label (index 0 unused).
std::vector<std::vector<std::size_t>> object_voxels(const LabelVolume& labels);

std::uint32_t max_label(const LabelVolume& labels);

}  // namespace ptrack
