#include <doctest.h>

#include "portiontrack/volume.hpp"

using namespace ptrack;

namespace {

LabelVolume mask_of(const Dims& dims, std::initializer_list<Index3> on) {
  LabelVolume m(dims);
  for (const Index3& p : on) m(p.x(), p.y(), p.z()) = 1;
  return m;
}

}  // namespace

TEST_CASE("dims index and coord are inverse, x fastest, channel slowest") {
  Dims d{4, 3, 2, 2};
  CHECK(d.index(1, 0, 0) == 1);
  CHECK(d.index(0, 1, 0) == 4);
  CHECK(d.index(0, 0, 1) == 12);
  CHECK(d.index(0, 0, 0, 1) == 24);
  for (std::size_t v = 0; v < d.voxels(); ++v) {
    const Index3 p = d.coord(v);
    CHECK(d.index(p.x(), p.y(), p.z()) == v);
  }
}

TEST_CASE("volume rejects bad dims and payloads") {
  CHECK_THROWS_AS(LabelVolume(Dims{0, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(FeatureVolume(Dims{2, 2, 2, 1}, FeatureVolume::Storage::Zero(7)), ValidationError);
}

TEST_CASE("clamped reads replicate the border") {
  FeatureVolume v(Dims{3, 1, 1, 1});
  v(0, 0, 0) = 1.f;
  v(2, 0, 0) = 5.f;
  CHECK(v.clamped(-4, 0, 0) == 1.f);
  CHECK(v.clamped(9, 3, -1) == 5.f);
}

TEST_CASE("diagonal neighbours join under 26 but not 6 connectivity") {
  const auto m = mask_of({4, 4, 2}, {{0, 0, 0}, {1, 1, 0}, {2, 2, 1}});
  CHECK(max_label(connected_components(m, 26)) == 1);
  CHECK(max_label(connected_components(m, 18)) == 2);
  CHECK(max_label(connected_components(m, 6)) == 3);
  CHECK_THROWS_AS(connected_components(m, 8), ValidationError);
}

TEST_CASE("components are numbered in raster order of their first voxel") {
  const auto m = mask_of({5, 3, 1}, {{4, 0, 0}, {0, 2, 0}, {1, 2, 0}, {2, 0, 0}});
  const auto cc = connected_components(m, 6);
  CHECK(cc(2, 0, 0) == 1);
  CHECK(cc(4, 0, 0) == 2);
  CHECK(cc(0, 2, 0) == 3);
  CHECK(cc(1, 2, 0) == 3);
}

TEST_CASE("extract_objects reports counts, bbox and centroid") {
  LabelVolume l(Dims{6, 6, 3});
  for (int x = 1; x <= 3; ++x)
    for (int y = 2; y <= 3; ++y) l(x, y, 1) = 7;
  l(5, 5, 2) = 2;
  const auto objs = extract_objects(l);
  REQUIRE(objs.size() == 2);
  CHECK(objs[0].id == 2);
  CHECK(objs[0].voxel_count == 1);
  CHECK(objs[1].id == 7);
  CHECK(objs[1].voxel_count == 6);
  CHECK(objs[1].bbox_min == Index3(1, 2, 1));
  CHECK(objs[1].bbox_max == Index3(3, 3, 1));
  CHECK(objs[1].centroid.isApprox(Eigen::Vector3d(2.0, 2.5, 1.0)));
  const auto vox = object_voxels(l);
  CHECK(vox.size() == 8);
  CHECK(vox[7].size() == 6);
  CHECK(std::is_sorted(vox[7].begin(), vox[7].end()));
}
