#include <doctest.h>

#include <cmath>
#include <random>

#include "portiontrack/portion.hpp"

using namespace ptrack;

namespace {

Portion window_of(std::vector<double> v) {
  Portion p;
  p.radius = Index3(int(v.size() - 1) / 2, 0, 0);
  p.values = Eigen::Map<Eigen::ArrayXd>(v.data(), Eigen::Index(v.size()));
  return p;
}

FeatureVolume random_features(const Dims& dims, std::uint64_t seed, int frame = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  FeatureVolume f(dims, frame);
  for (std::size_t i = 0; i < dims.size(); ++i) f[i] = u(rng);
  return f;
}

}  // namespace

TEST_CASE("pearson reference values") {
  CHECK(pearson(window_of({1, 2, 3, 4}), window_of({1, 3, 2, 4})) == doctest::Approx(0.8).epsilon(1e-14));
  const auto a = window_of({0.3, -1, 2, 7, 1.5});
  CHECK(pearson(a, a) == doctest::Approx(1.0));
  auto neg = a;
  neg.values = 4.0 - a.values;
  CHECK(pearson(a, neg) == doctest::Approx(-1.0));
  CHECK(pearson(window_of({2, 2, 2, 2, 2}), a) == 0.0);
  CHECK(pearson(a, window_of({2, 2, 2, 2, 2})) == 0.0);
  CHECK_THROWS_AS(pearson(a, window_of({1, 2, 3})), ValidationError);
}

TEST_CASE("pearson is symmetric and invariant under positive affine maps") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  Eigen::ArrayXd a(50), b(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = n(rng);
    b[i] = 0.5 * a[i] + n(rng);
  }
  CHECK(pearson(a, b) == doctest::Approx(pearson(b, a)).epsilon(1e-15));
  CHECK(pearson(3.5 * a + 11.0, b) == doctest::Approx(pearson(a, b)).epsilon(1e-9));
}

TEST_CASE("portion centers: lattice, single voxel, centroid fallback") {
  PortionSpec spec;
  LabelVolume l(Dims{10, 10, 3});
  SUBCASE("single voxel") {
    l(4, 5, 1) = 1;
    const auto objs = extract_objects(l);
    const auto c = portion_centers(objs[0], l, spec);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == Index3(4, 5, 1));
  }
  SUBCASE("4x4x1 block with stride 2") {
    for (int x = 2; x < 6; ++x)
      for (int y = 3; y < 7; ++y) l(x, y, 0) = 1;
    spec.stride = {2, 2, 1};
    spec.radius = {1, 1, 0};
    const auto objs = extract_objects(l);
    const auto c = portion_centers(objs[0], l, spec);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == Index3(2, 3, 0));
    CHECK(c[1] == Index3(4, 3, 0));
    CHECK(c[2] == Index3(2, 5, 0));
    CHECK(c[3] == Index3(4, 5, 0));
  }
  SUBCASE("lattice misses the object") {
    // The stride-3 lattice anchored at (0,0,0) only hits background.
    l(0, 1, 0) = 1;
    l(1, 0, 0) = 1;
    spec.stride = {3, 3, 3};
    const auto objs = extract_objects(l);
    const auto c = portion_centers(objs[0], l, spec);
    REQUIRE(c.size() == 1);
    CHECK(l(c[0].x(), c[0].y(), c[0].z()) == 1);
  }
}

TEST_CASE("extracted windows replicate edges and follow canonical order") {
  FeatureVolume f(Dims{3, 3, 1, 2}, 1);
  for (std::size_t i = 0; i < f.dims().size(); ++i) f[i] = float(i);
  const Portion p = extract_portion(f, Index3(0, 0, 0), Index3(1, 1, 0));
  REQUIRE(p.values.size() == 18);
  CHECK(p.values[0] == f(0, 0, 0));
  CHECK(p.values[4] == f(0, 0, 0));
  CHECK(p.values[8] == f(1, 1, 0));
  CHECK(p.values[9] == f(0, 0, 0, 1));
}

TEST_CASE("SearchFrame windows and correlations agree with direct computation") {
  const Dims d{9, 8, 4, 3};
  const auto f = random_features(d, 11, 1);
  LabelVolume l(Dims{9, 8, 4}, 1);
  l.data().setOnes();
  const Index3 r(2, 1, 1);
  const SearchFrame sf(l, f, r);
  const auto q = extract_portion(random_features(d, 12, 2), Index3(4, 4, 2), r);
  const auto nq = sf.normalized_query(q);
  for (const Index3& c : {Index3(0, 0, 0), Index3(8, 7, 3), Index3(4, 3, 1)}) {
    const Portion direct = extract_portion(f, c, r);
    CHECK((sf.portion(c).values - direct.values).abs().maxCoeff() == 0.0);
    CHECK(sf.correlate(nq, c) == doctest::Approx(pearson(q, direct)).epsilon(1e-10));
  }
}

TEST_CASE("extended search examples") {
  const Dims d{12, 12, 3, 2};
  const auto f = random_features(d, 5, 1);
  LabelVolume l(Dims{12, 12, 3}, 1);
  for (int x = 2; x < 6; ++x)
    for (int y = 2; y < 6; ++y) l(x, y, 1) = 1;
  PortionSpec spec;
  spec.radius = {1, 1, 1};
  SUBCASE("self match with zero range") {
    spec.ext = {0, 0, 0};
    Portion q = extract_portion(f, Index3(3, 3, 1), spec.radius);
    q.frame = 2;
    const auto c = extended_search(q, l, f, spec);
    REQUIRE(c.size() == 1);
    CHECK(c[0].object_id == 1);
    CHECK(c[0].lag == 1);
    CHECK(c[0].rho == doctest::Approx(1.0));
  }
  SUBCASE("no foreground in the box") {
    spec.ext = {1, 1, 1};
    Portion q = extract_portion(f, Index3(10, 10, 1), spec.radius);
    q.frame = 2;
    CHECK(extended_search(q, l, f, spec).empty());
  }
  SUBCASE("exact copy beats a noise object") {
    // Object 2 carries a copy of the query window; object 1 keeps noise.
    auto g = f;
    for (int x = 8; x < 11; ++x)
      for (int y = 7; y < 10; ++y) l(x, y, 1) = 2;
    const auto q_src = random_features(d, 99, 2);
    const Portion q = extract_portion(q_src, Index3(9, 8, 1), spec.radius);
    for (int m = 0; m < 2; ++m)
      for (int z = 0; z < 3; ++z)
        for (int y = 7; y < 10; ++y)
          for (int x = 8; x < 11; ++x) g(x, y, z, m) = q_src(x, y, z, m);
    spec.ext = {8, 8, 2};
    const auto c = extended_search(q, l, g, spec);
    REQUIRE(c.size() == 2);
    CHECK(c[1].object_id == 2);
    CHECK(c[1].rho == doctest::Approx(1.0));
    CHECK(c[1].center == Index3(9, 8, 1));
    CHECK(c[0].rho < c[1].rho);
  }
}

TEST_CASE("best_match picks per-lag winners above gamma") {
  std::vector<CandidateMatch> c{{3, 1, 0.9, {}}, {7, 1, 0.6, {}}, {4, 2, 0.4, {}}};
  auto ms = best_match(c, 0.5);
  REQUIRE(ms.accepted.size() == 1);
  CHECK(ms.accepted[0] == AcceptedMatch{3, 1, 0.9});
  CHECK(ms.all_candidates.size() == 3);
  CHECK(best_match(c, 0.95).accepted.empty());
  std::vector<CandidateMatch> tie{{9, 1, 0.7, {}}, {2, 1, 0.7, {}}, {5, 2, 0.8, {}}};
  ms = best_match(tie, 0.5);
  REQUIRE(ms.accepted.size() == 2);
  CHECK(ms.accepted[0].object_id == 2);
  CHECK(ms.accepted[1] == AcceptedMatch{5, 2, 0.8});
}

TEST_CASE("match probability and track score") {
  CHECK(match_probability(1.0) == 1.0);
  CHECK(match_probability(-0.4) == 0.0);
  CHECK(match_probability(0.8) == 0.8);
  const std::vector<double> perfect(5, 1.0);
  CHECK(track_score(perfect, 1) == 0.0);
  const std::vector<double> two{0.9, 0.8};
  CHECK(track_score(two, 1) == doctest::Approx(std::log(0.9) + std::log(0.8)));
  const std::vector<double> gap{1.0, 0.0, 1.0};
  CHECK(track_score(gap, 1) == doctest::Approx(std::log(kScoreFloor)));
  const std::vector<double> many{2.5, 7.0};
  CHECK(track_score(many, 3) == doctest::Approx(std::log(2.5) + std::log(3.0)));

  TrackFrame tf;
  tf.predecessors = {{1, 4}, {2, 4}};
  MatchSet a;
  a.all_candidates = {{4, 1, 0.9, {}}, {4, 2, 0.7, {}}, {5, 1, 0.95, {}}};
  MatchSet b;
  b.all_candidates = {{4, 1, 0.95, {}}, {4, 2, -0.3, {}}};
  tf.portions = {a, b};
  CHECK(frame_inner_value(tf) == doctest::Approx(1.6));
  const std::vector<TrackFrame> track{tf};
  CHECK(track_score(track, 3) == doctest::Approx(std::log(1.6)));
}
