#include <doctest.h>

#include <json.hpp>

#include <cstring>
#include <filesystem>

#include "portiontrack/v4d.hpp"

using namespace ptrack;

namespace {

std::uint32_t read_u32(const std::string& s, std::size_t at) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data() + at);
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

}  // namespace

TEST_CASE("label volume round-trips with frame and spacing") {
  LabelVolume l(Dims{3, 2, 2, 1, {0.5, 0.5, 2.0}}, 4);
  for (std::size_t i = 0; i < l.dims().voxels(); ++i) l[i] = std::uint32_t(i * 3);
  const std::string bytes = encode_v4d(l);
  const auto back = std::get<LabelVolume>(decode_v4d(bytes, VolumeKind::label));
  CHECK(back.frame() == 4);
  CHECK(back.dims().spacing[2] == 2.0);
  CHECK((back.data() == l.data()).all());
}

TEST_CASE("container layout: magic, LE version, header length, payload") {
  FeatureVolume f(Dims{2, 2, 1, 3}, 1);
  for (std::size_t i = 0; i < f.dims().size(); ++i) f[i] = float(i) + 0.25f;
  const std::string bytes = encode_v4d(f, VolumeKind::feature);
  CHECK(std::memcmp(bytes.data(), "V4D\0\0\0\0\0", 8) == 0);
  CHECK(read_u32(bytes, 8) == kV4DVersion);
  const std::uint32_t n = read_u32(bytes, 12);
  const auto header = nlohmann::json::parse(bytes.substr(16, n));
  CHECK(header.at("d") == 3);
  CHECK(header.at("dtype") == "f32");
  CHECK(header.at("kind") == "feature");
  CHECK(bytes.size() == 16 + n + 12 * 4);
  float last;
  std::memcpy(&last, bytes.data() + bytes.size() - 4, 4);
  CHECK(last == 11.25f);
  const auto back = std::get<Volume<float>>(decode_v4d(bytes, VolumeKind::feature));
  CHECK(back(1, 1, 0, 2) == f(1, 1, 0, 2));
}

TEST_CASE("malformed containers raise FormatError") {
  LabelVolume l(Dims{2, 2, 2}, 1);
  std::string bytes = encode_v4d(l);
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_v4d(bytes, VolumeKind::label), FormatError);
  }
  SUBCASE("truncated payload") {
    bytes.pop_back();
    CHECK_THROWS_AS(decode_v4d(bytes, VolumeKind::label), FormatError);
  }
  SUBCASE("kind mismatch") { CHECK_THROWS_AS(decode_v4d(bytes, VolumeKind::intensity), FormatError); }
  SUBCASE("truncated header") { CHECK_THROWS_AS(decode_v4d(bytes.substr(0, 10), VolumeKind::label), FormatError); }
}

TEST_CASE("file helpers map missing files to IoError") {
  const auto dir = std::filesystem::temp_directory_path() / "ptrack_v4d_test";
  std::filesystem::create_directories(dir);
  IntensityVolume img(Dims{4, 4, 2}, 2);
  img(1, 2, 1) = 3.5f;
  save_volume(dir / "a.v4d", img, VolumeKind::intensity);
  CHECK(load_intensity(dir / "a.v4d")(1, 2, 1) == 3.5f);
  CHECK_THROWS_AS(load_labels(dir / "a.v4d"), FormatError);
  CHECK_THROWS_AS(load_labels(dir / "missing.v4d"), IoError);
  std::filesystem::remove_all(dir);
}
