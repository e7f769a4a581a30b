#include "portiontrack/v4d.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ptrack {

namespace {

constexpr char kMagic[8] = {'V', '4', 'D', '\0', '\0', '\0', '\0', '\0'};

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_needed(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

void put_u32(std::string& out, std::uint32_t v) {
  v = byteswap_if_needed(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, in.data() + offset, 4);
  return byteswap_if_needed(v);
}

std::string header_json(const Dims& dims, VolumeKind kind, int frame) {
  nlohmann::ordered_json h;
  h["x"] = dims.x;
  h["y"] = dims.y;
  h["z"] = dims.z;
  h["d"] = dims.d;
  h["dtype"] = kind == VolumeKind::label ? "u32" : "f32";
  h["frame"] = frame;
  h["kind"] = std::string(to_string(kind));
  h["spacing"] = {dims.spacing[0], dims.spacing[1], dims.spacing[2]};
  return h.dump();
}

template <typename Scalar>
std::string encode(const Volume<Scalar>& vol, VolumeKind kind) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, kV4DVersion);
  const std::string header = header_json(vol.dims(), kind, vol.frame());
  put_u32(out, std::uint32_t(header.size()));
  out += header;
  const std::size_t n = vol.dims().size();
  const std::size_t base = out.size();
  out.resize(base + n * sizeof(Scalar));
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar v = byteswap_if_needed(vol[i]);
    std::memcpy(out.data() + base + i * sizeof(Scalar), &v, sizeof(Scalar));
  }
  return out;
}

struct Parsed {
  V4DHeader header;
  std::size_t payload_offset = 0;
};

Parsed parse_header(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not a V4D file (bad magic)");
  const std::uint32_t version = get_u32(bytes, 8);
  if (version != kV4DVersion) throw FormatError("unsupported V4D version " + std::to_string(version));
  const std::uint32_t len = get_u32(bytes, 12);
  if (bytes.size() < 16 + std::size_t(len)) throw FormatError("V4D header truncated");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed V4D header: ") + e.what());
  }
  Parsed p;
  try {
    p.header.dims.x = h.at("x").get<int>();
    p.header.dims.y = h.at("y").get<int>();
    p.header.dims.z = h.at("z").get<int>();
    p.header.dims.d = h.at("d").get<int>();
    p.header.frame = h.at("frame").get<int>();
    p.header.kind = volume_kind_from_string(h.at("kind").get<std::string>());
    const auto dtype = h.at("dtype").get<std::string>();
    const std::string want = p.header.kind == VolumeKind::label ? "u32" : "f32";
    if (dtype != want) throw FormatError("dtype " + dtype + " does not match kind " + std::string(to_string(p.header.kind)));
    if (h.contains("spacing")) {
      const auto s = h.at("spacing").get<std::vector<double>>();
      if (s.size() != 3) throw FormatError("spacing must have three entries");
      p.header.dims.spacing = {s[0], s[1], s[2]};
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed V4D header: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
  if (!p.header.dims.valid()) throw FormatError("V4D dims must all be >= 1");
  if (p.header.kind != VolumeKind::feature && p.header.dims.d != 1)
    throw FormatError("label and intensity volumes must have d = 1");
  p.payload_offset = 16 + std::size_t(len);
  return p;
}

template <typename Scalar>
Volume<Scalar> decode_payload(std::string_view bytes, const Parsed& p) {
  const std::size_t n = p.header.dims.size();
  const std::size_t have = bytes.size() - p.payload_offset;
  if (have != n * sizeof(Scalar))
    throw FormatError("V4D payload size mismatch: header declares " + std::to_string(n) + " elements, payload holds " +
                      std::to_string(have / sizeof(Scalar)) + (have % sizeof(Scalar) ? " (plus trailing bytes)" : ""));
  typename Volume<Scalar>::Storage data(Eigen::Index(n), 1);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar v;
    std::memcpy(&v, bytes.data() + p.payload_offset + i * sizeof(Scalar), sizeof(Scalar));
    data[Eigen::Index(i)] = byteswap_if_needed(v);
  }
  return Volume<Scalar>(p.header.dims, std::move(data), p.header.frame);
}

}  // namespace

std::string_view to_string(VolumeKind kind) {
  switch (kind) {
    case VolumeKind::label: return "label";
    case VolumeKind::intensity: return "intensity";
    case VolumeKind::feature: return "feature";
  }
  return "label";
}

VolumeKind volume_kind_from_string(std::string_view s) {
  if (s == "label") return VolumeKind::label;
  if (s == "intensity") return VolumeKind::intensity;
  if (s == "feature") return VolumeKind::feature;
  throw FormatError("unknown volume kind '" + std::string(s) + "'");
}

std::string encode_v4d(const LabelVolume& labels) { return encode(labels, VolumeKind::label); }

std::string encode_v4d(const Volume<float>& values, VolumeKind kind) {
  if (kind == VolumeKind::label) throw ValidationError("float volumes cannot be written as labels");
  return encode(values, kind);
}

V4DHeader decode_v4d_header(std::string_view bytes) { return parse_header(bytes).header; }

AnyVolume decode_v4d(std::string_view bytes, VolumeKind expected) {
  const Parsed p = parse_header(bytes);
  if (p.header.kind != expected)
    throw FormatError("expected a " + std::string(to_string(expected)) + " volume, file holds " +
                      std::string(to_string(p.header.kind)));
  if (expected == VolumeKind::label) return decode_payload<std::uint32_t>(bytes, p);
  auto vol = decode_payload<float>(bytes, p);
  for (Eigen::Index i = 0; i < vol.data().size(); ++i)
    if (!std::isfinite(vol.data()[i])) throw FormatError("non-finite value in " + std::string(to_string(expected)) + " payload");
  return vol;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void save_volume(const std::filesystem::path& path, const LabelVolume& labels) { write_file(path, encode_v4d(labels)); }

void save_volume(const std::filesystem::path& path, const Volume<float>& values, VolumeKind kind) {
  write_file(path, encode_v4d(values, kind));
}

AnyVolume load_volume(const std::filesystem::path& path, VolumeKind expected) {
  const std::string bytes = read_file(path);
  try {
    return decode_v4d(bytes, expected);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

LabelVolume load_labels(const std::filesystem::path& path) {
  return std::get<LabelVolume>(load_volume(path, VolumeKind::label));
}

IntensityVolume load_intensity(const std::filesystem::path& path) {
  return std::get<Volume<float>>(load_volume(path, VolumeKind::intensity));
}

FeatureVolume load_features(const std::filesystem::path& path) {
  return std::get<Volume<float>>(load_volume(path, VolumeKind::feature));
}

}  // namespace ptrack
