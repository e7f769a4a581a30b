#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "portiontrack/volume.hpp"

namespace ptrack {

enum class VolumeKind { label, intensity, feature };

std::string_view to_string(VolumeKind kind);
VolumeKind volume_kind_from_string(std::string_view s);

/// V4D container layout:
///   8 bytes  magic "V4D" followed by five NUL bytes
///   u32 LE   version (1)
///   u32 LE   header byte length N
///   N bytes  UTF-8 JSON {"x","y","z","d","dtype","frame","kind","spacing"}
///   payload  x*y*z*d little-endian elements (u32 labels, f32 otherwise)
struct V4DHeader {
  Dims dims;
  VolumeKind kind = VolumeKind::label;
  int frame = 0;
};

inline constexpr std::uint32_t kV4DVersion = 1;

using AnyVolume = std::variant<LabelVolume, Volume<float>>;

std::string encode_v4d(const LabelVolume& labels);
std::string encode_v4d(const Volume<float>& values, VolumeKind kind);
AnyVolume decode_v4d(std::string_view bytes, VolumeKind expected);
V4DHeader decode_v4d_header(std::string_view bytes);

void save_volume(const std::filesystem::path& path, const LabelVolume& labels);
void save_volume(const std::filesystem::path& path, const Volume<float>& values, VolumeKind kind);

/// Throws IoError when unreadable, FormatError on malformed content or a
/// kind/dtype that disagrees with `expected`.
AnyVolume load_volume(const std::filesystem::path& path, VolumeKind expected);

LabelVolume load_labels(const std::filesystem::path& path);
IntensityVolume load_intensity(const std::filesystem::path& path);
FeatureVolume load_features(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ptrack
