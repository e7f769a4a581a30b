#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "portiontrack/evaluation.hpp"
#include "portiontrack/features.hpp"
#include "portiontrack/synthgen.hpp"

namespace ptrack {

/// On-disk layout of one dataset directory:
///   frame_%04d.int.v4d   intensity
///   frame_%04d.lab.v4d   labels
///   frame_%04d.feat.v4d  features (optional)
///   gt.json, script.json, manifest.json
std::filesystem::path frame_path(const std::filesystem::path& dir, int frame, std::string_view kind);

std::string sha256_hex(std::string_view bytes);

/// {"files": [{"path", "bytes", "sha256"}]} for every regular file in `dir`
/// except manifest.json, sorted by path.
nlohmann::ordered_json build_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir);

void write_dataset(const std::filesystem::path& dir, const SynthDataset& ds);

struct Dataset {
  std::vector<LabelVolume> labels;
  std::vector<IntensityVolume> intensity;
  std::optional<GroundTruth> truth;
};

/// Frames are discovered as frame_0001.lab.v4d, frame_0002..., stopping at
/// the first gap. Throws DataError when frames disagree on grid or when
/// stored frame numbers do not match file names.
Dataset load_dataset(const std::filesystem::path& dir, bool need_intensity = true);

void write_features(const std::filesystem::path& dir, const std::vector<FeatureVolume>& feats);
std::vector<FeatureVolume> load_feature_frames(const std::filesystem::path& dir, int frames, ChannelGuard& guard);

/// Features for every frame: loaded when cfg.mode is external, derived from
/// intensity otherwise. Throws DataError on grid or channel mismatch.
std::vector<FeatureVolume> dataset_features(const std::filesystem::path& dir, const Dataset& ds, const FeatureConfig& cfg);

}  // namespace ptrack
