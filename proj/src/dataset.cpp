#include "portiontrack/dataset.hpp"

#include <algorithm>
#include <cstdio>

#include <openssl/evp.h>

#include "portiontrack/v4d.hpp"

namespace ptrack {

namespace fs = std::filesystem;

fs::path frame_path(const fs::path& dir, int frame, std::string_view kind) {
  char name[64];
  std::snprintf(name, sizeof name, "frame_%04d.%.*s.v4d", frame, int(kind.size()), kind.data());
  return dir / name;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

nlohmann::ordered_json build_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const fs::path& f : files) {
    const std::string bytes = read_file(f);
    list.push_back({{"path", f.filename().string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  return {{"files", std::move(list)}};
}

void write_manifest(const fs::path& dir) { write_file(dir / "manifest.json", build_manifest(dir).dump(1) + "\n"); }

void write_dataset(const fs::path& dir, const SynthDataset& ds) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t k = 0; k < ds.labels.size(); ++k) {
    const int t = int(k) + 1;
    save_volume(frame_path(dir, t, "int"), ds.intensity[k], VolumeKind::intensity);
    save_volume(frame_path(dir, t, "lab"), ds.labels[k]);
  }
  save_ground_truth(dir / "gt.json", ds.truth);
  write_file(dir / "script.json", script_to_json(ds.script).dump(1) + "\n");
  write_manifest(dir);
}

namespace {

template <typename V>
void check_frame(const V& vol, int t, const Dims& grid, const fs::path& file) {
  if (vol.frame() != t)
    throw DataError(file.string() + " stores frame " + std::to_string(vol.frame()) + ", expected " + std::to_string(t));
  if (!vol.dims().same_grid(grid)) throw DataError(file.string() + " has a different grid size than frame 1");
}

}  // namespace

Dataset load_dataset(const fs::path& dir, bool need_intensity) {
  if (!fs::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());
  Dataset ds;
  for (int t = 1;; ++t) {
    const fs::path lab = frame_path(dir, t, "lab");
    if (!fs::exists(lab)) break;
    ds.labels.push_back(load_labels(lab));
    check_frame(ds.labels.back(), t, ds.labels.front().dims(), lab);
    if (ds.labels.back().channels() != 1) throw DataError(lab.string() + " must have a single channel");
    const fs::path img = frame_path(dir, t, "int");
    if (fs::exists(img)) {
      ds.intensity.push_back(load_intensity(img));
      check_frame(ds.intensity.back(), t, ds.labels.front().dims(), img);
    } else if (need_intensity) {
      throw IoError("missing intensity frame " + img.string());
    }
  }
  if (ds.labels.empty()) throw IoError("no frames found in " + dir.string());
  if (!ds.intensity.empty() && ds.intensity.size() != ds.labels.size())
    throw DataError("intensity and label frame counts differ in " + dir.string());
  if (fs::exists(dir / "gt.json")) ds.truth = load_ground_truth(dir / "gt.json");
  return ds;
}

void write_features(const fs::path& dir, const std::vector<FeatureVolume>& feats) {
  for (const FeatureVolume& f : feats) save_volume(frame_path(dir, f.frame(), "feat"), f, VolumeKind::feature);
}

std::vector<FeatureVolume> load_feature_frames(const fs::path& dir, int frames, ChannelGuard& guard) {
  std::vector<FeatureVolume> out;
  for (int t = 1; t <= frames; ++t) {
    const fs::path f = frame_path(dir, t, "feat");
    if (!fs::exists(f)) throw IoError("missing feature frame " + f.string());
    out.push_back(ingest_features(f, guard));
    if (out.back().frame() != t)
      throw DataError(f.string() + " stores frame " + std::to_string(out.back().frame()) + ", expected " + std::to_string(t));
  }
  return out;
}

std::vector<FeatureVolume> dataset_features(const fs::path& dir, const Dataset& ds, const FeatureConfig& cfg) {
  ChannelGuard guard(cfg.channels);
  std::vector<FeatureVolume> feats;
  if (cfg.mode == FeatureMode::external) {
    feats = load_feature_frames(dir, int(ds.labels.size()), guard);
  } else {
    if (ds.intensity.size() != ds.labels.size()) throw IoError("derived features need intensity frames in " + dir.string());
    for (const IntensityVolume& img : ds.intensity) {
      feats.push_back(derive_features(img, cfg));
      guard.check(feats.back());
    }
  }
  for (std::size_t k = 0; k < feats.size(); ++k)
    if (!feats[k].dims().same_grid(ds.labels[k].dims()))
      throw DataError("feature grid of frame " + std::to_string(k + 1) + " differs from its labels");
  return feats;
}

}  // namespace ptrack
