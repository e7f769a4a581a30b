#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "portiontrack/volume.hpp"

namespace ptrack {

enum class FeatureMode { external, derived };

struct FeatureConfig {
  FeatureMode mode = FeatureMode::derived;
  /// Expected channel count; 0 accepts whatever the source provides.
  int channels = 0;
  /// Gaussian sigmas in voxels (or physical units when spacing_aware).
  std::vector<double> smoothing_scales{1.0, 2.0};
  bool include_gradient = true;
  bool spacing_aware = false;

  int derived_channels() const { return 1 + int(smoothing_scales.size()) + (include_gradient ? 1 : 0); }
};

/// Normalized discrete Gaussian, radius taps each side.
Eigen::ArrayXd gaussian_kernel(double sigma, int radius);
int gaussian_radius(double sigma);

/// Separable Gaussian smoothing of one channel with edge replication;
/// `sigmas` are per axis in voxels.
Eigen::ArrayXd gaussian_smooth(const Eigen::ArrayXd& values, const Dims& dims, const Eigen::Vector3d& sigmas);

/// Central-difference gradient magnitude with edge replication.
Eigen::ArrayXd gradient_magnitude(const Eigen::ArrayXd& values, const Dims& dims);

/// Channel stack: raw, one smoothing per scale, optional gradient magnitude.
FeatureVolume derive_features(const IntensityVolume& img, const FeatureConfig& cfg);

/// Tracks the channel count shared by every frame of a dataset.
class ChannelGuard {
public:
  explicit ChannelGuard(int expected = 0) {
    if (expected > 0) channels_ = expected;
  }
  /// Throws DataError when `vol` disagrees with earlier frames.
  void check(const FeatureVolume& vol);
  std::optional<int> channels() const { return channels_; }

private:
  std::optional<int> channels_;
  std::optional<Dims> grid_;
};

FeatureVolume ingest_features(const std::filesystem::path& path);
FeatureVolume ingest_features(const std::filesystem::path& path, ChannelGuard& guard);

}  // namespace ptrack
