#pragma once

#include <span>
#include <vector>

#include "portiontrack/events.hpp"

namespace ptrack {

struct BaselineConfig {
  /// Links need IOU strictly above this; 0 accepts any overlap.
  double sigma_iou = 0.0;
  /// In-plane Chebyshev dilation radius of past masks for link_track.
  int expand_voxels = 10;
  /// Merge accepted when size(child) >= merge_ratio * mean(size(sources)).
  double merge_ratio = 1.5;
  /// Centroid distance cutoff for nn_track, in spacing-scaled units.
  double nn_max_dist = 20.0;
  /// Optimal bipartite IOU assignment instead of greedy.
  bool optimal_assignment = false;

  void validate() const;
};

/// |a ∩ b| / |a ∪ b| over sorted linear voxel indices.
double iou(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Maximum-weight one-to-one assignment; weights[i][j] <= 0 means "no edge".
/// Returns, per row, the assigned column or -1.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

/// One-to-one frame-to-frame linking by descending IOU (M1).
TrackGraph iou_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg);

/// Dilated-overlap linking with fan-out splits and size-tested merges (M2).
TrackGraph link_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg);

/// Plain IOU links with link_track's split/merge rules (M1+M2).
TrackGraph iou_link_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg);

/// Mutual nearest-centroid linking with a distance cutoff.
TrackGraph nn_track(std::span<const LabelVolume> frames, double max_dist);

}  // namespace ptrack
