#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "portiontrack/volume.hpp"

namespace ptrack {

/// Geometry of portion matching. All extents are half-extents in voxels.
struct PortionSpec {
  Index3 radius{3, 3, 1};
  Index3 stride{3, 3, 1};
  Index3 ext{6, 6, 2};
  int max_lag = 3;
  double gamma = 0.5;
  /// Candidate-center stride inside the extended box; 1 scans every voxel.
  int search_stride = 1;

  void validate() const;
  Index3 window() const { return 2 * radius + Index3::Ones(); }
  int window_voxels() const { return window().prod(); }
};

/// Feature window around one object voxel. `values` is laid out like a
/// volume of size window() x channels: x fastest, channel slowest.
struct Portion {
  Index3 center = Index3::Zero();
  std::uint32_t object_id = 0;
  int frame = 0;
  Index3 radius = Index3::Zero();
  int channels = 1;
  Eigen::ArrayXd values;
};

Portion extract_portion(const FeatureVolume& feats, const Index3& center, const Index3& radius, std::uint32_t object_id = 0);

/// Lattice centers anchored at the bbox min corner that fall on the object,
/// raster order; falls back to the object voxel closest to the centroid.
std::vector<Index3> portion_centers(const ObjectRecord& obj, const LabelVolume& labels, const PortionSpec& spec);

std::vector<Portion> sample_portions(const ObjectRecord& obj, const LabelVolume& labels, const FeatureVolume& feats,
                                     const PortionSpec& spec);

/// Pearson correlation over all window elements jointly. Returns 0 when
/// either side has zero variance. Throws ValidationError on shape mismatch.
double pearson(const Portion& a, const Portion& b);
double pearson(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b);

struct CandidateMatch {
  std::uint32_t object_id = 0;
  int lag = 0;
  double rho = 0.0;
  Index3 center = Index3::Zero();
};

struct AcceptedMatch {
  std::uint32_t object_id = 0;
  int lag = 0;
  double rho = 0.0;

  friend bool operator==(const AcceptedMatch&, const AcceptedMatch&) = default;
};

struct MatchSet {
  std::size_t portion_index = 0;
  Index3 portion_center = Index3::Zero();
  std::vector<AcceptedMatch> accepted;
  std::vector<CandidateMatch> all_candidates;
};

/// A past frame prepared for repeated extended searches: features padded by
/// edge replication, channel-interleaved, with per-center window mean and
/// centred norm precomputed.
class SearchFrame {
public:
  SearchFrame(LabelVolume labels, const FeatureVolume& feats, const Index3& radius);

  const LabelVolume& labels() const { return labels_; }
  int frame() const { return labels_.frame(); }
  const Index3& radius() const { return radius_; }
  int channels() const { return channels_; }

  /// Same values as extract_portion on the source features.
  Portion portion(const Index3& center, std::uint32_t object_id = 0) const;

  /// Query portion centred and scaled to unit norm, in this frame's
  /// interleaved window order. Empty when the query has zero variance.
  std::vector<double> normalized_query(const Portion& q) const;

  /// Correlation of a normalized query with the window at `center`.
  double correlate(std::span<const double> query, const Index3& center) const;

private:
  std::size_t padded_index(int px, int py, int pz) const {
    return std::size_t(px) + std::size_t(pdims_.x()) * (std::size_t(py) + std::size_t(pdims_.y()) * std::size_t(pz));
  }

  LabelVolume labels_;
  Index3 radius_;
  int channels_ = 1;
  Index3 pdims_;
  std::vector<double> padded_;      // interleaved: voxel-major, channel-minor
  std::vector<double> inv_norm_;    // 0 where the window has zero variance
};

/// Visits every candidate center of the extended box around q.center
/// (clipped to bounds, optional stride) whose label in `past` is nonzero.
void scan_extended_box(const Portion& q, const SearchFrame& past, const PortionSpec& spec,
                       const std::function<void(const Index3& center, std::uint32_t label, double rho)>& visit);

/// Best correlation per past object intersecting the extended box, sorted by
/// object id. Reported rho values are recomputed with pearson().
std::vector<CandidateMatch> extended_search(const Portion& q, const SearchFrame& past, const PortionSpec& spec);
std::vector<CandidateMatch> extended_search(const Portion& q, const LabelVolume& past_labels, const FeatureVolume& past_feats,
                                            const PortionSpec& spec);

/// Per-lag argmax (ties: higher rho, smaller lag, smaller id), accepted iff rho >= gamma.
MatchSet best_match(std::span<const CandidateMatch> candidates, double gamma);

double match_probability(double rho);

inline constexpr double kScoreFloor = 1e-12;

/// One frame of a lineage: the frame's MatchSets and the lineage's past
/// segmentation label at each lag.
struct TrackFrame {
  std::vector<MatchSet> portions;
  std::map<int, std::uint32_t> predecessors;
};

/// max over portions of the lag-sum of match probabilities toward the
/// lineage's predecessor objects.
double frame_inner_value(const TrackFrame& frame);

/// Sum over frames of log(clamp(inner, floor, max_lag)).
double track_score(std::span<const double> inner_values, int max_lag);
double track_score(std::span<const TrackFrame> track, int max_lag);

}  // namespace ptrack
