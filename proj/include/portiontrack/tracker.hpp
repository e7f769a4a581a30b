#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "portiontrack/baselines.hpp"
#include "portiontrack/events.hpp"
#include "portiontrack/portion.hpp"

namespace ptrack {

/// MatchSets of every portion of one current object.
struct ObjectMatchSets {
  std::uint32_t label = 0;
  std::int64_t voxels = 0;
  std::vector<MatchSet> portions;
};

/// Matches every object of `labels` against the prepared past frames
/// (past[0] is lag 1). Objects are processed in parallel with `threads`
/// workers (0 = OpenMP default); the result is ordered by label.
std::vector<ObjectMatchSets> match_frame(const LabelVolume& labels, const FeatureVolume& feats,
                                         std::span<const SearchFrame* const> past, const PortionSpec& spec, int threads = 0);

struct FrameTiming {
  int frame = 0;
  double prepare_ms = 0.0;
  double match_ms = 0.0;
  double classify_ms = 0.0;
  std::size_t objects = 0;
  std::size_t portions = 0;
};

struct DfmtResult {
  TrackGraph graph;
  /// matches[k] belongs to frame k + 1.
  std::vector<std::vector<ObjectMatchSets>> matches;
  std::vector<FrameTiming> timing;
};

/// Portion-matching tracker over frames 1..T.
DfmtResult dfmt_track(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats, const PortionSpec& spec,
                      int threads = 0);

/// Per-track log scores from the stored MatchSets. A node contributes the
/// inner value over its lineage predecessors at lags 1..max_lag, found by
/// walking back along in-edges (same-track edge first); a track's first
/// node contributes only when it has a predecessor.
std::map<TrackId, double> score_tracks(const TrackGraph& graph, const std::vector<std::vector<ObjectMatchSets>>& matches);

nlohmann::ordered_json timing_to_json(std::span<const FrameTiming> timing);

enum class Method { dfmt, iou, nn, link, iou_link };

std::string_view to_string(Method m);
/// Accepts dfmt, iou, nn, link and iou+link. Throws ValidationError.
Method method_from_string(std::string_view s);

struct TrackRequest {
  Method method = Method::dfmt;
  PortionSpec spec;
  BaselineConfig baseline;
  int threads = 0;
};

/// Runs any method; features are only read by dfmt.
DfmtResult run_tracker(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats, const TrackRequest& req);

/// One candidate center of a correlation map.
struct CorrelationSample {
  int lag = 0;
  std::uint32_t object_id = 0;
  Index3 center = Index3::Zero();
  double rho = 0.0;
};

/// Correlation of every portion of object `label` at frame t (1-based)
/// against the extended boxes of frames t-1..t-max_lag; lag 0 (the frame
/// itself) is included on request. Each candidate center keeps its best
/// rho over the object's portions. Rows are sorted by lag, z, y, x.
/// Throws ValidationError when the object is absent.
std::vector<CorrelationSample> correlation_map(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats,
                                               int t, std::uint32_t label, const PortionSpec& spec, bool include_self);

std::string correlation_csv(std::span<const CorrelationSample> samples);

/// Binary PGM (P5) of the max-over-z rho at one lag, rho in [-1, 1] mapped
/// to 0..255; pixels without candidates are 0.
std::string correlation_pgm(std::span<const CorrelationSample> samples, int lag, const Dims& dims);

}  // namespace ptrack
