#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "portiontrack/portion.hpp"

namespace ptrack {

using TrackId = std::uint32_t;

enum class EventKind { birth, death, split, merge, continuation };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

/// birth: {} -> {c}; death: {p} -> {}; split: {p} -> {c1, c2, ...};
/// merge: {p1, p2, ...} -> {c}; continuation: {p} -> {p}.
struct EventRecord {
  EventKind kind = EventKind::birth;
  int frame = 0;
  std::vector<TrackId> parents;
  std::vector<TrackId> children;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

struct TrackNode {
  int frame = 0;
  std::uint32_t label = 0;
  TrackId track_id = 0;
  std::int64_t voxels = 0;
};

struct TrackEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  EventKind kind = EventKind::continuation;
  int lag = 1;
};

/// Lineage DAG over (frame, segmentation label) nodes.
struct TrackGraph {
  std::string method;
  int max_lag = 1;
  std::vector<TrackNode> nodes;
  std::vector<TrackEdge> edges;
  std::vector<EventRecord> events;
  /// Log score per track (DFMT only).
  std::map<TrackId, double> track_scores;

  std::optional<std::size_t> find_node(int frame, std::uint32_t label) const;
};

enum class TrackState { live, ended, dead };

struct TrackStatus {
  TrackId id = 0;
  TrackState state = TrackState::live;
  int first_frame = 0;
  int last_frame = 0;
  std::uint32_t last_label = 0;
  std::int64_t last_voxels = 0;
};

/// Global track-ID registry. IDs increase monotonically and are never
/// reissued; ended and dead IDs never receive new nodes.
class TrackRegistry {
public:
  TrackId issue(int frame, std::uint32_t label, std::int64_t voxels);
  void observe(TrackId id, int frame, std::uint32_t label, std::int64_t voxels);
  void close(TrackId id, TrackState state);

  const TrackStatus* find(TrackId id) const;
  bool is_live(TrackId id) const;
  const std::map<TrackId, TrackStatus>& tracks() const { return tracks_; }
  TrackId next_id() const { return next_; }

private:
  TrackId next_ = 1;
  std::map<TrackId, TrackStatus> tracks_;
};

/// Matched tracks of one current object: TrackId -> lowest lag seen.
using MatchUnion = std::map<TrackId, int>;

/// A matched past object.
struct PastRef {
  int frame = 0;
  std::uint32_t label = 0;
};

/// Maps a past (frame, label) to the live TrackId holding it, if any.
using Translator = std::function<std::optional<TrackId>(int frame, std::uint32_t label)>;

MatchUnion match_union(std::span<const PastRef> matches, int frame, const Translator& translate);

/// Union of accepted matches across an object's portions and lags.
MatchUnion object_match_union(std::span<const MatchSet> portions, int frame, const Translator& translate);

struct ObjectUnion {
  std::uint32_t label = 0;
  std::int64_t voxels = 0;
  MatchUnion matches;
};

struct LineageLink {
  TrackId parent = 0;
  std::uint32_t child_label = 0;
  EventKind kind = EventKind::continuation;
};

struct FrameClassification {
  std::vector<EventRecord> events;
  std::map<std::uint32_t, TrackId> assignment;
  std::vector<LineageLink> links;
  TrackRegistry registry;
};

/// Applies, in order: birth on empty union; split for every TrackId claimed
/// by two or more objects (children get fresh IDs); merge for multi-track
/// unions (non-split children inherit the largest parent, ties to the
/// smaller ID); continuation otherwise; death for live tracks unclaimed for
/// max_lag frames.
FrameClassification classify_events(int frame, std::span<const ObjectUnion> objects, const TrackRegistry& registry,
                                    int max_lag);

struct ObjectMatches {
  std::uint32_t label = 0;
  std::int64_t voxels = 0;
  std::vector<PastRef> matches;
};

struct FrameMatches {
  int frame = 0;
  std::vector<ObjectMatches> objects;
};

/// Incremental lineage assembly shared by every tracker.
class LineageBuilder {
public:
  LineageBuilder(int max_lag, std::string method);

  /// TrackId at (frame, label) when that track is still live.
  std::optional<TrackId> live_track(int frame, std::uint32_t label) const;
  Translator translator() const;

  /// Frames must arrive in increasing order.
  const FrameClassification& add_frame(int frame, std::span<const ObjectUnion> objects);
  const FrameClassification& add_frame(const FrameMatches& frame);

  const TrackGraph& graph() const { return graph_; }
  TrackGraph& graph() { return graph_; }
  const TrackRegistry& registry() const { return registry_; }

private:
  int max_lag_;
  int last_frame_ = std::numeric_limits<int>::min();
  TrackGraph graph_;
  TrackRegistry registry_;
  std::map<std::pair<int, std::uint32_t>, TrackId> assigned_;
  std::map<TrackId, std::size_t> last_node_;
  FrameClassification current_;
};

TrackGraph build_track_graph(std::span<const FrameMatches> frames, int max_lag, std::string method = "dfmt");

/// Structural checks: per-frame conservation (when `objects_per_frame` is
/// given), unique nodes, event arity, no nodes on ended or dead IDs, edge
/// lags within max_lag, in-degree bounded by recorded parents, and each
/// TrackId's nodes chained by edges. Returns human-readable violations.
std::vector<std::string> check_graph(const TrackGraph& graph, const std::map<int, std::size_t>* objects_per_frame = nullptr);

}  // namespace ptrack
