#include "portiontrack/events.hpp"

#include <algorithm>
#include <set>

namespace ptrack {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::birth: return "birth";
    case EventKind::death: return "death";
    case EventKind::split: return "split";
    case EventKind::merge: return "merge";
    case EventKind::continuation: return "continue";
  }
  return "continue";
}

EventKind event_kind_from_string(std::string_view s) {
  if (s == "birth") return EventKind::birth;
  if (s == "death") return EventKind::death;
  if (s == "split") return EventKind::split;
  if (s == "merge") return EventKind::merge;
  if (s == "continue") return EventKind::continuation;
  throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

std::optional<std::size_t> TrackGraph::find_node(int frame, std::uint32_t label) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].frame == frame && nodes[i].label == label) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

TrackId TrackRegistry::issue(int frame, std::uint32_t label, std::int64_t voxels) {
  const TrackId id = next_++;
  tracks_[id] = TrackStatus{id, TrackState::live, frame, frame, label, voxels};
  return id;
}

void TrackRegistry::observe(TrackId id, int frame, std::uint32_t label, std::int64_t voxels) {
  auto it = tracks_.find(id);
  if (it == tracks_.end() || it->second.state != TrackState::live)
    throw DataError("observation on track " + std::to_string(id) + " that is not live");
  it->second.last_frame = frame;
  it->second.last_label = label;
  it->second.last_voxels = voxels;
}

void TrackRegistry::close(TrackId id, TrackState state) {
  auto it = tracks_.find(id);
  if (it == tracks_.end()) throw DataError("closing unknown track " + std::to_string(id));
  it->second.state = state;
}

const TrackStatus* TrackRegistry::find(TrackId id) const {
  auto it = tracks_.find(id);
  return it == tracks_.end() ? nullptr : &it->second;
}

bool TrackRegistry::is_live(TrackId id) const {
  const TrackStatus* s = find(id);
  return s && s->state == TrackState::live;
}

// ---------------------------------------------------------------------------

MatchUnion match_union(std::span<const PastRef> matches, int frame, const Translator& translate) {
  MatchUnion out;
  for (const PastRef& m : matches) {
    const auto id = translate(m.frame, m.label);
    if (!id) continue;
    const int lag = frame - m.frame;
    auto [it, fresh] = out.try_emplace(*id, lag);
    if (!fresh) it->second = std::min(it->second, lag);
  }
  return out;
}

MatchUnion object_match_union(std::span<const MatchSet> portions, int frame, const Translator& translate) {
  std::vector<PastRef> refs;
  for (const MatchSet& ms : portions)
    for (const AcceptedMatch& a : ms.accepted) refs.push_back({frame - a.lag, a.object_id});
  return match_union(refs, frame, translate);
}

FrameClassification classify_events(int frame, std::span<const ObjectUnion> objects, const TrackRegistry& registry,
                                    int max_lag) {
  FrameClassification out;
  out.registry = registry;
  TrackRegistry& reg = out.registry;

  std::vector<const ObjectUnion*> order;
  for (const ObjectUnion& o : objects) order.push_back(&o);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->label < b->label; });

  std::map<TrackId, std::vector<std::uint32_t>> claimants;
  for (const ObjectUnion* o : order)
    for (const auto& [id, lag] : o->matches) {
      if (!reg.is_live(id)) throw DataError("match union references track " + std::to_string(id) + " that is not live");
      claimants[id].push_back(o->label);
    }
  std::set<TrackId> shared;
  for (const auto& [id, who] : claimants)
    if (who.size() >= 2) shared.insert(id);
  auto is_split_child = [&](const ObjectUnion& o) {
    return std::any_of(o.matches.begin(), o.matches.end(), [&](const auto& kv) { return shared.count(kv.first) > 0; });
  };

  // Fresh IDs for births and split children, in label order.
  for (const ObjectUnion* o : order) {
    if (o->matches.empty()) {
      const TrackId id = reg.issue(frame, o->label, o->voxels);
      out.assignment[o->label] = id;
      out.events.push_back({EventKind::birth, frame, {}, {id}});
    } else if (is_split_child(*o)) {
      out.assignment[o->label] = reg.issue(frame, o->label, o->voxels);
    }
  }

  for (TrackId parent : shared) {
    EventRecord ev{EventKind::split, frame, {parent}, {}};
    for (std::uint32_t label : claimants[parent]) {
      ev.children.push_back(out.assignment.at(label));
      out.links.push_back({parent, label, EventKind::split});
    }
    out.events.push_back(std::move(ev));
  }

  std::set<TrackId> inherited;
  for (const ObjectUnion* o : order) {
    if (o->matches.empty()) continue;
    const bool split_child = is_split_child(*o);
    if (o->matches.size() >= 2) {
      EventRecord ev{EventKind::merge, frame, {}, {}};
      for (const auto& [id, lag] : o->matches) ev.parents.push_back(id);
      TrackId child;
      if (split_child) {
        child = out.assignment.at(o->label);
      } else {
        // Major parent: largest voxel count at its last observation.
        child = ev.parents.front();
        for (TrackId id : ev.parents) {
          const std::int64_t size = reg.find(id)->last_voxels;
          const std::int64_t best = reg.find(child)->last_voxels;
          if (size > best || (size == best && id < child)) child = id;
        }
        out.assignment[o->label] = child;
        inherited.insert(child);
      }
      ev.children = {child};
      for (const auto& [id, lag] : o->matches)
        if (!shared.count(id)) out.links.push_back({id, o->label, EventKind::merge});
      out.events.push_back(std::move(ev));
    } else if (!split_child) {
      const TrackId id = o->matches.begin()->first;
      out.assignment[o->label] = id;
      inherited.insert(id);
      out.events.push_back({EventKind::continuation, frame, {id}, {id}});
      out.links.push_back({id, o->label, EventKind::continuation});
    }
  }

  // Close parents whose identity did not carry over.
  for (const auto& [id, who] : claimants)
    if (!inherited.count(id)) reg.close(id, TrackState::ended);

  for (const ObjectUnion* o : order) {
    const TrackId id = out.assignment.at(o->label);
    if (reg.find(id)->first_frame != frame) reg.observe(id, frame, o->label, o->voxels);
  }

  std::vector<TrackId> deaths;
  for (const auto& [id, status] : reg.tracks())
    if (status.state == TrackState::live && !claimants.count(id) && status.last_frame < frame &&
        frame - status.last_frame >= max_lag)
      deaths.push_back(id);
  for (TrackId id : deaths) {
    out.events.push_back({EventKind::death, reg.find(id)->last_frame + 1, {id}, {}});
    reg.close(id, TrackState::dead);
  }
  return out;
}

// ---------------------------------------------------------------------------

LineageBuilder::LineageBuilder(int max_lag, std::string method) : max_lag_(max_lag) {
  if (max_lag < 1) throw ValidationError("max_lag must be >= 1");
  graph_.method = std::move(method);
  graph_.max_lag = max_lag;
}

std::optional<TrackId> LineageBuilder::live_track(int frame, std::uint32_t label) const {
  auto it = assigned_.find({frame, label});
  if (it == assigned_.end() || !registry_.is_live(it->second)) return std::nullopt;
  return it->second;
}

Translator LineageBuilder::translator() const {
  return [this](int frame, std::uint32_t label) { return live_track(frame, label); };
}

const FrameClassification& LineageBuilder::add_frame(int frame, std::span<const ObjectUnion> objects) {
  if (frame <= last_frame_) throw DataError("frames must be added in increasing order");
  last_frame_ = frame;
  current_ = classify_events(frame, objects, registry_, max_lag_);

  std::map<std::uint32_t, std::size_t> node_of;
  std::vector<const ObjectUnion*> order;
  for (const ObjectUnion& o : objects) order.push_back(&o);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->label < b->label; });
  for (const ObjectUnion* o : order) {
    const TrackId id = current_.assignment.at(o->label);
    node_of[o->label] = graph_.nodes.size();
    graph_.nodes.push_back({frame, o->label, id, o->voxels});
    assigned_[{frame, o->label}] = id;
  }
  for (const LineageLink& link : current_.links) {
    const std::size_t from = last_node_.at(link.parent);
    graph_.edges.push_back({from, node_of.at(link.child_label), link.kind, frame - graph_.nodes[from].frame});
  }
  for (const auto& [label, node] : node_of) last_node_[graph_.nodes[node].track_id] = node;
  graph_.events.insert(graph_.events.end(), current_.events.begin(), current_.events.end());
  registry_ = current_.registry;
  return current_;
}

const FrameClassification& LineageBuilder::add_frame(const FrameMatches& frame) {
  std::vector<ObjectUnion> unions;
  const Translator translate = translator();
  for (const ObjectMatches& o : frame.objects) unions.push_back({o.label, o.voxels, match_union(o.matches, frame.frame, translate)});
  return add_frame(frame.frame, unions);
}

TrackGraph build_track_graph(std::span<const FrameMatches> frames, int max_lag, std::string method) {
  LineageBuilder builder(max_lag, std::move(method));
  for (const FrameMatches& f : frames) builder.add_frame(f);
  return std::move(builder.graph());
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_graph(const TrackGraph& graph, const std::map<int, std::size_t>* objects_per_frame) {
  std::vector<std::string> bad;
  auto fail = [&](std::string msg) { bad.push_back(std::move(msg)); };

  std::map<int, std::size_t> per_frame;
  std::set<std::pair<int, std::uint32_t>> seen;
  std::set<std::pair<TrackId, int>> id_frames;
  std::map<TrackId, std::vector<std::size_t>> by_track;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const TrackNode& n = graph.nodes[i];
    per_frame[n.frame] += 1;
    if (!seen.insert({n.frame, n.label}).second)
      fail("duplicate node frame " + std::to_string(n.frame) + " label " + std::to_string(n.label));
    if (n.track_id == 0) fail("node without track id at frame " + std::to_string(n.frame));
    if (!id_frames.insert({n.track_id, n.frame}).second)
      fail("track " + std::to_string(n.track_id) + " has two nodes at frame " + std::to_string(n.frame));
    by_track[n.track_id].push_back(i);
  }
  if (objects_per_frame) {
    for (const auto& [t, count] : *objects_per_frame) {
      const std::size_t have = per_frame.count(t) ? per_frame.at(t) : 0;
      if (have != count)
        fail("frame " + std::to_string(t) + " has " + std::to_string(have) + " nodes for " + std::to_string(count) + " objects");
    }
    for (const auto& [t, count] : per_frame)
      if (!objects_per_frame->count(t)) fail("nodes at frame " + std::to_string(t) + " which has no objects");
  }

  // Recorded parents per (frame, child id); frames after which an id must not appear.
  std::map<std::pair<int, TrackId>, std::set<TrackId>> recorded;
  std::map<TrackId, int> closed_at;
  std::map<TrackId, int> born_at;
  auto close = [&](TrackId id, int t) {
    auto [it, fresh] = closed_at.try_emplace(id, t);
    if (!fresh) it->second = std::min(it->second, t);
  };
  for (const EventRecord& e : graph.events) {
    const std::string where = std::string(to_string(e.kind)) + " at frame " + std::to_string(e.frame);
    switch (e.kind) {
      case EventKind::birth:
        if (!e.parents.empty() || e.children.size() != 1) fail("bad arity for " + where);
        break;
      case EventKind::death:
        if (e.parents.size() != 1 || !e.children.empty()) fail("bad arity for " + where);
        break;
      case EventKind::split:
        if (e.parents.size() != 1 || e.children.size() < 2) fail("bad arity for " + where);
        break;
      case EventKind::merge:
        if (e.parents.size() < 2 || e.children.size() != 1) fail("bad arity for " + where);
        break;
      case EventKind::continuation:
        if (e.parents.size() != 1 || e.children.size() != 1 || e.parents != e.children) fail("bad arity for " + where);
        break;
    }
    for (TrackId c : e.children)
      for (TrackId p : e.parents) recorded[{e.frame, c}].insert(p);
    if (e.kind == EventKind::birth || e.kind == EventKind::split) {
      for (TrackId c : e.children) born_at[c] = e.frame;
      if (e.kind == EventKind::split) close(e.parents.front(), e.frame);
    }
    if (e.kind == EventKind::merge)
      for (TrackId p : e.parents)
        if (std::find(e.children.begin(), e.children.end(), p) == e.children.end()) close(p, e.frame);
    if (e.kind == EventKind::death) close(e.parents.front(), e.frame);
  }

  for (const TrackNode& n : graph.nodes) {
    if (auto it = closed_at.find(n.track_id); it != closed_at.end() && n.frame >= it->second)
      fail("track " + std::to_string(n.track_id) + " reappears at frame " + std::to_string(n.frame) + " after being retired");
    if (auto it = born_at.find(n.track_id); it != born_at.end() && n.frame < it->second)
      fail("track " + std::to_string(n.track_id) + " has a node before it was issued");
  }

  std::vector<std::size_t> indegree(graph.nodes.size(), 0);
  std::set<std::pair<std::size_t, std::size_t>> edge_set;
  for (const TrackEdge& e : graph.edges) {
    if (e.from >= graph.nodes.size() || e.to >= graph.nodes.size()) {
      fail("edge references a missing node");
      continue;
    }
    const TrackNode& a = graph.nodes[e.from];
    const TrackNode& b = graph.nodes[e.to];
    if (a.frame >= b.frame) fail("edge does not go forward in time at frame " + std::to_string(b.frame));
    if (b.frame - a.frame != e.lag) fail("edge lag disagrees with node frames at frame " + std::to_string(b.frame));
    if (e.lag > graph.max_lag) fail("edge lag exceeds max_lag at frame " + std::to_string(b.frame));
    indegree[e.to] += 1;
    edge_set.insert({e.from, e.to});
  }
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const TrackNode& n = graph.nodes[i];
    auto it = recorded.find({n.frame, n.track_id});
    std::size_t parents = 0;
    if (it != recorded.end()) parents = it->second.size();
    if (indegree[i] > parents)
      fail("node frame " + std::to_string(n.frame) + " label " + std::to_string(n.label) + " has in-degree " +
           std::to_string(indegree[i]) + " but " + std::to_string(parents) + " recorded parents");
  }
  for (const EventRecord& e : graph.events)
    if (e.kind == EventKind::birth)
      for (std::size_t i = 0; i < graph.nodes.size(); ++i)
        if (graph.nodes[i].track_id == e.children.front() && graph.nodes[i].frame == e.frame && indegree[i] != 0)
          fail("birth node at frame " + std::to_string(e.frame) + " has incoming edges");

  for (auto& [id, nodes] : by_track) {
    std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) { return graph.nodes[a].frame < graph.nodes[b].frame; });
    for (std::size_t k = 1; k < nodes.size(); ++k)
      if (!edge_set.count({nodes[k - 1], nodes[k]}))
        fail("track " + std::to_string(id) + " is not a connected path at frame " + std::to_string(graph.nodes[nodes[k]].frame));
  }
  return bad;
}

}  // namespace ptrack
