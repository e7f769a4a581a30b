#include "portiontrack/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "portiontrack/v4d.hpp"

namespace ptrack {

namespace {

std::string label_of(int frame, std::uint32_t label) {
  return "(frame " + std::to_string(frame) + ", label " + std::to_string(label) + ")";
}

using IdSet = std::set<std::uint32_t>;

// Parent/child split of a window when the file gives only participants:
// participants that first appear at or after t_start are children.
void infer_roles(EventWindow& w, const std::map<std::uint32_t, int>& first_frame) {
  if (!w.parents.empty() || !w.children.empty()) return;
  for (std::uint32_t id : w.participants) {
    auto it = first_frame.find(id);
    if (it != first_frame.end() && it->second >= w.t_start) w.children.push_back(id);
    else w.parents.push_back(id);
  }
}

}  // namespace

void GroundTruth::validate() const {
  IdSet ids;
  for (const auto& [key, g] : assignments) ids.insert(g);
  for (const EventWindow& w : event_windows) {
    if (w.t_start > w.t_end) throw ValidationError("GT event window has t_start > t_end");
    for (std::uint32_t id : w.participants)
      if (!ids.count(id)) throw ValidationError("GT event references unknown track " + std::to_string(id));
  }
}

nlohmann::ordered_json gt_to_json(const GroundTruth& gt) {
  nlohmann::ordered_json j;
  auto& a = j["assignments"] = nlohmann::ordered_json::array();
  for (const auto& [key, g] : gt.assignments) a.push_back({{"frame", key.first}, {"label", key.second}, {"gt_track", g}});
  auto& ev = j["events"] = nlohmann::ordered_json::array();
  for (const EventWindow& w : gt.event_windows) {
    nlohmann::ordered_json e{{"kind", to_string(w.kind)}, {"participants", w.participants}, {"window", {w.t_start, w.t_end}}};
    if (!w.parents.empty()) e["parents"] = w.parents;
    if (!w.children.empty()) e["children"] = w.children;
    if (w.frame) e["frame"] = *w.frame;
    ev.push_back(std::move(e));
  }
  return j;
}

GroundTruth gt_from_json(const nlohmann::json& j) {
  GroundTruth gt;
  try {
    for (const auto& a : j.at("assignments"))
      gt.assignments[{a.at("frame").get<int>(), a.at("label").get<std::uint32_t>()}] = a.at("gt_track").get<std::uint32_t>();
    std::map<std::uint32_t, int> first;
    for (const auto& [key, g] : gt.assignments) {
      auto [it, fresh] = first.try_emplace(g, key.first);
      if (!fresh) it->second = std::min(it->second, key.first);
    }
    if (j.contains("events"))
      for (const auto& e : j.at("events")) {
        EventWindow w;
        w.kind = event_kind_from_string(e.at("kind").get<std::string>());
        w.participants = e.at("participants").get<std::vector<std::uint32_t>>();
        const auto win = e.at("window").get<std::vector<int>>();
        if (win.size() != 2) throw ValidationError("GT event window must be [t0, t1]");
        w.t_start = win[0];
        w.t_end = win[1];
        if (e.contains("parents")) w.parents = e.at("parents").get<std::vector<std::uint32_t>>();
        if (e.contains("children")) w.children = e.at("children").get<std::vector<std::uint32_t>>();
        if (e.contains("frame")) w.frame = e.at("frame").get<int>();
        infer_roles(w, first);
        gt.event_windows.push_back(std::move(w));
      }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed ground truth: ") + e.what());
  }
  gt.validate();
  return gt;
}

void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
  write_file(path, gt_to_json(gt).dump(1) + "\n");
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return gt_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

GroundTruth graph_as_ground_truth(const TrackGraph& graph) {
  GroundTruth gt;
  for (const TrackNode& n : graph.nodes) gt.assignments[{n.frame, n.label}] = n.track_id;
  for (const EventRecord& e : graph.events) {
    if (e.kind == EventKind::continuation) continue;
    EventWindow w;
    w.kind = e.kind;
    w.parents = e.parents;
    w.children = e.children;
    IdSet all(e.parents.begin(), e.parents.end());
    all.insert(e.children.begin(), e.children.end());
    w.participants.assign(all.begin(), all.end());
    w.t_start = w.t_end = e.frame;
    w.frame = e.frame;
    gt.event_windows.push_back(std::move(w));
  }
  return gt;
}

Metrics metrics(const Confusion& c) {
  auto ratio = [](double num, double den) { return den == 0.0 ? 1.0 : num / den; };
  Metrics m;
  m.precision = ratio(double(c.tp), double(c.tp + c.fp));
  m.sensitivity = ratio(double(c.tp), double(c.tp + c.fn));
  m.accuracy = ratio(double(c.tp + c.tn), double(c.tp + c.fp + c.tn + c.fn));
  return m;
}

namespace {

struct Alignment {
  std::map<std::pair<int, std::uint32_t>, std::uint32_t> gt_of_node_key;
  std::vector<std::uint32_t> gt_of_node;                                      // per pred node
  std::map<TrackId, std::vector<std::pair<int, std::size_t>>> nodes_of_track;  // sorted by frame
};

Alignment align(const TrackGraph& pred, const GroundTruth& gt) {
  Alignment a;
  a.gt_of_node.resize(pred.nodes.size());
  std::set<std::pair<int, std::uint32_t>> seen;
  for (std::size_t i = 0; i < pred.nodes.size(); ++i) {
    const TrackNode& n = pred.nodes[i];
    auto it = gt.assignments.find({n.frame, n.label});
    if (it == gt.assignments.end())
      throw ValidationError("prediction node " + label_of(n.frame, n.label) + " has no ground-truth assignment (frames misaligned)");
    a.gt_of_node[i] = it->second;
    seen.insert({n.frame, n.label});
    a.nodes_of_track[n.track_id].push_back({n.frame, i});
  }
  for (const auto& [key, g] : gt.assignments)
    if (!seen.count(key))
      throw ValidationError("ground-truth object " + label_of(key.first, key.second) + " is missing from the prediction (frames misaligned)");
  for (auto& [id, v] : a.nodes_of_track) std::sort(v.begin(), v.end());
  return a;
}

// GT ids touched by a predicted event, resolved through the nodes around it.
IdSet event_participants(const EventRecord& e, const Alignment& a) {
  IdSet out;
  for (TrackId p : e.parents) {
    auto it = a.nodes_of_track.find(p);
    if (it == a.nodes_of_track.end()) continue;
    const std::pair<int, std::size_t>* last = nullptr;
    for (const auto& fn : it->second)
      if (fn.first < e.frame) last = &fn;
    if (last) out.insert(a.gt_of_node[last->second]);
  }
  for (TrackId c : e.children) {
    auto it = a.nodes_of_track.find(c);
    if (it == a.nodes_of_track.end()) continue;
    for (const auto& fn : it->second)
      if (fn.first == e.frame) out.insert(a.gt_of_node[fn.second]);
  }
  return out;
}

}  // namespace

EventConfusion match_events(const TrackGraph& pred, const GroundTruth& gt) {
  gt.validate();
  const Alignment a = align(pred, gt);

  struct Pred {
    EventKind kind;
    int frame;
    IdSet participants;
    bool used = false;
  };
  std::vector<Pred> preds;
  for (const EventRecord& e : pred.events)
    if (e.kind == EventKind::split || e.kind == EventKind::merge) preds.push_back({e.kind, e.frame, event_participants(e, a)});
  std::sort(preds.begin(), preds.end(), [](const Pred& x, const Pred& y) {
    return std::tie(x.frame, x.kind, x.participants) < std::tie(y.frame, y.kind, y.participants);
  });

  std::vector<const EventWindow*> windows;
  for (const EventWindow& w : gt.event_windows)
    if (w.kind == EventKind::split || w.kind == EventKind::merge) windows.push_back(&w);
  std::sort(windows.begin(), windows.end(), [](const EventWindow* x, const EventWindow* y) {
    return std::tie(x->t_start, x->t_end, x->kind, x->participants) < std::tie(y->t_start, y->t_end, y->kind, y->participants);
  });

  EventConfusion out;
  auto slot = [&](EventKind k) -> Confusion& { return k == EventKind::split ? out.split : out.merge; };
  for (const EventWindow* w : windows) {
    const IdSet want(w->participants.begin(), w->participants.end());
    bool hit = false;
    for (Pred& p : preds) {
      if (p.used || p.kind != w->kind || p.frame < w->t_start || p.frame > w->t_end || p.participants != want) continue;
      p.used = true;
      hit = true;
      break;
    }
    (hit ? slot(w->kind).tp : slot(w->kind).fn) += 1;
  }
  for (const Pred& p : preds)
    if (!p.used) slot(p.kind).fp += 1;
  out.combined = out.split;
  out.combined += out.merge;
  return out;
}

double tracking_accuracy(const TrackGraph& pred, const GroundTruth& gt) {
  const Alignment a = align(pred, gt);
  if (pred.nodes.empty()) return 1.0;

  std::map<std::uint32_t, int> first_frame;
  for (const auto& [key, g] : gt.assignments) {
    auto [it, fresh] = first_frame.try_emplace(g, key.first);
    if (!fresh) it->second = std::min(it->second, key.first);
  }
  // Lineage parents introduced at (frame, child GT id).
  std::map<std::pair<int, std::uint32_t>, IdSet> event_parents;
  for (const EventWindow& w : gt.event_windows) {
    if (w.parents.empty()) continue;
    for (std::uint32_t c : w.children) {
      int at;
      if (w.frame) {
        at = *w.frame;
      } else {
        auto it = first_frame.find(c);
        if (it == first_frame.end()) continue;
        at = it->second;
      }
      event_parents[{at, c}].insert(w.parents.begin(), w.parents.end());
    }
  }

  std::vector<IdSet> pred_sets(pred.nodes.size());
  for (const TrackEdge& e : pred.edges) pred_sets[e.to].insert(a.gt_of_node[e.from]);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.nodes.size(); ++i) {
    const int t = pred.nodes[i].frame;
    const std::uint32_t g = a.gt_of_node[i];
    IdSet want;
    if (first_frame.at(g) < t) want.insert(g);
    if (auto it = event_parents.find({t, g}); it != event_parents.end()) want.insert(it->second.begin(), it->second.end());
    if (want == pred_sets[i]) ++correct;
  }
  return double(correct) / double(pred.nodes.size());
}

EvalReport evaluate(const TrackGraph& pred, const GroundTruth& gt) {
  EvalReport r;
  r.method = pred.method;
  r.tracking_accuracy = tracking_accuracy(pred, gt);
  r.events = match_events(pred, gt);
  r.split = metrics(r.events.split);
  r.merge = metrics(r.events.merge);
  r.combined = metrics(r.events.combined);
  return r;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
  auto conf = [](const Confusion& c) { return nlohmann::ordered_json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}; };
  auto met = [](const Metrics& m) {
    return nlohmann::ordered_json{{"precision", m.precision}, {"sensitivity", m.sensitivity}, {"accuracy", m.accuracy}};
  };
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["tracking_accuracy"] = r.tracking_accuracy;
  j["split"] = {{"confusion", conf(r.events.split)}, {"metrics", met(r.split)}};
  j["merge"] = {{"confusion", conf(r.events.merge)}, {"metrics", met(r.merge)}};
  j["split_and_merge"] = {{"confusion", conf(r.events.combined)}, {"metrics", met(r.combined)}};
  return j;
}

std::string format_table(const std::vector<EvalReport>& reports, const std::vector<std::string>& row_labels) {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Method", "Tracking Accuracy", "Split Accuracy", "Merge Accuracy", "S&M Accuracy", "S&M Sensitivity", "S&M Precision"});
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    rows.push_back({i < row_labels.size() ? row_labels[i] : r.method, pct(r.tracking_accuracy), pct(r.split.accuracy),
                    pct(r.merge.accuracy), pct(r.combined.accuracy), pct(r.combined.sensitivity), pct(r.combined.precision)});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "  " : "") << row[c];
      if (c + 1 < row.size()) out << std::string(width[c] - row[c].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ptrack
