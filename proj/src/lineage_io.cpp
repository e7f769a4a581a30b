#include "portiontrack/lineage_io.hpp"

#include <algorithm>
#include <sstream>

#include "portiontrack/v4d.hpp"

namespace ptrack {

nlohmann::ordered_json graph_to_json(const TrackGraph& graph) {
  nlohmann::ordered_json j;
  j["method"] = graph.method;
  j["max_lag"] = graph.max_lag;
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (const TrackNode& n : graph.nodes)
    nodes.push_back({{"frame", n.frame}, {"label", n.label}, {"track_id", n.track_id}, {"voxels", n.voxels}});
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const TrackEdge& e : graph.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"kind", to_string(e.kind)}, {"lag", e.lag}});
  auto& events = j["events"] = nlohmann::ordered_json::array();
  for (const EventRecord& e : graph.events)
    events.push_back({{"kind", to_string(e.kind)}, {"frame", e.frame}, {"parents", e.parents}, {"children", e.children}});
  auto& tracks = j["tracks"] = nlohmann::ordered_json::array();
  for (const auto& [id, score] : graph.track_scores) tracks.push_back({{"track_id", id}, {"log_score", score}});
  return j;
}

TrackGraph graph_from_json(const nlohmann::json& j) {
  TrackGraph g;
  try {
    g.method = j.value("method", std::string("unknown"));
    g.max_lag = j.value("max_lag", 1);
    for (const auto& n : j.at("nodes"))
      g.nodes.push_back({n.at("frame").get<int>(), n.at("label").get<std::uint32_t>(), n.at("track_id").get<TrackId>(),
                         n.value("voxels", std::int64_t(0))});
    if (j.contains("edges"))
      for (const auto& e : j.at("edges")) {
        TrackEdge edge{e.at("from").get<std::size_t>(), e.at("to").get<std::size_t>(),
                       event_kind_from_string(e.at("kind").get<std::string>()), e.at("lag").get<int>()};
        if (edge.from >= g.nodes.size() || edge.to >= g.nodes.size()) throw ValidationError("edge references a missing node");
        g.edges.push_back(edge);
      }
    for (const auto& e : j.at("events"))
      g.events.push_back({event_kind_from_string(e.at("kind").get<std::string>()), e.at("frame").get<int>(),
                          e.at("parents").get<std::vector<TrackId>>(), e.at("children").get<std::vector<TrackId>>()});
    if (j.contains("tracks"))
      for (const auto& t : j.at("tracks")) g.track_scores[t.at("track_id").get<TrackId>()] = t.at("log_score").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed track file: ") + e.what());
  }
  return g;
}

std::string graph_to_csv(const TrackGraph& graph) {
  std::vector<const TrackNode*> rows;
  for (const TrackNode& n : graph.nodes) rows.push_back(&n);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return std::tie(a->frame, a->label) < std::tie(b->frame, b->label); });
  std::ostringstream out;
  out << "frame,segmentation_label,track_id\n";
  for (const TrackNode* n : rows) out << n->frame << ',' << n->label << ',' << n->track_id << '\n';
  return out.str();
}

void save_graph(const std::filesystem::path& json_path, const TrackGraph& graph) {
  write_file(json_path, graph_to_json(graph).dump(1) + "\n");
}

TrackGraph load_graph(const std::filesystem::path& json_path) {
  const std::string text = read_file(json_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(json_path.string() + ": " + e.what());
  }
  return graph_from_json(j);
}

}  // namespace ptrack
