#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "portiontrack/events.hpp"

namespace ptrack {

/// {method, max_lag, nodes:[{frame,label,track_id,voxels}],
///  edges:[{from,to,kind,lag}], events:[{kind,frame,parents,children}],
///  tracks:[{track_id,log_score}]}
nlohmann::ordered_json graph_to_json(const TrackGraph& graph);
TrackGraph graph_from_json(const nlohmann::json& j);

/// frame,segmentation_label,track_id rows sorted by frame then label.
std::string graph_to_csv(const TrackGraph& graph);

void save_graph(const std::filesystem::path& json_path, const TrackGraph& graph);
TrackGraph load_graph(const std::filesystem::path& json_path);

}  // namespace ptrack
