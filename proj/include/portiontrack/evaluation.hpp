#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "portiontrack/events.hpp"

namespace ptrack {

struct EventWindow {
  EventKind kind = EventKind::split;
  /// GT track ids involved (parents and children together).
  std::vector<std::uint32_t> participants;
  std::vector<std::uint32_t> parents;
  std::vector<std::uint32_t> children;
  int t_start = 0;
  int t_end = 0;
  /// Frame where the children first appear, when known exactly.
  std::optional<int> frame;
};

struct GroundTruth {
  std::map<std::pair<int, std::uint32_t>, std::uint32_t> assignments;  // (frame, label) -> GT track
  std::vector<EventWindow> event_windows;

  void validate() const;
};

nlohmann::ordered_json gt_to_json(const GroundTruth& gt);
GroundTruth gt_from_json(const nlohmann::json& j);
void save_ground_truth(const std::filesystem::path& path, const GroundTruth& gt);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Reads a prediction back as ground truth: track ids become GT ids and
/// every non-continuation event becomes a zero-width window.
GroundTruth graph_as_ground_truth(const TrackGraph& graph);

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
  double precision = 1.0;
  double sensitivity = 1.0;
  double accuracy = 1.0;
};

/// precision = TP/(TP+FP), sensitivity = TP/(TP+FN),
/// accuracy = (TP+TN)/(TP+FP+TN+FN); 0/0 evaluates to 1.
Metrics metrics(const Confusion& c);

struct EventConfusion {
  Confusion split;
  Confusion merge;
  Confusion combined;
};

/// Window-based event scoring for split and merge. A GT window is a TP when
/// an unconsumed prediction of the same kind falls inside it and its
/// participants map onto the same GT ids. TN is always 0.
EventConfusion match_events(const TrackGraph& pred, const GroundTruth& gt);

/// Fraction of nodes whose predecessor GT-id set matches the GT lineage.
double tracking_accuracy(const TrackGraph& pred, const GroundTruth& gt);

struct EvalReport {
  std::string method;
  double tracking_accuracy = 0.0;
  EventConfusion events;
  Metrics split;
  Metrics merge;
  Metrics combined;
};

EvalReport evaluate(const TrackGraph& pred, const GroundTruth& gt);
nlohmann::ordered_json report_to_json(const EvalReport& r);

/// Text table: Method, Tracking Accuracy, Split Accuracy, Merge Accuracy,
/// S&M Accuracy, S&M Sensitivity, S&M Precision.
std::string format_table(const std::vector<EvalReport>& reports, const std::vector<std::string>& row_labels = {});

}  // namespace ptrack
