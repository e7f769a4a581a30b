#include "portiontrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <sstream>
#include <tuple>

#include <omp.h>

namespace ptrack {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

int worker_count(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

const ObjectMatchSets* find_object(const std::vector<ObjectMatchSets>& objects, std::uint32_t label) {
  auto it = std::lower_bound(objects.begin(), objects.end(), label,
                             [](const ObjectMatchSets& o, std::uint32_t l) { return o.label < l; });
  return it != objects.end() && it->label == label ? &*it : nullptr;
}

}  // namespace

std::vector<ObjectMatchSets> match_frame(const LabelVolume& labels, const FeatureVolume& feats,
                                         std::span<const SearchFrame* const> past, const PortionSpec& spec, int threads) {
  if (!feats.dims().same_grid(labels.dims())) throw DataError("feature and label grids differ");
  for (const SearchFrame* p : past)
    if (p->channels() != feats.channels())
      throw DataError("frame " + std::to_string(labels.frame()) + " has D=" + std::to_string(feats.channels()) +
                      " but frame " + std::to_string(p->frame()) + " has D=" + std::to_string(p->channels()));
  const std::vector<ObjectRecord> objects = extract_objects(labels);
  std::vector<ObjectMatchSets> out(objects.size());
  const int n = int(objects.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_count(threads))
  for (int i = 0; i < n; ++i) {
    const ObjectRecord& obj = objects[std::size_t(i)];
    ObjectMatchSets& res = out[std::size_t(i)];
    res.label = obj.id;
    res.voxels = obj.voxel_count;
    std::vector<Portion> portions = sample_portions(obj, labels, feats, spec);
    res.portions.reserve(portions.size());
    for (std::size_t k = 0; k < portions.size(); ++k) {
      std::vector<CandidateMatch> candidates;
      for (const SearchFrame* p : past) {
        std::vector<CandidateMatch> c = extended_search(portions[k], *p, spec);
        candidates.insert(candidates.end(), c.begin(), c.end());
      }
      MatchSet ms = best_match(candidates, spec.gamma);
      ms.portion_index = k;
      ms.portion_center = portions[k].center;
      res.portions.push_back(std::move(ms));
    }
  }
  return out;
}

DfmtResult dfmt_track(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats, const PortionSpec& spec,
                      int threads) {
  spec.validate();
  if (labels.size() != feats.size()) throw DataError("label and feature frame counts differ");
  DfmtResult result;
  LineageBuilder builder(spec.max_lag, "dfmt");
  std::deque<std::unique_ptr<SearchFrame>> window;  // front = most recent past frame
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int t = int(k) + 1;
    if (labels[k].frame() != t || feats[k].frame() != t)
      throw DataError("frame " + std::to_string(t) + " is stored with a different frame number");
    if (k > 0 && !labels[k].dims().same_grid(labels[0].dims()))
      throw DataError("frame " + std::to_string(t) + " has a different grid size");
    FrameTiming timing;
    timing.frame = t;

    std::vector<const SearchFrame*> past;
    for (const auto& f : window) past.push_back(f.get());
    auto start = Clock::now();
    std::vector<ObjectMatchSets> matches = match_frame(labels[k], feats[k], past, spec, threads);
    timing.match_ms = elapsed_ms(start);

    start = Clock::now();
    const Translator translate = builder.translator();
    std::vector<ObjectUnion> unions;
    unions.reserve(matches.size());
    for (const ObjectMatchSets& m : matches) {
      unions.push_back({m.label, m.voxels, object_match_union(m.portions, t, translate)});
      timing.portions += m.portions.size();
    }
    timing.objects = matches.size();
    builder.add_frame(t, unions);
    timing.classify_ms = elapsed_ms(start);

    start = Clock::now();
    window.push_front(std::make_unique<SearchFrame>(labels[k], feats[k], spec.radius));
    if (int(window.size()) > spec.max_lag) window.pop_back();
    timing.prepare_ms = elapsed_ms(start);

    result.matches.push_back(std::move(matches));
    result.timing.push_back(timing);
  }
  result.graph = builder.graph();
  result.graph.track_scores = score_tracks(result.graph, result.matches);
  return result;
}

std::map<TrackId, double> score_tracks(const TrackGraph& graph, const std::vector<std::vector<ObjectMatchSets>>& matches) {
  std::vector<std::vector<std::size_t>> in_edges(graph.nodes.size());
  for (const TrackEdge& e : graph.edges) in_edges[e.to].push_back(e.from);
  auto step_back = [&](std::size_t n) -> std::optional<std::size_t> {
    const auto& sources = in_edges[n];
    if (sources.empty()) return std::nullopt;
    std::size_t pick = sources.front();
    for (std::size_t s : sources) {
      const TrackNode& a = graph.nodes[s];
      const TrackNode& b = graph.nodes[pick];
      const bool a_same = a.track_id == graph.nodes[n].track_id, b_same = b.track_id == graph.nodes[n].track_id;
      if (a_same != b_same ? a_same : a.track_id < b.track_id) pick = s;
    }
    return pick;
  };

  std::map<TrackId, std::vector<double>> inner;
  for (std::size_t n = 0; n < graph.nodes.size(); ++n) {
    const TrackNode& node = graph.nodes[n];
    auto& values = inner[node.track_id];
    TrackFrame tf;
    std::optional<std::size_t> cur = step_back(n);
    while (cur) {
      const int lag = node.frame - graph.nodes[*cur].frame;
      if (lag > graph.max_lag) break;
      tf.predecessors.emplace(lag, graph.nodes[*cur].label);
      cur = step_back(*cur);
    }
    if (tf.predecessors.empty()) {
      if (values.empty()) continue;  // first node of a born track
      values.push_back(0.0);
      continue;
    }
    const std::size_t k = std::size_t(node.frame - 1);
    if (k < matches.size())
      if (const ObjectMatchSets* obj = find_object(matches[k], node.label)) tf.portions = obj->portions;
    values.push_back(frame_inner_value(tf));
  }
  std::map<TrackId, double> scores;
  for (const auto& [id, values] : inner) scores[id] = track_score(values, graph.max_lag);
  return scores;
}

nlohmann::ordered_json timing_to_json(std::span<const FrameTiming> timing) {
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  double match = 0.0, classify = 0.0, prepare = 0.0;
  for (const FrameTiming& f : timing) {
    frames.push_back({{"frame", f.frame},
                      {"objects", f.objects},
                      {"portions", f.portions},
                      {"match_ms", f.match_ms},
                      {"classify_ms", f.classify_ms},
                      {"prepare_ms", f.prepare_ms}});
    match += f.match_ms;
    classify += f.classify_ms;
    prepare += f.prepare_ms;
  }
  return {{"frames", std::move(frames)},
          {"modules", {{"portion_matching_ms", match}, {"event_classification_ms", classify}, {"search_prepare_ms", prepare}}}};
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::dfmt: return "dfmt";
    case Method::iou: return "iou";
    case Method::nn: return "nn";
    case Method::link: return "link";
    case Method::iou_link: return "iou+link";
  }
  return "dfmt";
}

Method method_from_string(std::string_view s) {
  for (Method m : {Method::dfmt, Method::iou, Method::nn, Method::link, Method::iou_link})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown method '" + std::string(s) + "' (expected dfmt, iou, nn, link or iou+link)");
}

DfmtResult run_tracker(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats, const TrackRequest& req) {
  if (req.method == Method::dfmt) return dfmt_track(labels, feats, req.spec, req.threads);
  req.baseline.validate();
  DfmtResult result;
  const auto start = Clock::now();
  switch (req.method) {
    case Method::iou: result.graph = iou_track(labels, req.baseline); break;
    case Method::nn: result.graph = nn_track(labels, req.baseline.nn_max_dist); break;
    case Method::link: result.graph = link_track(labels, req.baseline); break;
    case Method::iou_link: result.graph = iou_link_track(labels, req.baseline); break;
    case Method::dfmt: break;
  }
  FrameTiming total;
  total.match_ms = elapsed_ms(start);
  result.timing.push_back(total);
  return result;
}

std::vector<CorrelationSample> correlation_map(std::span<const LabelVolume> labels, std::span<const FeatureVolume> feats,
                                               int t, std::uint32_t label, const PortionSpec& spec, bool include_self) {
  spec.validate();
  if (t < 1 || std::size_t(t) > labels.size() || labels.size() != feats.size())
    throw ValidationError("frame " + std::to_string(t) + " is outside the dataset");
  const std::size_t k = std::size_t(t - 1);
  const std::vector<ObjectRecord> objects = extract_objects(labels[k]);
  auto obj = std::find_if(objects.begin(), objects.end(), [&](const ObjectRecord& o) { return o.id == label; });
  if (obj == objects.end())
    throw ValidationError("object " + std::to_string(label) + " does not exist at frame " + std::to_string(t));
  const std::vector<Portion> portions = sample_portions(*obj, labels[k], feats[k], spec);

  std::map<std::tuple<int, int, int, int>, CorrelationSample> best;
  for (int lag = include_self ? 0 : 1; lag <= spec.max_lag && lag < t; ++lag) {
    const std::size_t pk = k - std::size_t(lag);
    if (feats[pk].channels() != feats[k].channels()) throw DataError("feature channel count differs across frames");
    const SearchFrame past(labels[pk], feats[pk], spec.radius);
    for (const Portion& q : portions)
      scan_extended_box(q, past, spec, [&](const Index3& c, std::uint32_t id, double rho) {
        const auto key = std::make_tuple(lag, c.z(), c.y(), c.x());
        auto [it, fresh] = best.try_emplace(key, CorrelationSample{lag, id, c, rho});
        if (!fresh && rho > it->second.rho) it->second.rho = rho;
      });
  }
  std::vector<CorrelationSample> out;
  out.reserve(best.size());
  for (auto& [key, s] : best) out.push_back(s);
  return out;
}

std::string correlation_csv(std::span<const CorrelationSample> samples) {
  std::ostringstream os;
  os.precision(10);
  os << "lag,candidate_object_id,center_x,center_y,center_z,rho\n";
  for (const CorrelationSample& s : samples)
    os << s.lag << ',' << s.object_id << ',' << s.center.x() << ',' << s.center.y() << ',' << s.center.z() << ',' << s.rho
       << '\n';
  return os.str();
}

std::string correlation_pgm(std::span<const CorrelationSample> samples, int lag, const Dims& dims) {
  std::vector<double> plane(std::size_t(dims.x) * dims.y, -2.0);
  for (const CorrelationSample& s : samples) {
    if (s.lag != lag) continue;
    double& v = plane[std::size_t(s.center.x()) + std::size_t(dims.x) * s.center.y()];
    v = std::max(v, s.rho);
  }
  std::string out = "P5\n" + std::to_string(dims.x) + " " + std::to_string(dims.y) + "\n255\n";
  for (double v : plane) {
    const double g = v < -1.5 ? 0.0 : std::round((std::clamp(v, -1.0, 1.0) + 1.0) * 127.5);
    out.push_back(char(static_cast<unsigned char>(g)));
  }
  return out;
}

}  // namespace ptrack
