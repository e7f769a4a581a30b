#include "portiontrack/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "portiontrack/dataset.hpp"
#include "portiontrack/lineage_io.hpp"
#include "portiontrack/synthgen.hpp"
#include "portiontrack/v4d.hpp"

namespace ptrack {

namespace fs = std::filesystem;

namespace {

nlohmann::ordered_json index3_json(const Index3& v) { return {v.x(), v.y(), v.z()}; }

Index3 index3(const nlohmann::json& j, const char* name) {
  const auto a = j.get<std::vector<int>>();
  if (a.size() != 3) throw ValidationError(std::string(name) + " must be [x, y, z]");
  return {a[0], a[1], a[2]};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ValidationError("unknown config key '" + where + key + "'");
  }
}

}  // namespace

void PipelineConfig::validate() const {
  portion.validate();
  baseline.validate();
  if (threads < 0) throw ValidationError("threads must be >= 0");
  for (double s : features.smoothing_scales)
    if (!(s > 0.0)) throw ValidationError("smoothing scales must be positive");
  if (features.channels < 0) throw ValidationError("features.channels must be >= 0");
}

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["dataset"] = cfg.dataset.string();
  j["output"] = cfg.output.string();
  j["method"] = to_string(cfg.method);
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["features"] = {{"mode", cfg.features.mode == FeatureMode::external ? "external" : "derived"},
                   {"channels", cfg.features.channels},
                   {"smoothing_scales", cfg.features.smoothing_scales},
                   {"include_gradient", cfg.features.include_gradient},
                   {"spacing_aware", cfg.features.spacing_aware}};
  j["portion"] = {{"radius", index3_json(cfg.portion.radius)},       {"stride", index3_json(cfg.portion.stride)},
                  {"ext", index3_json(cfg.portion.ext)},             {"max_lag", cfg.portion.max_lag},
                  {"gamma", cfg.portion.gamma},                      {"search_stride", cfg.portion.search_stride}};
  j["baseline"] = {{"sigma_iou", cfg.baseline.sigma_iou},
                   {"expand_voxels", cfg.baseline.expand_voxels},
                   {"merge_ratio", cfg.baseline.merge_ratio},
                   {"nn_max_dist", cfg.baseline.nn_max_dist},
                   {"optimal_assignment", cfg.baseline.optimal_assignment}};
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  try {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown(j, {"dataset", "output", "method", "seed", "threads", "features", "portion", "baseline"}, "");
    if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
    if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
    if (j.contains("method")) cfg.method = method_from_string(j.at("method").get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("features")) {
      const auto& f = j.at("features");
      reject_unknown(f, {"mode", "channels", "smoothing_scales", "include_gradient", "spacing_aware"}, "features.");
      if (f.contains("mode")) {
        const auto mode = f.at("mode").get<std::string>();
        if (mode == "external") cfg.features.mode = FeatureMode::external;
        else if (mode == "derived") cfg.features.mode = FeatureMode::derived;
        else throw ValidationError("features.mode must be external or derived");
      }
      cfg.features.channels = f.value("channels", cfg.features.channels);
      cfg.features.smoothing_scales = f.value("smoothing_scales", cfg.features.smoothing_scales);
      cfg.features.include_gradient = f.value("include_gradient", cfg.features.include_gradient);
      cfg.features.spacing_aware = f.value("spacing_aware", cfg.features.spacing_aware);
    }
    if (j.contains("portion")) {
      const auto& p = j.at("portion");
      reject_unknown(p, {"radius", "stride", "ext", "max_lag", "gamma", "search_stride"}, "portion.");
      if (p.contains("radius")) cfg.portion.radius = index3(p.at("radius"), "portion.radius");
      if (p.contains("stride")) cfg.portion.stride = index3(p.at("stride"), "portion.stride");
      if (p.contains("ext")) cfg.portion.ext = index3(p.at("ext"), "portion.ext");
      cfg.portion.max_lag = p.value("max_lag", cfg.portion.max_lag);
      cfg.portion.gamma = p.value("gamma", cfg.portion.gamma);
      cfg.portion.search_stride = p.value("search_stride", cfg.portion.search_stride);
    }
    if (j.contains("baseline")) {
      const auto& b = j.at("baseline");
      reject_unknown(b, {"sigma_iou", "expand_voxels", "merge_ratio", "nn_max_dist", "optimal_assignment"}, "baseline.");
      cfg.baseline.sigma_iou = b.value("sigma_iou", cfg.baseline.sigma_iou);
      cfg.baseline.expand_voxels = b.value("expand_voxels", cfg.baseline.expand_voxels);
      cfg.baseline.merge_ratio = b.value("merge_ratio", cfg.baseline.merge_ratio);
      cfg.baseline.nn_max_dist = b.value("nn_max_dist", cfg.baseline.nn_max_dist);
      cfg.baseline.optimal_assignment = b.value("optimal_assignment", cfg.baseline.optimal_assignment);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  nlohmann::json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = nlohmann::json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

int effective_threads(int configured) {
  if (const char* env = std::getenv("PORTIONTRACK_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 0) throw ValidationError("PORTIONTRACK_THREADS must be a non-negative integer");
    return int(n);
  }
  return configured;
}

PipelineConfig load_config(const std::optional<fs::path>& path, const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  if (path) {
    j = nlohmann::json::parse(read_file(*path), nullptr, false);
    if (j.is_discarded()) throw ValidationError("config " + path->string() + " is not valid JSON");
  }
  for (const std::string& o : overrides) apply_override(j, o);
  PipelineConfig cfg = config_from_json(j);
  cfg.threads = effective_threads(cfg.threads);
  return cfg;
}

int cmd_synth(const fs::path& script_path, const fs::path& out_dir, std::uint64_t seed) {
  const nlohmann::json j = nlohmann::json::parse(read_file(script_path), nullptr, false);
  if (j.is_discarded()) throw ValidationError("script " + script_path.string() + " is not valid JSON");
  const SceneScript script = script_from_json(j);
  const SynthDataset ds = render(script, seed);
  write_dataset(out_dir, ds);
  std::cout << "wrote " << ds.labels.size() << " frames of '" << ds.name << "' to " << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_features(const PipelineConfig& cfg) {
  if (cfg.dataset.empty()) throw ValidationError("config needs a dataset path");
  if (cfg.features.mode != FeatureMode::derived) throw ValidationError("features command needs features.mode=derived");
  const Dataset ds = load_dataset(cfg.dataset);
  const std::vector<FeatureVolume> feats = dataset_features(cfg.dataset, ds, cfg.features);
  fs::create_directories(cfg.output);
  write_features(cfg.output, feats);
  std::cout << "wrote " << feats.size() << " feature frames (D=" << feats.front().channels() << ") to "
            << cfg.output.string() << "\n";
  return kExitOk;
}

int cmd_track(const PipelineConfig& cfg) {
  if (cfg.dataset.empty()) throw ValidationError("config needs a dataset path");
  const Dataset ds = load_dataset(cfg.dataset, cfg.method == Method::dfmt && cfg.features.mode == FeatureMode::derived);
  std::vector<FeatureVolume> feats;
  if (cfg.method == Method::dfmt) feats = dataset_features(cfg.dataset, ds, cfg.features);
  const DfmtResult result = run_tracker(ds.labels, feats, {cfg.method, cfg.portion, cfg.baseline, cfg.threads});
  fs::create_directories(cfg.output);
  save_graph(cfg.output / "tracks.json", result.graph);
  write_file(cfg.output / "tracks.csv", graph_to_csv(result.graph));
  nlohmann::ordered_json timing = timing_to_json(result.timing);
  timing["method"] = to_string(cfg.method);
  timing["threads"] = cfg.threads;
  write_file(cfg.output / "timing.json", timing.dump(1) + "\n");
  std::cout << to_string(cfg.method) << ": " << result.graph.nodes.size() << " nodes, " << result.graph.events.size()
            << " events -> " << (cfg.output / "tracks.json").string() << "\n";
  return kExitOk;
}

int cmd_eval(const fs::path& tracks, const fs::path& gt, const std::optional<fs::path>& report) {
  const TrackGraph graph = load_graph(tracks);
  const GroundTruth truth = load_ground_truth(gt);
  const EvalReport r = evaluate(graph, truth);
  const std::string table = format_table({r});
  if (report) {
    write_file(*report, report_to_json(r).dump(1) + "\n");
    fs::path txt = *report;
    txt.replace_extension(".txt");
    write_file(txt, table);
  }
  std::cout << table;
  return kExitOk;
}

int cmd_corrmap(const PipelineConfig& cfg, std::uint32_t object_id, int frame, bool include_self) {
  if (cfg.dataset.empty()) throw ValidationError("config needs a dataset path");
  const Dataset ds = load_dataset(cfg.dataset, cfg.features.mode == FeatureMode::derived);
  const std::vector<FeatureVolume> feats = dataset_features(cfg.dataset, ds, cfg.features);
  const auto samples = correlation_map(ds.labels, feats, frame, object_id, cfg.portion, include_self);
  fs::create_directories(cfg.output);
  const std::string stem = "corrmap_t" + std::to_string(frame) + "_obj" + std::to_string(object_id);
  write_file(cfg.output / (stem + ".csv"), correlation_csv(samples));
  for (int lag = include_self ? 0 : 1; lag <= cfg.portion.max_lag && lag < frame; ++lag)
    write_file(cfg.output / (stem + "_lag" + std::to_string(lag) + ".pgm"), correlation_pgm(samples, lag, ds.labels.front().dims()));
  std::cout << samples.size() << " candidate centers -> " << (cfg.output / (stem + ".csv")).string() << "\n";
  return kExitOk;
}

std::vector<BenchEntry> run_benchmark(const PipelineConfig& cfg, const std::vector<Method>& methods,
                                      const std::function<bool(const std::string&)>& keep,
                                      const std::function<void(const BenchEntry&)>& progress) {
  std::vector<BenchEntry> out;
  for (NoiseLevel level : {NoiseLevel::zero, NoiseLevel::low, NoiseLevel::medium})
    for (const SceneScript& script : default_benchmark_scripts(cfg.seed, level)) {
      if (keep && !keep(script.name)) continue;
      const SynthDataset ds = render(script, cfg.seed);
      std::vector<FeatureVolume> feats;
      for (const IntensityVolume& img : ds.intensity) feats.push_back(derive_features(img, cfg.features));
      for (Method m : methods) {
        const auto start = std::chrono::steady_clock::now();
        BenchEntry e;
        e.dataset = ds.name;
        e.method = m;
        e.graph = run_tracker(ds.labels, feats, {m, cfg.portion, cfg.baseline, cfg.threads}).graph;
        e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        e.report = evaluate(e.graph, ds.truth);
        e.report.method = std::string(to_string(m));
        if (progress) progress(e);
        out.push_back(std::move(e));
      }
    }
  return out;
}

std::string bench_report(const std::vector<BenchEntry>& entries) {
  std::ostringstream os;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchEntry*>> by_dataset;
  for (const BenchEntry& e : entries) {
    if (!by_dataset.count(e.dataset)) order.push_back(e.dataset);
    by_dataset[e.dataset].push_back(&e);
  }
  for (const std::string& name : order) {
    std::vector<EvalReport> reports;
    for (const BenchEntry* e : by_dataset[name]) reports.push_back(e->report);
    os << "== " << name << "\n" << format_table(reports) << "\n";
  }
  std::vector<std::string> methods;
  std::map<std::string, std::pair<EvalReport, int>> pooled;
  for (const BenchEntry& e : entries) {
    const std::string m(to_string(e.method));
    auto [it, fresh] = pooled.try_emplace(m);
    if (fresh) methods.push_back(m);
    EvalReport& r = it->second.first;
    r.method = m;
    r.tracking_accuracy += e.report.tracking_accuracy;
    r.events.split += e.report.events.split;
    r.events.merge += e.report.events.merge;
    r.events.combined += e.report.events.combined;
    ++it->second.second;
  }
  std::vector<EvalReport> rows;
  for (const std::string& m : methods) {
    EvalReport r = pooled[m].first;
    r.tracking_accuracy /= double(pooled[m].second);
    r.split = metrics(r.events.split);
    r.merge = metrics(r.events.merge);
    r.combined = metrics(r.events.combined);
    rows.push_back(r);
  }
  os << "== pooled over " << order.size() << " datasets\n" << format_table(rows);
  return os.str();
}

int cmd_bench(const PipelineConfig& cfg) {
  const std::vector<Method> methods{Method::dfmt, Method::iou, Method::nn, Method::link, Method::iou_link};
  const auto entries = run_benchmark(cfg, methods, {}, [](const BenchEntry& e) {
    std::cerr << e.dataset << " " << to_string(e.method) << " " << e.seconds << " s\n";
  });
  const std::string report = bench_report(entries);
  fs::create_directories(cfg.output);
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const BenchEntry& e : entries) {
    nlohmann::ordered_json r = report_to_json(e.report);
    r["dataset"] = e.dataset;
    r["seconds"] = e.seconds;
    j.push_back(std::move(r));
  }
  write_file(cfg.output / "bench.json", j.dump(1) + "\n");
  write_file(cfg.output / "bench.txt", report);
  std::cout << report;
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Portion-matching multi-object tracker for 4D volumes"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "pipeline config JSON");
    sub->add_option("--set", overrides, "override a config key, e.g. portion.gamma=0.6")->allow_extra_args(false);
  };

  std::string script, out_dir = "dataset";
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "render a scene script into a dataset directory");
  synth->add_option("script", script, "scene script JSON")->required();
  synth->add_option("-o,--out", out_dir, "output directory");
  synth->add_option("--seed", seed, "noise and label seed");

  auto* features = app.add_subcommand("features", "derive feature volumes for a dataset");
  add_config(features);
  auto* track = app.add_subcommand("track", "track a dataset with the configured method");
  add_config(track);

  std::string tracks_file, gt_file;
  std::optional<std::string> report_file;
  auto* eval = app.add_subcommand("eval", "score a track file against ground truth");
  eval->add_option("tracks", tracks_file, "tracks.json")->required();
  eval->add_option("gt", gt_file, "gt.json")->required();
  eval->add_option("-o,--out", report_file, "report JSON path (a .txt table is written next to it)");

  std::uint32_t object_id = 0;
  int frame = 0;
  bool include_self = false;
  auto* corrmap = app.add_subcommand("corrmap", "export correlation maps of one object");
  add_config(corrmap);
  corrmap->add_option("--object", object_id, "segmentation label at the query frame")->required();
  corrmap->add_option("--frame", frame, "query frame (1-based)")->required();
  corrmap->add_flag("--include-self", include_self, "also correlate against the query frame itself (lag 0)");

  auto* bench = app.add_subcommand("bench", "run the synthetic benchmark for every method");
  add_config(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    auto config = [&] { return load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, overrides); };
    if (synth->parsed()) return cmd_synth(script, out_dir, seed);
    if (features->parsed()) return cmd_features(config());
    if (track->parsed()) return cmd_track(config());
    if (eval->parsed()) return cmd_eval(tracks_file, gt_file, report_file ? std::optional<fs::path>(*report_file) : std::nullopt);
    if (corrmap->parsed()) return cmd_corrmap(config(), object_id, frame, include_self);
    if (bench->parsed()) return cmd_bench(config());
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace ptrack
