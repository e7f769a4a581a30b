#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "portiontrack/evaluation.hpp"
#include "portiontrack/volume.hpp"

namespace ptrack {

/// One ellipsoidal blob alive on frames [first_frame, last_frame].
struct BlobSpec {
  std::uint32_t id = 0;
  int first_frame = 1;
  int last_frame = 1;
  std::vector<Eigen::Vector3d> trajectory;  // one center per live frame
  std::vector<Eigen::Vector3d> radii;       // one set of semi-axes per live frame
  double intensity = 100.0;
  std::uint64_t texture_seed = 0;

  bool alive(int t) const { return t >= first_frame && t <= last_frame; }
  const Eigen::Vector3d& center_at(int t) const { return trajectory[std::size_t(t - first_frame)]; }
  const Eigen::Vector3d& radii_at(int t) const { return radii[std::size_t(t - first_frame)]; }
};

/// Scripted split (one parent, children) or merge (parents, one child) at
/// frame t: parents end at t-1, children start at t.
struct ScriptEvent {
  EventKind kind = EventKind::split;
  int t = 1;
  std::vector<std::uint32_t> parents;
  std::vector<std::uint32_t> children;
};

struct SceneScript {
  std::string name = "scene";
  Dims dims{128, 128, 13, 1, {1.0, 1.0, 3.0}};
  int frames = 69;
  std::vector<BlobSpec> blobs;
  std::vector<ScriptEvent> events;
  double noise_sigma = 0.0;
  /// Per-frame photobleaching factor; frame t is scaled by decay^(t-1).
  double decay = 1.0;
  double background = 0.0;
  /// GT event windows span t +/- window.
  int window = 2;
  /// Value-noise lattice spacing (voxels per axis) and relative amplitude.
  Eigen::Vector3d texture_scale{2.0, 2.0, 1.0};
  double texture_amplitude = 1.0;

  /// Throws ValidationError naming the offending blob or event.
  void validate() const;
  const BlobSpec* find_blob(std::uint32_t id) const;
};

nlohmann::ordered_json script_to_json(const SceneScript& s);
/// Blobs accept either "trajectory" or "center" (+ optional "velocity"),
/// and either "radii" (constant) or "radii_per_frame".
SceneScript script_from_json(const nlohmann::json& j);

struct SynthDataset {
  std::string name;
  SceneScript script;
  std::vector<IntensityVolume> intensity;
  std::vector<LabelVolume> labels;
  GroundTruth truth;
};

/// Deterministic for a given (script, seed).
SynthDataset render(const SceneScript& script, std::uint64_t seed);

/// Texture multiplier of a blob at local offset u (exposed for tests).
double blob_texture(std::uint64_t seed, const Eigen::Vector3d& u, const Eigen::Vector3d& scale, double amplitude);

enum class NoiseLevel { zero, low, medium };
std::string_view to_string(NoiseLevel n);

/// S1 drift (12 blobs), S2 fast migration, S3 split-heavy and merge-heavy,
/// S4 crossing trajectories; each at the given noise level.
std::vector<SceneScript> default_benchmark_scripts(std::uint64_t seed, NoiseLevel noise);
std::vector<SynthDataset> default_benchmark(std::uint64_t seed);

}  // namespace ptrack
