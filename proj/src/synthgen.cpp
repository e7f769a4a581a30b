#include "portiontrack/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>

namespace ptrack {

namespace {

// Blobs are rendered out to kReach semi-axes; voxels with d <= 1 are labelled.
constexpr double kReach = 3.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Lattice value in [-1, 1].
double lattice_value(std::uint64_t seed, std::int64_t ix, std::int64_t iy, std::int64_t iz) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ std::uint64_t(ix));
  h = splitmix64(h ^ std::uint64_t(iy));
  h = splitmix64(h ^ std::uint64_t(iz));
  return double(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

std::string event_name(const ScriptEvent& e) {
  return std::string(to_string(e.kind)) + " at t=" + std::to_string(e.t);
}

struct TextureSource {
  std::uint64_t seed;
  Eigen::Vector3d anchor;
  Eigen::Vector3d shift;
};

double textured(const std::vector<TextureSource>& sources, const Eigen::Vector3d& u, const SceneScript& s) {
  const TextureSource* pick = &sources.front();
  double best = (u - pick->anchor).squaredNorm();
  for (const TextureSource& src : sources) {
    const double d = (u - src.anchor).squaredNorm();
    if (d < best) {
      best = d;
      pick = &src;
    }
  }
  return blob_texture(pick->seed, u + pick->shift, s.texture_scale, s.texture_amplitude);
}

std::vector<Eigen::Vector3d> vec3_list(const nlohmann::json& j) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& v : j) {
    const auto a = v.get<std::vector<double>>();
    if (a.size() != 3) throw ValidationError("expected [x, y, z] triples");
    out.emplace_back(a[0], a[1], a[2]);
  }
  return out;
}

Eigen::Vector3d vec3(const nlohmann::json& j) {
  const auto a = j.get<std::vector<double>>();
  if (a.size() != 3) throw ValidationError("expected [x, y, z]");
  return {a[0], a[1], a[2]};
}

nlohmann::ordered_json vec3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

double blob_texture(std::uint64_t seed, const Eigen::Vector3d& u, const Eigen::Vector3d& scale, double amplitude) {
  const Eigen::Vector3d g = u.cwiseQuotient(scale);
  const Eigen::Vector3d f = g.array().floor();
  const Eigen::Vector3d w = g - f;
  const auto ix = std::int64_t(f.x()), iy = std::int64_t(f.y()), iz = std::int64_t(f.z());
  double acc = 0.0;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double weight = (dx ? w.x() : 1.0 - w.x()) * (dy ? w.y() : 1.0 - w.y()) * (dz ? w.z() : 1.0 - w.z());
    acc += weight * lattice_value(seed, ix + dx, iy + dy, iz + dz);
  }
  return 1.0 + amplitude * acc;
}

const BlobSpec* SceneScript::find_blob(std::uint32_t id) const {
  for (const BlobSpec& b : blobs)
    if (b.id == id) return &b;
  return nullptr;
}

void SceneScript::validate() const {
  if (!dims.valid() || dims.d != 1) throw ValidationError("script dims must be >= 1 with a single channel");
  if (frames < 1) throw ValidationError("script must have at least one frame");
  if (noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
  if (!(decay > 0.0)) throw ValidationError("decay rate must be positive");
  if (window < 0) throw ValidationError("event window must be >= 0");
  std::set<std::uint32_t> ids;
  for (const BlobSpec& b : blobs) {
    const std::string name = "blob " + std::to_string(b.id);
    if (b.id == 0) throw ValidationError("blob ids must be positive");
    if (!ids.insert(b.id).second) throw ValidationError("duplicate " + name);
    if (b.first_frame < 1 || b.last_frame > frames || b.first_frame > b.last_frame)
      throw ValidationError(name + " lifetime [" + std::to_string(b.first_frame) + ", " + std::to_string(b.last_frame) +
                            "] is outside frames 1.." + std::to_string(frames));
    const std::size_t live = std::size_t(b.last_frame - b.first_frame + 1);
    if (b.trajectory.size() != live) throw ValidationError(name + " trajectory length does not match its lifetime");
    if (b.radii.size() != live) throw ValidationError(name + " radii length does not match its lifetime");
    for (const auto& r : b.radii)
      if ((r.array() <= 0.0).any()) throw ValidationError(name + " has non-positive radii");
  }
  for (const ScriptEvent& e : events) {
    const std::string name = "event " + event_name(e);
    if (e.t < 1 || e.t > frames) throw ValidationError(name + " is outside frames 1.." + std::to_string(frames));
    if (e.kind == EventKind::split && (e.parents.size() != 1 || e.children.size() < 2))
      throw ValidationError(name + " needs one parent and at least two children");
    if (e.kind == EventKind::merge && (e.parents.size() < 2 || e.children.size() != 1))
      throw ValidationError(name + " needs at least two parents and one child");
    if (e.kind != EventKind::split && e.kind != EventKind::merge)
      throw ValidationError(name + ": only split and merge are scripted; births and deaths follow blob lifetimes");
    if (e.t < 2) throw ValidationError(name + " must happen after the first frame");
    for (std::uint32_t p : e.parents) {
      const BlobSpec* b = find_blob(p);
      if (!b) throw ValidationError(name + " references unknown blob " + std::to_string(p));
      if (b->last_frame != e.t - 1) throw ValidationError(name + ": parent blob " + std::to_string(p) + " must end at t-1");
    }
    for (std::uint32_t c : e.children) {
      const BlobSpec* b = find_blob(c);
      if (!b) throw ValidationError(name + " references unknown blob " + std::to_string(c));
      if (b->first_frame != e.t) throw ValidationError(name + ": child blob " + std::to_string(c) + " must start at t");
    }
  }
}

nlohmann::ordered_json script_to_json(const SceneScript& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["dims"] = {s.dims.x, s.dims.y, s.dims.z};
  j["spacing"] = {s.dims.spacing[0], s.dims.spacing[1], s.dims.spacing[2]};
  j["frames"] = s.frames;
  j["noise_sigma"] = s.noise_sigma;
  j["decay"] = s.decay;
  j["background"] = s.background;
  j["window"] = s.window;
  j["texture_scale"] = vec3_json(s.texture_scale);
  j["texture_amplitude"] = s.texture_amplitude;
  auto& blobs = j["blobs"] = nlohmann::ordered_json::array();
  for (const BlobSpec& b : s.blobs) {
    nlohmann::ordered_json jb;
    jb["id"] = b.id;
    jb["frames"] = {b.first_frame, b.last_frame};
    jb["intensity"] = b.intensity;
    jb["texture_seed"] = b.texture_seed;
    auto& tr = jb["trajectory"] = nlohmann::ordered_json::array();
    for (const auto& c : b.trajectory) tr.push_back(vec3_json(c));
    auto& rr = jb["radii_per_frame"] = nlohmann::ordered_json::array();
    for (const auto& r : b.radii) rr.push_back(vec3_json(r));
    blobs.push_back(std::move(jb));
  }
  auto& events = j["events"] = nlohmann::ordered_json::array();
  for (const ScriptEvent& e : s.events)
    events.push_back({{"kind", to_string(e.kind)}, {"t", e.t}, {"parents", e.parents}, {"children", e.children}});
  return j;
}

SceneScript script_from_json(const nlohmann::json& j) {
  SceneScript s;
  try {
    s.name = j.value("name", std::string("scene"));
    const auto d = j.at("dims").get<std::vector<int>>();
    if (d.size() != 3) throw ValidationError("dims must be [x, y, z]");
    s.dims = Dims{d[0], d[1], d[2], 1, {1.0, 1.0, 1.0}};
    if (j.contains("spacing")) {
      const auto sp = j.at("spacing").get<std::vector<double>>();
      if (sp.size() != 3) throw ValidationError("spacing must be [sx, sy, sz]");
      s.dims.spacing = {sp[0], sp[1], sp[2]};
    }
    s.frames = j.at("frames").get<int>();
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.decay = j.value("decay", 1.0);
    s.background = j.value("background", 0.0);
    s.window = j.value("window", 2);
    if (j.contains("texture_scale")) s.texture_scale = vec3(j.at("texture_scale"));
    s.texture_amplitude = j.value("texture_amplitude", s.texture_amplitude);
    for (const auto& jb : j.at("blobs")) {
      BlobSpec b;
      b.id = jb.at("id").get<std::uint32_t>();
      const auto fr = jb.at("frames").get<std::vector<int>>();
      if (fr.size() != 2) throw ValidationError("blob frames must be [first, last]");
      b.first_frame = fr[0];
      b.last_frame = fr[1];
      b.intensity = jb.value("intensity", 100.0);
      b.texture_seed = jb.value("texture_seed", std::uint64_t(b.id));
      const int live = std::max(0, b.last_frame - b.first_frame + 1);
      if (jb.contains("trajectory")) {
        b.trajectory = vec3_list(jb.at("trajectory"));
      } else {
        const Eigen::Vector3d c0 = vec3(jb.at("center"));
        const Eigen::Vector3d v = jb.contains("velocity") ? vec3(jb.at("velocity")) : Eigen::Vector3d::Zero();
        for (int k = 0; k < live; ++k) b.trajectory.push_back(c0 + double(k) * v);
      }
      if (jb.contains("radii_per_frame")) {
        b.radii = vec3_list(jb.at("radii_per_frame"));
      } else {
        b.radii.assign(std::size_t(live), vec3(jb.at("radii")));
      }
      s.blobs.push_back(std::move(b));
    }
    if (j.contains("events"))
      for (const auto& je : j.at("events")) {
        ScriptEvent e;
        e.kind = event_kind_from_string(je.at("kind").get<std::string>());
        e.t = je.at("t").get<int>();
        e.parents = je.value("parents", std::vector<std::uint32_t>{});
        e.children = je.value("children", std::vector<std::uint32_t>{});
        s.events.push_back(std::move(e));
      }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scene script: ") + e.what());
  }
  return s;
}

SynthDataset render(const SceneScript& script, std::uint64_t seed) {
  script.validate();
  const Dims& dims = script.dims;
  SynthDataset out;
  out.name = script.name;
  out.script = script;

  // Children inherit their parents' texture fields, re-anchored so texture
  // stays put in absolute coordinates across the event.
  std::map<std::uint32_t, const ScriptEvent*> child_event;
  std::set<std::uint32_t> event_parents;
  for (const ScriptEvent& e : script.events) {
    for (std::uint32_t c : e.children) child_event[c] = &e;
    event_parents.insert(e.parents.begin(), e.parents.end());
  }
  std::vector<const BlobSpec*> order;
  for (const BlobSpec& b : script.blobs) order.push_back(&b);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->first_frame < b->first_frame; });
  std::map<std::uint32_t, std::vector<TextureSource>> texture;
  for (const BlobSpec* b : order) {
    auto it = child_event.find(b->id);
    if (it == child_event.end()) {
      texture[b->id] = {TextureSource{b->texture_seed, Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()}};
      continue;
    }
    const ScriptEvent& e = *it->second;
    auto& mine = texture[b->id];
    for (std::uint32_t p : e.parents) {
      const BlobSpec* parent = script.find_blob(p);
      const Eigen::Vector3d d = b->center_at(e.t) - parent->center_at(e.t - 1);
      for (const TextureSource& src : texture.at(p)) mine.push_back({src.seed, src.anchor - d, src.shift + d});
    }
  }

  const std::size_t n = dims.voxels();
  for (int t = 1; t <= script.frames; ++t) {
    std::vector<double> signal(n, 0.0);
    std::vector<double> owner_score(n, -1.0);
    std::vector<std::uint32_t> owner(n, 0);
    std::vector<std::uint32_t> inside(n, 0);  // first blob whose ellipsoid covers the voxel

    for (const BlobSpec& b : script.blobs) {
      if (!b.alive(t)) continue;
      const bool newborn = b.first_frame == t && !child_event.count(b.id);
      const Eigen::Vector3d c = b.center_at(t);
      const Eigen::Vector3d r = b.radii_at(t);
      const Eigen::Vector3d reach = kReach * r;
      Index3 lo, hi;
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, int(std::floor(c[a] - reach[a])));
        hi[a] = std::min((a == 0 ? dims.x : a == 1 ? dims.y : dims.z) - 1, int(std::ceil(c[a] + reach[a])));
      }
      const auto& sources = texture.at(b.id);
      for (int z = lo.z(); z <= hi.z(); ++z)
        for (int y = lo.y(); y <= hi.y(); ++y)
          for (int x = lo.x(); x <= hi.x(); ++x) {
            const Eigen::Vector3d u = Eigen::Vector3d(x, y, z) - c;
            const double d2 = u.cwiseQuotient(r).squaredNorm();
            if (d2 > kReach * kReach) continue;
            const std::size_t v = dims.index(x, y, z);
            const double profile = std::exp(-0.5 * d2);
            signal[v] += b.intensity * profile * textured(sources, u, script);
            if (d2 > 1.0) continue;
            if (inside[v] != 0) {
              const BlobSpec* other = script.find_blob(inside[v]);
              const bool other_newborn = other->first_frame == t && !child_event.count(other->id);
              if (newborn || other_newborn)
                throw ValidationError("blob " + std::to_string(newborn ? b.id : other->id) + " overlaps blob " +
                                      std::to_string(newborn ? other->id : b.id) + " at its birth (t=" + std::to_string(t) + ")");
            } else {
              inside[v] = b.id;
            }
            const double score = b.intensity * profile;
            if (score > owner_score[v] || (score == owner_score[v] && b.id < owner[v])) {
              owner_score[v] = score;
              owner[v] = b.id;
            }
          }
    }

    // Per-frame labels are a seeded permutation of the visible blobs.
    std::vector<std::uint32_t> visible;
    {
      std::set<std::uint32_t> seen(owner.begin(), owner.end());
      seen.erase(0);
      visible.assign(seen.begin(), seen.end());
    }
    std::seed_seq label_seed{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(t), 0x1abe1u};
    std::mt19937_64 label_rng(label_seed);
    std::vector<std::uint32_t> perm(visible.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = std::uint32_t(i + 1);
    std::shuffle(perm.begin(), perm.end(), label_rng);
    std::map<std::uint32_t, std::uint32_t> label_of;
    for (std::size_t i = 0; i < visible.size(); ++i) {
      label_of[visible[i]] = perm[i];
      out.truth.assignments[{t, perm[i]}] = visible[i];
    }

    LabelVolume labels(dims, t);
    for (std::size_t v = 0; v < n; ++v)
      if (owner[v]) labels[v] = label_of.at(owner[v]);

    std::seed_seq noise_seed{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(t), 0x4015eu};
    std::mt19937_64 noise_rng(noise_seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double bleach = std::pow(script.decay, double(t - 1));
    IntensityVolume img(dims, t);
    for (std::size_t v = 0; v < n; ++v) {
      double value = script.background + signal[v] * bleach;
      if (script.noise_sigma > 0.0) value += script.noise_sigma * noise(noise_rng);
      img[v] = float(std::max(value, 0.0));
    }
    out.labels.push_back(std::move(labels));
    out.intensity.push_back(std::move(img));
  }

  // GT events: scripted split/merge plus lifetime-implied births and deaths.
  auto window = [&](EventKind kind, int t, std::vector<std::uint32_t> parents, std::vector<std::uint32_t> children) {
    EventWindow w;
    w.kind = kind;
    w.parents = std::move(parents);
    w.children = std::move(children);
    std::set<std::uint32_t> all(w.parents.begin(), w.parents.end());
    all.insert(w.children.begin(), w.children.end());
    w.participants.assign(all.begin(), all.end());
    w.t_start = std::max(1, t - script.window);
    w.t_end = std::min(script.frames, t + script.window);
    w.frame = t;
    out.truth.event_windows.push_back(std::move(w));
  };
  std::set<std::uint32_t> present;
  for (const auto& [key, g] : out.truth.assignments) present.insert(g);
  for (const ScriptEvent& e : script.events) window(e.kind, e.t, e.parents, e.children);
  for (const BlobSpec& b : script.blobs) {
    if (!present.count(b.id)) continue;
    if (b.first_frame > 1 && !child_event.count(b.id)) window(EventKind::birth, b.first_frame, {}, {b.id});
    if (b.last_frame < script.frames && !event_parents.count(b.id)) window(EventKind::death, b.last_frame + 1, {b.id}, {});
  }
  return out;
}

std::string_view to_string(NoiseLevel n) {
  switch (n) {
    case NoiseLevel::zero: return "zero";
    case NoiseLevel::low: return "low";
    case NoiseLevel::medium: return "medium";
  }
  return "zero";
}

// ---------------------------------------------------------------------------
// Benchmark scenes

namespace {

struct SceneBuilder {
  SceneScript script;
  std::mt19937_64 rng;
  std::uint32_t next_id = 1;

  SceneBuilder(std::string name, std::uint64_t seed, NoiseLevel noise) : rng(seed) {
    script.name = std::move(name);
    script.name += "-";
    script.name += to_string(noise);
    script.decay = 0.995;
    script.noise_sigma = noise == NoiseLevel::zero ? 0.0 : noise == NoiseLevel::low ? 3.0 : 8.0;
  }

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

  BlobSpec& add(int first, int last, const std::function<Eigen::Vector3d(int)>& center,
                const std::function<Eigen::Vector3d(int)>& radii) {
    BlobSpec b;
    b.id = next_id++;
    b.first_frame = first;
    b.last_frame = last;
    b.intensity = uniform(80.0, 120.0);
    b.texture_seed = rng();
    for (int t = first; t <= last; ++t) {
      b.trajectory.push_back(center(t));
      b.radii.push_back(radii(t));
    }
    script.blobs.push_back(std::move(b));
    return script.blobs.back();
  }

  void event(EventKind kind, int t, std::vector<std::uint32_t> parents, std::vector<std::uint32_t> children) {
    script.events.push_back({kind, t, std::move(parents), std::move(children)});
  }
};

constexpr double kMidZ = 6.0;

SceneScript drift_scene(std::uint64_t seed, NoiseLevel noise) {
  SceneBuilder sb("S1-drift", seed, noise);
  const int T = sb.script.frames;
  const Eigen::Vector3d common(0.08, 0.05, 0.0);
  for (int gy = 0; gy < 3; ++gy)
    for (int gx = 0; gx < 4; ++gx) {
      const Eigen::Vector3d c0(16.0 + 30.0 * gx + sb.uniform(-2, 2), 22.0 + 36.0 * gy + sb.uniform(-2, 2), kMidZ + sb.uniform(-0.4, 0.4));
      const Eigen::Vector3d v = common + Eigen::Vector3d(sb.uniform(-0.03, 0.03), sb.uniform(-0.03, 0.03), 0.0);
      const Eigen::Vector3d r(sb.uniform(3.5, 5.0), sb.uniform(3.5, 5.0), 1.6);
      sb.add(1, T, [=](int t) { return Eigen::Vector3d(c0 + double(t - 1) * v); }, [=](int) { return r; });
    }
  return sb.script;
}

// Two lanes of six blobs, 10 voxels apart, that rest for three frames and
// then all jump 6 voxels along the lane. On a jump frame every blob lands
// closer to its neighbour's previous position than to its own.
SceneScript fast_scene(std::uint64_t seed, NoiseLevel noise) {
  SceneBuilder sb("S2-fast", seed, noise);
  const int T = sb.script.frames;
  const double step = 6.0;
  const int rest = 4;
  const int half_period = 8;
  auto tri = [=](int t) {
    const int k = ((t - 1) / rest) % (2 * half_period);
    return double(k <= half_period ? k : 2 * half_period - k);
  };
  for (int lane = 0; lane < 2; ++lane)
    for (int i = 0; i < 6; ++i) {
      const double y = lane == 0 ? 40.0 : 88.0;
      const double x0 = lane == 0 ? 10.0 + 10.0 * i : 116.0 - 10.0 * i;
      const double dir = lane == 0 ? 1.0 : -1.0;
      const Eigen::Vector3d r(2.5, 2.5, 1.6);
      sb.add(1, T, [=](int t) { return Eigen::Vector3d(x0 + dir * step * tri(t), y, kMidZ); }, [=](int) { return r; });
    }
  return sb.script;
}

// Six lineages; each parent splits once and both children split again.
SceneScript split_scene(std::uint64_t seed, NoiseLevel noise) {
  SceneBuilder sb("S3-split", seed, noise);
  const int T = sb.script.frames;
  const double speed = 0.3;
  for (int gy = 0; gy < 2; ++gy)
    for (int gx = 0; gx < 3; ++gx) {
      const Eigen::Vector3d site(22.0 + 42.0 * gx, 34.0 + 60.0 * gy, kMidZ);
      const int t1 = 10 + int(sb.uniform(0, 8));
      const double angle = sb.uniform(0, std::numbers::pi);
      const Eigen::Vector3d dir(std::cos(angle), std::sin(angle), 0.0);
      const Eigen::Vector3d perp(-dir.y(), dir.x(), 0.0);
      const auto& parent = sb.add(1, t1 - 1, [=](int) { return site; }, [=](int) { return Eigen::Vector3d(4.5, 4.5, 1.6); });
      const std::uint32_t pid = parent.id;
      std::vector<std::uint32_t> kids;
      for (double sgn : {-1.0, 1.0}) {
        const int t2 = t1 + 20 + int(sb.uniform(0, 8));
        const Eigen::Vector3d start = site + sgn * 4.0 * dir;
        auto child_center = [=](int t) { return Eigen::Vector3d(start + sgn * speed * double(t - t1) * dir); };
        const auto& child = sb.add(t1, t2 - 1, child_center, [=](int) { return Eigen::Vector3d(3.0, 3.0, 1.6); });
        const std::uint32_t cid = child.id;
        kids.push_back(cid);
        const Eigen::Vector3d split_at = child_center(t2 - 1);
        std::vector<std::uint32_t> grand;
        for (double s2 : {-1.0, 1.0}) {
          const Eigen::Vector3d g0 = split_at + s2 * 3.5 * perp;
          const auto& g = sb.add(t2, T, [=](int t) { return Eigen::Vector3d(g0 + s2 * speed * double(t - t2) * perp); },
                                 [=](int) { return Eigen::Vector3d(2.4, 2.4, 1.5); });
          grand.push_back(g.id);
        }
        sb.event(EventKind::split, t2, {cid}, grand);
      }
      sb.event(EventKind::split, t1, {pid}, kids);
    }
  std::sort(sb.script.events.begin(), sb.script.events.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return sb.script;
}

// Ten sites; A and B converge and merge, then the result absorbs C.
SceneScript merge_scene(std::uint64_t seed, NoiseLevel noise) {
  SceneBuilder sb("S3-merge", seed, noise);
  const int T = sb.script.frames;
  int placed = 0;
  for (int gy = 0; gy < 3 && placed < 10; ++gy)
    for (int gx = 0; gx < 4 && placed < 10; ++gx, ++placed) {
      const Eigen::Vector3d site(16.0 + 32.0 * gx, 21.0 + 42.0 * gy, kMidZ);
      const int t1 = 18 + int(sb.uniform(0, 8));
      const int t2 = t1 + 22 + int(sb.uniform(0, 8));
      const Eigen::Vector3d ra(3.0, 3.0, 1.6), rc(3.0, 3.0, 1.6);
      auto approach = [](const Eigen::Vector3d& from, const Eigen::Vector3d& to, int t0, int t_end) {
        return [=](int t) {
          const double a = t_end == t0 ? 1.0 : double(t - t0) / double(t_end - t0);
          return Eigen::Vector3d(from + a * (to - from));
        };
      };
      const Eigen::Vector3d ab_center = site + Eigen::Vector3d(0.0, -3.0, 0.0);
      const auto& a = sb.add(1, t1 - 1, approach(ab_center + Eigen::Vector3d(-9, 0, 0), ab_center + Eigen::Vector3d(-4.5, 0, 0), 1, t1 - 1),
                             [=](int) { return ra; });
      const std::uint32_t aid = a.id;
      const auto& b = sb.add(1, t1 - 1, approach(ab_center + Eigen::Vector3d(9, 0, 0), ab_center + Eigen::Vector3d(4.5, 0, 0), 1, t1 - 1),
                             [=](int) { return ra; });
      const std::uint32_t bid = b.id;
      const auto& ab = sb.add(t1, t2 - 1, [=](int) { return ab_center; }, [=](int) { return Eigen::Vector3d(7.0, 3.5, 1.6); });
      const std::uint32_t abid = ab.id;
      const auto& c = sb.add(1, t2 - 1,
                             approach(ab_center + Eigen::Vector3d(0, 13, 0), ab_center + Eigen::Vector3d(0, 7.5, 0), 1, t2 - 1),
                             [=](int) { return rc; });
      const std::uint32_t cid = c.id;
      const Eigen::Vector3d abc_center = ab_center + Eigen::Vector3d(0, 3.0, 0);
      const auto& abc = sb.add(t2, T, [=](int) { return abc_center; }, [=](int) { return Eigen::Vector3d(7.0, 6.0, 1.7); });
      sb.event(EventKind::merge, t1, {aid, bid}, {abid});
      sb.event(EventKind::merge, t2, {abid, cid}, {abc.id});
    }
  std::sort(sb.script.events.begin(), sb.script.events.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return sb.script;
}

// Six pairs whose x-y paths cross at different depths.
SceneScript crossing_scene(std::uint64_t seed, NoiseLevel noise) {
  SceneBuilder sb("S4-crossing", seed, noise);
  const int T = sb.script.frames;
  for (int gy = 0; gy < 2; ++gy)
    for (int gx = 0; gx < 3; ++gx) {
      const Eigen::Vector3d cross(22.0 + 42.0 * gx, 34.0 + 60.0 * gy, 0.0);
      const int tc = 25 + int(sb.uniform(0, 20));
      const double speed = sb.uniform(0.4, 0.7);
      const Eigen::Vector3d r(3.0, 3.0, 1.5);
      sb.add(1, T, [=](int t) { return Eigen::Vector3d(cross.x() + speed * double(t - tc), cross.y(), 3.0); }, [=](int) { return r; });
      sb.add(1, T, [=](int t) { return Eigen::Vector3d(cross.x(), cross.y() + speed * double(t - tc), 9.0); }, [=](int) { return r; });
    }
  return sb.script;
}

}  // namespace

std::vector<SceneScript> default_benchmark_scripts(std::uint64_t seed, NoiseLevel noise) {
  return {drift_scene(seed + 1, noise), fast_scene(seed + 2, noise), split_scene(seed + 3, noise), merge_scene(seed + 4, noise),
          crossing_scene(seed + 5, noise)};
}

std::vector<SynthDataset> default_benchmark(std::uint64_t seed) {
  std::vector<SynthDataset> out;
  for (NoiseLevel level : {NoiseLevel::zero, NoiseLevel::low, NoiseLevel::medium})
    for (const SceneScript& s : default_benchmark_scripts(seed, level)) out.push_back(render(s, seed));
  return out;
}

}  // namespace ptrack
