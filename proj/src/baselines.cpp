#include "portiontrack/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace ptrack {

void BaselineConfig::validate() const {
  if (!(sigma_iou >= 0.0 && sigma_iou < 1.0)) throw ValidationError("sigma_iou must lie in [0, 1)");
  if (expand_voxels < 0) throw ValidationError("expand_voxels must be >= 0");
  if (!(merge_ratio > 0.0)) throw ValidationError("merge_ratio must be positive");
  if (!(nn_max_dist >= 0.0)) throw ValidationError("nn_max_dist must be >= 0");
}

double iou(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() || b.empty()) throw ValidationError("iou: empty object");
  std::size_t inter = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return double(inter) / double(a.size() + b.size() - inter);
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
  // Hungarian algorithm (shortest augmenting path with potentials) on a
  // square cost matrix padded with zero-weight dummies.
  const std::size_t rows = weights.size();
  const std::size_t cols = rows ? weights.front().size() : 0;
  const std::size_t n = std::max(rows, cols);
  std::vector<int> out(rows, -1);
  if (n == 0) return out;
  auto cost = [&](std::size_t i, std::size_t j) {
    const double w = (i < rows && j < cols) ? std::max(weights[i][j], 0.0) : 0.0;
    return -w;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= rows && j <= cols && weights[i - 1][j - 1] > 0.0) out[i - 1] = int(j - 1);
  }
  return out;
}

namespace {

void check_frames(std::span<const LabelVolume> frames) {
  for (std::size_t k = 1; k < frames.size(); ++k) {
    if (!frames[k].dims().same_grid(frames[0].dims())) throw DataError("label frames have different grid sizes");
    if (frames[k].frame() <= frames[k - 1].frame()) throw DataError("label frames must be in increasing frame order");
  }
}

std::map<std::uint32_t, std::int64_t> sizes_of(const LabelVolume& labels) {
  std::map<std::uint32_t, std::int64_t> out;
  for (Eigen::Index v = 0; v < labels.data().size(); ++v)
    if (const auto l = labels.data()[v]; l != 0) out[l] += 1;
  return out;
}

// Intersection counts (prev label, cur label) over voxels with both nonzero.
std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> overlaps(const LabelVolume& prev, const LabelVolume& cur) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> out;
  for (Eigen::Index v = 0; v < cur.data().size(); ++v) {
    const auto a = prev.data()[v];
    const auto b = cur.data()[v];
    if (a != 0 && b != 0) out[{a, b}] += 1;
  }
  return out;
}

// Overlap of each current object with each past object dilated by a
// Chebyshev box of half-size (r, r, rz).
std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> dilated_overlaps(const LabelVolume& prev, const LabelVolume& cur,
                                                                                  int r, int rz) {
  const Dims& dims = prev.dims();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> out;
  for (const ObjectRecord& obj : extract_objects(prev)) {
    const Index3 lo = (obj.bbox_min - Index3(r, r, rz)).cwiseMax(Index3::Zero());
    const Index3 hi = (obj.bbox_max + Index3(r, r, rz)).cwiseMin(Index3(dims.x - 1, dims.y - 1, dims.z - 1));
    const Index3 ext = hi - lo + Index3::Ones();
    auto at = [&](const Index3& p) { return std::size_t(p.x() - lo.x()) + std::size_t(ext.x()) * (std::size_t(p.y() - lo.y()) + std::size_t(ext.y()) * (p.z() - lo.z())); };
    std::vector<char> mask(std::size_t(ext.prod()), 0);
    for (int z = obj.bbox_min.z(); z <= obj.bbox_max.z(); ++z)
      for (int y = obj.bbox_min.y(); y <= obj.bbox_max.y(); ++y)
        for (int x = obj.bbox_min.x(); x <= obj.bbox_max.x(); ++x)
          if (prev(x, y, z) == obj.id) mask[at({x, y, z})] = 1;
    // Separable box dilation.
    const int radii[3] = {r, r, rz};
    for (int axis = 0; axis < 3; ++axis) {
      if (radii[axis] == 0) continue;
      std::vector<char> next(mask.size(), 0);
      for (int z = lo.z(); z <= hi.z(); ++z)
        for (int y = lo.y(); y <= hi.y(); ++y)
          for (int x = lo.x(); x <= hi.x(); ++x) {
            if (!mask[at({x, y, z})]) continue;
            Index3 p(x, y, z);
            const int a = std::max(p[axis] - radii[axis], lo[axis]);
            const int b = std::min(p[axis] + radii[axis], hi[axis]);
            for (int k = a; k <= b; ++k) {
              Index3 q = p;
              q[axis] = k;
              next[at(q)] = 1;
            }
          }
      mask = std::move(next);
    }
    for (int z = lo.z(); z <= hi.z(); ++z)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int x = lo.x(); x <= hi.x(); ++x)
          if (const auto c = cur(x, y, z); c != 0 && mask[at({x, y, z})]) out[{obj.id, c}] += 1;
  }
  return out;
}

FrameMatches unmatched_frame(const LabelVolume& labels) {
  FrameMatches fm{labels.frame(), {}};
  for (const auto& [label, size] : sizes_of(labels)) fm.objects.push_back({label, size, {}});
  return fm;
}

// Fan-out and size-tested fan-in over a candidate link set.
FrameMatches event_links(const LabelVolume& prev, const LabelVolume& cur,
                         const std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t>& links, double merge_ratio) {
  const auto prev_sizes = sizes_of(prev);
  FrameMatches fm = unmatched_frame(cur);
  std::map<std::uint32_t, std::vector<std::pair<std::uint32_t, std::int64_t>>> sources;
  for (const auto& [key, count] : links)
    if (count > 0) sources[key.second].push_back({key.first, count});
  for (ObjectMatches& obj : fm.objects) {
    auto it = sources.find(obj.label);
    if (it == sources.end()) continue;
    auto& src = it->second;
    if (src.size() >= 2) {
      double mean = 0.0;
      for (const auto& [label, count] : src) mean += double(prev_sizes.at(label));
      mean /= double(src.size());
      if (double(obj.voxels) < merge_ratio * mean) {
        auto best = *std::min_element(src.begin(), src.end(), [](const auto& a, const auto& b) {
          return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        src = {best};
      }
    }
    for (const auto& [label, count] : src) obj.matches.push_back({prev.frame(), label});
  }
  return fm;
}

}  // namespace

TrackGraph iou_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg) {
  cfg.validate();
  check_frames(frames);
  LineageBuilder builder(1, "iou");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    FrameMatches fm = unmatched_frame(frames[k]);
    if (k > 0) {
      const auto prev_sizes = sizes_of(frames[k - 1]);
      struct Cand {
        double iou;
        std::uint32_t prev, cur;
      };
      std::vector<Cand> cands;
      for (const auto& [key, inter] : overlaps(frames[k - 1], frames[k])) {
        const auto cur_size = std::find_if(fm.objects.begin(), fm.objects.end(), [&](const auto& o) { return o.label == key.second; })->voxels;
        const double v = double(inter) / double(prev_sizes.at(key.first) + cur_size - inter);
        if (v > cfg.sigma_iou) cands.push_back({v, key.first, key.second});
      }
      std::map<std::uint32_t, std::uint32_t> link;  // cur -> prev
      if (cfg.optimal_assignment) {
        std::map<std::uint32_t, std::size_t> prow, ccol;
        for (const Cand& c : cands) {
          prow.try_emplace(c.prev, prow.size());
          ccol.try_emplace(c.cur, ccol.size());
        }
        std::vector<std::vector<double>> w(prow.size(), std::vector<double>(ccol.size(), 0.0));
        for (const Cand& c : cands) w[prow[c.prev]][ccol[c.cur]] = c.iou;
        const auto assign = max_weight_assignment(w);
        for (const auto& [p, row] : prow)
          if (assign[row] >= 0)
            for (const auto& [c, col] : ccol)
              if (int(col) == assign[row]) link[c] = p;
      } else {
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
          return std::make_tuple(-a.iou, a.prev, a.cur) < std::make_tuple(-b.iou, b.prev, b.cur);
        });
        std::map<std::uint32_t, bool> prev_used;
        for (const Cand& c : cands) {
          if (link.count(c.cur) || prev_used[c.prev]) continue;
          link[c.cur] = c.prev;
          prev_used[c.prev] = true;
        }
      }
      for (ObjectMatches& o : fm.objects)
        if (auto it = link.find(o.label); it != link.end()) o.matches.push_back({frames[k - 1].frame(), it->second});
    }
    builder.add_frame(fm);
  }
  return std::move(builder.graph());
}

TrackGraph link_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg) {
  cfg.validate();
  check_frames(frames);
  LineageBuilder builder(1, "link");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (k == 0) {
      builder.add_frame(unmatched_frame(frames[k]));
      continue;
    }
    const auto& sp = frames[k].dims().spacing;
    const int rz = int(std::lround(cfg.expand_voxels * sp[0] / sp[2]));
    const auto links = dilated_overlaps(frames[k - 1], frames[k], cfg.expand_voxels, rz);
    builder.add_frame(event_links(frames[k - 1], frames[k], links, cfg.merge_ratio));
  }
  TrackGraph g = std::move(builder.graph());
  return g;
}

TrackGraph iou_link_track(std::span<const LabelVolume> frames, const BaselineConfig& cfg) {
  cfg.validate();
  check_frames(frames);
  LineageBuilder builder(1, "iou+link");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (k == 0) {
      builder.add_frame(unmatched_frame(frames[k]));
      continue;
    }
    const auto prev_sizes = sizes_of(frames[k - 1]);
    const auto cur_sizes = sizes_of(frames[k]);
    auto links = overlaps(frames[k - 1], frames[k]);
    for (auto& [key, inter] : links) {
      const double v = double(inter) / double(prev_sizes.at(key.first) + cur_sizes.at(key.second) - inter);
      if (!(v > cfg.sigma_iou)) inter = 0;
    }
    builder.add_frame(event_links(frames[k - 1], frames[k], links, cfg.merge_ratio));
  }
  return std::move(builder.graph());
}

TrackGraph nn_track(std::span<const LabelVolume> frames, double max_dist) {
  if (!(max_dist >= 0.0)) throw ValidationError("nn max distance must be >= 0");
  check_frames(frames);
  LineageBuilder builder(1, "nn");
  std::vector<ObjectRecord> prev;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto cur = extract_objects(frames[k]);
    FrameMatches fm{frames[k].frame(), {}};
    for (const ObjectRecord& o : cur) fm.objects.push_back({o.id, o.voxel_count, {}});
    if (k > 0) {
      const auto& sp = frames[k].dims().spacing;
      const Eigen::Vector3d scale(sp[0], sp[1], sp[2]);
      auto dist = [&](const ObjectRecord& a, const ObjectRecord& b) {
        return (a.centroid - b.centroid).cwiseProduct(scale).norm();
      };
      auto nearest = [&](const ObjectRecord& q, const std::vector<ObjectRecord>& pool) -> std::optional<std::size_t> {
        std::optional<std::size_t> best;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
          const double d = dist(q, pool[i]);
          if (d < bd) {
            bd = d;
            best = i;
          }
        }
        return best;
      };
      for (std::size_t c = 0; c < cur.size(); ++c) {
        const auto p = nearest(cur[c], prev);
        if (!p) continue;
        const auto back = nearest(prev[*p], cur);
        if (back && *back == c && dist(cur[c], prev[*p]) <= max_dist)
          fm.objects[c].matches.push_back({frames[k - 1].frame(), prev[*p].id});
      }
    }
    builder.add_frame(fm);
    prev = cur;
  }
  return std::move(builder.graph());
}

}  // namespace ptrack
