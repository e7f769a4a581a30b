#include "portiontrack/portion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ptrack {

void PortionSpec::validate() const {
  if ((radius.array() < 0).any()) throw ValidationError("portion radius must be >= 0");
  if ((ext.array() < 0).any()) throw ValidationError("extended search range must be >= 0");
  if ((stride.array() < 1).any()) throw ValidationError("portion stride must be >= 1");
  if (max_lag < 1) throw ValidationError("max_lag must be >= 1");
  if (search_stride < 1) throw ValidationError("search_stride must be >= 1");
  if (!(gamma >= -1.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in [-1, 1]");
}

Portion extract_portion(const FeatureVolume& feats, const Index3& center, const Index3& radius, std::uint32_t object_id) {
  Portion p;
  p.center = center;
  p.object_id = object_id;
  p.frame = feats.frame();
  p.radius = radius;
  p.channels = feats.channels();
  const Index3 w = 2 * radius + Index3::Ones();
  p.values.resize(Eigen::Index(w.prod()) * p.channels);
  Eigen::Index i = 0;
  for (int m = 0; m < p.channels; ++m)
    for (int dz = -radius.z(); dz <= radius.z(); ++dz)
      for (int dy = -radius.y(); dy <= radius.y(); ++dy)
        for (int dx = -radius.x(); dx <= radius.x(); ++dx)
          p.values[i++] = feats.clamped(center.x() + dx, center.y() + dy, center.z() + dz, m);
  return p;
}

std::vector<Index3> portion_centers(const ObjectRecord& obj, const LabelVolume& labels, const PortionSpec& spec) {
  std::vector<Index3> centers;
  for (int z = obj.bbox_min.z(); z <= obj.bbox_max.z(); z += spec.stride.z())
    for (int y = obj.bbox_min.y(); y <= obj.bbox_max.y(); y += spec.stride.y())
      for (int x = obj.bbox_min.x(); x <= obj.bbox_max.x(); x += spec.stride.x())
        if (labels(x, y, z) == obj.id) centers.emplace_back(x, y, z);
  if (!centers.empty()) return centers;

  double best = std::numeric_limits<double>::infinity();
  Index3 pick = obj.bbox_min;
  for (int z = obj.bbox_min.z(); z <= obj.bbox_max.z(); ++z)
    for (int y = obj.bbox_min.y(); y <= obj.bbox_max.y(); ++y)
      for (int x = obj.bbox_min.x(); x <= obj.bbox_max.x(); ++x) {
        if (labels(x, y, z) != obj.id) continue;
        const double d = (Eigen::Vector3d(x, y, z) - obj.centroid).squaredNorm();
        if (d < best) {
          best = d;
          pick = {x, y, z};
        }
      }
  centers.push_back(pick);
  return centers;
}

std::vector<Portion> sample_portions(const ObjectRecord& obj, const LabelVolume& labels, const FeatureVolume& feats,
                                     const PortionSpec& spec) {
  std::vector<Portion> out;
  for (const Index3& c : portion_centers(obj, labels, spec)) out.push_back(extract_portion(feats, c, spec.radius, obj.id));
  return out;
}

double pearson(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  if (a.size() != b.size()) throw ValidationError("pearson: window sizes differ");
  if (a.size() == 0) return 0.0;
  if (a.maxCoeff() == a.minCoeff() || b.maxCoeff() == b.minCoeff()) return 0.0;
  const Eigen::ArrayXd ca = a - a.mean();
  const Eigen::ArrayXd cb = b - b.mean();
  const double saa = ca.square().sum();
  const double sbb = cb.square().sum();
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  const double rho = (ca * cb).sum() / std::sqrt(saa * sbb);
  return std::clamp(rho, -1.0, 1.0);
}

double pearson(const Portion& a, const Portion& b) {
  if (a.radius != b.radius || a.channels != b.channels)
    throw ValidationError("pearson: portion shapes differ");
  return pearson(a.values, b.values);
}

// ---------------------------------------------------------------------------

SearchFrame::SearchFrame(LabelVolume labels, const FeatureVolume& feats, const Index3& radius)
    : labels_(std::move(labels)), radius_(radius), channels_(feats.channels()) {
  const Dims& dims = feats.dims();
  if (!dims.same_grid(labels_.dims())) throw DataError("label and feature grids differ");
  pdims_ = Index3(dims.x, dims.y, dims.z) + 2 * radius;
  const std::size_t pvox = std::size_t(pdims_.prod());
  padded_.resize(pvox * channels_);
  for (int pz = 0; pz < pdims_.z(); ++pz)
    for (int py = 0; py < pdims_.y(); ++py)
      for (int px = 0; px < pdims_.x(); ++px) {
        const std::size_t base = padded_index(px, py, pz) * channels_;
        for (int m = 0; m < channels_; ++m)
          padded_[base + m] = feats.clamped(px - radius.x(), py - radius.y(), pz - radius.z(), m);
      }

  // Channel-summed first and second moments, then box sums along x, y, z.
  std::vector<double> s1(pvox), s2(pvox);
  for (std::size_t v = 0; v < pvox; ++v) {
    double a = 0.0, b = 0.0;
    for (int m = 0; m < channels_; ++m) {
      const double f = padded_[v * channels_ + m];
      a += f;
      b += f * f;
    }
    s1[v] = a;
    s2[v] = b;
  }
  Index3 cur = pdims_;
  auto box = [&](std::vector<double>& src, int axis) {
    const int w = 2 * radius[axis] + 1;
    Index3 next = cur;
    next[axis] = cur[axis] - (w - 1);
    std::vector<double> dst(std::size_t(next.prod()));
    for (int z = 0; z < next.z(); ++z)
      for (int y = 0; y < next.y(); ++y)
        for (int x = 0; x < next.x(); ++x) {
          double acc = 0.0;
          Index3 p(x, y, z);
          for (int k = 0; k < w; ++k) {
            Index3 q = p;
            q[axis] += k;
            acc += src[std::size_t(q.x()) + std::size_t(cur.x()) * (std::size_t(q.y()) + std::size_t(cur.y()) * q.z())];
          }
          dst[std::size_t(x) + std::size_t(next.x()) * (std::size_t(y) + std::size_t(next.y()) * z)] = acc;
        }
    src = std::move(dst);
    return next;
  };
  for (int axis = 0; axis < 3; ++axis) {
    box(s1, axis);
    cur = box(s2, axis);
  }

  const double n = double((2 * radius_ + Index3::Ones()).prod()) * channels_;
  inv_norm_.assign(dims.voxels(), 0.0);
  for (std::size_t v = 0; v < dims.voxels(); ++v) {
    const double ss = s2[v] - s1[v] * s1[v] / n;
    if (ss > 1e-10 * std::max(s2[v], 1e-300)) inv_norm_[v] = 1.0 / std::sqrt(ss);
  }
}

Portion SearchFrame::portion(const Index3& center, std::uint32_t object_id) const {
  Portion p;
  p.center = center;
  p.object_id = object_id;
  p.frame = frame();
  p.radius = radius_;
  p.channels = channels_;
  const Index3 w = 2 * radius_ + Index3::Ones();
  p.values.resize(Eigen::Index(w.prod()) * channels_);
  Eigen::Index i = 0;
  for (int m = 0; m < channels_; ++m)
    for (int dz = 0; dz < w.z(); ++dz)
      for (int dy = 0; dy < w.y(); ++dy)
        for (int dx = 0; dx < w.x(); ++dx)
          p.values[i++] = padded_[padded_index(center.x() + dx, center.y() + dy, center.z() + dz) * channels_ + m];
  return p;
}

std::vector<double> SearchFrame::normalized_query(const Portion& q) const {
  if (q.radius != radius_ || q.channels != channels_) throw ValidationError("query portion shape does not match search frame");
  if (q.values.maxCoeff() == q.values.minCoeff()) return {};
  const Eigen::ArrayXd c = q.values - q.values.mean();
  const double norm = std::sqrt(c.square().sum());
  if (norm == 0.0) return {};
  const Index3 w = 2 * radius_ + Index3::Ones();
  const Eigen::Index plane = Eigen::Index(w.prod());
  std::vector<double> out(std::size_t(q.values.size()));
  std::size_t o = 0;
  for (int dz = 0; dz < w.z(); ++dz)
    for (int dy = 0; dy < w.y(); ++dy)
      for (int dx = 0; dx < w.x(); ++dx) {
        const Eigen::Index s = dx + w.x() * (dy + Eigen::Index(w.y()) * dz);
        for (int m = 0; m < channels_; ++m) out[o++] = c[s + plane * m] / norm;
      }
  return out;
}

double SearchFrame::correlate(std::span<const double> query, const Index3& center) const {
  if (query.empty()) return 0.0;
  const Dims& dims = labels_.dims();
  const double inv = inv_norm_[dims.index(center.x(), center.y(), center.z())];
  if (inv == 0.0) return 0.0;
  const Index3 w = 2 * radius_ + Index3::Ones();
  const std::size_t row = std::size_t(w.x()) * channels_;
  const double* qp = query.data();
  double acc = 0.0;
  for (int dz = 0; dz < w.z(); ++dz)
    for (int dy = 0; dy < w.y(); ++dy) {
      const double* fp = padded_.data() + padded_index(center.x(), center.y() + dy, center.z() + dz) * channels_;
      double r = 0.0;
      for (std::size_t k = 0; k < row; ++k) r += qp[k] * fp[k];
      acc += r;
      qp += row;
    }
  return std::clamp(acc * inv, -1.0, 1.0);
}

void scan_extended_box(const Portion& q, const SearchFrame& past, const PortionSpec& spec,
                       const std::function<void(const Index3&, std::uint32_t, double)>& visit) {
  const Dims& dims = past.labels().dims();
  const Index3 lo = (q.center - spec.ext).cwiseMax(Index3::Zero());
  const Index3 hi = (q.center + spec.ext).cwiseMin(Index3(dims.x - 1, dims.y - 1, dims.z - 1));
  const std::vector<double> query = past.normalized_query(q);
  const int s = spec.search_stride;
  for (int z = lo.z(); z <= hi.z(); z += s)
    for (int y = lo.y(); y <= hi.y(); y += s)
      for (int x = lo.x(); x <= hi.x(); x += s) {
        const std::uint32_t label = past.labels()(x, y, z);
        if (label == 0) continue;
        const Index3 c(x, y, z);
        visit(c, label, past.correlate(query, c));
      }
}

std::vector<CandidateMatch> extended_search(const Portion& q, const SearchFrame& past, const PortionSpec& spec) {
  std::map<std::uint32_t, CandidateMatch> best;
  const int lag = q.frame - past.frame();
  scan_extended_box(q, past, spec, [&](const Index3& c, std::uint32_t label, double rho) {
    auto [it, fresh] = best.try_emplace(label, CandidateMatch{label, lag, rho, c});
    if (!fresh && rho > it->second.rho) it->second = CandidateMatch{label, lag, rho, c};
  });
  std::vector<CandidateMatch> out;
  out.reserve(best.size());
  for (auto& [label, m] : best) {
    m.rho = pearson(q, past.portion(m.center, label));
    out.push_back(m);
  }
  return out;
}

std::vector<CandidateMatch> extended_search(const Portion& q, const LabelVolume& past_labels, const FeatureVolume& past_feats,
                                            const PortionSpec& spec) {
  return extended_search(q, SearchFrame(past_labels, past_feats, spec.radius), spec);
}

MatchSet best_match(std::span<const CandidateMatch> candidates, double gamma) {
  MatchSet out;
  out.all_candidates.assign(candidates.begin(), candidates.end());
  std::sort(out.all_candidates.begin(), out.all_candidates.end(), [](const CandidateMatch& a, const CandidateMatch& b) {
    return std::tie(a.lag, a.object_id) < std::tie(b.lag, b.object_id);
  });
  std::map<int, const CandidateMatch*> winners;
  for (const CandidateMatch& c : out.all_candidates) {
    auto [it, fresh] = winners.try_emplace(c.lag, &c);
    if (fresh) continue;
    const CandidateMatch* w = it->second;
    if (c.rho > w->rho || (c.rho == w->rho && c.object_id < w->object_id)) it->second = &c;
  }
  for (const auto& [lag, w] : winners)
    if (w->rho >= gamma) out.accepted.push_back({w->object_id, w->lag, w->rho});
  return out;
}

double match_probability(double rho) { return std::clamp(rho, 0.0, 1.0); }

double frame_inner_value(const TrackFrame& frame) {
  double best = 0.0;
  for (const MatchSet& ms : frame.portions) {
    double sum = 0.0;
    for (const auto& [lag, label] : frame.predecessors) {
      double p = 0.0;
      for (const CandidateMatch& c : ms.all_candidates)
        if (c.lag == lag && c.object_id == label) p = std::max(p, match_probability(c.rho));
      sum += p;
    }
    best = std::max(best, sum);
  }
  return best;
}

double track_score(std::span<const double> inner_values, int max_lag) {
  double score = 0.0;
  for (double v : inner_values) score += std::log(std::clamp(v, kScoreFloor, double(std::max(max_lag, 1))));
  return score;
}

double track_score(std::span<const TrackFrame> track, int max_lag) {
  std::vector<double> inner;
  inner.reserve(track.size());
  for (const TrackFrame& f : track) inner.push_back(frame_inner_value(f));
  return track_score(inner, max_lag);
}

}  // namespace ptrack
