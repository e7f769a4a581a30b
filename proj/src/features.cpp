#include "portiontrack/features.hpp"

#include <cmath>
#include <string>

#include "portiontrack/v4d.hpp"

namespace ptrack {

int gaussian_radius(double sigma) { return std::max(1, int(std::ceil(4.0 * sigma))); }

Eigen::ArrayXd gaussian_kernel(double sigma, int radius) {
  if (!(sigma > 0.0)) throw ValidationError("smoothing sigma must be positive, got " + std::to_string(sigma));
  Eigen::ArrayXd k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) k[i + radius] = std::exp(-0.5 * double(i) * i / (sigma * sigma));
  return k / k.sum();
}

namespace {

// 1D convolution along `axis` with clamped reads.
Eigen::ArrayXd convolve_axis(const Eigen::ArrayXd& in, const Dims& dims, int axis, const Eigen::ArrayXd& kernel) {
  const int radius = int(kernel.size() / 2);
  const int extent = axis == 0 ? dims.x : axis == 1 ? dims.y : dims.z;
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? std::size_t(dims.x) : std::size_t(dims.x) * dims.y;
  Eigen::ArrayXd out(in.size());
  for (std::size_t v = 0; v < dims.voxels(); ++v) {
    const Index3 p = dims.coord(v);
    const int c = p[axis];
    const std::size_t base = v - std::size_t(c) * stride;
    double acc = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int q = std::clamp(c + k, 0, extent - 1);
      acc += kernel[k + radius] * in[Eigen::Index(base + std::size_t(q) * stride)];
    }
    out[Eigen::Index(v)] = acc;
  }
  return out;
}

}  // namespace

Eigen::ArrayXd gaussian_smooth(const Eigen::ArrayXd& values, const Dims& dims, const Eigen::Vector3d& sigmas) {
  Eigen::ArrayXd cur = values;
  for (int axis = 0; axis < 3; ++axis) {
    const double s = sigmas[axis];
    if (!(s > 0.0)) throw ValidationError("smoothing sigma must be positive, got " + std::to_string(s));
    cur = convolve_axis(cur, dims, axis, gaussian_kernel(s, gaussian_radius(s)));
  }
  return cur;
}

Eigen::ArrayXd gradient_magnitude(const Eigen::ArrayXd& values, const Dims& dims) {
  Eigen::ArrayXd out(values.size());
  auto at = [&](int x, int y, int z) {
    x = std::clamp(x, 0, dims.x - 1);
    y = std::clamp(y, 0, dims.y - 1);
    z = std::clamp(z, 0, dims.z - 1);
    return values[Eigen::Index(dims.index(x, y, z))];
  };
  for (std::size_t v = 0; v < dims.voxels(); ++v) {
    const Index3 p = dims.coord(v);
    const double gx = 0.5 * (at(p.x() + 1, p.y(), p.z()) - at(p.x() - 1, p.y(), p.z()));
    const double gy = 0.5 * (at(p.x(), p.y() + 1, p.z()) - at(p.x(), p.y() - 1, p.z()));
    const double gz = 0.5 * (at(p.x(), p.y(), p.z() + 1) - at(p.x(), p.y(), p.z() - 1));
    out[Eigen::Index(v)] = std::sqrt(gx * gx + gy * gy + gz * gz);
  }
  return out;
}

FeatureVolume derive_features(const IntensityVolume& img, const FeatureConfig& cfg) {
  if (cfg.mode != FeatureMode::derived) throw ValidationError("derive_features requires mode = derived");
  for (double s : cfg.smoothing_scales)
    if (!(s > 0.0)) throw ValidationError("smoothing sigma must be positive, got " + std::to_string(s));
  const int channels = cfg.derived_channels();
  if (cfg.channels > 0 && cfg.channels != channels)
    throw ValidationError("feature config declares " + std::to_string(cfg.channels) + " channels but derives " +
                          std::to_string(channels));

  Dims dims = img.dims();
  dims.d = channels;
  FeatureVolume out(dims, img.frame());
  const Eigen::ArrayXd raw = img.channel(0).cast<double>();
  out.channel(0) = raw.cast<float>();
  int m = 1;
  for (double s : cfg.smoothing_scales) {
    Eigen::Vector3d sigmas = Eigen::Vector3d::Constant(s);
    if (cfg.spacing_aware)
      for (int a = 0; a < 3; ++a) sigmas[a] = s / dims.spacing[std::size_t(a)];
    out.channel(m++) = gaussian_smooth(raw, img.dims(), sigmas).cast<float>();
  }
  if (cfg.include_gradient) out.channel(m++) = gradient_magnitude(raw, img.dims()).cast<float>();
  return out;
}

void ChannelGuard::check(const FeatureVolume& vol) {
  if (channels_ && *channels_ != vol.channels())
    throw DataError("feature volume for frame " + std::to_string(vol.frame()) + " has D=" + std::to_string(vol.channels()) +
                    ", dataset uses D=" + std::to_string(*channels_));
  if (grid_ && !grid_->same_grid(vol.dims()))
    throw DataError("feature volume for frame " + std::to_string(vol.frame()) + " has a different grid size");
  channels_ = vol.channels();
  grid_ = vol.dims();
}

FeatureVolume ingest_features(const std::filesystem::path& path) { return load_features(path); }

FeatureVolume ingest_features(const std::filesystem::path& path, ChannelGuard& guard) {
  FeatureVolume vol = load_features(path);
  guard.check(vol);
  return vol;
}

}  // namespace ptrack
