#include "isip4d/scalespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isip4d/parallel.hpp"

namespace isip4d {

void SmoothingParams::validate() const {
  if (!(sigma_s > 0.0) || !std::isfinite(sigma_s)) throw std::invalid_argument("sigma_s must be > 0");
  if (!(sigma_t > 0.0) || !std::isfinite(sigma_t)) throw std::invalid_argument("sigma_t must be > 0");
  if (!(kernel_radius_factor >= 2.0) || !std::isfinite(kernel_radius_factor)) {
    throw std::invalid_argument("kernel_radius_factor must be >= 2");
  }
}

int SmoothingParams::spatial_radius() const { return kernel_radius(sigma_s, kernel_radius_factor); }
int SmoothingParams::temporal_radius() const { return kernel_radius(sigma_t, kernel_radius_factor); }

SmoothingParams SmoothingParams::scaled_variance(double variance_scale) const {
  SmoothingParams p = *this;
  const double s = std::sqrt(variance_scale);
  p.sigma_s *= s;
  p.sigma_t *= s;
  return p;
}

int kernel_radius(double sigma, double factor) {
  return std::max(1, static_cast<int>(std::ceil(factor * sigma - 1e-12)));
}

std::vector<double> gaussian_kernel_1d(double sigma, int radius) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian_kernel_1d: sigma must be > 0");
  if (radius < 1) throw std::invalid_argument("gaussian_kernel_1d: radius must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(2 * radius + 1));
  for (int u = -radius; u <= radius; ++u) {
    c[static_cast<std::size_t>(u + radius)] = std::exp(-0.5 * (u * u) / (sigma * sigma));
  }
  // Sum outside-in so the two halves accumulate identically.
  double sum = c[static_cast<std::size_t>(radius)];
  for (int u = radius; u >= 1; --u) {
    sum += c[static_cast<std::size_t>(radius - u)] + c[static_cast<std::size_t>(radius + u)];
  }
  for (double& v : c) v /= sum;
  return c;
}

namespace frame_ops {
namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

void convolve_x(std::span<const double> in, std::span<double> out, const Dims3& d, std::span<const double> kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  const std::size_t nx = static_cast<std::size_t>(d.nx);
  const std::size_t rows = static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz);
  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    std::vector<double> line(nx + 2 * static_cast<std::size_t>(r));
    for (std::size_t row = begin; row < end; ++row) {
      const std::size_t base = row * nx;
      for (int m = 0; m < static_cast<int>(line.size()); ++m) {
        line[static_cast<std::size_t>(m)] = in[base + static_cast<std::size_t>(clamp_index(m - r, d.nx))];
      }
      for (std::size_t i = 0; i < nx; ++i) {
        double acc = 0.0;
        for (std::size_t q = 0; q < kernel.size(); ++q) acc += kernel[q] * line[i + q];
        out[base + i] = acc;
      }
    }
  });
}

// Convolution along y (axis 1) or z (axis 2), accumulated one x-row at a time.
void convolve_rows(std::span<const double> in, std::span<double> out, const Dims3& d, int axis,
                   std::span<const double> kernel) {
  const int r = static_cast<int>(kernel.size() / 2);
  const std::size_t nx = static_cast<std::size_t>(d.nx);
  const int n = axis == 1 ? d.ny : d.nz;
  const std::ptrdiff_t stride = axis == 1 ? d.nx : static_cast<std::ptrdiff_t>(d.nx) * d.ny;
  const std::size_t rows = static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz);
  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      const int j = static_cast<int>(row % static_cast<std::size_t>(d.ny));
      const int k = static_cast<int>(row / static_cast<std::size_t>(d.ny));
      const int pos = axis == 1 ? j : k;
      const std::size_t base = row * nx;
      double* dst = out.data() + base;
      std::fill(dst, dst + nx, 0.0);
      for (int q = 0; q < static_cast<int>(kernel.size()); ++q) {
        const int src_pos = clamp_index(pos + q - r, n);
        const double* src = in.data() + static_cast<std::ptrdiff_t>(base) + (src_pos - pos) * stride;
        const double w = kernel[static_cast<std::size_t>(q)];
        for (std::size_t i = 0; i < nx; ++i) dst[i] += w * src[i];
      }
    }
  });
}

}  // namespace

void smooth_spatial(std::span<const double> in, std::span<double> out, const Dims3& dims,
                    std::span<const double> kernel) {
  if (in.size() != dims.count() || out.size() != dims.count()) {
    throw std::invalid_argument("smooth_spatial: buffer size does not match dims");
  }
  std::vector<double> a(in.begin(), in.end());
  std::vector<double> b(dims.count());
  if (dims.nx > 1) {
    convolve_x(a, b, dims, kernel);
    a.swap(b);
  }
  if (dims.ny > 1) {
    convolve_rows(a, b, dims, 1, kernel);
    a.swap(b);
  }
  if (dims.nz > 1) {
    convolve_rows(a, b, dims, 2, kernel);
    a.swap(b);
  }
  std::copy(a.begin(), a.end(), out.begin());
}

void smooth_temporal(const FrameSource& frame, int t, int frame_count, std::span<const double> kernel,
                     std::span<double> out) {
  if (frame_count == 1) {
    const auto only = frame(0);
    std::copy(only.begin(), only.end(), out.begin());
    return;
  }
  const int r = static_cast<int>(kernel.size() / 2);
  std::vector<std::span<const double>> taps;
  taps.reserve(kernel.size());
  for (int q = 0; q < static_cast<int>(kernel.size()); ++q) taps.push_back(frame(clamp_index(t + q - r, frame_count)));
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(begin), out.begin() + static_cast<std::ptrdiff_t>(end), 0.0);
    for (std::size_t q = 0; q < taps.size(); ++q) {
      const double w = kernel[q];
      const double* src = taps[q].data();
      for (std::size_t v = begin; v < end; ++v) out[v] += w * src[v];
    }
  });
}

void spatial_gradient(std::span<const double> f, const Dims3& d, std::span<double> gx, std::span<double> gy,
                      std::span<double> gz) {
  const std::size_t nx = static_cast<std::size_t>(d.nx);
  const std::size_t plane = nx * static_cast<std::size_t>(d.ny);
  const std::size_t rows = static_cast<std::size_t>(d.ny) * static_cast<std::size_t>(d.nz);
  // Difference along one axis at position `pos` of `n`, samples `stride` apart.
  auto diff = [](const double* p, int pos, int n, std::size_t stride) {
    if (n == 1) return 0.0;
    if (pos == 0) return p[stride] - p[0];
    if (pos == n - 1) return p[0] - p[-static_cast<std::ptrdiff_t>(stride)];
    return 0.5 * (p[stride] - p[-static_cast<std::ptrdiff_t>(stride)]);
  };
  parallel_for(rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      const int j = static_cast<int>(row % static_cast<std::size_t>(d.ny));
      const int k = static_cast<int>(row / static_cast<std::size_t>(d.ny));
      const std::size_t base = row * nx;
      for (int i = 0; i < d.nx; ++i) {
        const std::size_t v = base + static_cast<std::size_t>(i);
        const double* p = f.data() + v;
        gx[v] = diff(p, i, d.nx, 1);
        gy[v] = diff(p, j, d.ny, nx);
        gz[v] = diff(p, k, d.nz, plane);
      }
    }
  });
}

void temporal_gradient(const FrameSource& frame, int t, int frame_count, std::span<double> gt) {
  if (frame_count == 1) {
    std::fill(gt.begin(), gt.end(), 0.0);
    return;
  }
  std::span<const double> ahead;
  std::span<const double> behind;
  double scale = 0.5;
  if (t == 0) {
    ahead = frame(1);
    behind = frame(0);
    scale = 1.0;
  } else if (t == frame_count - 1) {
    ahead = frame(t);
    behind = frame(t - 1);
    scale = 1.0;
  } else {
    ahead = frame(t + 1);
    behind = frame(t - 1);
  }
  parallel_for(gt.size(), [&](std::size_t begin, std::size_t end) {
    if (scale == 1.0) {
      for (std::size_t v = begin; v < end; ++v) gt[v] = ahead[v] - behind[v];
    } else {
      for (std::size_t v = begin; v < end; ++v) gt[v] = 0.5 * (ahead[v] - behind[v]);
    }
  });
}

}  // namespace frame_ops

Field4 smooth_4d(const Field4& field, const SmoothingParams& params) {
  params.validate();
  const Dims4& d = field.dims();
  const auto ks = gaussian_kernel_1d(params.sigma_s, params.spatial_radius());
  const auto kt = gaussian_kernel_1d(params.sigma_t, params.temporal_radius());

  Field4 spatial(d);
  for (int t = 0; t < d.nt; ++t) frame_ops::smooth_spatial(field.frame(t), spatial.frame(t), d.spatial(), ks);
  Field4 out(d);
  const frame_ops::FrameSource src = [&](int s) { return spatial.frame(s); };
  for (int t = 0; t < d.nt; ++t) frame_ops::smooth_temporal(src, t, d.nt, kt, out.frame(t));
  return out;
}

Field4 smooth_4d(const VolumeSequence& seq, const SmoothingParams& params) {
  return smooth_4d(to_field(seq), params);
}

Gradient4 derivatives_4d(const Field4& L) {
  const Dims4& d = L.dims();
  Gradient4 g{Field4(d), Field4(d), Field4(d), Field4(d)};
  const frame_ops::FrameSource src = [&](int s) { return L.frame(s); };
  for (int t = 0; t < d.nt; ++t) {
    frame_ops::spatial_gradient(L.frame(t), d.spatial(), g.x.frame(t), g.y.frame(t), g.z.frame(t));
    frame_ops::temporal_gradient(src, t, d.nt, g.t.frame(t));
  }
  return g;
}

ScaleSpaceFields scale_space(const VolumeSequence& seq, const SmoothingParams& params) {
  ScaleSpaceFields f;
  f.L = smooth_4d(seq, params);
  Gradient4 g = derivatives_4d(f.L);
  f.Lx = std::move(g.x);
  f.Ly = std::move(g.y);
  f.Lz = std::move(g.z);
  f.Lt = std::move(g.t);
  f.params = params;
  f.spec = seq.spec();
  const int r = params.temporal_radius();
  const int nt = seq.frame_count();
  f.frame_range.first = std::min(r, nt);
  f.frame_range.last = std::max(f.frame_range.first, nt - r);
  return f;
}

}  // namespace isip4d
