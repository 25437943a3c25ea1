#pragma once

#include <functional>
#include <span>
#include <vector>

#include "isip4d/field.hpp"
#include "isip4d/volume.hpp"

namespace isip4d {

/// Gaussian scale of the smoothing pass. Units are voxels (spatial) and
/// frames (temporal). Kernel half-width is ceil(kernel_radius_factor * sigma).
struct SmoothingParams {
  double sigma_s = 2.0;
  double sigma_t = 1.0;
  double kernel_radius_factor = 3.0;

  void validate() const;
  int spatial_radius() const;
  int temporal_radius() const;
  /// Same kernel family with both variances multiplied by `variance_scale`.
  SmoothingParams scaled_variance(double variance_scale) const;
};

/// Sampled Gaussian exp(-u^2 / 2 sigma^2) for u in [-radius, radius],
/// normalized so the coefficients sum to one.
std::vector<double> gaussian_kernel_1d(double sigma, int radius);

/// ceil(factor * sigma), never below 1.
int kernel_radius(double sigma, double factor);

/// Building blocks that operate on single frames. Every sampling outside
/// the grid replicates the nearest edge sample, on spatial and temporal
/// axes alike. Axes of length one are passed through untouched.
namespace frame_ops {

using FrameSource = std::function<std::span<const double>(int)>;

/// Separable convolution of one frame along x, then y, then z.
void smooth_spatial(std::span<const double> in, std::span<double> out, const Dims3& dims,
                    std::span<const double> kernel);

/// out = sum_q kernel[q] * frame(clamp(t + q - r)), q ascending.
void smooth_temporal(const FrameSource& frame, int t, int frame_count, std::span<const double> kernel,
                     std::span<double> out);

/// Central differences (f[i+1] - f[i-1]) / 2 in voxel units; one-sided
/// first-order differences on the grid faces.
void spatial_gradient(std::span<const double> f, const Dims3& dims, std::span<double> gx, std::span<double> gy,
                      std::span<double> gz);

/// Temporal analogue of spatial_gradient for frame t of frame_count.
void temporal_gradient(const FrameSource& frame, int t, int frame_count, std::span<double> gt);

}  // namespace frame_ops

/// x, y, z passes with the sigma_s kernel then the t pass with sigma_t.
Field4 smooth_4d(const Field4& field, const SmoothingParams& params);
Field4 smooth_4d(const VolumeSequence& seq, const SmoothingParams& params);

struct Gradient4 {
  Field4 x;
  Field4 y;
  Field4 z;
  Field4 t;
};

Gradient4 derivatives_4d(const Field4& smoothed);

/// Half-open range of frames whose temporal smoothing window stays inside
/// the sequence.
struct FrameRange {
  int first = 0;
  int last = 0;
};

struct ScaleSpaceFields {
  Field4 L;
  Field4 Lx;
  Field4 Ly;
  Field4 Lz;
  Field4 Lt;
  SmoothingParams params;
  GridSpec spec;
  FrameRange frame_range;
};

ScaleSpaceFields scale_space(const VolumeSequence& seq, const SmoothingParams& params);

}  // namespace isip4d
