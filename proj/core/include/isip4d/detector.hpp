#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "isip4d/field.hpp"
#include "isip4d/scalespace.hpp"
#include "isip4d/volume.hpp"

namespace isip4d {

/// Detector configuration. Defaults: sigma_s = 2, sigma_t = 1, l' = 2,
/// k = 0.0005, threshold 0.6.
struct DetectorParams {
  double k = 0.0005;
  /// Integration-scale multiplier applied to the smoothing variances.
  double l_prime = 2.0;
  /// Threshold on the min-max normalized response, in [0, 1].
  double h_threshold = 0.6;
  SmoothingParams smoothing;
  /// NMS window half-width along every axis (voxels and frames).
  int nms_radius = 1;
  /// Skip candidates in the first and last smoothing.temporal_radius()
  /// frames, whose temporal window is dominated by the replicated edge
  /// frame. A sequence start or end then no longer reads as a stop.
  bool exclude_border_frames = true;

  void validate() const;
  /// Scale used to average the derivative products: sigma' = sqrt(l') sigma.
  SmoothingParams integration() const { return smoothing.scaled_variance(l_prime); }
  /// Frames eligible for detection in a sequence of `frame_count` frames.
  FrameRange candidate_frames(int frame_count) const;
};

/// Unique entries of a symmetric 4x4 matrix over (x, y, z, t), row-major
/// upper triangle: xx xy xz xt yy yz yt zz zt tt.
enum MomentComponent : int { kXX, kXY, kXZ, kXT, kYY, kYZ, kYT, kZZ, kZT, kTT };
inline constexpr int kMomentComponents = 10;

/// Row/column axes of each MomentComponent.
inline constexpr std::array<std::array<int, 2>, kMomentComponents> kMomentAxes{
    {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

struct SymMat4 {
  std::array<double, kMomentComponents> c{};

  double operator()(int row, int col) const;
  double trace() const { return c[kXX] + c[kYY] + c[kZZ] + c[kTT]; }
  /// Closed-form Laplace expansion over complementary 2x2 minors.
  double determinant() const;
};

/// det(M) - k * trace(M)^4.
double harris_response_4d(const SymMat4& m, double k);

/// Gaussian-integrated structure tensor of the scale-space gradients.
struct MomentField {
  std::array<Field4, kMomentComponents> components;

  const Dims4& dims() const { return components[0].dims(); }
  SymMat4 at(int i, int j, int k, int t) const;
};

MomentField moment_field(const ScaleSpaceFields& fields, const DetectorParams& params);

struct ResponseField {
  Field4 raw;
  double h_min = 0.0;
  double h_max = 0.0;
  /// (raw - h_min) / (h_max - h_min); all zeros when degenerate.
  Field4 normalized;
  /// Set when h_max == h_min (e.g. a static scene).
  bool degenerate_normalization = false;
};

/// Global min-max normalization over every voxel of every frame.
ResponseField normalize_response(Field4 raw);

ResponseField response(const MomentField& m, const DetectorParams& params);

/// Largest k keeping the response non-negative for eigenvalue ratios
/// alpha, beta, gamma (each >= 1): alpha*beta*gamma / (1+alpha+beta+gamma)^4.
double k_upper_bound(double alpha, double beta, double gamma);

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};
/// Exact variant of k_upper_bound for integer ratios.
Rational k_upper_bound_exact(std::int64_t alpha, std::int64_t beta, std::int64_t gamma);

/// Strict local maximum of a response field, in (t, i, j, k) grid terms.
struct LocalMaximum {
  int t = 0;
  Index3 index;
  double raw = 0.0;
  double normalized = 0.0;
};

/// Points of frames in `frames` with normalized >= threshold and raw > 0
/// that beat every neighbor in the (2r+1)^4 window (out-of-range neighbors
/// ignored). Equal raw values go to the lexicographically smaller
/// (t, i, j, k). Sorted by descending normalized response, then ascending
/// (t, i, j, k). Empty when the normalization is degenerate.
std::vector<LocalMaximum> find_local_maxima(const ResponseField& r, double threshold, int radius,
                                            FrameRange frames = {0, std::numeric_limits<int>::max()});

struct Detection {
  int frame = 0;
  Index3 grid_index;
  Vec3 world_pos{};
  double raw_response = 0.0;
  double normalized_response = 0.0;
};

std::vector<Detection> nms_4d(const ResponseField& r, const DetectorParams& params, const GridSpec& spec);

struct DetectionResult {
  std::vector<Detection> detections;
  ResponseField response;
};

/// smooth -> differentiate -> moment field -> response -> NMS. Streams
/// frames through the pipeline so only a temporal window of the
/// intermediate fields is resident; the result is bit-identical to
/// composing the full-field stages. Requires at least 3 frames.
DetectionResult detect(const VolumeSequence& seq, const DetectorParams& params);

}  // namespace isip4d
