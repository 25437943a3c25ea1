#pragma once

#include <filesystem>
#include <vector>

#include "isip4d/detector.hpp"
#include "isip4d/field.hpp"
#include "isip4d/volume.hpp"

namespace isip4d {

/// Scalar image sequence f(x, y, t) with values in [0, 1], row-major
/// (x fastest) per frame.
class ImageSequence {
 public:
  ImageSequence(int width, int height, std::vector<std::vector<float>> frames);

  int width() const { return width_; }
  int height() const { return height_; }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  const std::vector<float>& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
  float at(int x, int y, int t) const {
    return frame(t)[static_cast<std::size_t>(x) + static_cast<std::size_t>(width_) * static_cast<std::size_t>(y)];
  }

 private:
  int width_;
  int height_;
  std::vector<std::vector<float>> frames_;
};

/// Space-time interest point settings for image sequences. sigma_s in pixels,
/// sigma_t in frames.
struct Stip3dParams {
  double sigma_s = 2.0;
  double sigma_t = 1.0;
  /// Integration-scale multiplier on both variances.
  double l = 2.0;
  double k = 0.04;
  double h_threshold = 0.6;
  int nms_radius = 1;
  double kernel_radius_factor = 3.0;
  /// Same border-frame rule as DetectorParams.
  bool exclude_border_frames = true;

  void validate() const;
  SmoothingParams smoothing() const { return {sigma_s, sigma_t, kernel_radius_factor}; }
};

/// Fields over (x, y, t), stored as Field4 with nz = 1.
struct StipScaleSpace {
  Field4 L;
  Field4 Lx;
  Field4 Ly;
  Field4 Lt;
};

/// x, y passes with sigma_s then t with sigma_t (edges replicated), followed
/// by central differences. Throws std::invalid_argument below 3 frames.
StipScaleSpace stip_scale_space(const ImageSequence& f, const Stip3dParams& params);

/// Unique entries of the symmetric 3x3 matrix over (x, y, t).
struct SymMat3 {
  double xx = 0, xy = 0, xt = 0, yy = 0, yt = 0, tt = 0;

  double trace() const { return xx + yy + tt; }
  double determinant() const;
};

/// det(M) - k * trace(M)^3.
double harris_response_3d(const SymMat3& m, double k);

struct StipDetection {
  int t = 0;
  int x = 0;
  int y = 0;
  double raw = 0.0;
  double normalized = 0.0;
};

struct StipResult {
  std::vector<StipDetection> detections;
  ResponseField response;
};

/// Moment matrix integrated at l * sigma^2, response, global min-max
/// normalization, threshold plus raw > 0, strict (2r+1)^3 NMS with the same
/// tie-break and ordering as the 4D detector.
StipResult stip_detect(const ImageSequence& f, const Stip3dParams& params);

/// Orthographic silhouette along z: a pixel is 1 when any voxel in its
/// column is inside the surface (value < 0), else 0.
ImageSequence render_silhouettes(const VolumeSequence& seq);

/// Binary PGM (P5) files, one per frame, read in lexicographic filename
/// order. 8- and 16-bit maxvals are accepted.
ImageSequence read_pgm_directory(const std::filesystem::path& dir);
/// Writes frame_0000.pgm, frame_0001.pgm, ... with maxval 255.
void write_pgm_directory(const ImageSequence& seq, const std::filesystem::path& dir);

/// Image sequence view of a volume sequence with nz = 1. Values must lie in
/// [0, 1].
ImageSequence image_sequence_from_volume(const VolumeSequence& seq);
/// Inverse of image_sequence_from_volume; unit voxel size.
VolumeSequence volume_from_image_sequence(const ImageSequence& seq);

}  // namespace isip4d
