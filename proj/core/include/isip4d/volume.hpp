#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace isip4d {

using Vec3 = std::array<double, 3>;

/// Raised when an on-disk artifact (volume files, CSV, OBJ, scene script)
/// does not conform to its format.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Index3 {
  int i = 0;
  int j = 0;
  int k = 0;
  auto operator<=>(const Index3&) const = default;
};

/// Voxel grid calibration shared by every frame of a sequence.
///
/// Voxel (i,j,k) has its center at origin + voxel_size * (i,j,k). Linear
/// storage order is x-fastest: index = i + nx * (j + ny * k).
struct GridSpec {
  std::array<int, 3> dims{128, 128, 128};
  double voxel_size = 1.0 / 128.0;
  Vec3 origin{0.0, 0.0, 0.0};
  double truncation_tau = 3.0 / 128.0;

  /// Throws std::invalid_argument on non-positive dims, voxel size or tau.
  void validate() const;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t linear_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(k));
  }
  Index3 grid_index(std::size_t linear) const;
  bool contains(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }
  Vec3 world(int i, int j, int k) const {
    return {origin[0] + voxel_size * i, origin[1] + voxel_size * j, origin[2] + voxel_size * k};
  }
  Vec3 world(const Index3& idx) const { return world(idx.i, idx.j, idx.k); }
  /// Nearest voxel center to a world point, or nullopt when it falls outside.
  std::optional<Index3> nearest_voxel(const Vec3& p) const;

  bool operator==(const GridSpec&) const = default;
};

/// Cubic grid of `n` voxels per side centered on `center`, tau = 3 voxels.
GridSpec centered_grid(int n, double voxel_size, const Vec3& center = {0.0, 0.0, 0.0});

/// Truncated signed distance: min(1, eta/tau) for eta >= -tau, else -1.
/// Positive outside the object, negative inside.
double truncate_sdf(double eta, double tau);

/// One TSDF frame. Immutable once constructed; values are checked to lie
/// in [-1, 1].
class TsdfVolume {
 public:
  /// Volume filled with free space (+1).
  explicit TsdfVolume(const GridSpec& spec);
  TsdfVolume(const GridSpec& spec, std::vector<float> data);

  const GridSpec& spec() const { return spec_; }
  std::span<const float> data() const { return data_; }
  float at(int i, int j, int k) const { return data_[spec_.linear_index(i, j, k)]; }

 private:
  GridSpec spec_;
  std::vector<float> data_;
};

/// Ordered frames p(x,y,z,t) on one grid.
class VolumeSequence {
 public:
  VolumeSequence(const GridSpec& spec, std::vector<TsdfVolume> frames, double frame_dt = 1.0 / 30.0);

  const GridSpec& spec() const { return spec_; }
  std::span<const TsdfVolume> frames() const { return frames_; }
  const TsdfVolume& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
  int frame_count() const { return static_cast<int>(frames_.size()); }
  double frame_dt() const { return frame_dt_; }

 private:
  GridSpec spec_;
  std::vector<TsdfVolume> frames_;
  double frame_dt_;
};

}  // namespace isip4d
