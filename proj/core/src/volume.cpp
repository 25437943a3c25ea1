#include "isip4d/volume.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace isip4d {

void GridSpec::validate() const {
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("grid dims must be >= 1");
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw std::invalid_argument("voxel_size must be > 0");
  }
  if (!(truncation_tau > 0.0) || !std::isfinite(truncation_tau)) {
    throw std::invalid_argument("truncation_tau must be > 0");
  }
  for (double o : origin) {
    if (!std::isfinite(o)) throw std::invalid_argument("grid origin must be finite");
  }
}

Index3 GridSpec::grid_index(std::size_t linear) const {
  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  Index3 idx;
  idx.i = static_cast<int>(linear % nx);
  linear /= nx;
  idx.j = static_cast<int>(linear % ny);
  idx.k = static_cast<int>(linear / ny);
  return idx;
}

std::optional<Index3> GridSpec::nearest_voxel(const Vec3& p) const {
  Index3 idx{static_cast<int>(std::lround((p[0] - origin[0]) / voxel_size)),
             static_cast<int>(std::lround((p[1] - origin[1]) / voxel_size)),
             static_cast<int>(std::lround((p[2] - origin[2]) / voxel_size))};
  if (!contains(idx.i, idx.j, idx.k)) return std::nullopt;
  return idx;
}

GridSpec centered_grid(int n, double voxel_size, const Vec3& center) {
  GridSpec spec;
  spec.dims = {n, n, n};
  spec.voxel_size = voxel_size;
  const double half = 0.5 * voxel_size * (n - 1);
  spec.origin = {center[0] - half, center[1] - half, center[2] - half};
  spec.truncation_tau = 3.0 * voxel_size;
  spec.validate();
  return spec;
}

double truncate_sdf(double eta, double tau) {
  if (!std::isfinite(eta)) throw std::invalid_argument("truncate_sdf: eta must be finite");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("truncate_sdf: tau must be > 0");
  if (eta >= -tau) return std::min(1.0, eta / tau);
  return -1.0;
}

TsdfVolume::TsdfVolume(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  data_.assign(spec_.voxel_count(), 1.0f);
}

TsdfVolume::TsdfVolume(const GridSpec& spec, std::vector<float> data) : spec_(spec), data_(std::move(data)) {
  spec_.validate();
  if (data_.size() != spec_.voxel_count()) {
    throw std::invalid_argument("TsdfVolume: data length " + std::to_string(data_.size()) +
                                " does not match grid voxel count " + std::to_string(spec_.voxel_count()));
  }
  for (std::size_t n = 0; n < data_.size(); ++n) {
    const float v = data_[n];
    if (!(v >= -1.0f && v <= 1.0f)) {
      throw std::invalid_argument("TsdfVolume: value " + std::to_string(v) + " at linear index " +
                                  std::to_string(n) + " outside [-1, 1]");
    }
  }
}

VolumeSequence::VolumeSequence(const GridSpec& spec, std::vector<TsdfVolume> frames, double frame_dt)
    : spec_(spec), frames_(std::move(frames)), frame_dt_(frame_dt) {
  spec_.validate();
  if (frames_.empty()) throw std::invalid_argument("VolumeSequence needs at least one frame");
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    if (!(frames_[t].spec() == spec_)) {
      throw std::invalid_argument("VolumeSequence: frame " + std::to_string(t) + " has a different grid");
    }
  }
}

}  // namespace isip4d
