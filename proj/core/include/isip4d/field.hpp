#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "isip4d/volume.hpp"

namespace isip4d {

struct Dims3 {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool operator==(const Dims3&) const = default;
};

struct Dims4 {
  int nx = 1;
  int ny = 1;
  int nz = 1;
  int nt = 1;
  Dims3 spatial() const { return {nx, ny, nz}; }
  std::size_t frame_size() const { return spatial().count(); }
  std::size_t count() const { return frame_size() * static_cast<std::size_t>(nt); }
  bool operator==(const Dims4&) const = default;
};

/// Dense scalar field over (x, y, z, t), double precision, x-fastest then
/// y, z and frame-major.
class Field4 {
 public:
  Field4() = default;
  explicit Field4(const Dims4& dims, double fill = 0.0) : dims_(dims), data_(dims.count(), fill) {}

  const Dims4& dims() const { return dims_; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  std::span<double> frame(int t) {
    return std::span<double>(data_).subspan(static_cast<std::size_t>(t) * dims_.frame_size(), dims_.frame_size());
  }
  std::span<const double> frame(int t) const {
    return std::span<const double>(data_).subspan(static_cast<std::size_t>(t) * dims_.frame_size(),
                                                  dims_.frame_size());
  }

  std::size_t index(int i, int j, int k, int t) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_.nx) *
               (static_cast<std::size_t>(j) +
                static_cast<std::size_t>(dims_.ny) *
                    (static_cast<std::size_t>(k) + static_cast<std::size_t>(dims_.nz) * static_cast<std::size_t>(t)));
  }
  double& at(int i, int j, int k, int t) { return data_[index(i, j, k, t)]; }
  double at(int i, int j, int k, int t) const { return data_[index(i, j, k, t)]; }

 private:
  Dims4 dims_;
  std::vector<double> data_;
};

Dims4 dims_of(const VolumeSequence& seq);

/// Widens a TSDF sequence into a double-precision field.
Field4 to_field(const VolumeSequence& seq);

}  // namespace isip4d
