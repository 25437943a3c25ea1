#include "isip4d/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "isip4d/parallel.hpp"

namespace isip4d {
namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 rotation_matrix(const Vec3& rv) {
  const double angle = std::sqrt(rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]);
  Mat3 r{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  if (angle == 0.0) return r;
  const double x = rv[0] / angle, y = rv[1] / angle, z = rv[2] / angle;
  const double c = std::cos(angle), s = std::sin(angle), C = 1.0 - c;
  r[0] = {c + x * x * C, x * y * C - z * s, x * z * C + y * s};
  r[1] = {y * x * C + z * s, c + y * y * C, y * z * C - x * s};
  r[2] = {z * x * C - y * s, z * y * C + x * s, c + z * z * C};
  return r;
}

double length(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

struct ShapeDistance {
  const Vec3& q;
  double operator()(const Sphere& s) const { return length(q) - s.radius; }
  double operator()(const Box& b) const {
    Vec3 d{};
    for (int a = 0; a < 3; ++a) d[static_cast<std::size_t>(a)] = std::abs(q[static_cast<std::size_t>(a)]) - b.half_extents[static_cast<std::size_t>(a)];
    const Vec3 outside{std::max(d[0], 0.0), std::max(d[1], 0.0), std::max(d[2], 0.0)};
    return length(outside) + std::min(std::max({d[0], d[1], d[2]}), 0.0);
  }
  double operator()(const Capsule& c) const {
    const double y = std::clamp(q[1], -c.half_length, c.half_length);
    return length({q[0], q[1] - y, q[2]}) - c.radius;
  }
};

// Radius of a sphere around the body-frame offset that encloses the shape.
double bounding_radius(const Shape& shape) {
  struct {
    double operator()(const Sphere& s) const { return s.radius; }
    double operator()(const Box& b) const { return length(b.half_extents); }
    double operator()(const Capsule& c) const { return c.half_length + c.radius; }
  } visitor;
  return std::visit(visitor, shape);
}

}  // namespace

void Primitive::validate() const {
  struct {
    void operator()(const Sphere& s) const {
      if (!(s.radius > 0.0)) throw std::invalid_argument("sphere radius must be > 0");
    }
    void operator()(const Box& b) const {
      for (double h : b.half_extents) {
        if (!(h > 0.0)) throw std::invalid_argument("box half-extents must be > 0");
      }
    }
    void operator()(const Capsule& c) const {
      if (!(c.half_length > 0.0) || !(c.radius > 0.0)) {
        throw std::invalid_argument("capsule half_length and radius must be > 0");
      }
    }
  } check;
  std::visit(check, shape);
}

Vec3 Pose::to_world(const Vec3& b) const {
  const Mat3 r = rotation_matrix(rotation);
  Vec3 w{};
  for (std::size_t i = 0; i < 3; ++i) w[i] = r[i][0] * b[0] + r[i][1] * b[1] + r[i][2] * b[2] + translation[i];
  return w;
}

Vec3 Pose::to_body(const Vec3& w) const {
  const Mat3 r = rotation_matrix(rotation);
  const Vec3 d{w[0] - translation[0], w[1] - translation[1], w[2] - translation[2]};
  Vec3 b{};
  for (std::size_t i = 0; i < 3; ++i) b[i] = r[0][i] * d[0] + r[1][i] * d[1] + r[2][i] * d[2];
  return b;
}

double sdf_primitive(const Primitive& prim, const Pose& pose, const Vec3& point) {
  const Vec3 body = pose.to_body(point);
  const Vec3 q{body[0] - prim.local_offset[0], body[1] - prim.local_offset[1], body[2] - prim.local_offset[2]};
  return std::visit(ShapeDistance{q}, prim.shape);
}

Pose Trajectory::at(int frame) const {
  if (keys.empty()) return {};
  if (frame <= keys.front().frame) return keys.front().pose;
  if (frame >= keys.back().frame) return keys.back().pose;
  auto hi = std::upper_bound(keys.begin(), keys.end(), frame,
                             [](int f, const Keyframe& key) { return f < key.frame; });
  auto lo = std::prev(hi);
  const double u = static_cast<double>(frame - lo->frame) / static_cast<double>(hi->frame - lo->frame);
  Pose p;
  for (std::size_t a = 0; a < 3; ++a) {
    p.translation[a] = lo->pose.translation[a] + u * (hi->pose.translation[a] - lo->pose.translation[a]);
    p.rotation[a] = lo->pose.rotation[a] + u * (hi->pose.rotation[a] - lo->pose.rotation[a]);
  }
  return p;
}

double scene_sdf(const Scene& scene, int frame, const Vec3& point) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < scene.primitives.size(); ++p) {
    const Pose pose = p < scene.motion.trajectories.size() ? scene.motion.trajectories[p].at(frame) : Pose{};
    d = std::min(d, sdf_primitive(scene.primitives[p], pose, point));
  }
  return d;
}

GeneratedScene generate_sequence(const Scene& scene, const GridSpec& spec, int frames, double frame_dt) {
  spec.validate();
  if (frames < 1) throw std::invalid_argument("generate_sequence: frames must be >= 1");
  if (scene.primitives.empty()) throw std::invalid_argument("generate_sequence: scene has no primitives");
  for (const auto& p : scene.primitives) p.validate();

  std::vector<std::string> warnings;
  const Vec3 lo = spec.origin;
  const Vec3 hi = spec.world(spec.dims[0] - 1, spec.dims[1] - 1, spec.dims[2] - 1);

  std::vector<TsdfVolume> volumes;
  volumes.reserve(static_cast<std::size_t>(frames));
  for (int t = 0; t < frames; ++t) {
    std::vector<Pose> poses(scene.primitives.size());
    for (std::size_t p = 0; p < poses.size(); ++p) {
      if (p < scene.motion.trajectories.size()) poses[p] = scene.motion.trajectories[p].at(t);
      const Vec3 c = poses[p].to_world(scene.primitives[p].local_offset);
      const double r = bounding_radius(scene.primitives[p].shape);
      bool outside = false;
      for (std::size_t a = 0; a < 3; ++a) outside = outside || c[a] + r < lo[a] || c[a] - r > hi[a];
      if (outside) {
        warnings.push_back("frame " + std::to_string(t) + ": primitive " + std::to_string(p) +
                           " lies entirely outside the grid");
      }
    }
    std::vector<float> data(spec.voxel_count());
    parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t n = begin; n < end; ++n) {
        const Vec3 x = spec.world(spec.grid_index(n));
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < poses.size(); ++p) d = std::min(d, sdf_primitive(scene.primitives[p], poses[p], x));
        data[n] = static_cast<float>(truncate_sdf(d, spec.truncation_tau));
      }
    });
    volumes.emplace_back(spec, std::move(data));
  }

  std::vector<GroundTruthEvent> events;
  for (const ScriptedEvent& e : scene.motion.events) {
    if (e.frame < 0 || e.frame >= frames) {
      throw std::invalid_argument("event frame " + std::to_string(e.frame) + " outside [0, " + std::to_string(frames) + ")");
    }
    if (e.primitive < 0 || static_cast<std::size_t>(e.primitive) >= scene.primitives.size()) {
      throw std::invalid_argument("event references unknown primitive " + std::to_string(e.primitive));
    }
    const auto pidx = static_cast<std::size_t>(e.primitive);
    const Pose pose = pidx < scene.motion.trajectories.size() ? scene.motion.trajectories[pidx].at(e.frame) : Pose{};
    GroundTruthEvent g;
    g.frame = e.frame;
    g.position = pose.to_world(e.anchor);
    g.spatial_radius = e.radius_in_voxels ? e.spatial_radius * spec.voxel_size : e.spatial_radius;
    g.temporal_window = e.temporal_window;
    events.push_back(g);
  }

  return {VolumeSequence(spec, std::move(volumes), frame_dt), std::move(events), std::move(warnings)};
}

GridSpec resample_grid(const GridSpec& grid, int n) {
  if (n < 1) throw std::invalid_argument("grid resolution must be >= 1");
  if (grid.dims[0] != grid.dims[1] || grid.dims[0] != grid.dims[2]) {
    throw std::invalid_argument("resample_grid needs a cubic grid");
  }
  const double ext = grid.voxel_size * (grid.dims[0] - 1);
  Vec3 center{};
  for (std::size_t a = 0; a < 3; ++a) center[a] = grid.origin[a] + 0.5 * grid.voxel_size * (grid.dims[a] - 1);
  const double vs = n > 1 ? ext / (n - 1) : grid.voxel_size;
  GridSpec g = centered_grid(n, vs, center);
  g.truncation_tau = grid.truncation_tau / grid.voxel_size * vs;
  return g;
}

}  // namespace isip4d
