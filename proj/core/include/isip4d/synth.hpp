#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "isip4d/volume.hpp"

namespace isip4d {

struct Sphere {
  double radius = 0.5;
};
struct Box {
  Vec3 half_extents{0.5, 0.5, 0.5};
};
/// Segment along the local y axis from -half_length to +half_length, swept
/// by `radius`.
struct Capsule {
  double half_length = 0.5;
  double radius = 0.1;
};
using Shape = std::variant<Sphere, Box, Capsule>;

/// Analytic shape placed at `local_offset` in its body frame.
struct Primitive {
  Shape shape;
  Vec3 local_offset{0.0, 0.0, 0.0};

  void validate() const;
};

/// Rigid pose: world = R(rotation) * body + translation, where `rotation`
/// is a rotation vector (axis * angle, radians).
struct Pose {
  Vec3 translation{0.0, 0.0, 0.0};
  Vec3 rotation{0.0, 0.0, 0.0};

  Vec3 to_world(const Vec3& body) const;
  Vec3 to_body(const Vec3& world) const;
};

/// Exact signed distance from a world point to the posed primitive,
/// negative inside.
double sdf_primitive(const Primitive& prim, const Pose& pose, const Vec3& point);

struct Keyframe {
  int frame = 0;
  Pose pose;
};

/// Keyframed trajectory with linear interpolation of translation and
/// rotation vector; poses hold before the first and after the last key.
struct Trajectory {
  std::vector<Keyframe> keys;

  Pose at(int frame) const;
};

/// Declared motion event (reversal, kick) on one primitive. `anchor` is a
/// body-frame point whose world position at `frame` locates the event.
struct ScriptedEvent {
  int frame = 0;
  int primitive = 0;
  Vec3 anchor{0.0, 0.0, 0.0};
  double spatial_radius = 4.0;
  /// When true, spatial_radius is in voxels of the generation grid.
  bool radius_in_voxels = true;
  int temporal_window = 2;
};

struct MotionScript {
  /// One trajectory per primitive.
  std::vector<Trajectory> trajectories;
  std::vector<ScriptedEvent> events;
};

struct Scene {
  std::vector<Primitive> primitives;
  MotionScript motion;
};

struct GroundTruthEvent {
  int frame = 0;
  Vec3 position{};
  double spatial_radius = 0.0;
  int temporal_window = 0;
};

struct GeneratedScene {
  VolumeSequence sequence;
  std::vector<GroundTruthEvent> events;
  /// Non-fatal issues, e.g. a primitive entirely outside the grid.
  std::vector<std::string> warnings;
};

/// Scene-wide signed distance (pointwise min over primitives) at `frame`.
double scene_sdf(const Scene& scene, int frame, const Vec3& point);

/// Voxel value = truncate_sdf(min over primitives of analytic SDF, tau).
GeneratedScene generate_sequence(const Scene& scene, const GridSpec& spec, int frames, double frame_dt = 1.0 / 30.0);

/// Parsed scene script: the scene plus its default grid and frame count.
struct SceneScript {
  Scene scene;
  GridSpec grid;
  int frames = 30;
  double frame_dt = 1.0 / 30.0;
};

/// Parses the JSON scene-script format. Syntax errors report line and
/// column; semantic errors report the JSON path of the offending value.
SceneScript parse_scene_script(std::string_view text);
SceneScript load_scene_script(const std::filesystem::path& path);

/// Cubic grid with the same physical extent resampled to `n` voxels per
/// side; tau keeps its length in voxels.
GridSpec resample_grid(const GridSpec& grid, int n);

}  // namespace isip4d
