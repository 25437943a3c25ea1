#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <vector>

#include "isip4d/volume.hpp"

namespace isip4d {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// ASCII OBJ, `v` and triangular `f` records only. Faces with more than
/// three vertices are rejected with the offending line number.
TriMesh parse_obj(std::istream& in);
TriMesh read_obj(const std::filesystem::path& path);

struct MeshReport {
  std::size_t degenerate_removed = 0;
  /// Every undirected edge is shared by exactly two triangles.
  bool watertight = false;
};

/// Checks vertex indices (std::invalid_argument when out of range), drops
/// zero-area triangles in place, and tests closedness.
MeshReport validate_mesh(TriMesh& mesh);

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

struct VoxelizedVolume {
  TsdfVolume volume;
  /// Set when the mesh was not watertight and distances are unsigned.
  bool unsigned_fallback = false;
  std::size_t degenerate_removed = 0;
};

/// truncate_sdf(s * d, tau) per voxel, with d the distance to the nearest
/// triangle and s the majority vote of ray parity along +x, +y and +z.
/// Throws std::invalid_argument for an empty mesh.
VoxelizedVolume voxelize_mesh(const TriMesh& mesh, const GridSpec& spec);

/// Subdivided icosahedron with vertices on the sphere.
TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center = {0.0, 0.0, 0.0});

}  // namespace isip4d
