#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "isip4d/mesh.hpp"

using namespace isip4d;

TEST(Obj, ParsesTrianglesAndIndexForms) {
  std::istringstream in("# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2//2 -1\n");
  const TriMesh m = parse_obj(in);
  ASSERT_EQ(m.vertices.size(), 3u);
  ASSERT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.triangles[0], (std::array<int, 3>{0, 1, 2}));
}

TEST(Obj, RejectsQuadsWithLineNumber) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  try {
    parse_obj(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
  }
}

TEST(Mesh, ValidateDropsDegenerateAndChecksClosure) {
  TriMesh m = make_icosphere(1.0, 1);
  EXPECT_TRUE(validate_mesh(m).watertight);
  m.triangles.push_back({0, 0, 1});
  const MeshReport r = validate_mesh(m);
  EXPECT_EQ(r.degenerate_removed, 1u);
  EXPECT_TRUE(r.watertight);
  m.triangles.pop_back();
  EXPECT_FALSE(validate_mesh(m).watertight);
  m.triangles.push_back({0, 1, 999});
  EXPECT_THROW(validate_mesh(m), std::invalid_argument);
}

TEST(Mesh, PointTriangleDistance) {
  const Vec3 a{0, 0, 0}, b{1, 0, 0}, c{0, 1, 0};
  EXPECT_NEAR(point_triangle_distance({0.2, 0.2, 1}, a, b, c), 1.0, 1e-12);
  EXPECT_NEAR(point_triangle_distance({-1, 0, 0}, a, b, c), 1.0, 1e-12);
  EXPECT_NEAR(point_triangle_distance({1, 1, 0}, a, b, c), std::sqrt(0.5), 1e-12);
}

TEST(Mesh, VoxelizedSphereMatchesAnalyticSign) {
  const TriMesh m = make_icosphere(0.3, 3);
  GridSpec g = centered_grid(24, 1.0 / 24);
  const VoxelizedVolume v = voxelize_mesh(m, g);
  EXPECT_FALSE(v.unsigned_fallback);
  int mismatches = 0;
  for (int k = 0; k < 24; ++k)
    for (int j = 0; j < 24; ++j)
      for (int i = 0; i < 24; ++i) {
        const Vec3 p = g.world(i, j, k);
        const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        const double expected = truncate_sdf(r - 0.3, g.truncation_tau);
        if (std::abs(v.volume.at(i, j, k) - expected) > 0.15) ++mismatches;
      }
  EXPECT_EQ(mismatches, 0);
}

TEST(Mesh, OpenMeshFallsBackToUnsigned) {
  TriMesh m = make_icosphere(0.3, 1);
  m.triangles.pop_back();
  const VoxelizedVolume v = voxelize_mesh(m, centered_grid(12, 1.0 / 12));
  EXPECT_TRUE(v.unsigned_fallback);
  for (float x : v.volume.data()) EXPECT_GE(x, 0.0f);
}

TEST(Mesh, EmptyMeshThrows) {
  EXPECT_THROW(voxelize_mesh(TriMesh{}, centered_grid(4, 0.1)), std::invalid_argument);
}
