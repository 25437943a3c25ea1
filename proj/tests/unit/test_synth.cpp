#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "isip4d/synth.hpp"
#include "oracles.hpp"

using namespace isip4d;

TEST(Synth, SphereDistance) {
  const Primitive p{Sphere{0.5}, {}};
  EXPECT_NEAR(sdf_primitive(p, {}, {1.0, 0, 0}), 0.5, 1e-12);
  EXPECT_NEAR(sdf_primitive(p, {}, {0, 0, 0}), -0.5, 1e-12);
  const Pose moved{{1, 0, 0}, {}};
  EXPECT_NEAR(sdf_primitive(p, moved, {1, 0.5, 0}), 0.0, 1e-12);
}

TEST(Synth, BoxAndCapsuleDistance) {
  const Primitive box{Box{{1, 1, 1}}, {}};
  EXPECT_NEAR(sdf_primitive(box, {}, {2, 0, 0}), 1.0, 1e-12);
  EXPECT_NEAR(sdf_primitive(box, {}, {2, 2, 1}), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(sdf_primitive(box, {}, {0.5, 0, 0}), -0.5, 1e-12);
  const Primitive cap{Capsule{1.0, 0.25}, {}};
  EXPECT_NEAR(sdf_primitive(cap, {}, {1, 0, 0}), 0.75, 1e-12);
  EXPECT_NEAR(sdf_primitive(cap, {}, {0, 2, 0}), 0.75, 1e-12);
}

TEST(Synth, PoseRotationRoundTrip) {
  const Pose pose{{0.1, -0.2, 0.3}, {0, 0, std::numbers::pi / 2}};
  const Vec3 w = pose.to_world({1, 0, 0});
  EXPECT_NEAR(w[0], 0.1, 1e-12);
  EXPECT_NEAR(w[1], 0.8, 1e-12);
  const Vec3 b = pose.to_body(w);
  EXPECT_NEAR(b[0], 1.0, 1e-12);
  EXPECT_NEAR(b[1], 0.0, 1e-12);
}

TEST(Synth, TrajectoryInterpolatesAndHolds) {
  Trajectory tr{{{0, Pose{{0, 0, 0}, {}}}, {10, Pose{{1, 0, 0}, {}}}}};
  EXPECT_NEAR(tr.at(5).translation[0], 0.5, 1e-12);
  EXPECT_NEAR(tr.at(-3).translation[0], 0.0, 1e-12);
  EXPECT_NEAR(tr.at(20).translation[0], 1.0, 1e-12);
}

TEST(Synth, GenerateSequenceSignAndEvents) {
  Scene scene;
  scene.primitives.push_back({Sphere{0.25}, {}});
  scene.motion.trajectories.push_back(Trajectory{{{0, {}}}});
  scene.motion.events.push_back({2, 0, {0, 0, 0}, 4.0, true, 2});
  const GridSpec g = centered_grid(17, 1.0 / 16);
  const GeneratedScene gs = generate_sequence(scene, g, 4);
  ASSERT_EQ(gs.sequence.frame_count(), 4);
  EXPECT_EQ(gs.sequence.frame(0).at(8, 8, 8), -1.0f);
  EXPECT_EQ(gs.sequence.frame(0).at(0, 0, 0), 1.0f);
  ASSERT_EQ(gs.events.size(), 1u);
  EXPECT_EQ(gs.events[0].frame, 2);
  EXPECT_NEAR(gs.events[0].spatial_radius, 4.0 / 16, 1e-12);
}

TEST(Synth, PrimitiveOutsideGridWarns) {
  Scene scene;
  scene.primitives.push_back({Sphere{0.1}, {}});
  scene.motion.trajectories.push_back(Trajectory{{{0, Pose{{50, 0, 0}, {}}}}});
  const GeneratedScene gs = generate_sequence(scene, centered_grid(8, 0.1), 1);
  EXPECT_FALSE(gs.warnings.empty());
}

TEST(Synth, Validation) {
  Scene scene;
  EXPECT_THROW(generate_sequence(scene, centered_grid(8, 0.1), 3), std::invalid_argument);
  EXPECT_THROW((Primitive{Sphere{-1.0}, {}}.validate()), std::invalid_argument);
}

TEST(SceneScript, BundledScenesParse) {
  for (const char* name : {"oscillating_sphere.json", "oscillating_sphere_z.json", "constant_velocity_sphere.json",
                           "static_sphere.json", "kicking_pendulum.json"}) {
    const SceneScript s = load_scene_script(std::string(ISIP4D_SCENES_DIR) + "/" + name);
    EXPECT_EQ(s.grid.dims, (std::array<int, 3>{64, 64, 64})) << name;
    EXPECT_GE(s.frames, 10) << name;
  }
}

TEST(SceneScript, SyntaxErrorReportsLineAndColumn) {
  try {
    parse_scene_script("{\n  \"frames\": 3,\n  oops\n}");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(SceneScript, SemanticErrorReportsPath) {
  const char* text = R"({"grid": {"resolution": 8, "extent": 1}, "frames": 3,
    "primitives": [{"shape": "sphere", "radius": -1}]})";
  try {
    parse_scene_script(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("/primitives/0/radius"), std::string::npos) << e.what();
  }
}

TEST(SceneScript, ResampleKeepsExtentAndTauInVoxels) {
  const SceneScript s = load_scene_script(std::string(ISIP4D_SCENES_DIR) + "/oscillating_sphere.json");
  const GridSpec g = resample_grid(s.grid, 128);
  EXPECT_EQ(g.dims[0], 128);
  EXPECT_NEAR(g.voxel_size * 127, s.grid.voxel_size * 63, 1e-12);
  EXPECT_NEAR(g.truncation_tau / g.voxel_size, 3.0, 1e-12);
}
