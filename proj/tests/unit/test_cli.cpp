#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "isip4d/formats.hpp"
#include "isip4d/volume_io.hpp"

using namespace isip4d;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "isip4d");
  args.insert(args.begin() + 1, {"--log-level", "off"});
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string scene(const char* name) { return std::string(ISIP4D_SCENES_DIR) + "/" + name; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "isip4d_cli_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenDetectEvalPipeline) {
  ASSERT_EQ(run({"gen", "--scene", scene("oscillating_sphere.json"), "--out", path("seq")}), cli::kExitOk);
  EXPECT_TRUE(fs::exists(path("seq/meta.json")));
  EXPECT_TRUE(fs::exists(path("seq/ground_truth.csv")));
  ASSERT_EQ(run({"detect", "--input", path("seq"), "--out", path("dets.csv"), "--ply", path("out.ply")}),
            cli::kExitOk);
  std::ifstream in(path("dets.csv"));
  const auto dets = read_detections_csv(in);
  EXPECT_EQ(dets.size(), 2u);
  EXPECT_TRUE(fs::exists(path("out.ply")));
  ASSERT_EQ(run({"eval", "--ground-truth", path("seq/ground_truth.csv"), "--detections", path("dets.csv"),
                 "--report", path("report.json")}),
            cli::kExitOk);
  std::ifstream rep(path("report.json"));
  std::stringstream text;
  text << rep.rdbuf();
  EXPECT_NE(text.str().find("\"recall\": 1.0"), std::string::npos) << text.str();
}

TEST_F(CliTest, DumpResponseWritesNormalizedField) {
  ASSERT_EQ(run({"gen", "--scene", scene("oscillating_sphere.json"), "--out", path("seq"), "--resolution", "24",
                 "--frames", "8"}),
            cli::kExitOk);
  ASSERT_EQ(run({"detect", "--input", path("seq"), "--out", path("d.csv"), "--dump-response", path("resp")}),
            cli::kExitOk);
  EXPECT_EQ(read_sequence_field(path("resp")), "normalized_response");
}

TEST_F(CliTest, Stip3dOnTsdfInputRendersSilhouettes) {
  ASSERT_EQ(run({"gen", "--scene", scene("oscillating_sphere.json"), "--out", path("seq"), "--resolution", "24",
                 "--frames", "8"}),
            cli::kExitOk);
  ASSERT_EQ(run({"stip3d", "--input", path("seq"), "--out", path("s.csv"), "--render-pgm", path("pgm")}),
            cli::kExitOk);
  EXPECT_TRUE(fs::exists(path("pgm/frame_0000.pgm")));
  ASSERT_EQ(run({"stip3d", "--input", path("pgm"), "--out", path("s2.csv")}), cli::kExitOk);
}

TEST_F(CliTest, VoxelizeExport) {
  std::ofstream(path("tet.obj")) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n";
  ASSERT_EQ(run({"voxelize", "--mesh", path("tet.obj"), path("tet.obj"), path("tet.obj"), "--out", path("vox"),
                 "--resolution", "16"}),
            cli::kExitOk);
  EXPECT_EQ(read_sequence(path("vox")).frame_count(), 3);
  ASSERT_EQ(run({"export", "--input", path("vox"), "--out", path("vox.ply")}), cli::kExitOk);
  std::ifstream ply(path("vox.ply"));
  std::string first;
  std::getline(ply, first);
  EXPECT_EQ(first, "ply");
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"bogus"}), cli::kExitUsage);
  EXPECT_EQ(run({"gen", "--scene", path("missing.json"), "--out", path("x")}), cli::kExitUsage);
  EXPECT_EQ(run({"detect"}), cli::kExitUsage);
  ASSERT_EQ(run({"gen", "--scene", scene("static_sphere.json"), "--out", path("st"), "--resolution", "16"}),
            cli::kExitOk);
  EXPECT_EQ(run({"detect", "--input", path("st"), "--threshold", "1.5"}), cli::kExitUsage);
  std::ofstream(path("quad.obj")) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  EXPECT_EQ(run({"voxelize", "--mesh", path("quad.obj"), "--out", path("q")}), cli::kExitUsage);
}

TEST_F(CliTest, StaticSceneWritesHeaderOnly) {
  ASSERT_EQ(run({"gen", "--scene", scene("static_sphere.json"), "--out", path("st"), "--resolution", "16"}),
            cli::kExitOk);
  ASSERT_EQ(run({"detect", "--input", path("st"), "--out", path("d.csv")}), cli::kExitOk);
  std::ifstream in(path("d.csv"));
  EXPECT_TRUE(read_detections_csv(in).empty());
}
