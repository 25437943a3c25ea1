#include <gtest/gtest.h>

#include "json.hpp"
#include <sstream>

#include "isip4d/formats.hpp"
#include "oracles.hpp"

using namespace isip4d;
namespace oracle = isip4d::testing;

TEST(DetectionsCsv, RoundTripIsExact) {
  Detection d;
  d.frame = 4;
  d.grid_index = {1, 2, 3};
  d.world_pos = {0.1, -0.2, 1.0 / 3.0};
  d.raw_response = 1.2345678901234567e-9;
  d.normalized_response = 0.7;
  std::stringstream ss;
  write_detections_csv(ss, {d, d});
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "t,ix,iy,iz,wx,wy,wz,raw,normalized");
  ss.seekg(0);
  const auto back = read_detections_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].grid_index, d.grid_index);
  EXPECT_EQ(back[0].world_pos, d.world_pos);
  EXPECT_EQ(back[0].raw_response, d.raw_response);
}

TEST(DetectionsCsv, MalformedRowReportsLine) {
  std::istringstream in("t,ix,iy,iz,wx,wy,wz,raw,normalized\n1,2,3,4,0,0,0,1,1\n1,2,x,4,0,0,0,1,1\n");
  try {
    read_detections_csv(in);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(GroundTruthCsv, RoundTrip) {
  const std::vector<GroundTruthEvent> events{{10, {0.5, 0, -0.25}, 0.0625, 2}};
  std::stringstream ss;
  write_ground_truth_csv(ss, events);
  const auto back = read_ground_truth_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].frame, 10);
  EXPECT_EQ(back[0].position, events[0].position);
  EXPECT_EQ(back[0].temporal_window, 2);
}

TEST(StipCsv, Header) {
  std::ostringstream out;
  write_stip_csv(out, {StipDetection{1, 2, 3, 0.5, 1.0}});
  EXPECT_EQ(out.str().substr(0, 17), "t,x,y,raw,normali");
}

TEST(Ply, CountsSurfaceAndDetectionVertices) {
  const GeneratedScene s = oracle::bundled_scene("oscillating_sphere.json", 32);
  Detection d;
  d.frame = 10;
  std::ostringstream out;
  write_ply(out, s.sequence, {d}, PlyOptions{10});
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("ply\nformat ascii 1.0\n", 0), 0u);
  EXPECT_NE(text.find("255 0 0"), std::string::npos);
  EXPECT_NE(text.find("160 160 160"), std::string::npos);
}

TEST(EvalReport, ContainsCountsAndSweep) {
  const std::vector<GroundTruthEvent> events{{10, {0, 0, 0}, 1.0, 2}};
  Detection d;
  d.frame = 10;
  const MatchResult m = match_detections({d}, events);
  EvalExtras extras;
  extras.sweep = {{0.2, 3}, {0.6, 1}};
  std::ostringstream out;
  write_eval_report(out, m, {d}, events, extras);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j.at("true_positives"), 1);
  EXPECT_EQ(j.at("recall"), 1.0);
  EXPECT_EQ(j.at("threshold_sweep").size(), 2u);
  EXPECT_FALSE(j.contains("noise"));
}
