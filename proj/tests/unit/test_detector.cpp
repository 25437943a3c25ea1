#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "isip4d/detector.hpp"
#include "isip4d/parallel.hpp"
#include "oracles.hpp"

using namespace isip4d;
namespace oracle = isip4d::testing;

namespace {

double max_abs_diff(const Field4& a, const Field4& b) {
  double m = 0.0;
  for (std::size_t n = 0; n < a.data().size(); ++n) m = std::max(m, std::abs(a.data()[n] - b.data()[n]));
  return m;
}

bool bit_equal(const Field4& a, const Field4& b) {
  return a.dims() == b.dims() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace

TEST(KBound, TwentyThreeRatio) {
  const Rational r = k_upper_bound_exact(23, 23, 23);
  EXPECT_EQ(r.num, 12167);
  EXPECT_EQ(r.den, 24010000);
  EXPECT_NEAR(k_upper_bound(23, 23, 23), 12167.0 / 24010000.0, 1e-18);
  EXPECT_THROW(k_upper_bound(0.5, 1, 1), std::invalid_argument);
}

TEST(SymMat4, IdentityAndDiagonal) {
  SymMat4 m;
  m.c[kXX] = 2;
  m.c[kYY] = 3;
  m.c[kZZ] = 5;
  m.c[kTT] = 7;
  EXPECT_DOUBLE_EQ(m.determinant(), 210.0);
  EXPECT_DOUBLE_EQ(m.trace(), 17.0);
  EXPECT_DOUBLE_EQ(harris_response_4d(m, 0.0005), 210.0 - 0.0005 * std::pow(17.0, 4));
  m.c[kXT] = 1;
  EXPECT_EQ(m(0, 3), 1.0);
  EXPECT_EQ(m(3, 0), 1.0);
}

TEST(SymMat4, DeterminantMatchesEigenOracle) {
  std::mt19937_64 rng(42);
  for (int n = 0; n < 200; ++n) {
    const SymMat4 m = oracle::random_psd(rng);
    const double ref = oracle::eigen_determinant(m);
    EXPECT_LE(std::abs(m.determinant() - ref) / std::abs(ref), 1e-9);
  }
}

TEST(MomentField, MatchesNaiveOracle) {
  const Field4 f = oracle::random_field({7, 7, 6, 5}, 17);
  DetectorParams p;
  p.smoothing = {1.0, 1.0, 3.0};
  GridSpec g;
  g.dims = {7, 7, 6};
  g.voxel_size = 1;
  const VolumeSequence seq = oracle::sequence_from_field(f, g);
  const MomentField m = moment_field(scale_space(seq, p.smoothing), p);
  const auto ref = oracle::naive_moment_field(to_field(seq), p);
  for (int c = 0; c < kMomentComponents; ++c) EXPECT_LE(max_abs_diff(m.components[c], ref[c]), 1e-12) << c;
}

TEST(Normalize, GlobalMinMaxAndDegenerate) {
  Field4 raw({2, 1, 1, 2});
  raw.data()[0] = -1;
  raw.data()[1] = 1;
  raw.data()[2] = 3;
  raw.data()[3] = 0;
  const ResponseField r = normalize_response(raw);
  EXPECT_EQ(r.h_min, -1);
  EXPECT_EQ(r.h_max, 3);
  EXPECT_DOUBLE_EQ(r.normalized.data()[1], 0.5);
  EXPECT_FALSE(r.degenerate_normalization);
  const ResponseField d = normalize_response(Field4({2, 2, 2, 2}, 0.25));
  EXPECT_TRUE(d.degenerate_normalization);
  for (double v : d.normalized.data()) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(find_local_maxima(d, 0.0, 1).empty());
}

TEST(LocalMaxima, StrictWithLexicographicTieBreak) {
  Field4 raw({5, 1, 1, 5}, 0.0);
  raw.at(1, 0, 0, 1) = 2.0;
  raw.at(2, 0, 0, 1) = 2.0;  // tie with (t=1, i=1): the smaller index wins
  raw.at(4, 0, 0, 4) = 1.0;
  raw.at(0, 0, 0, 4) = -1.0;
  const ResponseField r = normalize_response(raw);
  const auto m = find_local_maxima(r, 0.5, 1);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].t, 1);
  EXPECT_EQ(m[0].index.i, 1);
  EXPECT_EQ(m[1].t, 4);
  EXPECT_EQ(m[1].index.i, 4);
  const auto inner = find_local_maxima(r, 0.5, 1, FrameRange{2, 5});
  ASSERT_EQ(inner.size(), 1u);
  EXPECT_EQ(inner[0].t, 4);
}

TEST(LocalMaxima, RequiresPositiveRaw) {
  Field4 raw({3, 1, 1, 3}, -5.0);
  raw.at(1, 0, 0, 1) = -1.0;
  const ResponseField r = normalize_response(raw);
  EXPECT_TRUE(find_local_maxima(r, 0.0, 1).empty());
}

TEST(DetectorParams, CandidateFrames) {
  DetectorParams p;
  EXPECT_EQ(p.candidate_frames(30).first, 3);
  EXPECT_EQ(p.candidate_frames(30).last, 27);
  EXPECT_EQ(p.candidate_frames(4).first, p.candidate_frames(4).last);
  p.exclude_border_frames = false;
  EXPECT_EQ(p.candidate_frames(30).first, 0);
  EXPECT_EQ(p.candidate_frames(30).last, 30);
  p.h_threshold = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Detect, StreamingMatchesComposedStagesBitwise) {
  const VolumeSequence seq = oracle::random_sequence({9, 8, 7, 9}, 33);
  DetectorParams p;
  p.smoothing = {1.0, 1.0, 3.0};
  p.h_threshold = 0.2;
  const DetectionResult streamed = detect(seq, p);
  const ResponseField composed = response(moment_field(scale_space(seq, p.smoothing), p), p);
  EXPECT_TRUE(bit_equal(streamed.response.raw, composed.raw));
  EXPECT_TRUE(bit_equal(streamed.response.normalized, composed.normalized));
  const auto dets = nms_4d(composed, p, seq.spec());
  ASSERT_EQ(dets.size(), streamed.detections.size());
  for (std::size_t n = 0; n < dets.size(); ++n) {
    EXPECT_EQ(dets[n].frame, streamed.detections[n].frame);
    EXPECT_EQ(dets[n].grid_index, streamed.detections[n].grid_index);
  }
}

TEST(Detect, ThreadCountDoesNotChangeResult) {
  const int saved = thread_count();
  const VolumeSequence seq = oracle::random_sequence({10, 9, 8, 8}, 5);
  DetectorParams p;
  p.h_threshold = 0.1;
  set_thread_count(1);
  const DetectionResult a = detect(seq, p);
  set_thread_count(3);
  const DetectionResult b = detect(seq, p);
  set_thread_count(saved);
  EXPECT_TRUE(bit_equal(a.response.raw, b.response.raw));
  ASSERT_EQ(a.detections.size(), b.detections.size());
}

TEST(Detect, NeedsThreeFrames) {
  const VolumeSequence seq = oracle::random_sequence({4, 4, 4, 2}, 1);
  EXPECT_THROW(detect(seq, DetectorParams{}), std::invalid_argument);
}

TEST(Detect, StaticSceneHasNoDetections) {
  const GeneratedScene s = oracle::bundled_scene("static_sphere.json", 32);
  const DetectionResult r = detect(s.sequence, DetectorParams{});
  EXPECT_TRUE(r.detections.empty());
  EXPECT_LE(r.response.h_max, 0.0);
}

TEST(Detect, DetectionsAreSortedAndInWorldCoordinates) {
  const GeneratedScene s = oracle::bundled_scene("oscillating_sphere.json");
  const DetectionResult r = detect(s.sequence, DetectorParams{});
  ASSERT_FALSE(r.detections.empty());
  for (std::size_t n = 1; n < r.detections.size(); ++n)
    EXPECT_GE(r.detections[n - 1].normalized_response, r.detections[n].normalized_response);
  for (const Detection& d : r.detections) {
    const Vec3 w = s.sequence.spec().world(d.grid_index);
    EXPECT_EQ(w, d.world_pos);
    EXPECT_GE(d.normalized_response, 0.6);
    EXPECT_GT(d.raw_response, 0.0);
  }
}
