#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isip4d/detector.hpp"
#include "isip4d/synth.hpp"

namespace isip4d {

struct EventMatch {
  std::size_t event = 0;
  /// Index into the detection list, unset when the event was missed.
  std::optional<std::size_t> detection;
  double spatial_distance = 0.0;
  int frame_offset = 0;
};

struct MatchResult {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t missed_events = 0;
  std::vector<EventMatch> per_event;
  double precision = 0.0;
  double recall = 0.0;
};

/// One-to-one greedy matching. A pair is admissible when the spatial
/// distance is within the event's radius and the frame offset within its
/// window; admissible pairs are taken in ascending order of
/// (distance / radius)^2 + (offset / max(window, 1))^2, ties by event index
/// then detection index.
MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruthEvent>& events);

/// Detections not admissible for any event (regardless of matching).
std::size_t count_unexplained(const std::vector<Detection>& dets, const std::vector<GroundTruthEvent>& events);

struct SweepPoint {
  double threshold = 0.0;
  std::size_t count = 0;
};

/// Detection count per threshold from the same response field.
std::vector<SweepPoint> threshold_sweep(const ResponseField& r, const std::vector<double>& thresholds,
                                        const DetectorParams& params, const GridSpec& spec);

/// Adds N(0, noise_sigma^2) to every voxel and clamps to [-1, 1]. The stream
/// is mt19937_64 seeded with `seed`, consumed in frame then linear order.
VolumeSequence add_tsdf_noise(const VolumeSequence& seq, double noise_sigma, std::uint64_t seed);

/// |A n B| / |A u B| where A and B are matched one-to-one when within
/// `spatial_voxels` (Euclidean, grid units) and `frames`. 1 when both are empty.
double detection_jaccard(const std::vector<Detection>& a, const std::vector<Detection>& b, double spatial_voxels = 2.0,
                         int frames = 1);

struct NoiseResult {
  double mean_jaccard = 0.0;
  std::vector<double> per_trial;
  std::size_t clean_count = 0;
};

/// Trial n uses seed + n. Throws std::invalid_argument for trials < 1 or a
/// negative sigma.
NoiseResult noise_robustness(const VolumeSequence& seq, double noise_sigma, int trials, const DetectorParams& params,
                             std::uint64_t seed);

}  // namespace isip4d
