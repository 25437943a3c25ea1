#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "isip4d/detector.hpp"
#include "isip4d/eval.hpp"
#include "isip4d/stip3d.hpp"
#include "isip4d/synth.hpp"

namespace isip4d {

/// Header `t,ix,iy,iz,wx,wy,wz,raw,normalized`, rows in the given order.
void write_detections_csv(std::ostream& out, const std::vector<Detection>& dets);
/// Throws FormatError with the line number on malformed rows.
std::vector<Detection> read_detections_csv(std::istream& in);

/// Header `t,x,y,raw,normalized`.
void write_stip_csv(std::ostream& out, const std::vector<StipDetection>& dets);

/// Header `frame,wx,wy,wz,spatial_radius,temporal_window`.
void write_ground_truth_csv(std::ostream& out, const std::vector<GroundTruthEvent>& events);
std::vector<GroundTruthEvent> read_ground_truth_csv(std::istream& in);

struct PlyOptions {
  /// Only this frame's surface and detections; every frame when unset.
  std::optional<int> frame;
};

/// ASCII PLY point cloud: surface voxels (|value| < voxel_size / tau) in
/// grey, detections in red, world coordinates.
void write_ply(std::ostream& out, const VolumeSequence& seq, const std::vector<Detection>& dets,
               const PlyOptions& options = {});

/// Optional sections of the evaluation report.
struct EvalExtras {
  std::vector<SweepPoint> sweep;
  std::optional<NoiseResult> noise;
  double noise_sigma = 0.0;
};

/// JSON report: counts, precision, recall and per-event matches, plus a
/// threshold sweep and noise trials when present.
void write_eval_report(std::ostream& out, const MatchResult& match, const std::vector<Detection>& dets,
                       const std::vector<GroundTruthEvent>& events, const EvalExtras& extras = {});

}  // namespace isip4d
