#include "isip4d/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

namespace isip4d {
namespace {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool admissible(const Detection& d, const GroundTruthEvent& e) {
  return distance(d.world_pos, e.position) <= e.spatial_radius && std::abs(d.frame - e.frame) <= e.temporal_window;
}

struct Pair {
  double cost;
  std::size_t first;
  std::size_t second;
};

// Greedy one-to-one assignment over candidate pairs, cheapest first.
std::vector<Pair> greedy(std::vector<Pair> pairs, std::size_t n_first, std::size_t n_second) {
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.cost, a.first, a.second) < std::tie(b.cost, b.first, b.second);
  });
  std::vector<bool> used_first(n_first, false), used_second(n_second, false);
  std::vector<Pair> chosen;
  for (const Pair& p : pairs) {
    if (used_first[p.first] || used_second[p.second]) continue;
    used_first[p.first] = used_second[p.second] = true;
    chosen.push_back(p);
  }
  return chosen;
}

}  // namespace

MatchResult match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruthEvent>& events) {
  std::vector<Pair> pairs;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const GroundTruthEvent& ev = events[e];
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (!admissible(dets[d], ev)) continue;
      const double ds = distance(dets[d].world_pos, ev.position) / ev.spatial_radius;
      const double dt = static_cast<double>(dets[d].frame - ev.frame) / std::max(ev.temporal_window, 1);
      pairs.push_back({ds * ds + dt * dt, e, d});
    }
  }
  MatchResult r;
  r.per_event.resize(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) r.per_event[e].event = e;
  for (const Pair& p : greedy(std::move(pairs), events.size(), dets.size())) {
    EventMatch& m = r.per_event[p.first];
    m.detection = p.second;
    m.spatial_distance = distance(dets[p.second].world_pos, events[p.first].position);
    m.frame_offset = dets[p.second].frame - events[p.first].frame;
    ++r.true_positives;
  }
  r.false_positives = dets.size() - r.true_positives;
  r.missed_events = events.size() - r.true_positives;
  r.precision = dets.empty() ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(dets.size());
  r.recall = events.empty() ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(events.size());
  return r;
}

std::size_t count_unexplained(const std::vector<Detection>& dets, const std::vector<GroundTruthEvent>& events) {
  return static_cast<std::size_t>(std::count_if(dets.begin(), dets.end(), [&](const Detection& d) {
    return std::none_of(events.begin(), events.end(), [&](const GroundTruthEvent& e) { return admissible(d, e); });
  }));
}

std::vector<SweepPoint> threshold_sweep(const ResponseField& r, const std::vector<double>& thresholds,
                                        const DetectorParams& params, const GridSpec& spec) {
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    DetectorParams p = params;
    p.h_threshold = t;
    out.push_back({t, nms_4d(r, p, spec).size()});
  }
  return out;
}

VolumeSequence add_tsdf_noise(const VolumeSequence& seq, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw std::invalid_argument("noise sigma must be >= 0");
  if (noise_sigma == 0.0) return seq;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  std::vector<TsdfVolume> frames;
  for (const TsdfVolume& vol : seq.frames()) {
    std::vector<float> data(vol.data().begin(), vol.data().end());
    for (float& v : data) v = static_cast<float>(std::clamp(static_cast<double>(v) + noise(rng), -1.0, 1.0));
    frames.emplace_back(seq.spec(), std::move(data));
  }
  return VolumeSequence(seq.spec(), std::move(frames), seq.frame_dt());
}

double detection_jaccard(const std::vector<Detection>& a, const std::vector<Detection>& b, double spatial_voxels,
                         int frames) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<Pair> pairs;
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (std::size_t y = 0; y < b.size(); ++y) {
      const double di = a[x].grid_index.i - b[y].grid_index.i;
      const double dj = a[x].grid_index.j - b[y].grid_index.j;
      const double dk = a[x].grid_index.k - b[y].grid_index.k;
      const double ds = std::sqrt(di * di + dj * dj + dk * dk);
      const int dt = std::abs(a[x].frame - b[y].frame);
      if (ds <= spatial_voxels && dt <= frames) pairs.push_back({ds * ds + static_cast<double>(dt * dt), x, y});
    }
  }
  const double matched = static_cast<double>(greedy(std::move(pairs), a.size(), b.size()).size());
  return matched / (static_cast<double>(a.size() + b.size()) - matched);
}

NoiseResult noise_robustness(const VolumeSequence& seq, double noise_sigma, int trials, const DetectorParams& params,
                             std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw std::invalid_argument("noise sigma must be >= 0");
  const std::vector<Detection> clean = detect(seq, params).detections;
  NoiseResult r;
  r.clean_count = clean.size();
  for (int n = 0; n < trials; ++n) {
    const VolumeSequence noisy = add_tsdf_noise(seq, noise_sigma, seed + static_cast<std::uint64_t>(n));
    r.per_trial.push_back(detection_jaccard(clean, detect(noisy, params).detections));
  }
  double sum = 0.0;
  for (double j : r.per_trial) sum += j;
  r.mean_jaccard = sum / static_cast<double>(trials);
  return r;
}

}  // namespace isip4d
