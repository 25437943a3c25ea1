#include "isip4d/formats.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace isip4d {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

// Reads a header-checked CSV and hands each row's cells to `row`.
template <typename Row>
void read_csv(std::istream& in, const std::string& header, std::size_t columns, Row row) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError("CSV: expected header '" + header + "', got '" + line + "'");
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw FormatError("CSV line " + std::to_string(n) + ": expected " + std::to_string(columns) + " columns");
    }
    try {
      row(cells);
    } catch (const std::logic_error&) {
      throw FormatError("CSV line " + std::to_string(n) + ": malformed value");
    }
  }
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

}  // namespace

void write_detections_csv(std::ostream& out, const std::vector<Detection>& dets) {
  out << "t,ix,iy,iz,wx,wy,wz,raw,normalized\n";
  for (const Detection& d : dets) {
    out << d.frame << ',' << d.grid_index.i << ',' << d.grid_index.j << ',' << d.grid_index.k << ','
        << fmt(d.world_pos[0]) << ',' << fmt(d.world_pos[1]) << ',' << fmt(d.world_pos[2]) << ','
        << fmt(d.raw_response) << ',' << fmt(d.normalized_response) << '\n';
  }
}

std::vector<Detection> read_detections_csv(std::istream& in) {
  std::vector<Detection> dets;
  read_csv(in, "t,ix,iy,iz,wx,wy,wz,raw,normalized", 9, [&](const std::vector<std::string>& c) {
    Detection d;
    d.frame = to_int(c[0]);
    d.grid_index = {to_int(c[1]), to_int(c[2]), to_int(c[3])};
    d.world_pos = {to_double(c[4]), to_double(c[5]), to_double(c[6])};
    d.raw_response = to_double(c[7]);
    d.normalized_response = to_double(c[8]);
    dets.push_back(d);
  });
  return dets;
}

void write_stip_csv(std::ostream& out, const std::vector<StipDetection>& dets) {
  out << "t,x,y,raw,normalized\n";
  for (const StipDetection& d : dets) {
    out << d.t << ',' << d.x << ',' << d.y << ',' << fmt(d.raw) << ',' << fmt(d.normalized) << '\n';
  }
}

void write_ground_truth_csv(std::ostream& out, const std::vector<GroundTruthEvent>& events) {
  out << "frame,wx,wy,wz,spatial_radius,temporal_window\n";
  for (const GroundTruthEvent& e : events) {
    out << e.frame << ',' << fmt(e.position[0]) << ',' << fmt(e.position[1]) << ',' << fmt(e.position[2]) << ','
        << fmt(e.spatial_radius) << ',' << e.temporal_window << '\n';
  }
}

std::vector<GroundTruthEvent> read_ground_truth_csv(std::istream& in) {
  std::vector<GroundTruthEvent> events;
  read_csv(in, "frame,wx,wy,wz,spatial_radius,temporal_window", 6, [&](const std::vector<std::string>& c) {
    GroundTruthEvent e;
    e.frame = to_int(c[0]);
    e.position = {to_double(c[1]), to_double(c[2]), to_double(c[3])};
    e.spatial_radius = to_double(c[4]);
    e.temporal_window = to_int(c[5]);
    if (!(e.spatial_radius > 0.0) || e.temporal_window < 0) throw std::invalid_argument("event bounds");
    events.push_back(e);
  });
  return events;
}

void write_ply(std::ostream& out, const VolumeSequence& seq, const std::vector<Detection>& dets,
               const PlyOptions& options) {
  const GridSpec& spec = seq.spec();
  const float band = static_cast<float>(spec.voxel_size / spec.truncation_tau);
  auto wanted = [&](int t) { return !options.frame || *options.frame == t; };

  std::vector<Vec3> surface;
  for (int t = 0; t < seq.frame_count(); ++t) {
    if (!wanted(t)) continue;
    const auto data = seq.frame(t).data();
    for (std::size_t n = 0; n < data.size(); ++n) {
      if (std::abs(data[n]) < band) surface.push_back(spec.world(spec.grid_index(n)));
    }
  }
  std::vector<Vec3> red;
  for (const Detection& d : dets) {
    if (wanted(d.frame)) red.push_back(d.world_pos);
  }

  out << "ply\nformat ascii 1.0\n";
  out << "comment surface voxels grey, detections red\n";
  out << "element vertex " << surface.size() + red.size() << '\n';
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  char buf[96];
  for (const Vec3& p : surface) {
    std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g 160 160 160\n", p[0], p[1], p[2]);
    out << buf;
  }
  for (const Vec3& p : red) {
    std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g 255 0 0\n", p[0], p[1], p[2]);
    out << buf;
  }
}

void write_eval_report(std::ostream& out, const MatchResult& match, const std::vector<Detection>& dets,
                       const std::vector<GroundTruthEvent>& events, const EvalExtras& extras) {
  using nlohmann::json;
  json report;
  report["detections"] = dets.size();
  report["events"] = events.size();
  report["true_positives"] = match.true_positives;
  report["false_positives"] = match.false_positives;
  report["missed_events"] = match.missed_events;
  report["precision"] = match.precision;
  report["recall"] = match.recall;
  json per_event = json::array();
  for (const EventMatch& m : match.per_event) {
    const GroundTruthEvent& e = events[m.event];
    json item{{"event", m.event},
              {"frame", e.frame},
              {"position", {e.position[0], e.position[1], e.position[2]}},
              {"matched", m.detection.has_value()}};
    if (m.detection) {
      const Detection& d = dets[*m.detection];
      item["detection"] = *m.detection;
      item["detection_frame"] = d.frame;
      item["detection_index"] = {d.grid_index.i, d.grid_index.j, d.grid_index.k};
      item["spatial_distance"] = m.spatial_distance;
      item["frame_offset"] = m.frame_offset;
    }
    per_event.push_back(std::move(item));
  }
  report["per_event"] = std::move(per_event);
  if (!extras.sweep.empty()) {
    json sweep = json::array();
    for (const SweepPoint& p : extras.sweep) sweep.push_back({{"threshold", p.threshold}, {"count", p.count}});
    report["threshold_sweep"] = std::move(sweep);
  }
  if (extras.noise) {
    report["noise"] = {{"sigma", extras.noise_sigma},
                       {"trials", extras.noise->per_trial.size()},
                       {"clean_detections", extras.noise->clean_count},
                       {"mean_jaccard", extras.noise->mean_jaccard},
                       {"per_trial_jaccard", extras.noise->per_trial}};
  }
  out << report.dump(2) << '\n';
}

}  // namespace isip4d
