// JSON scene scripts:
//
//   {
//     "grid": {"resolution": 64, "extent": 1.0, "center": [0, 0, 0], "truncation_voxels": 3},
//     "frames": 30, "frame_dt": 0.0333,
//     "primitives": [
//       {"name": "ball", "shape": "sphere", "radius": 0.15, "offset": [0, 0, 0],
//        "keyframes": [{"frame": 0, "translation": [0, 0, 0], "rotation_deg": [0, 0, 0]}]}
//     ],
//     "events": [{"frame": 10, "primitive": "ball", "anchor": [0, 0, 0],
//                 "spatial_radius_voxels": 4, "temporal_window": 2}]
//   }
//
// The grid may instead be given explicitly as dims / voxel_size / origin,
// and tau as truncation_tau in meters.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "isip4d/synth.hpp"
#include "json.hpp"

namespace isip4d {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw FormatError("scene script: " + path + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  if (!obj.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "expected a finite number");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Vec3 vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected an array of 3 numbers");
  return {number(v[0], path + "/0"), number(v[1], path + "/1"), number(v[2], path + "/2")};
}

double positive(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (!(d > 0.0)) fail(path, "must be > 0");
  return d;
}

GridSpec parse_grid(const json& g, const std::string& path) {
  if (!g.is_object()) fail(path, "expected an object");
  GridSpec spec;
  if (g.contains("resolution")) {
    const int n = integer(g.at("resolution"), path + "/resolution");
    if (n < 2) fail(path + "/resolution", "must be >= 2");
    const double extent = positive(member(g, path, "extent"), path + "/extent");
    const Vec3 center = g.contains("center") ? vec3(g.at("center"), path + "/center") : Vec3{0, 0, 0};
    spec = centered_grid(n, extent / (n - 1), center);
  } else {
    const json& dims = member(g, path, "dims");
    if (!dims.is_array() || dims.size() != 3) fail(path + "/dims", "expected an array of 3 integers");
    for (std::size_t a = 0; a < 3; ++a) {
      spec.dims[a] = integer(dims[a], path + "/dims/" + std::to_string(a));
      if (spec.dims[a] < 1) fail(path + "/dims/" + std::to_string(a), "must be >= 1");
    }
    spec.voxel_size = positive(member(g, path, "voxel_size"), path + "/voxel_size");
    spec.origin = vec3(member(g, path, "origin"), path + "/origin");
  }
  if (g.contains("truncation_tau")) {
    spec.truncation_tau = positive(g.at("truncation_tau"), path + "/truncation_tau");
  } else {
    const double voxels = g.contains("truncation_voxels") ? positive(g.at("truncation_voxels"), path + "/truncation_voxels") : 3.0;
    spec.truncation_tau = voxels * spec.voxel_size;
  }
  return spec;
}

Shape parse_shape(const json& p, const std::string& path) {
  const json& kind = member(p, path, "shape");
  if (!kind.is_string()) fail(path + "/shape", "expected a string");
  const auto name = kind.get<std::string>();
  if (name == "sphere") return Sphere{positive(member(p, path, "radius"), path + "/radius")};
  if (name == "box") {
    const Vec3 h = vec3(member(p, path, "half_extents"), path + "/half_extents");
    for (double v : h) {
      if (!(v > 0.0)) fail(path + "/half_extents", "must be > 0");
    }
    return Box{h};
  }
  if (name == "capsule") {
    return Capsule{positive(member(p, path, "half_length"), path + "/half_length"),
                   positive(member(p, path, "radius"), path + "/radius")};
  }
  fail(path + "/shape", "unknown shape '" + name + "' (expected sphere, box or capsule)");
}

Trajectory parse_trajectory(const json& p, const std::string& path) {
  Trajectory traj;
  if (!p.contains("keyframes")) {
    traj.keys.push_back({0, {}});
    return traj;
  }
  const json& keys = p.at("keyframes");
  const std::string kpath = path + "/keyframes";
  if (!keys.is_array() || keys.empty()) fail(kpath, "expected a non-empty array");
  for (std::size_t n = 0; n < keys.size(); ++n) {
    const std::string at = kpath + "/" + std::to_string(n);
    Keyframe key;
    key.frame = integer(member(keys[n], at, "frame"), at + "/frame");
    if (keys[n].contains("translation")) key.pose.translation = vec3(keys[n].at("translation"), at + "/translation");
    if (keys[n].contains("rotation")) key.pose.rotation = vec3(keys[n].at("rotation"), at + "/rotation");
    if (keys[n].contains("rotation_deg")) {
      const Vec3 deg = vec3(keys[n].at("rotation_deg"), at + "/rotation_deg");
      for (std::size_t a = 0; a < 3; ++a) key.pose.rotation[a] = deg[a] * std::numbers::pi / 180.0;
    }
    if (!traj.keys.empty() && key.frame <= traj.keys.back().frame) fail(at + "/frame", "keyframes must have increasing frames");
    traj.keys.push_back(key);
  }
  return traj;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t n = 0; n < byte && n < text.size(); ++n) {
    if (text[n] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

SceneScript parse_scene_script(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError("scene script: syntax error at " + line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) fail("", "top level must be an object");

  SceneScript script;
  script.grid = parse_grid(member(doc, "", "grid"), "/grid");
  if (doc.contains("frames")) {
    script.frames = integer(doc.at("frames"), "/frames");
    if (script.frames < 1) fail("/frames", "must be >= 1");
  }
  if (doc.contains("frame_dt")) script.frame_dt = positive(doc.at("frame_dt"), "/frame_dt");

  const json& prims = member(doc, "", "primitives");
  if (!prims.is_array() || prims.empty()) fail("/primitives", "expected a non-empty array");
  std::vector<std::string> names;
  for (std::size_t n = 0; n < prims.size(); ++n) {
    const std::string path = "/primitives/" + std::to_string(n);
    Primitive prim;
    prim.shape = parse_shape(prims[n], path);
    if (prims[n].contains("offset")) prim.local_offset = vec3(prims[n].at("offset"), path + "/offset");
    script.scene.primitives.push_back(prim);
    script.scene.motion.trajectories.push_back(parse_trajectory(prims[n], path));
    names.push_back(prims[n].value("name", std::to_string(n)));
  }

  if (doc.contains("events")) {
    const json& events = doc.at("events");
    if (!events.is_array()) fail("/events", "expected an array");
    for (std::size_t n = 0; n < events.size(); ++n) {
      const std::string path = "/events/" + std::to_string(n);
      const json& e = events[n];
      ScriptedEvent ev;
      ev.frame = integer(member(e, path, "frame"), path + "/frame");
      if (ev.frame < 0 || ev.frame >= script.frames) fail(path + "/frame", "event frame outside the sequence");
      const json& prim = member(e, path, "primitive");
      if (prim.is_string()) {
        const auto it = std::find(names.begin(), names.end(), prim.get<std::string>());
        if (it == names.end()) fail(path + "/primitive", "unknown primitive '" + prim.get<std::string>() + "'");
        ev.primitive = static_cast<int>(it - names.begin());
      } else {
        ev.primitive = integer(prim, path + "/primitive");
        if (ev.primitive < 0 || static_cast<std::size_t>(ev.primitive) >= names.size()) {
          fail(path + "/primitive", "primitive index out of range");
        }
      }
      if (e.contains("anchor")) ev.anchor = vec3(e.at("anchor"), path + "/anchor");
      if (e.contains("spatial_radius")) {
        ev.spatial_radius = positive(e.at("spatial_radius"), path + "/spatial_radius");
        ev.radius_in_voxels = false;
      } else if (e.contains("spatial_radius_voxels")) {
        ev.spatial_radius = positive(e.at("spatial_radius_voxels"), path + "/spatial_radius_voxels");
      }
      if (e.contains("temporal_window")) {
        ev.temporal_window = integer(e.at("temporal_window"), path + "/temporal_window");
        if (ev.temporal_window < 0) fail(path + "/temporal_window", "must be >= 0");
      }
      script.scene.motion.events.push_back(ev);
    }
  }
  return script;
}

SceneScript load_scene_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scene_script(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace isip4d
