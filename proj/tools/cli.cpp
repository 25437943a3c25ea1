#include "cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isip4d/detector.hpp"
#include "isip4d/eval.hpp"
#include "isip4d/formats.hpp"
#include "isip4d/mesh.hpp"
#include "isip4d/parallel.hpp"
#include "isip4d/stip3d.hpp"
#include "isip4d/synth.hpp"
#include "isip4d/volume_io.hpp"

namespace isip4d::cli {
namespace {

namespace fs = std::filesystem;

// Bad arguments or inputs: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_logger_st("isip4d");
    l->set_pattern("%Y-%m-%dT%H:%M:%S.%e level=%l %v");
    return l;
  }();
  return log;
}

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

// "-" means stdout.
void write_output(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  body(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

template <typename T, typename F>
T read_input(const std::string& path, const char* what, F parse) {
  require_exists(path, what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return parse(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void add_detector_options(CLI::App* cmd, DetectorParams& p, bool& keep_border) {
  cmd->add_option("--sigma-s", p.smoothing.sigma_s, "Spatial smoothing scale, voxels")->capture_default_str();
  cmd->add_option("--sigma-t", p.smoothing.sigma_t, "Temporal smoothing scale, frames")->capture_default_str();
  cmd->add_option("--kernel-radius-factor", p.smoothing.kernel_radius_factor, "Kernel half-width in sigmas")
      ->capture_default_str();
  cmd->add_option("--l-prime", p.l_prime, "Integration-scale variance multiplier")->capture_default_str();
  cmd->add_option("--k", p.k, "Response constant")->capture_default_str();
  cmd->add_option("--threshold", p.h_threshold, "Threshold on the normalized response")->capture_default_str();
  cmd->add_option("--nms-radius", p.nms_radius, "Non-maximum suppression half-width")->capture_default_str();
  cmd->add_flag("--keep-border-frames", keep_border, "Allow detections in the temporally padded border frames");
}

// Options shared by every subcommand invocation.
struct Globals {
  int threads = 0;
  std::string log_level = "info";
};

// ---- gen ----------------------------------------------------------------

struct GenOptions {
  std::string scene;
  std::string out;
  std::string ground_truth;
  std::optional<int> frames;
  std::optional<int> resolution;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

void run_gen(const GenOptions& o) {
  require_exists(o.scene, "scene script");
  SceneScript script = load_scene_script(o.scene);
  if (o.frames) {
    if (*o.frames < 1) throw UsageError("--frames must be >= 1");
    script.frames = *o.frames;
    auto& events = script.scene.motion.events;
    const auto dropped = std::erase_if(events, [&](const ScriptedEvent& e) { return e.frame >= script.frames; });
    if (dropped > 0) logger()->warn("cmd=gen dropped_events={} reason=\"beyond --frames\"", dropped);
  }
  GridSpec grid = script.grid;
  if (o.resolution) grid = resample_grid(grid, *o.resolution);
  if (!(o.noise_sigma >= 0.0)) throw UsageError("--noise-sigma must be >= 0");

  GeneratedScene gen = generate_sequence(script.scene, grid, script.frames, script.frame_dt);
  for (const auto& w : gen.warnings) logger()->warn("cmd=gen warning=\"{}\"", w);
  const VolumeSequence seq = o.noise_sigma > 0.0 ? add_tsdf_noise(gen.sequence, o.noise_sigma, o.seed) : gen.sequence;
  write_sequence(seq, o.out);
  const std::string gt = o.ground_truth.empty() ? (fs::path(o.out) / "ground_truth.csv").string() : o.ground_truth;
  write_output(gt, [&](std::ostream& out) { write_ground_truth_csv(out, gen.events); });
  logger()->info("cmd=gen dims={}x{}x{} frames={} events={} out={} ground_truth={}", grid.dims[0], grid.dims[1],
                 grid.dims[2], seq.frame_count(), gen.events.size(), o.out, gt);
}

// ---- voxelize -----------------------------------------------------------

struct VoxelizeOptions {
  std::vector<std::string> meshes;
  std::string out;
  int resolution = 128;
  std::optional<double> extent;
  std::optional<std::vector<double>> center;
  double truncation_voxels = 3.0;
  double frame_dt = 1.0 / 30.0;
};

void run_voxelize(const VoxelizeOptions& o) {
  if (o.resolution < 2) throw UsageError("--resolution must be >= 2");
  if (!(o.truncation_voxels > 0.0)) throw UsageError("--truncation-voxels must be > 0");
  std::vector<TriMesh> meshes;
  for (const auto& path : o.meshes) {
    require_exists(path, "mesh");
    meshes.push_back(read_obj(path));
  }
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-lo[0], -lo[1], -lo[2]};
  for (const auto& m : meshes) {
    for (const auto& v : m.vertices) {
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], v[a]);
        hi[a] = std::max(hi[a], v[a]);
      }
    }
  }
  if (!std::isfinite(lo[0])) throw UsageError("meshes have no vertices");
  Vec3 center{0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
  if (o.center) {
    if (o.center->size() != 3) throw UsageError("--center needs three values");
    center = {(*o.center)[0], (*o.center)[1], (*o.center)[2]};
  }
  const double side = std::max({hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]});
  const double extent = o.extent ? *o.extent : 1.25 * side;
  if (!(extent > 0.0)) throw UsageError("--extent must be > 0");
  GridSpec grid = centered_grid(o.resolution, extent / (o.resolution - 1), center);
  grid.truncation_tau = o.truncation_voxels * grid.voxel_size;

  std::vector<TsdfVolume> frames;
  for (std::size_t f = 0; f < meshes.size(); ++f) {
    VoxelizedVolume v = voxelize_mesh(meshes[f], grid);
    if (v.unsigned_fallback) {
      logger()->warn("cmd=voxelize frame={} mesh={} warning=\"mesh is not watertight; distances are unsigned\"", f,
                     o.meshes[f]);
    }
    if (v.degenerate_removed > 0) {
      logger()->warn("cmd=voxelize frame={} degenerate_triangles_removed={}", f, v.degenerate_removed);
    }
    frames.push_back(std::move(v.volume));
  }
  write_sequence(VolumeSequence(grid, std::move(frames), o.frame_dt), o.out);
  logger()->info("cmd=voxelize frames={} resolution={} voxel_size={} out={}", meshes.size(), o.resolution,
                 grid.voxel_size, o.out);
}

// ---- detect -------------------------------------------------------------

struct DetectOptions {
  std::string input;
  std::string out = "-";
  std::string ply;
  std::string dump_response;
  DetectorParams params;
  bool keep_border = false;
};

VolumeSequence read_tsdf_input(const std::string& dir) {
  require_exists(dir, "input sequence");
  return read_sequence(dir);
}

void check_frames(const VolumeSequence& seq) {
  if (seq.frame_count() < 3) throw UsageError("need ≥ 3 frames (input has " + std::to_string(seq.frame_count()) + ")");
}

void run_detect(DetectOptions o) {
  o.params.exclude_border_frames = !o.keep_border;
  o.params.validate();
  const VolumeSequence seq = read_tsdf_input(o.input);
  check_frames(seq);
  const auto& d = seq.spec().dims;
  logger()->info("cmd=detect input={} dims={}x{}x{} frames={} sigma_s={} sigma_t={} l_prime={} k={} threshold={}",
                 o.input, d[0], d[1], d[2], seq.frame_count(), o.params.smoothing.sigma_s, o.params.smoothing.sigma_t,
                 o.params.l_prime, o.params.k, o.params.h_threshold);
  const DetectionResult r = detect(seq, o.params);
  if (r.response.degenerate_normalization) logger()->info("cmd=detect degenerate_normalization=true");
  write_output(o.out, [&](std::ostream& out) { write_detections_csv(out, r.detections); });
  if (!o.ply.empty()) write_output(o.ply, [&](std::ostream& out) { write_ply(out, seq, r.detections); });
  if (!o.dump_response.empty()) {
    std::vector<TsdfVolume> frames;
    const Field4& n = r.response.normalized;
    for (int t = 0; t < n.dims().nt; ++t) {
      const auto src = n.frame(t);
      frames.emplace_back(seq.spec(), std::vector<float>(src.begin(), src.end()));
    }
    write_sequence(VolumeSequence(seq.spec(), std::move(frames), seq.frame_dt()), o.dump_response,
                   "normalized_response");
  }
  logger()->info("cmd=detect detections={} h_min={} h_max={} out={}", r.detections.size(), r.response.h_min,
                 r.response.h_max, o.out);
}

// ---- stip3d -------------------------------------------------------------

struct StipOptions {
  std::string input;
  std::string out = "-";
  std::string render_pgm;
  Stip3dParams params;
  bool keep_border = false;
};

void run_stip3d(StipOptions o) {
  o.params.exclude_border_frames = !o.keep_border;
  o.params.validate();
  require_exists(o.input, "input");
  std::optional<ImageSequence> images;
  if (fs::exists(fs::path(o.input) / "meta.json")) {
    const VolumeSequence seq = read_sequence(o.input);
    if (seq.spec().dims[2] == 1) {
      images = image_sequence_from_volume(seq);
    } else {
      logger()->info("cmd=stip3d rendering orthographic silhouettes along z");
      images = render_silhouettes(seq);
    }
  } else {
    images = read_pgm_directory(o.input);
  }
  if (images->frame_count() < 3) {
    throw UsageError("need ≥ 3 frames (input has " + std::to_string(images->frame_count()) + ")");
  }
  if (!o.render_pgm.empty()) write_pgm_directory(*images, o.render_pgm);
  const StipResult r = stip_detect(*images, o.params);
  write_output(o.out, [&](std::ostream& out) { write_stip_csv(out, r.detections); });
  logger()->info("cmd=stip3d size={}x{} frames={} k={} detections={} out={}", images->width(), images->height(),
                 images->frame_count(), o.params.k, r.detections.size(), o.out);
}

// ---- eval ---------------------------------------------------------------

struct EvalOptions {
  std::string ground_truth;
  std::string detections;
  std::string input;
  std::string report = "-";
  std::vector<double> thresholds;
  std::optional<double> noise_sigma;
  int trials = 5;
  std::uint64_t seed = 0;
  DetectorParams params;
  bool keep_border = false;
};

void run_eval(EvalOptions o) {
  o.params.exclude_border_frames = !o.keep_border;
  o.params.validate();
  if (o.detections.empty() == o.input.empty()) throw UsageError("give exactly one of --detections or --input");
  if (o.input.empty() && (!o.thresholds.empty() || o.noise_sigma)) {
    throw UsageError("--thresholds and --noise-sigma need --input");
  }
  for (double t : o.thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) throw UsageError("threshold must be in [0,1]");
  }
  const auto events = read_input<std::vector<GroundTruthEvent>>(o.ground_truth, "ground truth",
                                                                [](std::istream& in) { return read_ground_truth_csv(in); });
  std::vector<Detection> dets;
  EvalExtras extras;
  if (!o.detections.empty()) {
    dets = read_input<std::vector<Detection>>(o.detections, "detections",
                                              [](std::istream& in) { return read_detections_csv(in); });
  } else {
    const VolumeSequence seq = read_tsdf_input(o.input);
    check_frames(seq);
    DetectionResult r = detect(seq, o.params);
    dets = std::move(r.detections);
    if (!o.thresholds.empty()) extras.sweep = threshold_sweep(r.response, o.thresholds, o.params, seq.spec());
    if (o.noise_sigma) {
      if (o.trials < 1) throw UsageError("trials must be >= 1");
      extras.noise = noise_robustness(seq, *o.noise_sigma, o.trials, o.params, o.seed);
      extras.noise_sigma = *o.noise_sigma;
    }
  }
  const MatchResult m = match_detections(dets, events);
  write_output(o.report, [&](std::ostream& out) { write_eval_report(out, m, dets, events, extras); });
  logger()->info("cmd=eval detections={} events={} precision={} recall={}", dets.size(), events.size(), m.precision,
                 m.recall);
}

// ---- export -------------------------------------------------------------

struct ExportOptions {
  std::string input;
  std::string detections;
  std::string out;
  std::optional<int> frame;
};

void run_export(const ExportOptions& o) {
  const VolumeSequence seq = read_tsdf_input(o.input);
  std::vector<Detection> dets;
  if (!o.detections.empty()) {
    dets = read_input<std::vector<Detection>>(o.detections, "detections",
                                              [](std::istream& in) { return read_detections_csv(in); });
  }
  if (o.frame && (*o.frame < 0 || *o.frame >= seq.frame_count())) throw UsageError("--frame outside the sequence");
  write_output(o.out, [&](std::ostream& out) { write_ply(out, seq, dets, PlyOptions{o.frame}); });
  logger()->info("cmd=export detections={} out={}", dets.size(), o.out);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"isip4d: interest points in sequences of TSDF volumes"};
  app.set_version_flag("--version", "isip4d 0.1.0");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = available parallelism)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  std::function<void()> action;

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a TSDF sequence from a scene script");
  gen_cmd->add_option("--scene", gen.scene, "Scene script (JSON)")->required();
  gen_cmd->add_option("--out", gen.out, "Output sequence directory")->required();
  gen_cmd->add_option("--ground-truth", gen.ground_truth, "Ground-truth CSV (default <out>/ground_truth.csv)");
  gen_cmd->add_option("--frames", gen.frames, "Override the script's frame count");
  gen_cmd->add_option("--resolution", gen.resolution, "Resample the script's cubic grid to N voxels per side");
  gen_cmd->add_option("--noise-sigma", gen.noise_sigma, "Additive Gaussian TSDF noise")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Noise seed")->capture_default_str();
  gen_cmd->callback([&] { action = [&] { run_gen(gen); }; });

  VoxelizeOptions vox;
  auto* vox_cmd = app.add_subcommand("voxelize", "Voxelize OBJ meshes, one per frame, into a TSDF sequence");
  vox_cmd->add_option("--mesh", vox.meshes, "OBJ files in frame order")->required();
  vox_cmd->add_option("--out", vox.out, "Output sequence directory")->required();
  vox_cmd->add_option("--resolution", vox.resolution, "Voxels per side")->capture_default_str();
  vox_cmd->add_option("--extent", vox.extent, "Grid side length in meters (default 1.25 x mesh bounds)");
  vox_cmd->add_option("--center", vox.center, "Grid center x y z (default mesh bounds center)")->expected(3);
  vox_cmd->add_option("--truncation-voxels", vox.truncation_voxels, "Truncation distance in voxels")
      ->capture_default_str();
  vox_cmd->add_option("--frame-dt", vox.frame_dt, "Seconds per frame")->capture_default_str();
  vox_cmd->callback([&] { action = [&] { run_voxelize(vox); }; });

  DetectOptions det;
  auto* det_cmd = app.add_subcommand("detect", "Detect 4D interest points");
  det_cmd->add_option("--input", det.input, "Input sequence directory")->required();
  det_cmd->add_option("--out", det.out, "Detections CSV ('-' for stdout)")->capture_default_str();
  det_cmd->add_option("--ply", det.ply, "Also write a PLY point cloud");
  det_cmd->add_option("--dump-response", det.dump_response, "Write the normalized response as a sequence directory");
  add_detector_options(det_cmd, det.params, det.keep_border);
  det_cmd->callback([&] { action = [&] { run_detect(det); }; });

  StipOptions stip;
  auto* stip_cmd = app.add_subcommand("stip3d", "Space-time interest points on an image sequence");
  stip_cmd->add_option("--input", stip.input,
                       "PGM directory, nz = 1 sequence, or TSDF sequence (rendered as silhouettes)")
      ->required();
  stip_cmd->add_option("--out", stip.out, "Detections CSV ('-' for stdout)")->capture_default_str();
  stip_cmd->add_option("--render-pgm", stip.render_pgm, "Write the image sequence as PGM files");
  stip_cmd->add_option("--sigma-s", stip.params.sigma_s, "Spatial scale, pixels")->capture_default_str();
  stip_cmd->add_option("--sigma-t", stip.params.sigma_t, "Temporal scale, frames")->capture_default_str();
  stip_cmd->add_option("--l", stip.params.l, "Integration-scale variance multiplier")->capture_default_str();
  stip_cmd->add_option("--k", stip.params.k, "Response constant")->capture_default_str();
  stip_cmd->add_option("--threshold", stip.params.h_threshold, "Threshold on the normalized response")
      ->capture_default_str();
  stip_cmd->add_option("--nms-radius", stip.params.nms_radius, "Non-maximum suppression half-width")
      ->capture_default_str();
  stip_cmd->add_flag("--keep-border-frames", stip.keep_border, "Allow detections in the padded border frames");
  stip_cmd->callback([&] { action = [&] { run_stip3d(stip); }; });

  EvalOptions ev;
  auto* ev_cmd = app.add_subcommand("eval", "Score detections against ground-truth events");
  ev_cmd->add_option("--ground-truth", ev.ground_truth, "Ground-truth CSV")->required();
  ev_cmd->add_option("--detections", ev.detections, "Detections CSV");
  ev_cmd->add_option("--input", ev.input, "Sequence directory to run the detector on");
  ev_cmd->add_option("--report", ev.report, "JSON report ('-' for stdout)")->capture_default_str();
  ev_cmd->add_option("--thresholds", ev.thresholds, "Threshold sweep (with --input)")->delimiter(',');
  ev_cmd->add_option("--noise-sigma", ev.noise_sigma, "Noise-robustness trials at this sigma (with --input)");
  ev_cmd->add_option("--trials", ev.trials, "Noise trials")->capture_default_str();
  ev_cmd->add_option("--seed", ev.seed, "Noise seed; trial n uses seed + n")->capture_default_str();
  add_detector_options(ev_cmd, ev.params, ev.keep_border);
  ev_cmd->callback([&] { action = [&] { run_eval(ev); }; });

  ExportOptions ex;
  auto* ex_cmd = app.add_subcommand("export", "Write surface voxels and detections as a PLY point cloud");
  ex_cmd->add_option("--input", ex.input, "Sequence directory")->required();
  ex_cmd->add_option("--detections", ex.detections, "Detections CSV (optional)");
  ex_cmd->add_option("--out", ex.out, "PLY file ('-' for stdout)")->required();
  ex_cmd->add_option("--frame", ex.frame, "Only this frame (default: every frame)");
  ex_cmd->callback([&] { action = [&] { run_export(ex); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  logger()->set_level(spdlog::level::from_str(g.log_level));
  set_thread_count(g.threads);
  try {
    action();
    return kExitOk;
  } catch (const UsageError& e) {
    logger()->error("{}", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    logger()->error("{}", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    logger()->error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace isip4d::cli
