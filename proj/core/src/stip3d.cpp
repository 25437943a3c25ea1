#include "isip4d/stip3d.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "isip4d/parallel.hpp"

namespace isip4d {

ImageSequence::ImageSequence(int width, int height, std::vector<std::vector<float>> frames)
    : width_(width), height_(height), frames_(std::move(frames)) {
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be positive");
  if (frames_.empty()) throw std::invalid_argument("image sequence needs at least one frame");
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  for (std::size_t t = 0; t < frames_.size(); ++t) {
    if (frames_[t].size() != n) throw std::invalid_argument("frame " + std::to_string(t) + " has the wrong size");
    for (float v : frames_[t]) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw std::invalid_argument("frame " + std::to_string(t) + ": value outside [0, 1]");
      }
    }
  }
}

void Stip3dParams::validate() const {
  smoothing().validate();
  if (!(l >= 1.0) || !std::isfinite(l)) throw std::invalid_argument("l must be >= 1");
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be > 0");
  if (!(h_threshold >= 0.0 && h_threshold <= 1.0)) throw std::invalid_argument("threshold must be in [0,1]");
  if (nms_radius < 1) throw std::invalid_argument("nms_radius must be >= 1");
}

namespace {

Dims4 image_dims(const ImageSequence& f) { return {f.width(), f.height(), 1, f.frame_count()}; }

Field4 smooth_3d(const Field4& in, const SmoothingParams& p) {
  // smooth_4d skips the unit z axis, leaving the x, y and t passes.
  return smooth_4d(in, p);
}

}  // namespace

StipScaleSpace stip_scale_space(const ImageSequence& f, const Stip3dParams& params) {
  params.validate();
  if (f.frame_count() < 3) throw std::invalid_argument("need ≥ 3 frames");
  const Dims4 d = image_dims(f);
  Field4 raw(d);
  for (int t = 0; t < d.nt; ++t) std::copy(f.frame(t).begin(), f.frame(t).end(), raw.frame(t).begin());

  StipScaleSpace s;
  s.L = smooth_3d(raw, params.smoothing());
  Gradient4 g = derivatives_4d(s.L);
  s.Lx = std::move(g.x);
  s.Ly = std::move(g.y);
  s.Lt = std::move(g.t);
  return s;
}

double SymMat3::determinant() const {
  return xx * (yy * tt - yt * yt) - xy * (xy * tt - yt * xt) + xt * (xy * yt - yy * xt);
}

double harris_response_3d(const SymMat3& m, double k) {
  const double tr = m.trace();
  return m.determinant() - k * tr * tr * tr;
}

StipResult stip_detect(const ImageSequence& f, const Stip3dParams& params) {
  const StipScaleSpace s = stip_scale_space(f, params);
  const Dims4& d = s.L.dims();
  const SmoothingParams integ = params.smoothing().scaled_variance(params.l);

  const std::array<const Field4*, 3> g{&s.Lx, &s.Ly, &s.Lt};
  static constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  std::array<Field4, 6> m;
  for (std::size_t c = 0; c < kPairs.size(); ++c) {
    Field4 product(d);
    const auto a = g[static_cast<std::size_t>(kPairs[c][0])]->data();
    const auto b = g[static_cast<std::size_t>(kPairs[c][1])]->data();
    auto out = product.data();
    for (std::size_t v = 0; v < out.size(); ++v) out[v] = a[v] * b[v];
    m[c] = smooth_3d(product, integ);
  }

  Field4 raw(d);
  auto out = raw.data();
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const SymMat3 mat{m[0].data()[v], m[1].data()[v], m[2].data()[v], m[3].data()[v], m[4].data()[v], m[5].data()[v]};
      out[v] = harris_response_3d(mat, params.k);
    }
  });

  StipResult result;
  result.response = normalize_response(std::move(raw));
  DetectorParams frame_rule;
  frame_rule.smoothing = params.smoothing();
  frame_rule.exclude_border_frames = params.exclude_border_frames;
  const FrameRange frames = frame_rule.candidate_frames(d.nt);
  for (const LocalMaximum& lm : find_local_maxima(result.response, params.h_threshold, params.nms_radius, frames)) {
    result.detections.push_back({lm.t, lm.index.i, lm.index.j, lm.raw, lm.normalized});
  }
  return result;
}

ImageSequence render_silhouettes(const VolumeSequence& seq) {
  const auto& dims = seq.spec().dims;
  const int w = dims[0], h = dims[1];
  std::vector<std::vector<float>> frames;
  for (const TsdfVolume& vol : seq.frames()) {
    std::vector<float> img(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f);
    for (int k = 0; k < dims[2]; ++k) {
      for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
          if (vol.at(i, j, k) < 0.0f) img[static_cast<std::size_t>(i) + static_cast<std::size_t>(w) * static_cast<std::size_t>(j)] = 1.0f;
        }
      }
    }
    frames.push_back(std::move(img));
  }
  return ImageSequence(w, h, std::move(frames));
}

namespace {

// Next header token of a PGM file, skipping whitespace and comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

std::vector<float> read_pgm(const std::filesystem::path& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (pgm_token(in) != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(in));
    h = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw FormatError(path.string() + ": malformed PGM header");
  }
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw FormatError(path.string() + ": invalid PGM header values");
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(n * bytes_per);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw FormatError(path.string() + ": truncated PGM payload");
  }
  std::vector<float> img(n);
  for (std::size_t p = 0; p < n; ++p) {
    const unsigned v = bytes_per == 1 ? raw[p] : (static_cast<unsigned>(raw[2 * p]) << 8) | raw[2 * p + 1];
    if (v > static_cast<unsigned>(maxval)) throw FormatError(path.string() + ": sample exceeds maxval");
    img[p] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  width = w;
  height = h;
  return img;
}

}  // namespace

ImageSequence read_pgm_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw FormatError(dir.string() + ": no .pgm files");
  int w0 = 0, h0 = 0;
  std::vector<std::vector<float>> frames;
  for (const auto& file : files) {
    int w = 0, h = 0;
    frames.push_back(read_pgm(file, w, h));
    if (frames.size() == 1) {
      w0 = w;
      h0 = h;
    } else if (w != w0 || h != h0) {
      throw FormatError(file.string() + ": frame size differs from the first frame");
    }
  }
  return ImageSequence(w0, h0, std::move(frames));
}

void write_pgm_directory(const ImageSequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (int t = 0; t < seq.frame_count(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.pgm", t);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << "P5\n" << seq.width() << ' ' << seq.height() << "\n255\n";
    std::string payload;
    payload.reserve(seq.frame(t).size());
    for (float v : seq.frame(t)) payload.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
}

ImageSequence image_sequence_from_volume(const VolumeSequence& seq) {
  const auto& dims = seq.spec().dims;
  if (dims[2] != 1) throw std::invalid_argument("image input needs a volume with nz = 1");
  std::vector<std::vector<float>> frames;
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto data = seq.frame(t).data();
    for (float v : data) {
      if (v < 0.0f) throw FormatError("frame " + std::to_string(t) + ": image value outside [0, 1]");
    }
    frames.emplace_back(data.begin(), data.end());
  }
  return ImageSequence(dims[0], dims[1], std::move(frames));
}

VolumeSequence volume_from_image_sequence(const ImageSequence& seq) {
  GridSpec spec;
  spec.dims = {seq.width(), seq.height(), 1};
  spec.voxel_size = 1.0;
  spec.truncation_tau = 3.0;
  std::vector<TsdfVolume> frames;
  for (int t = 0; t < seq.frame_count(); ++t) frames.emplace_back(spec, seq.frame(t));
  return VolumeSequence(spec, std::move(frames));
}

}  // namespace isip4d
