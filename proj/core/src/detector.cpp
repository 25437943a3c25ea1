#include "isip4d/detector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "isip4d/parallel.hpp"

namespace isip4d {

void DetectorParams::validate() const {
  smoothing.validate();
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("k must be > 0");
  if (!(l_prime >= 1.0) || !std::isfinite(l_prime)) throw std::invalid_argument("l_prime must be >= 1");
  if (!(h_threshold >= 0.0 && h_threshold <= 1.0)) throw std::invalid_argument("threshold must be in [0,1]");
  if (nms_radius < 1) throw std::invalid_argument("nms_radius must be >= 1");
}

FrameRange DetectorParams::candidate_frames(int frame_count) const {
  if (!exclude_border_frames) return {0, frame_count};
  const int r = smoothing.temporal_radius();
  return {std::min(r, frame_count), std::max(std::min(r, frame_count), frame_count - r)};
}

double SymMat4::operator()(int row, int col) const {
  if (row > col) std::swap(row, col);
  static constexpr int kIndex[4][4] = {{kXX, kXY, kXZ, kXT}, {kXY, kYY, kYZ, kYT}, {kXZ, kYZ, kZZ, kZT}, {kXT, kYT, kZT, kTT}};
  return c[static_cast<std::size_t>(kIndex[row][col])];
}

double SymMat4::determinant() const {
  const double a00 = c[kXX], a01 = c[kXY], a02 = c[kXZ], a03 = c[kXT];
  const double a11 = c[kYY], a12 = c[kYZ], a13 = c[kYT];
  const double a22 = c[kZZ], a23 = c[kZT], a33 = c[kTT];
  // 2x2 minors of rows (0,1) and of rows (2,3).
  const double s0 = a00 * a11 - a01 * a01;
  const double s1 = a00 * a12 - a01 * a02;
  const double s2 = a00 * a13 - a01 * a03;
  const double s3 = a01 * a12 - a11 * a02;
  const double s4 = a01 * a13 - a11 * a03;
  const double s5 = a02 * a13 - a12 * a03;
  const double c5 = a22 * a33 - a23 * a23;
  const double c4 = a12 * a33 - a13 * a23;
  const double c3 = a12 * a23 - a13 * a22;
  const double c2 = a02 * a33 - a03 * a23;
  const double c1 = a02 * a23 - a03 * a22;
  const double c0 = a02 * a13 - a03 * a12;
  return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
}

double harris_response_4d(const SymMat4& m, double k) {
  const double tr = m.trace();
  const double tr2 = tr * tr;
  return m.determinant() - k * (tr2 * tr2);
}

SymMat4 MomentField::at(int i, int j, int k, int t) const {
  SymMat4 m;
  const std::size_t v = components[0].index(i, j, k, t);
  for (int c = 0; c < kMomentComponents; ++c) m.c[static_cast<std::size_t>(c)] = components[static_cast<std::size_t>(c)].data()[v];
  return m;
}

namespace {

using Frame = std::vector<double>;
using Gradients = std::array<std::span<const double>, 4>;

// Spatially smoothed product of two gradient components for one frame.
void integrated_product(const Gradients& g, int component, const Dims3& dims, std::span<const double> kernel,
                        std::span<double> out) {
  const auto [a, b] = kMomentAxes[static_cast<std::size_t>(component)];
  const auto ga = g[static_cast<std::size_t>(a)];
  const auto gb = g[static_cast<std::size_t>(b)];
  Frame product(dims.count());
  parallel_for(product.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) product[v] = ga[v] * gb[v];
  });
  frame_ops::smooth_spatial(product, out, dims, kernel);
}

void response_frame(const std::array<Frame, kMomentComponents>& m, double k, std::span<double> out) {
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    SymMat4 mat;
    for (std::size_t v = begin; v < end; ++v) {
      for (std::size_t c = 0; c < kMomentComponents; ++c) mat.c[c] = m[c][v];
      out[v] = harris_response_4d(mat, k);
    }
  });
}

// Frames computed on demand and kept until evicted.
template <typename Payload>
class FrameCache {
 public:
  using Producer = std::function<void(int, Payload&)>;
  explicit FrameCache(Producer producer) : producer_(std::move(producer)) {}

  const Payload& get(int t) {
    if (auto it = frames_.find(t); it != frames_.end()) return it->second;
    Payload slot;
    producer_(t, slot);
    return frames_.emplace(t, std::move(slot)).first->second;
  }
  void evict_below(int t) { frames_.erase(frames_.begin(), frames_.lower_bound(t)); }

 private:
  Producer producer_;
  std::map<int, Payload> frames_;
};

}  // namespace

MomentField moment_field(const ScaleSpaceFields& fields, const DetectorParams& params) {
  params.validate();
  const Dims4& d = fields.L.dims();
  const SmoothingParams integ = params.integration();
  const auto ks = gaussian_kernel_1d(integ.sigma_s, integ.spatial_radius());
  const auto kt = gaussian_kernel_1d(integ.sigma_t, integ.temporal_radius());

  MomentField m;
  for (int c = 0; c < kMomentComponents; ++c) {
    Field4 spatial(d);
    for (int t = 0; t < d.nt; ++t) {
      const Gradients g{fields.Lx.frame(t), fields.Ly.frame(t), fields.Lz.frame(t), fields.Lt.frame(t)};
      integrated_product(g, c, d.spatial(), ks, spatial.frame(t));
    }
    Field4& out = m.components[static_cast<std::size_t>(c)];
    out = Field4(d);
    const frame_ops::FrameSource src = [&](int s) { return spatial.frame(s); };
    for (int t = 0; t < d.nt; ++t) frame_ops::smooth_temporal(src, t, d.nt, kt, out.frame(t));
  }
  return m;
}

ResponseField normalize_response(Field4 raw) {
  ResponseField r;
  const auto values = raw.data();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.h_min = lo;
  r.h_max = hi;
  r.normalized = Field4(raw.dims(), 0.0);
  r.degenerate_normalization = !(hi > lo);
  if (!r.degenerate_normalization) {
    const double span = hi - lo;
    auto out = r.normalized.data();
    parallel_for(values.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t v = begin; v < end; ++v) out[v] = std::clamp((values[v] - lo) / span, 0.0, 1.0);
    });
  }
  r.raw = std::move(raw);
  return r;
}

ResponseField response(const MomentField& m, const DetectorParams& params) {
  const Dims4& d = m.dims();
  Field4 raw(d);
  auto out = raw.data();
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    SymMat4 mat;
    for (std::size_t v = begin; v < end; ++v) {
      for (std::size_t c = 0; c < kMomentComponents; ++c) mat.c[c] = m.components[c].data()[v];
      out[v] = harris_response_4d(mat, params.k);
    }
  });
  return normalize_response(std::move(raw));
}

double k_upper_bound(double alpha, double beta, double gamma) {
  if (!(alpha >= 1.0) || !(beta >= 1.0) || !(gamma >= 1.0)) {
    throw std::invalid_argument("k_upper_bound: eigenvalue ratios must be >= 1");
  }
  const double s = 1.0 + alpha + beta + gamma;
  const double s2 = s * s;
  return alpha * beta * gamma / (s2 * s2);
}

Rational k_upper_bound_exact(std::int64_t alpha, std::int64_t beta, std::int64_t gamma) {
  if (alpha < 1 || beta < 1 || gamma < 1) throw std::invalid_argument("k_upper_bound: eigenvalue ratios must be >= 1");
  const std::int64_t s = 1 + alpha + beta + gamma;
  Rational r{alpha * beta * gamma, s * s * s * s};
  const std::int64_t g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

std::vector<LocalMaximum> find_local_maxima(const ResponseField& r, double threshold, int radius, FrameRange frames) {
  if (r.degenerate_normalization) return {};
  const Dims4& d = r.raw.dims();
  const int t_first = std::clamp(frames.first, 0, d.nt);
  const int t_last = std::clamp(frames.last, t_first, d.nt);
  const auto raw = r.raw.data();
  const auto norm = r.normalized.data();

  std::vector<std::vector<LocalMaximum>> per_frame(static_cast<std::size_t>(t_last - t_first));
  parallel_for(per_frame.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t tt = begin; tt < end; ++tt) {
      const int t = t_first + static_cast<int>(tt);
      for (int k = 0; k < d.nz; ++k) {
        for (int j = 0; j < d.ny; ++j) {
          for (int i = 0; i < d.nx; ++i) {
            const std::size_t v = r.raw.index(i, j, k, t);
            const double h = raw[v];
            if (!(h > 0.0) || !(norm[v] >= threshold)) continue;
            bool is_max = true;
            for (int dt = -radius; dt <= radius && is_max; ++dt) {
              const int tq = t + dt;
              if (tq < 0 || tq >= d.nt) continue;
              for (int dk = -radius; dk <= radius && is_max; ++dk) {
                const int kq = k + dk;
                if (kq < 0 || kq >= d.nz) continue;
                for (int dj = -radius; dj <= radius && is_max; ++dj) {
                  const int jq = j + dj;
                  if (jq < 0 || jq >= d.ny) continue;
                  for (int di = -radius; di <= radius; ++di) {
                    const int iq = i + di;
                    if (iq < 0 || iq >= d.nx) continue;
                    if (dt == 0 && dk == 0 && dj == 0 && di == 0) continue;
                    const double hq = raw[r.raw.index(iq, jq, kq, tq)];
                    if (hq > h) {
                      is_max = false;
                      break;
                    }
                    if (hq == h) {
                      // Tie: the neighbor wins when it is lexicographically smaller in (t, i, j, k).
                      const auto self = std::tie(t, i, j, k);
                      const auto other = std::tie(tq, iq, jq, kq);
                      if (other < self) {
                        is_max = false;
                        break;
                      }
                    }
                  }
                }
              }
            }
            if (is_max) per_frame[tt].push_back({t, {i, j, k}, h, norm[v]});
          }
        }
      }
    }
  });

  std::vector<LocalMaximum> out;
  for (auto& f : per_frame) out.insert(out.end(), f.begin(), f.end());
  std::sort(out.begin(), out.end(), [](const LocalMaximum& a, const LocalMaximum& b) {
    if (a.normalized != b.normalized) return a.normalized > b.normalized;
    return std::tie(a.t, a.index.i, a.index.j, a.index.k) < std::tie(b.t, b.index.i, b.index.j, b.index.k);
  });
  return out;
}

std::vector<Detection> nms_4d(const ResponseField& r, const DetectorParams& params, const GridSpec& spec) {
  params.validate();
  std::vector<Detection> out;
  const FrameRange frames = params.candidate_frames(r.raw.dims().nt);
  for (const LocalMaximum& m : find_local_maxima(r, params.h_threshold, params.nms_radius, frames)) {
    out.push_back({m.t, m.index, spec.world(m.index), m.raw, m.normalized});
  }
  return out;
}

DetectionResult detect(const VolumeSequence& seq, const DetectorParams& params) {
  params.validate();
  const int nt = seq.frame_count();
  if (nt < 3) throw std::invalid_argument("need ≥ 3 frames");
  const Dims4 d = dims_of(seq);
  const Dims3 ds = d.spatial();
  const std::size_t frame_size = d.frame_size();

  const SmoothingParams integ = params.integration();
  const auto ks = gaussian_kernel_1d(params.smoothing.sigma_s, params.smoothing.spatial_radius());
  const auto kt = gaussian_kernel_1d(params.smoothing.sigma_t, params.smoothing.temporal_radius());
  const auto ks2 = gaussian_kernel_1d(integ.sigma_s, integ.spatial_radius());
  const auto kt2 = gaussian_kernel_1d(integ.sigma_t, integ.temporal_radius());
  const int rt = params.smoothing.temporal_radius();
  const int rt2 = integ.temporal_radius();

  // Spatially smoothed input frames.
  FrameCache<Frame> spatial([&](int s, Frame& out) {
    const auto src = seq.frame(s).data();
    Frame in(src.begin(), src.end());
    out.resize(frame_size);
    frame_ops::smooth_spatial(in, out, ds, ks);
  });
  // Fully smoothed frames L(s).
  FrameCache<Frame> smoothed([&](int s, Frame& out) {
    out.resize(frame_size);
    frame_ops::smooth_temporal([&](int q) { return std::span<const double>(spatial.get(q)); }, s, nt, kt, out);
  });
  // Spatially integrated gradient products at frame s.
  using Products = std::array<Frame, kMomentComponents>;
  FrameCache<Products> products([&](int s, Products& out) {
    std::array<Frame, 4> grad;
    for (auto& g : grad) g.resize(frame_size);
    frame_ops::spatial_gradient(smoothed.get(s), ds, grad[0], grad[1], grad[2]);
    frame_ops::temporal_gradient([&](int q) { return std::span<const double>(smoothed.get(q)); }, s, nt, grad[3]);
    const Gradients g{grad[0], grad[1], grad[2], grad[3]};
    for (int c = 0; c < kMomentComponents; ++c) {
      Frame& dst = out[static_cast<std::size_t>(c)];
      dst.resize(frame_size);
      integrated_product(g, c, ds, ks2, dst);
    }
  });

  Field4 raw(d);
  std::array<Frame, kMomentComponents> moment;
  for (auto& m : moment) m.resize(frame_size);
  for (int t = 0; t < nt; ++t) {
    for (int c = 0; c < kMomentComponents; ++c) {
      frame_ops::smooth_temporal(
          [&](int q) { return std::span<const double>(products.get(q)[static_cast<std::size_t>(c)]); }, t, nt, kt2,
          moment[static_cast<std::size_t>(c)]);
    }
    response_frame(moment, params.k, raw.frame(t));

    const int next_product = std::min(t + rt2, nt - 1) + 1;
    products.evict_below(std::max(0, t + 1 - rt2));
    smoothed.evict_below(std::max(0, next_product - 1));
    spatial.evict_below(std::max(0, next_product - 1 - rt));
  }

  DetectionResult result;
  result.response = normalize_response(std::move(raw));
  result.detections = nms_4d(result.response, params, seq.spec());
  return result;
}

}  // namespace isip4d
