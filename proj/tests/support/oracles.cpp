#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace isip4d::testing {

std::vector<double> reference_kernel(double sigma, int radius) {
  std::vector<double> k;
  double sum = 0.0;
  for (int u = -radius; u <= radius; ++u) {
    k.push_back(std::exp(-static_cast<double>(u * u) / (2.0 * sigma * sigma)));
    sum += k.back();
  }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

int clampi(int v, int n) { return std::clamp(v, 0, n - 1); }

}  // namespace

Field4 dense_smooth(const Field4& in, const SmoothingParams& params) {
  const Dims4& d = in.dims();
  const int rs = params.spatial_radius(), rt = params.temporal_radius();
  const auto ks = reference_kernel(params.sigma_s, rs);
  const auto kt = reference_kernel(params.sigma_t, rt);
  Field4 out(d);
  for (int t = 0; t < d.nt; ++t)
    for (int k = 0; k < d.nz; ++k)
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          double acc = 0.0;
          for (int s = -rt; s <= rt; ++s) {
            const double ws = d.nt > 1 ? kt[static_cast<std::size_t>(s + rt)] : (s == 0 ? 1.0 : 0.0);
            if (ws == 0.0) continue;
            for (int w = -rs; w <= rs; ++w) {
              const double ww = d.nz > 1 ? ks[static_cast<std::size_t>(w + rs)] : (w == 0 ? 1.0 : 0.0);
              if (ww == 0.0) continue;
              for (int v = -rs; v <= rs; ++v) {
                const double wv = d.ny > 1 ? ks[static_cast<std::size_t>(v + rs)] : (v == 0 ? 1.0 : 0.0);
                if (wv == 0.0) continue;
                for (int u = -rs; u <= rs; ++u) {
                  const double wu = d.nx > 1 ? ks[static_cast<std::size_t>(u + rs)] : (u == 0 ? 1.0 : 0.0);
                  if (wu == 0.0) continue;
                  acc += ws * ww * wv * wu *
                         in.at(clampi(i + u, d.nx), clampi(j + v, d.ny), clampi(k + w, d.nz), clampi(t + s, d.nt));
                }
              }
            }
          }
          out.at(i, j, k, t) = acc;
        }
  return out;
}

std::array<Field4, 4> naive_gradients(const Field4& L) {
  const Dims4& d = L.dims();
  std::array<Field4, 4> g{Field4(d), Field4(d), Field4(d), Field4(d)};
  const std::array<int, 4> n{d.nx, d.ny, d.nz, d.nt};
  for (int t = 0; t < d.nt; ++t)
    for (int k = 0; k < d.nz; ++k)
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          const std::array<int, 4> p{i, j, k, t};
          for (int a = 0; a < 4; ++a) {
            if (n[static_cast<std::size_t>(a)] == 1) continue;
            std::array<int, 4> lo = p, hi = p;
            const int c = p[static_cast<std::size_t>(a)];
            lo[static_cast<std::size_t>(a)] = std::max(c - 1, 0);
            hi[static_cast<std::size_t>(a)] = std::min(c + 1, n[static_cast<std::size_t>(a)] - 1);
            const double span = hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)];
            g[static_cast<std::size_t>(a)].at(i, j, k, t) =
                (L.at(hi[0], hi[1], hi[2], hi[3]) - L.at(lo[0], lo[1], lo[2], lo[3])) / span;
          }
        }
  return g;
}

std::array<Field4, kMomentComponents> naive_moment_field(const Field4& p, const DetectorParams& params) {
  const Field4 L = dense_smooth(p, params.smoothing);
  const auto g = naive_gradients(L);
  const Dims4& d = p.dims();
  const SmoothingParams integ = params.integration();
  const int rs = integ.spatial_radius(), rt = integ.temporal_radius();
  const auto ks = reference_kernel(integ.sigma_s, rs);
  const auto kt = reference_kernel(integ.sigma_t, rt);

  std::array<Field4, kMomentComponents> m;
  for (auto& f : m) f = Field4(d);
  for (int t = 0; t < d.nt; ++t)
    for (int k = 0; k < d.nz; ++k)
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          std::array<double, kMomentComponents> acc{};
          for (int s = -rt; s <= rt; ++s)
            for (int w = -rs; w <= rs; ++w)
              for (int v = -rs; v <= rs; ++v) {
                const double wsvw = kt[static_cast<std::size_t>(s + rt)] * ks[static_cast<std::size_t>(w + rs)] *
                                    ks[static_cast<std::size_t>(v + rs)];
                for (int u = -rs; u <= rs; ++u) {
                  const double wt = wsvw * ks[static_cast<std::size_t>(u + rs)];
                  const std::size_t q =
                      p.index(clampi(i + u, d.nx), clampi(j + v, d.ny), clampi(k + w, d.nz), clampi(t + s, d.nt));
                  const double gv[4] = {g[0].data()[q], g[1].data()[q], g[2].data()[q], g[3].data()[q]};
                  for (int c = 0; c < kMomentComponents; ++c) {
                    const auto [a, b] = kMomentAxes[static_cast<std::size_t>(c)];
                    acc[static_cast<std::size_t>(c)] += wt * gv[a] * gv[b];
                  }
                }
              }
          for (int c = 0; c < kMomentComponents; ++c) m[static_cast<std::size_t>(c)].at(i, j, k, t) = acc[static_cast<std::size_t>(c)];
        }
  return m;
}

double eigen_determinant(const SymMat4& m) {
  Eigen::Matrix4d a;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = m(r, c);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().prod();
}

SymMat4 random_psd(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(std::log(lo), std::log(hi));
  Eigen::Matrix4d g;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) g(r, c) = normal(rng);
  const Eigen::Matrix4d q = Eigen::HouseholderQR<Eigen::Matrix4d>(g).householderQ();
  Eigen::Vector4d lambda;
  for (int n = 0; n < 4; ++n) lambda(n) = std::exp(expo(rng));
  const Eigen::Matrix4d a = q * lambda.asDiagonal() * q.transpose();
  SymMat4 m;
  for (int c = 0; c < kMomentComponents; ++c) {
    const auto [r, col] = kMomentAxes[static_cast<std::size_t>(c)];
    m.c[static_cast<std::size_t>(c)] = 0.5 * (a(r, col) + a(col, r));
  }
  return m;
}

Field4 random_field(const Dims4& d, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Field4 f(d);
  for (double& v : f.data()) v = u(rng);
  return f;
}

VolumeSequence sequence_from_field(const Field4& f, const GridSpec& spec) {
  std::vector<TsdfVolume> frames;
  for (int t = 0; t < f.dims().nt; ++t) {
    const auto src = f.frame(t);
    frames.emplace_back(spec, std::vector<float>(src.begin(), src.end()));
  }
  return VolumeSequence(spec, std::move(frames));
}

VolumeSequence random_sequence(const Dims4& d, std::uint64_t seed) {
  GridSpec spec;
  spec.dims = {d.nx, d.ny, d.nz};
  spec.voxel_size = 1.0;
  spec.truncation_tau = 3.0;
  // Round through float first so the sequence holds exactly these values.
  Field4 f = random_field(d, seed);
  for (double& v : f.data()) v = static_cast<float>(v);
  return sequence_from_field(f, spec);
}

Index3 rotate90_index(const Index3& idx, const std::array<int, 3>& dims, int a, int b) {
  std::array<int, 3> in{idx.i, idx.j, idx.k};
  std::array<int, 3> out = in;
  out[static_cast<std::size_t>(a)] = dims[static_cast<std::size_t>(b)] - 1 - in[static_cast<std::size_t>(b)];
  out[static_cast<std::size_t>(b)] = in[static_cast<std::size_t>(a)];
  return {out[0], out[1], out[2]};
}

VolumeSequence rotate90(const VolumeSequence& seq, int a, int b) {
  GridSpec spec = seq.spec();
  std::swap(spec.dims[static_cast<std::size_t>(a)], spec.dims[static_cast<std::size_t>(b)]);
  const auto& od = seq.spec().dims;
  std::vector<TsdfVolume> frames;
  for (const TsdfVolume& vol : seq.frames()) {
    std::vector<float> data(spec.voxel_count());
    for (int k = 0; k < od[2]; ++k)
      for (int j = 0; j < od[1]; ++j)
        for (int i = 0; i < od[0]; ++i) {
          const Index3 r = rotate90_index({i, j, k}, od, a, b);
          data[spec.linear_index(r.i, r.j, r.k)] = vol.at(i, j, k);
        }
    frames.emplace_back(spec, std::move(data));
  }
  return VolumeSequence(spec, std::move(frames), seq.frame_dt());
}

VolumeSequence reverse_time(const VolumeSequence& seq) {
  std::vector<TsdfVolume> frames(seq.frames().rbegin(), seq.frames().rend());
  return VolumeSequence(seq.spec(), std::move(frames), seq.frame_dt());
}

VolumeSequence negate(const VolumeSequence& seq) {
  std::vector<TsdfVolume> frames;
  for (const TsdfVolume& vol : seq.frames()) {
    std::vector<float> data(vol.data().begin(), vol.data().end());
    for (float& v : data) v = -v;
    frames.emplace_back(seq.spec(), std::move(data));
  }
  return VolumeSequence(seq.spec(), std::move(frames), seq.frame_dt());
}

GeneratedScene bundled_scene(const char* name, int resolution) {
  SceneScript s = load_scene_script(std::string(ISIP4D_SCENES_DIR) + "/" + name);
  const GridSpec grid = resolution > 0 ? resample_grid(s.grid, resolution) : s.grid;
  return generate_sequence(s.scene, grid, s.frames, s.frame_dt);
}

}  // namespace isip4d::testing
