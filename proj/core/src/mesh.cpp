#include "isip4d/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "isip4d/parallel.hpp"

namespace isip4d {
namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 add_scaled(const Vec3& a, const Vec3& d, double s) { return {a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

int parse_index(const std::string& token, std::size_t vertex_count, int line) {
  const std::string head = token.substr(0, token.find('/'));
  long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw FormatError("OBJ line " + std::to_string(line) + ": bad vertex index '" + token + "'");
  }
  if (idx < 0) idx += static_cast<long>(vertex_count) + 1;
  if (idx < 1 || idx > static_cast<long>(vertex_count)) {
    throw FormatError("OBJ line " + std::to_string(line) + ": vertex index " + head + " out of range");
  }
  return static_cast<int>(idx - 1);
}

}  // namespace

TriMesh parse_obj(std::istream& in) {
  TriMesh mesh;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream ss(text);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v{};
      if (!(ss >> v[0] >> v[1] >> v[2])) throw FormatError("OBJ line " + std::to_string(line) + ": malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      if (tokens.size() != 3) {
        throw FormatError("OBJ line " + std::to_string(line) + ": face with " + std::to_string(tokens.size()) +
                          " vertices; only triangles are supported");
      }
      std::array<int, 3> tri{};
      for (std::size_t n = 0; n < 3; ++n) tri[n] = parse_index(tokens[n], mesh.vertices.size(), line);
      mesh.triangles.push_back(tri);
    }
  }
  return mesh;
}

TriMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh " + path.string());
  try {
    return parse_obj(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

MeshReport validate_mesh(TriMesh& mesh) {
  MeshReport report;
  const int nv = static_cast<int>(mesh.vertices.size());
  std::vector<std::array<int, 3>> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    for (int v : tri) {
      if (v < 0 || v >= nv) throw std::invalid_argument("triangle references vertex " + std::to_string(v) + " out of range");
    }
    const Vec3 n = cross(sub(mesh.vertices[static_cast<std::size_t>(tri[1])], mesh.vertices[static_cast<std::size_t>(tri[0])]),
                         sub(mesh.vertices[static_cast<std::size_t>(tri[2])], mesh.vertices[static_cast<std::size_t>(tri[0])]));
    if (dot(n, n) == 0.0) {
      ++report.degenerate_removed;
      continue;
    }
    kept.push_back(tri);
  }
  mesh.triangles = std::move(kept);

  std::map<std::pair<int, int>, int> edges;
  for (const auto& tri : mesh.triangles) {
    for (std::size_t e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  report.watertight = !mesh.triangles.empty() &&
                      std::all_of(edges.begin(), edges.end(), [](const auto& kv) { return kv.second == 2; });
  return report;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Closest point by Voronoi region (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = sub(b, a), ac = sub(c, a), ap = sub(p, a);
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  Vec3 q;
  if (d1 <= 0.0 && d2 <= 0.0) {
    q = a;
  } else {
    const Vec3 bp = sub(p, b);
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    const Vec3 cp = sub(p, c);
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    const double vc = d1 * d4 - d3 * d2;
    const double vb = d5 * d2 - d1 * d6;
    const double va = d3 * d6 - d5 * d4;
    if (d3 >= 0.0 && d4 <= d3) {
      q = b;
    } else if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
      q = add_scaled(a, ab, d1 / (d1 - d3));
    } else if (d6 >= 0.0 && d5 <= d6) {
      q = c;
    } else if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
      q = add_scaled(a, ac, d2 / (d2 - d6));
    } else if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
      q = add_scaled(b, sub(c, b), (d4 - d3) / ((d4 - d3) + (d5 - d6)));
    } else {
      const double denom = 1.0 / (va + vb + vc);
      q = add_scaled(add_scaled(a, ab, vb * denom), ac, vc * denom);
    }
  }
  const Vec3 d = sub(p, q);
  return std::sqrt(dot(d, d));
}

VoxelizedVolume voxelize_mesh(const TriMesh& input, const GridSpec& spec) {
  spec.validate();
  if (input.triangles.empty() || input.vertices.empty()) throw std::invalid_argument("voxelize_mesh: empty mesh");
  TriMesh mesh = input;
  const MeshReport report = validate_mesh(mesh);
  if (mesh.triangles.empty()) throw std::invalid_argument("voxelize_mesh: mesh has only degenerate triangles");

  const auto& dims = spec.dims;
  const double tau = spec.truncation_tau;
  const double vs = spec.voxel_size;
  const std::size_t count = spec.voxel_count();
  auto vert = [&](int idx) -> const Vec3& { return mesh.vertices[static_cast<std::size_t>(idx)]; };

  // Voxel index range covered by [lo, hi] along axis a, clamped to the grid.
  auto index_range = [&](double lo, double hi, std::size_t a) {
    const int first = std::max(0, static_cast<int>(std::ceil((lo - spec.origin[a]) / vs)));
    const int last = std::min(dims[a] - 1, static_cast<int>(std::floor((hi - spec.origin[a]) / vs)));
    return std::pair{first, last};
  };

  // Unsigned distance inside the truncation band, +inf elsewhere.
  std::vector<double> dist(count, std::numeric_limits<double>::infinity());
  parallel_for(static_cast<std::size_t>(dims[2]), [&](std::size_t kb, std::size_t ke) {
    for (const auto& tri : mesh.triangles) {
      Vec3 lo{}, hi{};
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = std::min({vert(tri[0])[a], vert(tri[1])[a], vert(tri[2])[a]}) - tau;
        hi[a] = std::max({vert(tri[0])[a], vert(tri[1])[a], vert(tri[2])[a]}) + tau;
      }
      const auto [i0, i1] = index_range(lo[0], hi[0], 0);
      const auto [j0, j1] = index_range(lo[1], hi[1], 1);
      auto [k0, k1] = index_range(lo[2], hi[2], 2);
      k0 = std::max(k0, static_cast<int>(kb));
      k1 = std::min(k1, static_cast<int>(ke) - 1);
      for (int k = k0; k <= k1; ++k) {
        for (int j = j0; j <= j1; ++j) {
          for (int i = i0; i <= i1; ++i) {
            const std::size_t n = spec.linear_index(i, j, k);
            dist[n] = std::min(dist[n], point_triangle_distance(spec.world(i, j, k), vert(tri[0]), vert(tri[1]), vert(tri[2])));
          }
        }
      }
    }
  });

  // Inside votes from parity of crossings along +x, +y and +z.
  std::vector<unsigned char> votes(count, 0);
  if (report.watertight) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
      const std::size_t ua = (axis + 1) % 3, va = (axis + 2) % 3;
      const int nu = dims[ua], nv = dims[va];
      std::vector<std::vector<double>> hits(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv));
      for (const auto& tri : mesh.triangles) {
        const Vec3 &p0 = vert(tri[0]), &p1 = vert(tri[1]), &p2 = vert(tri[2]);
        const double area = (p1[ua] - p0[ua]) * (p2[va] - p0[va]) - (p2[ua] - p0[ua]) * (p1[va] - p0[va]);
        if (area == 0.0) continue;
        const auto [u0, u1] = index_range(std::min({p0[ua], p1[ua], p2[ua]}), std::max({p0[ua], p1[ua], p2[ua]}), ua);
        const auto [v0, v1] = index_range(std::min({p0[va], p1[va], p2[va]}), std::max({p0[va], p1[va], p2[va]}), va);
        for (int v = v0; v <= v1; ++v) {
          for (int u = u0; u <= u1; ++u) {
            const double pu = spec.origin[ua] + vs * u, pv = spec.origin[va] + vs * v;
            const double w0 = (p1[ua] - pu) * (p2[va] - pv) - (p2[ua] - pu) * (p1[va] - pv);
            const double w1 = (p2[ua] - pu) * (p0[va] - pv) - (p0[ua] - pu) * (p2[va] - pv);
            const double w2 = (p0[ua] - pu) * (p1[va] - pv) - (p1[ua] - pu) * (p0[va] - pv);
            const bool inside = (w0 > 0 && w1 > 0 && w2 > 0) || (w0 < 0 && w1 < 0 && w2 < 0);
            if (!inside) continue;
            const double s = w0 + w1 + w2;
            const double along = (w0 * p0[axis] + w1 * p1[axis] + w2 * p2[axis]) / s;
            hits[static_cast<std::size_t>(u) + static_cast<std::size_t>(nu) * static_cast<std::size_t>(v)].push_back(along);
          }
        }
      }
      parallel_for(hits.size(), [&](std::size_t begin, std::size_t end) {
        int ijk[3] = {0, 0, 0};
        for (std::size_t line = begin; line < end; ++line) {
          auto& h = hits[line];
          std::sort(h.begin(), h.end());
          ijk[ua] = static_cast<int>(line % static_cast<std::size_t>(nu));
          ijk[va] = static_cast<int>(line / static_cast<std::size_t>(nu));
          std::size_t passed = 0;
          for (int s = 0; s < dims[axis]; ++s) {
            const double x = spec.origin[axis] + vs * s;
            while (passed < h.size() && h[passed] <= x) ++passed;
            if ((h.size() - passed) % 2 == 1) {
              ijk[axis] = s;
              ++votes[spec.linear_index(ijk[0], ijk[1], ijk[2])];
            }
          }
        }
      });
    }
  }

  std::vector<float> data(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double sign = votes[n] >= 2 ? -1.0 : 1.0;
    data[n] = std::isfinite(dist[n]) ? static_cast<float>(truncate_sdf(sign * dist[n], tau)) : static_cast<float>(sign);
  }
  return {TsdfVolume(spec, std::move(data)), !report.watertight, report.degenerate_removed};
}

TriMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
                                       {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  auto project = [](Vec3 p) {
    const double n = std::sqrt(dot(p, p));
    return Vec3{p[0] / n, p[1] / n, p[2] / n};
  };
  for (auto& p : v) p = project(p);
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::pair{std::min(a, b), std::max(a, b)};
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      const Vec3& pa = v[static_cast<std::size_t>(a)];
      const Vec3& pb = v[static_cast<std::size_t>(b)];
      v.push_back(project({pa[0] + pb[0], pa[1] + pb[1], pa[2] + pb[2]}));
      const int idx = static_cast<int>(v.size() - 1);
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriMesh mesh;
  mesh.triangles = std::move(f);
  mesh.vertices.reserve(v.size());
  for (const auto& p : v) mesh.vertices.push_back({center[0] + radius * p[0], center[1] + radius * p[1], center[2] + radius * p[2]});
  return mesh;
}

}  // namespace isip4d
