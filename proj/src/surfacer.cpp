#include <gradlattice/distance.hpp>
#include <gradlattice/parallel.hpp>
#include <gradlattice/surfacer.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_set>

namespace gradlattice {

namespace {

constexpr const char* kModule = "surfacer";

double smooth_min(double a, double b, double k) {
  const double h = std::max(k - std::abs(a - b), 0.0) / k;
  return std::min(a, b) - h * h * k * 0.25;
}

Vec3 bar_axis(const Vec3& tangent) {
  Vec3 axis = tangent.cross(Vec3::UnitZ());
  if (axis.norm() < 1e-6) axis = tangent.cross(Vec3::UnitY());
  return axis.normalized();
}

}  // namespace

std::vector<std::pair<std::array<Vec3, 2>, double>> channel_segments(const Channel& ch) {
  std::vector<std::pair<std::array<Vec3, 2>, double>> out;
  if (ch.path.size() < 2) return out;
  double total = 0;
  for (std::size_t i = 0; i + 1 < ch.path.size(); ++i) total += (ch.path[i + 1] - ch.path[i]).norm();
  const double keep = ch.anchor ? std::max(0.0, total - ch.anchor->setback) : total;

  double run = 0;
  Vec3 end = ch.path.front();
  Vec3 tangent = Vec3::UnitX();
  for (std::size_t i = 0; i + 1 < ch.path.size(); ++i) {
    const Vec3 a = ch.path[i];
    const Vec3 b = ch.path[i + 1];
    const double len = (b - a).norm();
    if (len <= 0) continue;
    tangent = (b - a) / len;
    if (run + len >= keep) {
      end = a + (keep - run) * tangent;
      if (keep - run > 0) out.push_back({{a, end}, ch.radius});
      break;
    }
    out.push_back({{a, b}, ch.radius});
    run += len;
    end = b;
  }
  if (ch.anchor) {
    const double r = ch.anchor->bar_radius > 0 ? ch.anchor->bar_radius : ch.radius;
    const Vec3 half = 0.5 * ch.anchor->bar_length * bar_axis(tangent);
    out.push_back({{end - half, end + half}, r});
  }
  return out;
}

// --- SdfScene -----------------------------------------------------------------

std::size_t SdfScene::KeyHash::operator()(const Vec3i& k) const noexcept {
  return static_cast<std::size_t>(k.x()) * 73856093u ^ static_cast<std::size_t>(k.y()) * 19349663u ^
         static_cast<std::size_t>(k.z()) * 83492791u;
}

SdfScene::SdfScene(LatticeGraph graph, double blend_radius, std::vector<Channel> channels)
    : graph_(std::move(graph)), blend_(blend_radius), channels_(std::move(channels)) {
  if (!(blend_ >= 0)) throw Error(kModule, "blend radius must be non-negative");
  for (const auto& s : graph_.struts)
    if (!(s.radius > 0)) throw Error(kModule, "strut radius must be positive");
  for (const auto& ch : channels_) {
    if (!(ch.radius > 0)) throw Error(kModule, "channel radius must be positive");
    if (ch.path.size() < 2) throw Error(kModule, "channel path needs at least two points");
    for (const auto& [seg, r] : channel_segments(ch)) cuts_.push_back({seg[0], seg[1], r});
  }

  band_ = 1.0 + 2.0 * blend_;
  if (graph_.struts.empty()) return;
  double mean_len = 0;
  for (const auto& s : graph_.struts) mean_len += graph_.length(s);
  mean_len /= static_cast<double>(graph_.struts.size());
  cell_ = std::max(mean_len, 0.25);
  origin_ = bounds().min() - Vec3::Constant(band_);

  auto key = [&](const Vec3& p) {
    return ((p - origin_) / cell_).array().floor().cast<int>().matrix().eval();
  };
  for (std::size_t s = 0; s < graph_.struts.size(); ++s) {
    const auto& st = graph_.struts[s];
    Box3 box;
    box.extend(graph_.nodes[st.a]);
    box.extend(graph_.nodes[st.b]);
    const double pad = st.radius + band_;
    const Vec3i lo = key(box.min() - Vec3::Constant(pad));
    const Vec3i hi = key(box.max() + Vec3::Constant(pad));
    for (int x = lo.x(); x <= hi.x(); ++x)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int z = lo.z(); z <= hi.z(); ++z) buckets_[Vec3i(x, y, z)].push_back(static_cast<int>(s));
  }
}

Box3 SdfScene::bounds() const {
  Box3 box;
  for (const auto& s : graph_.struts) {
    const Vec3 r = Vec3::Constant(s.radius);
    box.extend(graph_.nodes[s.a] - r);
    box.extend(graph_.nodes[s.a] + r);
    box.extend(graph_.nodes[s.b] - r);
    box.extend(graph_.nodes[s.b] + r);
  }
  return box;
}

double SdfScene::min_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& s : graph_.struts) r = std::min(r, s.radius);
  return r;
}

const std::vector<int>* SdfScene::bucket(const Vec3& p) const {
  const Vec3i k = ((p - origin_) / cell_).array().floor().cast<int>().matrix();
  auto it = buckets_.find(k);
  return it == buckets_.end() ? nullptr : &it->second;
}

double SdfScene::lattice_distance(const Vec3& p, const std::vector<int>* candidates) const {
  double d = std::numeric_limits<double>::infinity();
  auto visit = [&](const Strut& s) {
    const double ds = capsule_sdf(p, graph_.nodes[s.a], graph_.nodes[s.b], s.radius);
    d = (blend_ > 0 && std::isfinite(d)) ? smooth_min(d, ds, blend_) : std::min(d, ds);
  };
  if (candidates)
    for (int s : *candidates) visit(graph_.struts[s]);
  else
    for (const auto& s : graph_.struts) visit(s);
  return d;
}

double SdfScene::channel_distance(const Vec3& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : cuts_) d = std::min(d, capsule_sdf(p, c.a, c.b, c.r));
  return d;
}

double SdfScene::eval_bounded(const Vec3& p) const {
  const auto* cand = bucket(p);
  double d = cand ? lattice_distance(p, cand) : band_;
  if (!cuts_.empty()) d = std::max(d, -channel_distance(p));
  return d;
}

double SdfScene::eval(const Vec3& p) const {
  const auto* cand = bucket(p);
  double d = cand ? lattice_distance(p, cand) : band_;
  if (d >= band_) d = lattice_distance(p, nullptr);
  if (!cuts_.empty()) d = std::max(d, -channel_distance(p));
  return d;
}

double eval_sdf(const SdfScene& scene, const Vec3& p) { return scene.eval(p); }

// --- marching tetrahedra ------------------------------------------------------

namespace {

// Cube corner c sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
Vec3i corner_offset(int c) { return {c & 1, (c >> 1) & 1, (c >> 2) & 1}; }

// Six tetrahedra along the 0-7 diagonal, each positively oriented.
std::array<std::array<int, 4>, 6> make_tets() {
  std::array<std::array<int, 4>, 6> tets{};
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int t = 0; t < 6; ++t) {
    const int a = 1 << perms[t][0];
    const int b = a | (1 << perms[t][1]);
    tets[t] = {0, a, b, 7};
    const Vec3 p0 = corner_offset(tets[t][0]).cast<double>();
    const Vec3 e1 = corner_offset(tets[t][1]).cast<double>() - p0;
    const Vec3 e2 = corner_offset(tets[t][2]).cast<double>() - p0;
    const Vec3 e3 = corner_offset(tets[t][3]).cast<double>() - p0;
    if (e1.dot(e2.cross(e3)) < 0) std::swap(tets[t][2], tets[t][3]);
  }
  return tets;
}

bool even(const std::array<int, 4>& perm) {
  int inversions = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) inversions += perm[i] > perm[j];
  return inversions % 2 == 0;
}

struct EdgeKey {
  std::uint64_t a, b;
  bool operator==(const EdgeKey&) const = default;
};
struct EdgeHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    return std::hash<std::uint64_t>()(k.a * 0x9E3779B97F4A7C15ull ^ k.b);
  }
};
using EdgeMap = std::unordered_map<EdgeKey, int, EdgeHash>;

}  // namespace

TriMesh march_field(const std::function<double(const Vec3&)>& f, const Box3& bounds,
                    double h) {
  if (!(h > 0)) throw Error(kModule, "cell size must be positive");
  if (bounds.isEmpty()) return {};
  static const auto tets = make_tets();

  const Vec3 lo = (bounds.min() / h).array().floor().matrix() * h;
  const Vec3 hi = (bounds.max() / h).array().ceil().matrix() * h;
  Vec3i n;
  for (int a = 0; a < 3; ++a)
    n[a] = std::max(2, static_cast<int>(std::llround((hi[a] - lo[a]) / h)) + 1);
  const std::int64_t nx = n.x();
  const std::int64_t ny = n.y();
  const std::int64_t nz = n.z();
  auto point = [&](std::int64_t i, std::int64_t j, std::int64_t k) {
    return Vec3(lo.x() + h * static_cast<double>(i), lo.y() + h * static_cast<double>(j),
                lo.z() + h * static_cast<double>(k));
  };

  auto sample_plane = [&](std::int64_t k, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(nx * ny));
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t j) {
      for (std::int64_t i = 0; i < nx; ++i) out[j * nx + i] = f(point(i, j, k));
    });
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < nx; ++i) {
        const bool border = k == 0 || k == nz - 1 || j == 0 || j == ny - 1 || i == 0 || i == nx - 1;
        if (border && !(out[j * nx + i] > 0))
          throw Error(kModule, "bounds too tight: material reaches the sampling boundary");
      }
  };

  TriMesh mesh;
  std::array<std::vector<double>, 2> planes;
  sample_plane(0, planes[0]);
  EdgeMap prev_edges, next_edges, cross_edges;

  for (std::int64_t k = 0; k + 1 < nz; ++k) {
    sample_plane(k + 1, planes[1]);
    auto value = [&](std::int64_t i, std::int64_t j, std::int64_t dk) {
      return planes[dk][j * nx + i];
    };
    auto gid = [&](std::int64_t i, std::int64_t j, std::int64_t kk) {
      return static_cast<std::uint64_t>((kk * ny + j) * nx + i);
    };

    for (std::int64_t j = 0; j + 1 < ny; ++j)
      for (std::int64_t i = 0; i + 1 < nx; ++i) {
        std::array<double, 8> v;
        int inside = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = value(i + (c & 1), j + ((c >> 1) & 1), (c >> 2) & 1);
          inside += v[c] < 0;
        }
        if (inside == 0 || inside == 8) continue;

        auto vertex = [&](int ca, int cb) {
          const Vec3i oa = corner_offset(ca);
          const Vec3i ob = corner_offset(cb);
          std::uint64_t ga = gid(i + oa.x(), j + oa.y(), k + oa.z());
          std::uint64_t gb = gid(i + ob.x(), j + ob.y(), k + ob.z());
          if (ga > gb) {
            std::swap(ga, gb);
            std::swap(ca, cb);
          }
          EdgeMap& map = corner_offset(ca).z() != corner_offset(cb).z()
                             ? cross_edges
                             : (corner_offset(ca).z() == 0 ? prev_edges : next_edges);
          auto [it, fresh] = map.try_emplace(EdgeKey{ga, gb}, static_cast<int>(mesh.vertices.size()));
          if (fresh) {
            const Vec3i a = corner_offset(ca);
            const Vec3i b = corner_offset(cb);
            const double fa = v[ca];
            const double fb = v[cb];
            const double t = std::clamp(fa / (fa - fb), 1e-3, 1.0 - 1e-3);
            const Vec3 pa = point(i + a.x(), j + a.y(), k + a.z());
            const Vec3 pb = point(i + b.x(), j + b.y(), k + b.z());
            mesh.vertices.push_back(pa + t * (pb - pa));
          }
          return it->second;
        };

        for (const auto& tet : tets) {
          std::array<int, 4> in{}, out{};
          int ni = 0, no = 0;
          for (int q = 0; q < 4; ++q) (v[tet[q]] < 0 ? in[ni++] : out[no++]) = q;
          if (ni == 0 || ni == 4) continue;
          auto e = [&](int qa, int qb) { return vertex(tet[qa], tet[qb]); };
          if (ni == 1 || ni == 3) {
            const int apex = ni == 1 ? in[0] : out[0];
            std::array<int, 4> perm{apex, 0, 0, 0};
            int m = 1;
            for (int q = 0; q < 4; ++q)
              if (q != apex) perm[m++] = q;
            if (!even(perm)) std::swap(perm[2], perm[3]);
            if (ni == 1)
              mesh.triangles.push_back({e(apex, perm[1]), e(apex, perm[2]), e(apex, perm[3])});
            else
              mesh.triangles.push_back({e(apex, perm[1]), e(apex, perm[3]), e(apex, perm[2])});
          } else {
            int i1 = in[0], i2 = in[1], o1 = out[0], o2 = out[1];
            if (!even({i1, i2, o1, o2})) std::swap(o1, o2);
            const int q0 = e(i1, o1), q1 = e(i1, o2), q2 = e(i2, o2), q3 = e(i2, o1);
            mesh.triangles.push_back({q0, q1, q2});
            mesh.triangles.push_back({q0, q2, q3});
          }
        }
      }

    std::swap(planes[0], planes[1]);
    prev_edges = std::move(next_edges);
    next_edges.clear();
    cross_edges.clear();
  }
  return mesh;
}

double default_cell_size(const SdfScene& scene) {
  return scene.empty() ? 1.0 : scene.min_radius();
}

TriMesh march(const SdfScene& scene, const Box3& bounds, double h) {
  if (!(h > 0)) throw Error(kModule, "cell size must be positive");
  if (scene.empty()) return {};
  // Values beyond the band are capped, which only matters for interpolation
  // along edges longer than the band.
  if (std::sqrt(3.0) * h < scene.near_band())
    return march_field([&](const Vec3& p) { return scene.eval_bounded(p); }, bounds, h);
  return march_field([&](const Vec3& p) { return scene.eval(p); }, bounds, h);
}

TriMesh march(const SdfScene& scene, double h) {
  if (scene.empty()) return {};
  Box3 box = scene.bounds();
  box.min().array() -= 3 * h;
  box.max().array() += 3 * h;
  return march(scene, box, h);
}

// --- gap measurement ----------------------------------------------------------

double measure_min_gap(const SdfScene& scene, double density, double search_range) {
  if (!(density > 0)) throw Error(kModule, "sample density must be positive");
  const auto& g = scene.graph();
  const GapExemption joined(g);
  const double step = 1.0 / density;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t si = 0; si < g.struts.size(); ++si) {
    const Strut& s = g.struts[si];
    const Vec3 s0 = g.nodes[s.a], s1 = g.nodes[s.b];
    for (std::size_t ti = si + 1; ti < g.struts.size(); ++ti) {
      const Strut& t = g.struts[ti];
      if (joined(s, t)) continue;
      const Vec3 t0 = g.nodes[t.a], t1 = g.nodes[t.b];
      const auto cp = segment_segment_closest(s0, s1, t0, t1);
      if (cp.distance - s.radius - t.radius > search_range) continue;
      if (cp.distance <= 0) {
        best = 0;
        continue;
      }
      Vec3 pa = s0 + cp.s * (s1 - s0);
      Vec3 pb = t0 + cp.t * (t1 - t0);
      const Vec3 ds = s1 - s0, dt = t1 - t0;
      if (ds.cross(dt).norm() <= 1e-6 * ds.norm() * dt.norm()) {
        // Parallel: the closest pair is not unique, take the middle of the
        // overlap rather than an end where other struts join.
        const double u0 = (t0 - s0).dot(ds) / ds.squaredNorm();
        const double u1 = (t1 - s0).dot(ds) / ds.squaredNorm();
        const double lo = std::max(0.0, std::min(u0, u1)), hi = std::min(1.0, std::max(u0, u1));
        if (lo <= hi) {
          pa = s0 + 0.5 * (lo + hi) * ds;
          pb = t0 + closest_segment_parameter(pa, t0, t1) * dt;
        }
      }
      const double length = (pb - pa).norm();
      const Vec3 dir = (pb - pa) / length;
      auto sdf = [&](double u) { return scene.eval(pa + u * dir); };
      auto bisect = [&](double in, double out) {
        for (int it = 0; it < 60 && std::abs(out - in) > 1e-9; ++it) {
          const double mid = 0.5 * (in + out);
          (sdf(mid) > 0 ? out : in) = mid;
        }
        return 0.5 * (in + out);
      };
      // First air interval leaving strut s along the line.
      double exit = -1;
      for (double u = 0; u <= length + step; u += step)
        if (sdf(std::min(u, length)) > 0) {
          exit = bisect(std::max(0.0, u - step), std::min(u, length));
          break;
        }
      if (exit < 0) continue;  // bridged by other material, no opening here
      double entry = -1;
      for (double u = exit + step; u <= length + step; u += step)
        if (!(sdf(std::min(u, length)) > 0)) {
          entry = bisect(std::min(u, length), u - step);
          break;
        }
      if (entry < 0) continue;
      // Only an opening bounded by s and t themselves; anything else in the
      // way is measured through its own pairs.
      const Vec3 pe = pa + exit * dir, pf = pa + entry * dir;
      if (std::abs(capsule_sdf(pe, s0, s1, s.radius)) > step || std::abs(capsule_sdf(pf, t0, t1, t.radius)) > step)
        continue;
      best = std::min(best, entry - exit);
    }
  }
  return best;
}

void write_sdf_grid(std::ostream& out, const SdfScene& scene, const Box3& bounds, double h) {
  if (!(h > 0)) throw Error(kModule, "grid spacing must be positive");
  Vec3i n;
  for (int a = 0; a < 3; ++a)
    n[a] = std::max(1, static_cast<int>(std::ceil(bounds.sizes()[a] / h - 1e-9)) + 1);
  out << "dims " << n.x() << ' ' << n.y() << ' ' << n.z() << " spacing " << h << " origin "
      << bounds.min().x() << ' ' << bounds.min().y() << ' ' << bounds.min().z() << '\n';
  std::vector<float> row(n.x());
  for (int k = 0; k < n.z(); ++k)
    for (int j = 0; j < n.y(); ++j) {
      for (int i = 0; i < n.x(); ++i)
        row[i] = static_cast<float>(scene.eval(bounds.min() + h * Vec3(i, j, k)));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
}

}  // namespace gradlattice
