#include <gradlattice/distance.hpp>
#include <gradlattice/lattice.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gradlattice {

namespace {

constexpr const char* kModule = "lattice-builder";

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

LatticeGraph populate(std::span<const Vec3i> voxels, const Vec3& origin, double voxel_size,
                      const UnitCell& cell) {
  LatticeGraph graph;
  PointWelder welder(kWeldTolerance);
  std::unordered_set<std::uint64_t> seen;
  std::vector<int> local(cell.nodes.size());
  for (const auto& ijk : voxels) {
    const Vec3 corner = origin + voxel_size * ijk.cast<double>();
    for (std::size_t n = 0; n < cell.nodes.size(); ++n)
      local[n] = welder.insert(corner + voxel_size * cell.nodes[n]);
    for (const auto& [a, b] : cell.struts) {
      const int ga = local[a];
      const int gb = local[b];
      if (seen.insert(pair_key(ga, gb)).second) graph.struts.push_back({ga, gb, 0.0});
    }
  }
  graph.nodes = welder.release();
  return graph;
}

LatticeGraph populate(const VoxelGrid& grid, const UnitCell& cell) {
  const auto voxels = occupied_indices(grid);
  return populate(voxels, grid.origin, grid.voxel_size, cell);
}

LatticeGraph trim_to_solid(const LatticeGraph& graph, const SolidQuery& solid) {
  const auto inside = solid.contains(graph.nodes);
  return filter_struts(graph, [&](std::size_t s) {
    return inside[graph.struts[s].a] || inside[graph.struts[s].b];
  });
}

void write_lattice(std::ostream& out, const LatticeGraph& graph) {
  char line[160];
  for (const auto& p : graph.nodes) {
    std::snprintf(line, sizeof line, "n %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << line;
  }
  for (const auto& s : graph.struts) {
    std::snprintf(line, sizeof line, "s %d %d %.9g\n", s.a, s.b, s.radius);
    out << line;
  }
}

// --- RadiusField --------------------------------------------------------------

RadiusField RadiusField::constant(double radius) {
  if (!(radius >= kPrintFloorRadius - 1e-12))
    throw Error(kModule, "radius " + std::to_string(radius) + " mm is below the 0.2 mm print floor");
  RadiusField f;
  f.mode_ = Mode::constant;
  f.r_min_ = f.r_max_ = radius;
  return f;
}

RadiusField RadiusField::linear(std::vector<ControlPlane> planes, double r_min, double r_max) {
  if (!(r_min >= kPrintFloorRadius - 1e-12))
    throw Error(kModule, "r_min " + std::to_string(r_min) + " mm is below the 0.2 mm print floor");
  if (!(r_max >= r_min)) throw Error(kModule, "r_max must not be smaller than r_min");
  if (planes.empty()) throw Error(kModule, "linear radius field needs at least one control plane");
  for (auto& p : planes) {
    if (p.normal.norm() < 1e-12) throw Error(kModule, "control plane with zero normal");
    p.normal.normalize();
    if (p.radius < r_min - 1e-12 || p.radius > r_max + 1e-12)
      throw Error(kModule, "control radius outside [r_min, r_max]");
  }
  RadiusField f;
  f.mode_ = Mode::linear_between_planes;
  f.r_min_ = r_min;
  f.r_max_ = r_max;
  f.planes_ = std::move(planes);
  return f;
}

double RadiusField::operator()(const Vec3& p) const {
  if (mode_ == Mode::constant) return r_min_;
  const std::size_t m = planes_.size();
  std::vector<double> d(m);
  for (std::size_t i = 0; i < m; ++i) d[i] = planes_[i].normal.dot(p - planes_[i].point);

  double r;
  if (d[0] <= 0) {
    r = planes_[0].radius;
  } else if (d[m - 1] >= 0) {
    r = planes_[m - 1].radius;
  } else {
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < m; ++i)
      if (std::abs(d[i]) < std::abs(d[nearest])) nearest = i;
    r = planes_[nearest].radius;
    for (std::size_t i = 0; i + 1 < m; ++i)
      if (d[i] >= 0 && d[i + 1] <= 0) {
        const double span = d[i] - d[i + 1];
        const double t = span > 0 ? d[i] / span : 0.0;
        r = planes_[i].radius + t * (planes_[i + 1].radius - planes_[i].radius);
        break;
      }
  }
  return std::clamp(r, r_min_, r_max_);
}

LatticeGraph apply_radius_field(const LatticeGraph& graph, const RadiusField& field) {
  LatticeGraph out = graph;
  for (auto& s : out.struts) s.radius = field(graph.midpoint(s));
  return out;
}

LatticeGraph with_uniform_radius(LatticeGraph graph, double radius) {
  for (auto& s : graph.struts) s.radius = radius;
  return graph;
}

// --- printability -------------------------------------------------------------

GapExemption::GapExemption(const LatticeGraph& graph) : graph_(&graph) {
  for (const auto& s : graph.struts) {
    adjacent_.insert(pair_key(s.a, s.b));
    lengths_.push_back(graph.length(s));
    lengths_.push_back(std::sqrt(2.0) * graph.length(s));
  }
  std::sort(lengths_.begin(), lengths_.end());
  lengths_.erase(std::unique(lengths_.begin(), lengths_.end(),
                             [](double a, double b) { return b - a <= kLengthTolerance * b; }),
                 lengths_.end());
}

bool GapExemption::operator()(const Strut& s, const Strut& t) const {
  const auto& g = *graph_;
  for (int u : {s.a, s.b})
    for (int v : {t.a, t.b}) {
      if (u == v || adjacent_.contains(pair_key(u, v))) return true;
      // ends one strut or one square diagonal apart
      const double d = (g.nodes[u] - g.nodes[v]).norm();
      auto it = std::lower_bound(lengths_.begin(), lengths_.end(), d * (1 - kLengthTolerance));
      if (it != lengths_.end() && *it <= d * (1 + kLengthTolerance)) return true;
    }
  return false;
}

PrintabilityReport validate_printability(const LatticeGraph& graph, double min_radius_mm,
                                         double min_gap_mm) {
  PrintabilityReport report;
  report.min_radius = min_radius_mm;
  report.min_gap = min_gap_mm;
  if (graph.struts.empty()) return report;

  for (std::size_t s = 0; s < graph.struts.size(); ++s) {
    report.smallest_radius = std::min(report.smallest_radius, graph.struts[s].radius);
    if (graph.struts[s].radius < min_radius_mm - 1e-9) report.thin_struts.push_back(static_cast<int>(s));
  }

  const GapExemption exempt(graph);

  // Uniform bucket grid over strut boxes inflated by radius + half the gap.
  double max_len = 0;
  std::vector<Box3> boxes(graph.struts.size());
  for (std::size_t s = 0; s < graph.struts.size(); ++s) {
    const auto& st = graph.struts[s];
    const double pad = st.radius + 0.5 * min_gap_mm;
    boxes[s].extend(graph.nodes[st.a]);
    boxes[s].extend(graph.nodes[st.b]);
    boxes[s].min().array() -= pad;
    boxes[s].max().array() += pad;
    max_len = std::max(max_len, boxes[s].sizes().maxCoeff());
  }
  const double cell = std::max(max_len, 1e-3);
  Box3 all;
  for (const auto& b : boxes) all.extend(b);
  auto bucket_of = [&](const Vec3& p) {
    return ((p - all.min()) / cell).array().floor().cast<int>().matrix().eval();
  };
  struct KeyHash {
    std::size_t operator()(const Eigen::Vector3i& k) const noexcept {
      return static_cast<std::size_t>(k.x()) * 73856093u ^ static_cast<std::size_t>(k.y()) * 19349663u ^
             static_cast<std::size_t>(k.z()) * 83492791u;
    }
  };
  std::unordered_map<Eigen::Vector3i, std::vector<int>, KeyHash> buckets;
  for (std::size_t s = 0; s < boxes.size(); ++s) {
    const Eigen::Vector3i lo = bucket_of(boxes[s].min());
    const Eigen::Vector3i hi = bucket_of(boxes[s].max());
    for (int x = lo.x(); x <= hi.x(); ++x)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int z = lo.z(); z <= hi.z(); ++z) buckets[{x, y, z}].push_back(static_cast<int>(s));
  }

  const double gap_floor = min_gap_mm - 2.0 * kRadiusRounding;
  std::vector<int> stamp(graph.struts.size(), -1);
  for (std::size_t s = 0; s < graph.struts.size(); ++s) {
    const Eigen::Vector3i lo = bucket_of(boxes[s].min());
    const Eigen::Vector3i hi = bucket_of(boxes[s].max());
    const Strut& a = graph.struts[s];
    for (int x = lo.x(); x <= hi.x(); ++x)
      for (int y = lo.y(); y <= hi.y(); ++y)
        for (int z = lo.z(); z <= hi.z(); ++z) {
          auto it = buckets.find({x, y, z});
          if (it == buckets.end()) continue;
          for (int t : it->second) {
            if (t <= static_cast<int>(s) || stamp[t] == static_cast<int>(s)) continue;
            stamp[t] = static_cast<int>(s);
            if (!boxes[s].intersects(boxes[t])) continue;
            const Strut& b = graph.struts[t];
            if (exempt(a, b)) continue;
            const double gap = segment_segment_closest(graph.nodes[a.a], graph.nodes[a.b],
                                                       graph.nodes[b.a], graph.nodes[b.b])
                                   .distance -
                               a.radius - b.radius;
            report.smallest_gap = std::min(report.smallest_gap, gap);
            if (gap < gap_floor)
              report.gap_violations.push_back({static_cast<int>(s), t, gap});
          }
        }
  }
  report.pass = report.thin_struts.empty() && report.gap_violations.empty();
  return report;
}

std::string PrintabilityReport::summary() const {
  std::ostringstream out;
  char line[200];
  out << "printability: " << (pass ? "PASS" : "FAIL") << '\n';
  std::snprintf(line, sizeof line, "  min radius %.3f mm, smallest strut radius %.4f mm, %zu thin struts\n",
                min_radius, smallest_radius, thin_struts.size());
  out << line;
  if (std::isfinite(smallest_gap))
    std::snprintf(line, sizeof line, "  min gap %.3f mm, smallest gap %.4f mm, %zu gap violations\n",
                  min_gap, smallest_gap, gap_violations.size());
  else
    std::snprintf(line, sizeof line, "  min gap %.3f mm, no strut pairs within range, %zu gap violations\n",
                  min_gap, gap_violations.size());
  out << line;
  const std::size_t shown = std::min<std::size_t>(thin_struts.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out << "  thin strut " << thin_struts[i] << '\n';
  const std::size_t gshown = std::min<std::size_t>(gap_violations.size(), 10);
  for (std::size_t i = 0; i < gshown; ++i) {
    std::snprintf(line, sizeof line, "  gap %.4f mm between struts %d and %d\n", gap_violations[i].gap,
                  gap_violations[i].strut_a, gap_violations[i].strut_b);
    out << line;
  }
  return out.str();
}

}  // namespace gradlattice
