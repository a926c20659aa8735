#include <gradlattice/cell_catalog.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

namespace gradlattice {

namespace {

constexpr const char* kModule = "cell-catalog";
constexpr double kTol = 1e-12;
constexpr double kPlaneTol = 1e-9;

class CellBuilder {
 public:
  explicit CellBuilder(CellKind kind) { cell_.kind = kind; }

  int node(const Vec3& p) {
    for (std::size_t i = 0; i < cell_.nodes.size(); ++i)
      if ((cell_.nodes[i] - p).norm() < 1e-9) return static_cast<int>(i);
    cell_.nodes.push_back(p);
    return static_cast<int>(cell_.nodes.size()) - 1;
  }

  void strut(const Vec3& a, const Vec3& b) {
    int i = node(a);
    int j = node(b);
    if (i > j) std::swap(i, j);
    if (std::find(cell_.struts.begin(), cell_.struts.end(), StrutIndex{i, j}) == cell_.struts.end())
      cell_.struts.push_back({i, j});
  }

  UnitCell take() { return std::move(cell_); }

 private:
  UnitCell cell_;
};

std::vector<Vec3> cube_corners() {
  std::vector<Vec3> out;
  for (int x = 0; x <= 1; ++x)
    for (int y = 0; y <= 1; ++y)
      for (int z = 0; z <= 1; ++z) out.emplace_back(x, y, z);
  return out;
}

std::vector<Vec3> face_centers() {
  std::vector<Vec3> out;
  for (int a = 0; a < 3; ++a)
    for (int s = 0; s <= 1; ++s) {
      Vec3 p = Vec3::Constant(0.5);
      p[a] = s;
      out.push_back(p);
    }
  return out;
}

bool is_cube_edge(const Vec3& a, const Vec3& b) {
  return std::abs((a - b).norm() - 1.0) < 1e-12 && ((a - b).array().abs() > 0.5).count() == 1;
}

bool on_face(const Vec3& corner, const Vec3& face_center) {
  for (int a = 0; a < 3; ++a)
    if (face_center[a] == 0.0 || face_center[a] == 1.0) return corner[a] == face_center[a];
  return false;
}

UnitCell make_cell(CellKind kind) {
  CellBuilder b(kind);
  const Vec3 center = Vec3::Constant(0.5);
  const auto corners = cube_corners();
  const auto faces = face_centers();
  switch (kind) {
    case CellKind::BC:
    case CellKind::BCCubic:
      for (const auto& c : corners) b.node(c);
      b.node(center);
      for (const auto& c : corners) b.strut(c, center);
      if (kind == CellKind::BCCubic)
        for (std::size_t i = 0; i < corners.size(); ++i)
          for (std::size_t j = i + 1; j < corners.size(); ++j)
            if (is_cube_edge(corners[i], corners[j])) b.strut(corners[i], corners[j]);
      break;
    case CellKind::VertexOcta:
    case CellKind::EdgeOcta:
      for (const auto& f : faces) b.node(f);
      for (std::size_t i = 0; i < faces.size(); ++i)
        for (std::size_t j = i + 1; j < faces.size(); ++j)
          if ((faces[i] - faces[j]).norm() < 1.0 - 1e-9) b.strut(faces[i], faces[j]);
      if (kind == CellKind::EdgeOcta)
        for (const auto& f : faces)
          for (const auto& c : corners)
            if (on_face(c, f)) b.strut(f, c);
      break;
    case CellKind::TruncOcta: {
      std::vector<Vec3> verts;
      const std::array<std::array<int, 3>, 6> perms{
          {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
      for (const auto& perm : perms)
        for (int s1 : {-1, 1})
          for (int s2 : {-1, 1}) {
            const std::array<double, 3> v{0.0, 0.25 * s1, 0.5 * s2};
            Vec3 p;
            for (int a = 0; a < 3; ++a) p[perm[a]] = 0.5 + v[a];
            verts.push_back(p);
          }
      const double edge = std::sqrt(2.0) / 4.0;
      for (const auto& v : verts) b.node(v);
      for (std::size_t i = 0; i < verts.size(); ++i)
        for (std::size_t j = i + 1; j < verts.size(); ++j)
          if (std::abs((verts[i] - verts[j]).norm() - edge) < 1e-9) b.strut(verts[i], verts[j]);
      break;
    }
    case CellKind::Tetrahedral:
      for (const auto& c : corners) b.node(c);
      for (const auto& f : faces) b.node(f);
      b.node(center);
      for (std::size_t i = 0; i < corners.size(); ++i)
        for (std::size_t j = i + 1; j < corners.size(); ++j)
          if (is_cube_edge(corners[i], corners[j])) b.strut(corners[i], corners[j]);
      for (const auto& f : faces)
        for (const auto& c : corners)
          if (on_face(c, f)) b.strut(f, c);
      for (const auto& f : faces) b.strut(center, f);
      for (const auto& c : corners) b.strut(center, c);
      break;
  }
  return b.take();
}

int find_node(const std::vector<Vec3>& nodes, const Vec3& p) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if ((nodes[i] - p).norm() < 1e-9) return static_cast<int>(i);
  return -1;
}

// --- planar loop detection --------------------------------------------------

struct Plane {
  Vec3 normal;
  double offset;
};

std::optional<Plane> fit_plane(const std::vector<Vec3>& pts) {
  Vec3 n = Vec3::Zero();  // Newell
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3& a = pts[i];
    const Vec3& b = pts[(i + 1) % pts.size()];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  if (n.norm() < 1e-12) return std::nullopt;
  n.normalize();
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  for (const auto& p : pts)
    if (std::abs(n.dot(p - c)) > kPlaneTol) return std::nullopt;
  return Plane{n, n.dot(c)};
}

bool strictly_convex(const std::vector<Vec3>& pts, const Vec3& normal) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 e0 = pts[(i + 1) % n] - pts[i];
    const Vec3 e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
    if (e0.cross(e1).dot(normal) <= 1e-12) return false;
  }
  return true;
}

bool strictly_inside_convex(const Vec3& p, const std::vector<Vec3>& pts, const Vec3& normal) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 e = pts[(i + 1) % n] - pts[i];
    if (e.cross(p - pts[i]).dot(normal) <= 1e-12) return false;
  }
  return true;
}

double line_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = (b - a).normalized();
  return ((p - a) - d.dot(p - a) * d).norm();
}

double polygon_inradius(const std::vector<Vec3>& pts, const Vec3& center) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    r = std::min(r, line_distance(center, pts[i], pts[(i + 1) % pts.size()]));
  return r;
}

std::optional<FaceShape> shape_for(std::size_t corners) {
  switch (corners) {
    case 4: return FaceShape::square;
    case 6: return FaceShape::hexagon;
    case 8: return FaceShape::octagon;
    default: return std::nullopt;
  }
}

std::vector<CellFace> strut_loops(const UnitCell& cell) {
  const int n = static_cast<int>(cell.nodes.size());
  std::vector<std::vector<int>> adj(n);
  std::map<std::pair<int, int>, int> strut_of;
  for (std::size_t s = 0; s < cell.struts.size(); ++s) {
    const auto [a, b] = cell.struts[s];
    adj[a].push_back(b);
    adj[b].push_back(a);
    strut_of[{std::min(a, b), std::max(a, b)}] = static_cast<int>(s);
  }
  for (auto& l : adj) std::sort(l.begin(), l.end());
  auto strut_between = [&](int a, int b) {
    auto it = strut_of.find({std::min(a, b), std::max(a, b)});
    return it == strut_of.end() ? -1 : it->second;
  };

  std::vector<CellFace> faces;
  std::vector<int> path;
  std::vector<char> on_path(n, 0);

  auto accept = [&](const std::vector<int>& cycle) {
    const std::size_t len = cycle.size();
    auto shape = shape_for(len);
    if (!shape) return;
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = i + 2; j < len; ++j) {
        if (i == 0 && j == len - 1) continue;
        if (strut_between(cycle[i], cycle[j]) >= 0) return;  // chord
      }
    std::vector<Vec3> pts;
    for (int v : cycle) pts.push_back(cell.nodes[v]);
    auto plane = fit_plane(pts);
    if (!plane || !strictly_convex(pts, plane->normal)) return;
    for (int v = 0; v < n; ++v) {
      if (std::find(cycle.begin(), cycle.end(), v) != cycle.end()) continue;
      const Vec3& p = cell.nodes[v];
      if (std::abs(plane->normal.dot(p) - plane->offset) < kPlaneTol &&
          strictly_inside_convex(p, pts, plane->normal))
        return;
    }
    CellFace face{*shape, pts, {}, 0.0, false};
    for (std::size_t i = 0; i < len; ++i) face.struts.push_back(strut_between(cycle[i], cycle[(i + 1) % len]));
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    face.inradius = polygon_inradius(pts, c / static_cast<double>(len));
    faces.push_back(std::move(face));
  };

  // Simple cycles up to length 8 with the smallest vertex first; each cycle
  // is reported once by requiring path[1] < path.back().
  auto dfs = [&](auto&& self, int start, int v) -> void {
    for (int w : adj[v]) {
      if (w == start && path.size() >= 3 && path[1] < path.back()) accept(path);
      if (w <= start || on_path[w] || path.size() >= 8) continue;
      path.push_back(w);
      on_path[w] = 1;
      self(self, start, w);
      on_path[w] = 0;
      path.pop_back();
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    on_path[s] = 1;
    dfs(dfs, s, s);
    on_path[s] = 0;
  }
  return faces;
}

// Openings centered on cube-face corners of the tiled lattice. For each axis
// the face plane is tiled with the in-plane neighbours; the nodes nearest the
// corner bound the opening. Accepted when at least half its sides are struts.
std::vector<CellFace> corner_openings(const UnitCell& cell) {
  std::vector<CellFace> out;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    std::vector<Vec3> pts;
    std::vector<int> source;
    std::vector<Eigen::Vector2i> shift;
    // Nodes on the opposite face are translates of these (tiling invariant).
    for (std::size_t i = 0; i < cell.nodes.size(); ++i) {
      if (std::abs(cell.nodes[i][axis]) > kTol) continue;
      for (int du = -1; du <= 1; ++du)
        for (int dv = -1; dv <= 1; ++dv) {
          Vec3 p = cell.nodes[i];
          p[u] += du;
          p[v] += dv;
          pts.push_back(p);
          source.push_back(static_cast<int>(i));
          shift.emplace_back(du, dv);
        }
    }
    if (pts.empty()) continue;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, p.norm());
    if (best < 1e-9) continue;  // the corner is itself a node
    std::vector<std::size_t> ring;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs(pts[i].norm() - best) < 1e-9) ring.push_back(i);
    if (ring.size() < 3) continue;
    std::sort(ring.begin(), ring.end(), [&](std::size_t a, std::size_t b) {
      return std::atan2(pts[a][v], pts[a][u]) < std::atan2(pts[b][v], pts[b][u]);
    });
    auto shape = shape_for(ring.size());
    if (!shape) continue;

    CellFace face{*shape, {}, {}, 0.0, true};
    for (auto i : ring) face.polygon.push_back(pts[i]);
    const std::size_t len = ring.size();
    for (std::size_t k = 0; k < len; ++k) {
      // A side is a strut when both ends come from one translated copy.
      if (shift[ring[k]] != shift[ring[(k + 1) % len]]) continue;
      int na = source[ring[k]];
      int nb = source[ring[(k + 1) % len]];
      for (std::size_t s = 0; s < cell.struts.size(); ++s) {
        const auto [sa, sb] = cell.struts[s];
        if ((sa == na && sb == nb) || (sa == nb && sb == na)) {
          face.struts.push_back(static_cast<int>(s));
          break;
        }
      }
    }
    if (2 * face.struts.size() < len) continue;
    face.inradius = polygon_inradius(face.polygon, Vec3::Zero());
    out.push_back(std::move(face));
  }
  return out;
}

}  // namespace

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::BC: return "BC";
    case CellKind::BCCubic: return "BCCubic";
    case CellKind::EdgeOcta: return "EdgeOcta";
    case CellKind::VertexOcta: return "VertexOcta";
    case CellKind::TruncOcta: return "TruncOcta";
    case CellKind::Tetrahedral: return "Tetrahedral";
  }
  return "?";
}

CellKind parse_cell_kind(std::string_view name) {
  for (auto k : kAllCells)
    if (to_string(k) == name) return k;
  throw Error(kModule, "unknown cell kind '" + std::string(name) + "'");
}

std::string_view to_string(FaceShape shape) {
  switch (shape) {
    case FaceShape::square: return "square";
    case FaceShape::hexagon: return "hexagon";
    case FaceShape::octagon: return "octagon";
  }
  return "?";
}

const UnitCell& get_cell(CellKind kind) {
  static const std::array<UnitCell, 6> catalog = [] {
    std::array<UnitCell, 6> cells;
    for (std::size_t i = 0; i < kAllCells.size(); ++i) cells[i] = make_cell(kAllCells[i]);
    return cells;
  }();
  return catalog[static_cast<std::size_t>(kind)];
}

void check_cell_invariants(const UnitCell& cell) {
  const std::string name(to_string(cell.kind));
  for (const auto& p : cell.nodes)
    if ((p.array() < -kTol).any() || (p.array() > 1.0 + kTol).any())
      throw Error(kModule, name + ": node outside the unit cube");
  std::set<std::pair<int, int>> seen;
  for (const auto& [a, b] : cell.struts) {
    if (a == b) throw Error(kModule, name + ": self-loop strut");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      throw Error(kModule, name + ": duplicate strut");
  }
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<int> image(cell.nodes.size());
    for (std::size_t i = 0; i < cell.nodes.size(); ++i) {
      Vec3 m = cell.nodes[i];
      m[axis] = 1.0 - m[axis];
      image[i] = find_node(cell.nodes, m);
      if (image[i] < 0) throw Error(kModule, name + ": node set not mirror-symmetric");
    }
    for (const auto& [a, b] : cell.struts) {
      const int ma = image[a];
      const int mb = image[b];
      if (!seen.contains({std::min(ma, mb), std::max(ma, mb)}))
        throw Error(kModule, name + ": strut set not mirror-symmetric");
    }
    for (const auto& p : cell.nodes)
      for (double from : {0.0, 1.0})
        if (std::abs(p[axis] - from) < kTol) {
          Vec3 q = p;
          q[axis] = 1.0 - from;
          if (find_node(cell.nodes, q) < 0)
            throw Error(kModule, name + ": face nodes do not tile onto the opposite face");
        }
  }
}

std::vector<CellFace> open_faces(const UnitCell& cell) {
  auto faces = strut_loops(cell);
  auto corners = corner_openings(cell);
  faces.insert(faces.end(), corners.begin(), corners.end());
  return faces;
}

OpennessLimit max_open_radius(const UnitCell& cell, double voxel_size_mm, double min_gap_mm) {
  if (!(voxel_size_mm > 0)) throw Error(kModule, "voxel size must be positive");
  if (!(min_gap_mm >= 0)) throw Error(kModule, "minimum gap must be non-negative");
  OpennessLimit limit;
  double inradius = std::numeric_limits<double>::infinity();
  for (const auto& f : open_faces(cell)) {
    if (f.shape == FaceShape::square) continue;
    if (f.inradius < inradius) {
      inradius = f.inradius;
      limit.governing = f.shape;
    }
  }
  if (!std::isfinite(inradius)) throw Error(kModule, "cell has no openness limit");
  limit.radius_mm = inradius * voxel_size_mm - 0.5 * min_gap_mm;
  if (limit.radius_mm <= 0) {
    limit.radius_mm = 0;
    limit.warning = "no strut radius keeps a " + std::to_string(min_gap_mm) +
                    " mm gap in " + std::string(to_string(limit.governing)) + " openings";
  }
  return limit;
}

std::string catalog_table(double min_gap_mm) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %5s %6s %7s %7s %7s %12s %12s\n", "cell", "nodes",
                "struts", "square", "hexagon", "octagon", "r_max@2.5mm", "r_max@4.0mm");
  out << line;
  for (auto kind : kAllCells) {
    const auto& cell = get_cell(kind);
    std::array<int, 3> counts{};
    for (const auto& f : open_faces(cell)) counts[static_cast<int>(f.shape)]++;
    std::string r25 = "-";
    std::string r40 = "-";
    try {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", max_open_radius(cell, 2.5, min_gap_mm).radius_mm);
      r25 = buf;
      std::snprintf(buf, sizeof buf, "%.3f", max_open_radius(cell, 4.0, min_gap_mm).radius_mm);
      r40 = buf;
    } catch (const Error&) {
    }
    std::snprintf(line, sizeof line, "%-12s %5zu %6zu %7d %7d %7d %12s %12s\n",
                  std::string(to_string(kind)).c_str(), cell.nodes.size(), cell.struts.size(),
                  counts[0], counts[1], counts[2], r25.c_str(), r40.c_str());
    out << line;
  }
  return out.str();
}

}  // namespace gradlattice
