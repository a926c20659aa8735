#include <gradlattice/distance.hpp>
#include <gradlattice/geometry.hpp>
#include <gradlattice/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace gradlattice {

namespace {

constexpr const char* kModule = "geometry-core";
constexpr int kLeafSize = 8;

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

// --- PointWelder ------------------------------------------------------------

PointWelder::PointWelder(double tolerance) : tolerance_(tolerance) {}

std::size_t PointWelder::KeyHash::operator()(
    const std::array<std::int64_t, 3>& k) const noexcept {
  std::size_t h = static_cast<std::size_t>(k[0]) * 73856093u;
  h ^= static_cast<std::size_t>(k[1]) * 19349663u;
  h ^= static_cast<std::size_t>(k[2]) * 83492791u;
  return h;
}

std::array<std::int64_t, 3> PointWelder::key(const Vec3& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / tolerance_)),
          static_cast<std::int64_t>(std::floor(p.y() / tolerance_)),
          static_cast<std::int64_t>(std::floor(p.z() / tolerance_))};
}

int PointWelder::insert(const Vec3& p) {
  const auto k = key(p);
  for (std::int64_t dx = -1; dx <= 1; ++dx)
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        auto it = cells_.find({k[0] + dx, k[1] + dy, k[2] + dz});
        if (it == cells_.end()) continue;
        for (int idx : it->second)
          if ((points_[idx] - p).norm() <= tolerance_) return idx;
      }
  const int idx = static_cast<int>(points_.size());
  points_.push_back(p);
  cells_[k].push_back(idx);
  return idx;
}

// --- mesh properties ----------------------------------------------------------

double triangle_area(const TriMesh& mesh, const Triangle& t) {
  const Vec3& a = mesh.vertices[t[0]];
  const Vec3& b = mesh.vertices[t[1]];
  const Vec3& c = mesh.vertices[t[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

void validate_mesh(const TriMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    for (int v : mesh.triangles[i])
      if (v < 0 || v >= n)
        throw Error(kModule, "triangle " + std::to_string(i) + " references vertex " +
                                 std::to_string(v) + " of " + std::to_string(n));
    if (triangle_area(mesh, mesh.triangles[i]) <= kDegenerateArea)
      throw Error(kModule, "triangle " + std::to_string(i) + " is degenerate");
  }
}

bool is_watertight(const TriMesh& mesh) {
  if (mesh.triangles.empty()) return false;
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      if (a == b) return false;
      if (++directed[edge_key(a, b)] > 1) return false;
    }
  for (const auto& [key, count] : directed) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    if (!directed.contains(edge_key(b, a))) return false;
  }
  return true;
}

double signed_volume(const TriMesh& mesh) {
  double v = 0;
  for (const auto& t : mesh.triangles)
    v += mesh.vertices[t[0]].dot(mesh.vertices[t[1]].cross(mesh.vertices[t[2]]));
  return v / 6.0;
}

double surface_area(const TriMesh& mesh) {
  double a = 0;
  for (const auto& t : mesh.triangles) a += triangle_area(mesh, t);
  return a;
}

Box3 bounding_box(std::span<const Vec3> points) {
  Box3 box;
  for (const auto& p : points) box.extend(p);
  return box;
}

Box3 bounding_box(const TriMesh& mesh) { return bounding_box(mesh.vertices); }

TriMesh transformed(const TriMesh& mesh, const Eigen::Isometry3d& xf) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = xf * v;
  return out;
}

TriMesh merged(const TriMesh& a, const TriMesh& b) {
  TriMesh out = a;
  const int offset = static_cast<int>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (auto t : b.triangles) {
    for (int& v : t) v += offset;
    out.triangles.push_back(t);
  }
  return out;
}

// --- SolidQuery -------------------------------------------------------------
//
// Hierarchical winding number: a BVH over the triangles where every node also
// stores the fan that closes its patch boundary. For a query outside the node
// box, patch plus closing fan is a closed surface with zero winding there, so
// the patch contributes exactly the solid angle of the reversed fan.

SolidQuery::SolidQuery(const TriMesh& mesh) : mesh_(mesh) {
  validate_mesh(mesh_);
  if (!is_watertight(mesh_))
    throw Error(kModule, "point-in-solid query requires a watertight mesh");
  box_ = bounding_box(mesh_);
  tri_boxes_.reserve(mesh_.triangles.size());
  for (const auto& t : mesh_.triangles) {
    Box3 b;
    for (int v : t) b.extend(mesh_.vertices[v]);
    tri_boxes_.push_back(b);
  }
  order_.resize(mesh_.triangles.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * mesh_.triangles.size() / kLeafSize + 2);
  build(0, static_cast<int>(order_.size()), 0);
}

int SolidQuery::build(int first, int count, int depth) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Box3 box;
  for (int i = first; i < first + count; ++i) box.extend(tri_boxes_[order_[i]]);
  nodes_[index].box = box;
  nodes_[index].first = first;
  nodes_[index].count = count;
  if (count > kLeafSize) {
    int axis = 0;
    box.sizes().maxCoeff(&axis);
    const int mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid,
                     order_.begin() + first + count, [&](int a, int b) {
                       const double ca = tri_boxes_[a].center()[axis];
                       const double cb = tri_boxes_[b].center()[axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const int left = build(first, mid - first, depth + 1);
    const int right = build(mid, first + count - mid, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
  }
  if (depth > 0) build_cap(nodes_[index]);
  return index;
}

void SolidQuery::build_cap(Node& node) const {
  std::map<std::uint64_t, int> directed;
  for (int i = node.first; i < node.first + node.count; ++i) {
    const auto& t = mesh_.triangles[order_[i]];
    for (int e = 0; e < 3; ++e) directed[edge_key(t[e], t[(e + 1) % 3])]++;
  }
  std::vector<std::pair<int, int>> boundary;
  for (const auto& [key, count] : directed) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    if (!directed.contains(edge_key(b, a))) boundary.emplace_back(a, b);
  }
  if (boundary.empty()) {
    node.closed = true;
    return;
  }
  // A cap no smaller than the patch buys nothing.
  if (static_cast<int>(boundary.size()) >= node.count) return;
  Vec3 center = Vec3::Zero();
  for (const auto& [a, b] : boundary) center += mesh_.vertices[a];
  center /= static_cast<double>(boundary.size());
  node.cap.reserve(boundary.size());
  for (const auto& [a, b] : boundary)
    node.cap.push_back({mesh_.vertices[a], mesh_.vertices[b], center});
}

double SolidQuery::node_solid_angle(int index, const Vec3& p) const {
  const Node& node = nodes_[index];
  const bool outside = node.box.exteriorDistance(p) > 1e-9 * (1.0 + node.box.sizes().norm());
  if (outside && index != 0) {
    if (node.closed) return 0;
    if (!node.cap.empty()) {
      double sum = 0;
      for (const auto& c : node.cap) sum += solid_angle(p, c[0], c[1], c[2]);
      return sum;
    }
  }
  if (node.left < 0) {
    double sum = 0;
    for (int i = node.first; i < node.first + node.count; ++i) {
      const auto& t = mesh_.triangles[order_[i]];
      sum += solid_angle(p, mesh_.vertices[t[0]], mesh_.vertices[t[1]], mesh_.vertices[t[2]]);
    }
    return sum;
  }
  return node_solid_angle(node.left, p) + node_solid_angle(node.right, p);
}

double SolidQuery::winding_number(const Vec3& p) const {
  if (nodes_.empty()) return 0;
  return node_solid_angle(0, p) / (4.0 * std::numbers::pi);
}

bool SolidQuery::near_surface(const Vec3& p) const {
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.box.exteriorDistance(p) > kSurfaceTolerance) continue;
    if (node.left >= 0) {
      stack.push_back(node.left);
      stack.push_back(node.right);
      continue;
    }
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int tri = order_[i];
      if (tri_boxes_[tri].exteriorDistance(p) > kSurfaceTolerance) continue;
      const auto& t = mesh_.triangles[tri];
      if (point_triangle_distance(p, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                                  mesh_.vertices[t[2]]) <= kSurfaceTolerance)
        return true;
    }
  }
  return false;
}

bool SolidQuery::contains(const Vec3& p) const {
  if (box_.exteriorDistance(p) > 0) return false;
  if (near_surface(p)) return false;
  return winding_number(p) > 0.5;
}

std::vector<char> SolidQuery::contains(std::span<const Vec3> points) const {
  std::vector<char> out(points.size(), 0);
  parallel_for(points.size(), [&](std::size_t i) { out[i] = contains(points[i]) ? 1 : 0; });
  return out;
}

bool point_inside(const TriMesh& mesh, const Vec3& p) { return SolidQuery(mesh).contains(p); }

}  // namespace gradlattice
