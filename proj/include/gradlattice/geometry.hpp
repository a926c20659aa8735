#pragma once

#include <gradlattice/common.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace gradlattice {

using Triangle = std::array<int, 3>;

/// Indexed triangle surface, coordinates in millimeters.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  bool empty() const noexcept { return triangles.empty(); }
};

inline constexpr double kWeldTolerance = 1e-6;         // mm
inline constexpr double kDegenerateArea = 1e-9;        // mm^2
inline constexpr double kSurfaceTolerance = 1e-9;      // mm

/// Merges points closer than a tolerance. Insertion order defines indices.
class PointWelder {
 public:
  explicit PointWelder(double tolerance = kWeldTolerance);

  /// Index of an existing point within tolerance, or of the newly added p.
  int insert(const Vec3& p);
  const std::vector<Vec3>& points() const noexcept { return points_; }
  std::vector<Vec3> release() { return std::move(points_); }

 private:
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const noexcept;
  };
  std::array<std::int64_t, 3> key(const Vec3& p) const;

  double tolerance_;
  std::vector<Vec3> points_;
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<int>, KeyHash> cells_;
};

/// Throws Error("geometry-core") if an index is out of range or a triangle
/// is degenerate.
void validate_mesh(const TriMesh& mesh);

double triangle_area(const TriMesh& mesh, const Triangle& t);

/// Every undirected edge is used by exactly two triangles, once in each
/// direction.
bool is_watertight(const TriMesh& mesh);

/// Divergence-theorem volume; positive for outward winding.
double signed_volume(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);
Box3 bounding_box(const TriMesh& mesh);
Box3 bounding_box(std::span<const Vec3> points);

TriMesh transformed(const TriMesh& mesh, const Eigen::Isometry3d& xf);
/// Concatenates meshes without welding.
TriMesh merged(const TriMesh& a, const TriMesh& b);

/// Point-in-solid queries against a watertight mesh via the generalized
/// winding number. Points within kSurfaceTolerance of the surface count as
/// outside.
class SolidQuery {
 public:
  /// Throws Error("geometry-core") when the mesh is not watertight.
  explicit SolidQuery(const TriMesh& mesh);

  double winding_number(const Vec3& p) const;
  bool contains(const Vec3& p) const;
  /// Batched form, evaluated across worker threads.
  std::vector<char> contains(std::span<const Vec3> points) const;

  const TriMesh& mesh() const noexcept { return mesh_; }

 private:
  struct Node {
    Box3 box;
    int left = -1;
    int right = -1;
    int first = 0;  // range into order_ for leaves
    int count = 0;
    bool closed = false;
    // Triangles closing the boundary of this node's patch (reversed
    // orientation), used when the query lies outside box.
    std::vector<std::array<Vec3, 3>> cap;
  };
  int build(int first, int count, int depth);
  void build_cap(Node& node) const;
  double node_solid_angle(int node, const Vec3& p) const;
  bool near_surface(const Vec3& p) const;

  TriMesh mesh_;
  Box3 box_;
  std::vector<Box3> tri_boxes_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

bool point_inside(const TriMesh& mesh, const Vec3& p);

}  // namespace gradlattice
