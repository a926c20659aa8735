#pragma once

#include <gradlattice/geometry.hpp>
#include <gradlattice/lattice.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

namespace gradlattice {

/// Cross bar at the end of a channel, perpendicular to its last segment.
struct TAnchor {
  double bar_length = 4.0;  // mm, full length
  double bar_radius = 0.0;  // mm; 0 takes the channel radius
  double setback = 0.0;     // mm measured back from the path end along the path
};

/// Tube removed from the lattice.
struct Channel {
  std::vector<Vec3> path;
  double radius = 0.75;
  std::optional<TAnchor> anchor;
};

/// Implicit lattice skin: union of strut capsules minus channels.
class SdfScene {
 public:
  explicit SdfScene(LatticeGraph graph, double blend_radius = 0.0, std::vector<Channel> channels = {});

  /// Signed distance, negative in material.
  double eval(const Vec3& p) const;
  /// Exact where the lattice distance is below near_band(); elsewhere some
  /// value >= near_band() carrying the correct sign.
  double eval_bounded(const Vec3& p) const;
  double near_band() const noexcept { return band_; }

  const LatticeGraph& graph() const noexcept { return graph_; }
  double blend_radius() const noexcept { return blend_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }
  bool empty() const noexcept { return graph_.struts.empty(); }
  /// Struts inflated by their radius.
  Box3 bounds() const;
  double min_radius() const;

 private:
  struct Segment {
    Vec3 a, b;
    double r;
  };
  double lattice_distance(const Vec3& p, const std::vector<int>* candidates) const;
  double channel_distance(const Vec3& p) const;
  const std::vector<int>* bucket(const Vec3& p) const;

  LatticeGraph graph_;
  double blend_;
  std::vector<Channel> channels_;
  std::vector<Segment> cuts_;  // channel pieces

  double band_ = 1.0;
  double cell_ = 1.0;
  Vec3 origin_ = Vec3::Zero();
  struct KeyHash {
    std::size_t operator()(const Vec3i& k) const noexcept;
  };
  std::unordered_map<Vec3i, std::vector<int>, KeyHash> buckets_;
};

double eval_sdf(const SdfScene& scene, const Vec3& p);

/// Channel polyline truncated at the anchor setback and the anchor bar, as
/// segments with radii.
std::vector<std::pair<std::array<Vec3, 2>, double>> channel_segments(const Channel& channel);

/// Marching tetrahedra over a grid aligned to multiples of cell_size
/// covering bounds. Cells are split into six tetrahedra along the main
/// diagonal, so the result is watertight and consistently oriented whenever
/// the field is positive on the grid boundary. f must be safe to call from
/// several threads.
TriMesh march_field(const std::function<double(const Vec3&)>& f, const Box3& bounds,
                    double cell_size);

/// Throws Error("surfacer", "bounds too tight ...") if material touches the
/// sampled boundary.
TriMesh march(const SdfScene& scene, const Box3& bounds, double cell_size);
/// Bounds taken from the scene with a three-cell margin.
TriMesh march(const SdfScene& scene, double cell_size);

/// Default sampling step: the thinnest strut radius.
double default_cell_size(const SdfScene& scene);

/// Narrowest air gap between strut pairs outside GapExemption, found by
/// scanning the SDF between their closest axis points.
/// +infinity when no such pair lies within search_range of each other.
double measure_min_gap(const SdfScene& scene, double samples_per_mm, double search_range = 2.0);

/// Header "dims nx ny nz spacing h origin x y z" then float32 samples,
/// x fastest.
void write_sdf_grid(std::ostream& out, const SdfScene& scene, const Box3& bounds, double spacing);

}  // namespace gradlattice
