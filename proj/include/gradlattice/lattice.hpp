#pragma once

#include <gradlattice/cell_catalog.hpp>
#include <gradlattice/geometry.hpp>
#include <gradlattice/voxelizer.hpp>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace gradlattice {

struct Strut {
  int a;
  int b;
  double radius;  // mm
};

/// World-space lattice: welded nodes (mm) and deduplicated struts.
struct LatticeGraph {
  std::vector<Vec3> nodes;
  std::vector<Strut> struts;

  Vec3 midpoint(const Strut& s) const { return 0.5 * (nodes[s.a] + nodes[s.b]); }
  double length(const Strut& s) const { return (nodes[s.b] - nodes[s.a]).norm(); }
};

/// Instantiates `cell` in every occupied voxel, scaled by the voxel size and
/// anchored at the voxel corner. Nodes within kWeldTolerance merge, shared
/// struts collapse to one. Struts carry radius 0 until a field is applied.
LatticeGraph populate(const VoxelGrid& grid, const UnitCell& cell);

/// Same, over an explicit voxel sequence. Node numbering follows first
/// appearance, so different orders give isomorphic graphs.
LatticeGraph populate(std::span<const Vec3i> voxels, const Vec3& origin, double voxel_size,
                      const UnitCell& cell);

/// Removes struts with both endpoints outside the solid and drops nodes no
/// longer referenced. Node order is preserved.
LatticeGraph trim_to_solid(const LatticeGraph& graph, const SolidQuery& solid);

/// Retains the struts for which keep(index) is true and compacts nodes.
template <typename Pred>
LatticeGraph filter_struts(const LatticeGraph& graph, Pred&& keep) {
  LatticeGraph out;
  std::vector<int> remap(graph.nodes.size(), -1);
  std::vector<Strut> kept;
  for (std::size_t s = 0; s < graph.struts.size(); ++s)
    if (keep(s)) kept.push_back(graph.struts[s]);
  for (const auto& s : kept) remap[s.a] = remap[s.b] = 0;
  for (std::size_t n = 0; n < graph.nodes.size(); ++n)
    if (remap[n] == 0) {
      remap[n] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(graph.nodes[n]);
    }
  for (auto s : kept) out.struts.push_back({remap[s.a], remap[s.b], s.radius});
  return out;
}

/// Debug export: "n x y z" per node then "s a b r" per strut.
void write_lattice(std::ostream& out, const LatticeGraph& graph);

inline constexpr double kPrintFloorRadius = 0.2;  // mm

struct ControlPlane {
  Vec3 point;
  Vec3 normal;  // unit; planes are ordered along their normals
  double radius;
};

/// Position -> strut radius.
class RadiusField {
 public:
  enum class Mode { constant, linear_between_planes };

  static RadiusField constant(double radius);
  /// Radius interpolated by signed distance between consecutive control
  /// planes, held at the end values outside them, clamped to [r_min, r_max].
  static RadiusField linear(std::vector<ControlPlane> planes, double r_min, double r_max);

  double operator()(const Vec3& p) const;

  Mode mode() const noexcept { return mode_; }
  double r_min() const noexcept { return r_min_; }
  double r_max() const noexcept { return r_max_; }
  const std::vector<ControlPlane>& planes() const noexcept { return planes_; }

 private:
  RadiusField() = default;
  Mode mode_ = Mode::constant;
  double r_min_ = kPrintFloorRadius;
  double r_max_ = kPrintFloorRadius;
  std::vector<ControlPlane> planes_;
};

/// Each strut takes the field value at its midpoint.
LatticeGraph apply_radius_field(const LatticeGraph& graph, const RadiusField& field);
LatticeGraph with_uniform_radius(LatticeGraph graph, double radius);

// --- printability -----------------------------------------------------------

/// Radii are specified to 0.01 mm; openness and gap checks accept shortfalls
/// below that rounding (a gap between two struts may lose twice as much).
inline constexpr double kRadiusRounding = 0.01;  // mm

struct GapViolation {
  int strut_a;
  int strut_b;
  double gap;  // mm, surface to surface
};

struct PrintabilityReport {
  double min_radius;
  double min_gap;
  std::vector<int> thin_struts;
  std::vector<GapViolation> gap_violations;
  double smallest_gap = std::numeric_limits<double>::infinity();
  double smallest_radius = std::numeric_limits<double>::infinity();
  bool pass = true;

  std::string summary() const;
};

/// Strut pairs the gap checks skip. Pairs sharing a node or joined by a
/// strut meet in a common junction. Pairs with two ends exactly one lattice
/// strut length apart would be joined by a strut (possibly one the voxel
/// hull dropped at the boundary), and ends one square diagonal (sqrt 2
/// strut lengths) apart sit on a square opening, which may close.
class GapExemption {
 public:
  explicit GapExemption(const LatticeGraph& graph);
  bool operator()(const Strut& s, const Strut& t) const;

 private:
  static constexpr double kLengthTolerance = 1e-6;  // relative

  const LatticeGraph* graph_;
  std::unordered_set<std::uint64_t> adjacent_;
  std::vector<double> lengths_;  // strut lengths and their square diagonals, ascending
};

/// Flags struts thinner than min_radius and pairs of struts closer than
/// min_gap, skipping GapExemption pairs.
PrintabilityReport validate_printability(const LatticeGraph& graph, double min_radius_mm,
                                         double min_gap_mm);

}  // namespace gradlattice
