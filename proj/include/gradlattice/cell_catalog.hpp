#pragma once

#include <gradlattice/common.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gradlattice {

enum class CellKind { BC, BCCubic, EdgeOcta, VertexOcta, TruncOcta, Tetrahedral };

inline constexpr std::array<CellKind, 6> kAllCells{CellKind::BC,         CellKind::BCCubic,
                                                   CellKind::EdgeOcta,   CellKind::VertexOcta,
                                                   CellKind::TruncOcta,  CellKind::Tetrahedral};

std::string_view to_string(CellKind kind);
/// Accepts the canonical names; throws Error("cell-catalog") otherwise.
CellKind parse_cell_kind(std::string_view name);

using StrutIndex = std::array<int, 2>;

/// Node/strut motif in unit-cube coordinates.
struct UnitCell {
  CellKind kind;
  std::vector<Vec3> nodes;
  std::vector<StrutIndex> struts;
};

/// Canonical topology of a catalog cell.
///
///  - BC:          8 corners + body center, 8 center spokes.
///  - BCCubic:     BC plus the 12 cube edges.
///  - VertexOcta:  octahedron on the 6 face centers (12 struts).
///  - EdgeOcta:    VertexOcta plus struts from each face center to the 4
///                 corners of its face (36 struts).
///  - TruncOcta:   Kelvin cell, vertices at 1/2 + permutations of
///                 (0, +-1/4, +-1/2); square faces lie on the cube faces.
///  - Tetrahedral: cube split into 24 tetrahedra around the body center
///                 (corners, face centers, body center; 50 struts).
const UnitCell& get_cell(CellKind kind);

/// Throws Error("cell-catalog") describing the first violated invariant:
/// unit-cube bounds, duplicate or self-loop struts, closure under the three
/// axis mirrors, and face-to-face tiling compatibility.
void check_cell_invariants(const UnitCell& cell);

enum class FaceShape { square, hexagon, octagon };
std::string_view to_string(FaceShape shape);

/// An opening of the lattice seen through a planar loop. Polygons are in
/// unit-cube coordinates of the cell and may extend into neighbouring cells
/// for openings that straddle the cube faces.
struct CellFace {
  FaceShape shape;
  std::vector<Vec3> polygon;
  /// Cell struts forming polygon sides. Closed strut loops list every side;
  /// cube-face openings alternate between struts and gaps bridged by
  /// neighbouring cells.
  std::vector<int> struts;
  /// Inradius at zero strut thickness, in voxel units.
  double inradius;
  bool on_cube_face;
};

/// Planar chordless strut loops with 4, 6 or 8 corners plus the openings
/// around cube-face corners formed by the tiled lattice.
std::vector<CellFace> open_faces(const UnitCell& cell);

struct OpennessLimit {
  double radius_mm = 0;
  FaceShape governing = FaceShape::hexagon;
  std::optional<std::string> warning;
};

/// Largest strut radius keeping every hexagonal and octagonal opening at
/// least `min_gap_mm` wide (face inradius - r >= min_gap / 2). Square faces
/// may close. Throws Error("cell-catalog", "cell has no openness limit") for
/// cells without such openings.
OpennessLimit max_open_radius(const UnitCell& cell, double voxel_size_mm, double min_gap_mm);

/// Text table of node/strut counts, face classes and openness limits.
std::string catalog_table(double min_gap_mm = 0.2);

}  // namespace gradlattice
