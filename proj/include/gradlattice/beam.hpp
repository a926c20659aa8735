#pragma once

#include <gradlattice/cell_catalog.hpp>
#include <gradlattice/lattice.hpp>

#include <Eigen/Sparse>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gradlattice {

// Frame analysis works in mm, N and MPa; stresses are reported in Pa.

struct MaterialProps {
  double youngs_modulus = 1.8e6;  // Pa
  double poissons_ratio = 0.47;
  double density = 1010.0;        // kg/m^3

  /// Throws Error("beam-sim") unless E > 0, 0 <= nu < 0.5, rho > 0.
  void validate() const;
  double shear_modulus() const { return youngs_modulus / (2.0 * (1.0 + poissons_ratio)); }
};

enum class LoadKind { bending, torsion, compression };
std::string_view to_string(LoadKind kind);
LoadKind parse_load_kind(std::string_view name);

enum class TorsionMode { force_couples, nodal_moments };

/// Bending: +x shear on the +z face. Compression: -z on the +z face.
/// Torsion: moment about z on the +z face, applied as opposing y forces on
/// the min-x and max-x edges of that face, or as equal nodal moments.
/// The -z face is clamped in every case.
struct LoadCase {
  LoadKind kind = LoadKind::bending;
  double magnitude = 1.0;  // N, or N*mm for torsion
  TorsionMode torsion = TorsionMode::force_couples;
};

struct FrameResult {
  Eigen::VectorXd displacements;       // 6 per node: ux uy uz (mm), rx ry rz (rad)
  std::vector<double> element_stress;  // Pa, per strut
  double max_displacement = 0;         // mm
  double avg_stress = 0;               // Pa
  double external_work = 0;            // N*mm, 0.5 f.u
  double strain_energy = 0;            // N*mm, 0.5 u.K.u

  Vec3 translation(int node) const { return displacements.segment<3>(6 * node); }
};

/// n x n x n block of fully occupied voxels with uniform strut radius.
LatticeGraph build_block(const UnitCell& cell, int n, double voxel_size, double radius);

/// 12x12 element stiffness in global coordinates (N, mm).
Eigen::Matrix<double, 12, 12> element_stiffness(const Vec3& a, const Vec3& b, double radius,
                                                const MaterialProps& mat);

/// Unconstrained global stiffness, 6 DOFs per node.
Eigen::SparseMatrix<double> stiffness_matrix(const LatticeGraph& graph, const MaterialProps& mat);

/// Linear solve with the listed nodes fully clamped and nodal loads f
/// (6 per node). Throws Error("beam-sim") with ErrorKind::numerical when
/// part of the frame is not connected to a clamped node or the reduced
/// system is not positive definite.
FrameResult solve_frame(const LatticeGraph& graph, const MaterialProps& mat,
                        std::span<const int> clamped, const Eigen::VectorXd& loads);

/// Nodes whose coordinate on axis lies within tol of the extreme value.
std::vector<int> face_nodes(const LatticeGraph& graph, int axis, bool max_side, double tol = 1e-6);

Eigen::VectorXd load_vector(const LatticeGraph& graph, const LoadCase& load);

FrameResult assemble_and_solve(const LatticeGraph& graph, const MaterialProps& mat, const LoadCase& load);

/// Each strut replaced by two colinear halves.
LatticeGraph split_struts(const LatticeGraph& graph);

struct CampaignOptions {
  std::vector<CellKind> cells{kAllCells.begin(), kAllCells.end()};
  int n = 3;
  double voxel_size = 2.5;  // mm
  double radius = 0.4;      // mm
  MaterialProps material{};
  double bending_load = 1.0;      // N
  double torsion_load = 1.0;      // N*mm
  double compression_load = 1.0;  // N
  TorsionMode torsion = TorsionMode::force_couples;
};

struct CampaignRow {
  CellKind cell = CellKind::BC;
  LoadKind kind = LoadKind::bending;
  double max_displacement = 0;  // mm
  double avg_stress = 0;        // Pa
  double external_work = 0;
  double strain_energy = 0;
  int displacement_rank = 0;  // 1 = largest within the load case
  int stress_rank = 0;
  std::optional<std::string> error;
};

/// Every cell under the three load cases. A failing row records its error
/// and the campaign carries on.
std::vector<CampaignRow> run_campaign(const CampaignOptions& options);

/// Header "cell,case,max_displacement_mm,avg_stress_Pa,displacement_rank,stress_rank".
std::string campaign_csv(const std::vector<CampaignRow>& rows);
/// Cells as rows, stress and displacement per load case as columns.
std::string campaign_table(const std::vector<CampaignRow>& rows);

/// Clamps base_nodes, pushes the tip nodes with a unit total force along
/// direction and returns 1 N over the magnitude of their mean deflection.
/// Struts not connected to the base carry no load and are ignored.
double estimate_fingertip_stiffness(const LatticeGraph& graph, const MaterialProps& mat,
                                    std::span<const int> tip_nodes, std::span<const int> base_nodes,
                                    const Vec3& direction = Vec3::UnitX());

}  // namespace gradlattice
