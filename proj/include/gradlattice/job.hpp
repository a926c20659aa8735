#pragma once

#include <gradlattice/cell_catalog.hpp>
#include <gradlattice/finger.hpp>
#include <gradlattice/lattice.hpp>
#include <gradlattice/stl.hpp>
#include <gradlattice/surfacer.hpp>
#include <gradlattice/voxelizer.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gradlattice {

inline constexpr int kJobSchemaVersion = 1;

enum class GradientMode { constant, linear, finger_joints };

struct GradientSpec {
  GradientMode mode = GradientMode::finger_joints;
  double r_min = 0.2;
  double r_max = 0.4;
  std::vector<ControlPlane> planes;  // linear mode only
};

struct ChannelSpec {
  bool enabled = true;
  double radius = 0.75;
  std::optional<TAnchor> anchor;  // finger default when unset
  std::vector<Vec3> path;         // required for STL shapes
};

/// Declarative description of one generate/check run (JSON, see README).
struct JobConfig {
  std::string name = "job";
  bool use_finger = true;
  FingerSpec finger;
  std::filesystem::path stl_path;  // resolved against the job file directory
  double voxel_size = 2.5;
  CellKind cell = CellKind::TruncOcta;
  GradientSpec gradient;
  ChannelSpec channel;
  std::optional<double> march_cell_size;  // default: thinnest strut radius
  double blend_radius = 0.0;
  double min_radius = 0.2;
  double min_gap = 0.2;
  bool override_checks = false;  // write output despite openness or printability failures
  std::string stl_output = "lattice.stl";
  StlFormat stl_format = StlFormat::binary;
  std::string report_output = "report.txt";
  std::string lattice_output;    // optional debug exports, empty = off
  std::string occupancy_output;
  std::string sdf_output;
};

/// Throws Error("job") with the offending field on malformed input.
JobConfig parse_job(std::string_view json_text, const std::filesystem::path& base_dir = {});
JobConfig load_job(const std::filesystem::path& path);

enum class JobStatus { ok, printability_failed, openness_refused };

struct JobOutcome {
  JobStatus status = JobStatus::ok;
  std::string report;  // deterministic text, also written to report_output
  std::optional<OpennessLimit> openness;
  PrintabilityReport printability{};
  VoxelGrid grid;
  LatticeGraph lattice;
  TriMesh mesh;  // empty unless surfaced
  std::vector<std::filesystem::path> written;
};

/// shape -> openness gate -> voxelize -> populate -> trim -> gradient ->
/// validate -> (surface -> STL). Without `surface` it stops after
/// validation. Outputs land in out_dir; log receives progress lines.
JobOutcome run_job(const JobConfig& job, const std::filesystem::path& out_dir, bool surface,
                   const std::function<void(const std::string&)>& log = {});

}  // namespace gradlattice
