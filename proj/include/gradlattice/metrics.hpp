#pragma once

#include <gradlattice/common.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gradlattice {

struct TrajectorySample {
  double t;  // s
  double x;  // mm
  double y;  // mm
};

/// Tracked 2D path. At least two finite samples with strictly increasing t.
struct Trajectory {
  std::vector<TrajectorySample> samples;

  /// Throws Error("metrics") describing the first violation.
  void validate() const;
};

/// CSV with header "t,x,y". Errors name the offending line.
Trajectory parse_trajectory_csv(std::string_view text);
Trajectory read_trajectory_csv(const std::filesystem::path& path);
std::string trajectory_csv(const Trajectory& traj);

/// Affine time map onto [0, 1].
Trajectory normalize_time(const Trajectory& traj);

/// n samples evenly spaced over the time span (t = i/(n-1) once
/// normalized), positions interpolated piecewise linearly.
Trajectory resample(const Trajectory& traj, int n = 40);

struct ComparisonResult {
  double mean_distance = 0;  // mm
  double std_distance = 0;   // mm, population
  std::vector<double> distances;
};

/// Point-wise Euclidean xy distance of two equally sampled trajectories.
ComparisonResult mean_distance(const Trajectory& a, const Trajectory& b);

/// normalize_time and resample both, then mean_distance.
ComparisonResult compare_trajectories(const Trajectory& a, const Trajectory& b, int n = 40);

struct StiffnessSample {
  double deflection;  // mm
  double force;       // N
};

struct StiffnessSeries {
  double angle = 0;  // degrees
  std::vector<StiffnessSample> samples;
};

/// CSV with header "deflection_mm,force_N".
StiffnessSeries parse_stiffness_csv(std::string_view text, double angle = 0);
StiffnessSeries read_stiffness_csv(const std::filesystem::path& path, double angle = 0);

/// Least-squares slope of force over deflection with a free intercept, N/mm.
double fit_stiffness(const StiffnessSeries& series);

struct RankedDesign {
  int rank;  // 1 = closest to the reference
  std::string label;
  ComparisonResult result;
};

/// Ascending mean distance, ties broken by std then label.
std::vector<RankedDesign> rank_designs(std::vector<std::pair<std::string, ComparisonResult>> designs);

std::string ranking_report(const std::vector<RankedDesign>& ranked);
/// Bar chart of mean distances with std whiskers.
std::string ranking_svg(const std::vector<RankedDesign>& ranked);

}  // namespace gradlattice
