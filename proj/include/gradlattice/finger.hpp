#pragma once

#include <gradlattice/geometry.hpp>
#include <gradlattice/lattice.hpp>
#include <gradlattice/surfacer.hpp>

#include <array>
#include <vector>

namespace gradlattice {

/// Parametric stand-in for the finger CAD model: three round-tapered
/// phalanges along a polyline that starts at the origin heading +x and bends
/// toward -z at the two joints. The base is cut flat at x = 0.
struct FingerSpec {
  double total_length = 90.0;                             // mm, base to tip
  std::array<double, 3> fractions{0.45, 0.30, 0.25};      // proximal to distal
  std::array<double, 2> flexion_deg{26.0, 21.0};
  std::array<double, 4> radii{9.0, 8.0, 7.0, 6.0};        // base, joints, tip
  double channel_radius = 0.75;
  TAnchor anchor{4.0, 0.0, 6.0};
  double mesh_resolution = 1.0;  // mm, surface sampling step
};

struct FingerShape {
  TriMesh mesh;
  std::array<Vec3, 4> centerline;          // base, joint 1, joint 2, tip
  std::array<Vec3, 3> directions;          // unit segment directions
  Channel channel;                         // along the full centerline
};

/// Throws Error("lattice-builder") on invalid parameters or when the distal
/// phalanx would run into the proximal one.
FingerShape make_finger_shape(const FingerSpec& spec);

/// Signed distance to the finger solid (negative inside).
double finger_sdf(const FingerSpec& spec, const Vec3& p);

/// Gradient planes: r_min at the base and both joints, r_max mid-phalanx.
std::vector<ControlPlane> finger_joint_planes(const FingerShape& shape, double r_min, double r_max);

}  // namespace gradlattice
