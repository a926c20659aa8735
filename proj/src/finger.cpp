#include <gradlattice/distance.hpp>
#include <gradlattice/finger.hpp>

#include <cmath>
#include <numbers>

namespace gradlattice {

namespace {

constexpr const char* kModule = "lattice-builder";

// Exact distance to the convex hull of two spheres (a, ra) and (b, rb).
double round_cone(const Vec3& p, const Vec3& a, const Vec3& b, double ra, double rb) {
  const Vec3 ba = b - a;
  const double l2 = ba.squaredNorm();
  const double rr = ra - rb;
  const double a2 = l2 - rr * rr;
  const double il2 = 1.0 / l2;
  const Vec3 pa = p - a;
  const double y = pa.dot(ba);
  const double z = y - l2;
  const double x2 = (pa * l2 - ba * y).squaredNorm();
  const double y2 = y * y * l2;
  const double z2 = z * z * l2;
  const double k = (rr > 0 ? 1.0 : rr < 0 ? -1.0 : 0.0) * rr * rr * x2;
  if ((z > 0 ? 1.0 : z < 0 ? -1.0 : 0.0) * a2 * z2 > k) return std::sqrt(x2 + z2) * il2 - rb;
  if ((y > 0 ? 1.0 : y < 0 ? -1.0 : 0.0) * a2 * y2 < k) return std::sqrt(x2 + y2) * il2 - ra;
  return (std::sqrt(x2 * a2 * il2) + y * rr) * il2 - ra;
}

struct Skeleton {
  std::array<Vec3, 4> points;  // base, joint 1, joint 2, tip extremity
  std::array<Vec3, 3> dirs;
  Vec3 tip_center;             // center of the tip sphere
};

Skeleton skeleton(const FingerSpec& spec) {
  if (!(spec.total_length > 0)) throw Error(kModule, "finger length must be positive");
  double sum = 0;
  for (double f : spec.fractions) {
    if (!(f > 0)) throw Error(kModule, "phalanx fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw Error(kModule, "phalanx fractions must sum to 1");
  for (double a : spec.flexion_deg)
    if (!(a >= 0 && a < 90)) throw Error(kModule, "flexion angles must lie in [0, 90) degrees");
  for (double r : spec.radii)
    if (!(r > 0)) throw Error(kModule, "finger radii must be positive");
  if (!(spec.channel_radius > 0)) throw Error(kModule, "channel radius must be positive");

  Skeleton s;
  s.points[0] = Vec3::Zero();
  double heading = 0;  // accumulated flexion, radians
  for (int i = 0; i < 3; ++i) {
    if (i > 0) heading += spec.flexion_deg[i - 1] * std::numbers::pi / 180.0;
    // Positive rotation about +y turns +x toward -z.
    s.dirs[i] = Vec3(std::cos(heading), 0.0, -std::sin(heading));
    s.points[i + 1] = s.points[i] + spec.total_length * spec.fractions[i] * s.dirs[i];
  }
  s.tip_center = s.points[3] - spec.radii[3] * s.dirs[2];
  const std::array<Vec3, 4> c{s.points[0], s.points[1], s.points[2], s.tip_center};
  for (int i = 0; i < 3; ++i)
    if ((c[i + 1] - c[i]).norm() <= std::abs(spec.radii[i] - spec.radii[i + 1]) + 1e-9)
      throw Error(kModule, "phalanx too short for its taper");
  return s;
}

}  // namespace

double finger_sdf(const FingerSpec& spec, const Vec3& p) {
  const Skeleton s = skeleton(spec);
  const std::array<Vec3, 4> c{s.points[0], s.points[1], s.points[2], s.tip_center};
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) d = std::min(d, round_cone(p, c[i], c[i + 1], spec.radii[i], spec.radii[i + 1]));
  return std::max(d, -(p - s.points[0]).dot(s.dirs[0]));
}

FingerShape make_finger_shape(const FingerSpec& spec) {
  if (!(spec.mesh_resolution > 0)) throw Error(kModule, "mesh resolution must be positive");
  const Skeleton s = skeleton(spec);

  // Proximal and distal phalanges must stay apart.
  const double reach = segment_segment_closest(s.points[0], s.points[1], s.points[2], s.tip_center).distance;
  if (reach < std::max(spec.radii[0], spec.radii[1]) + std::max(spec.radii[2], spec.radii[3]))
    throw Error(kModule, "finger geometry self-intersects at these flexion angles");

  const std::array<Vec3, 4> c{s.points[0], s.points[1], s.points[2], s.tip_center};
  Box3 box;
  for (int i = 0; i < 4; ++i) {
    box.extend(c[i] - Vec3::Constant(spec.radii[i]));
    box.extend(c[i] + Vec3::Constant(spec.radii[i]));
  }
  box.min().array() -= 2 * spec.mesh_resolution;
  box.max().array() += 2 * spec.mesh_resolution;

  // Evaluate without re-validating per sample.
  auto sdf = [&](const Vec3& p) {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) d = std::min(d, round_cone(p, c[i], c[i + 1], spec.radii[i], spec.radii[i + 1]));
    return std::max(d, -(p - s.points[0]).dot(s.dirs[0]));
  };

  FingerShape shape;
  shape.mesh = march_field(sdf, box, spec.mesh_resolution);
  shape.centerline = s.points;
  shape.directions = s.dirs;
  shape.channel.path.assign(s.points.begin(), s.points.end());
  shape.channel.radius = spec.channel_radius;
  shape.channel.anchor = spec.anchor;
  return shape;
}

std::vector<ControlPlane> finger_joint_planes(const FingerShape& shape, double r_min, double r_max) {
  const auto& p = shape.centerline;
  const auto& d = shape.directions;
  return {
      {p[0], d[0], r_min},
      {0.5 * (p[0] + p[1]), d[0], r_max},
      {p[1], (d[0] + d[1]).normalized(), r_min},
      {0.5 * (p[1] + p[2]), d[1], r_max},
      {p[2], (d[1] + d[2]).normalized(), r_min},
      {0.5 * (p[2] + p[3]), d[2], r_max},
  };
}

}  // namespace gradlattice
