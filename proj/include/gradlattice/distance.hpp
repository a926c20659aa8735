#pragma once

// Closest-point and solid-angle kernels shared by the mesh queries, the SDF
// scene and the printability validator. Templated on the scalar so the same
// code serves double pipelines and float debug paths.

#include <gradlattice/common.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gradlattice {

/// Parameter t in [0,1] of the point on segment [a,b] closest to p.
template <typename Scalar>
Scalar closest_segment_parameter(const Vec3T<Scalar>& p, const Vec3T<Scalar>& a,
                                 const Vec3T<Scalar>& b) {
  const Vec3T<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0)) return Scalar(0);
  return std::clamp((p - a).dot(ab) / len2, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar point_segment_distance(const Vec3T<Scalar>& p, const Vec3T<Scalar>& a,
                              const Vec3T<Scalar>& b) {
  const Scalar t = closest_segment_parameter(p, a, b);
  return (p - (a + t * (b - a))).norm();
}

/// Signed distance to a capsule of radius r around [a,b]; negative inside.
template <typename Scalar>
Scalar capsule_sdf(const Vec3T<Scalar>& p, const Vec3T<Scalar>& a,
                   const Vec3T<Scalar>& b, Scalar r) {
  return point_segment_distance(p, a, b) - r;
}

template <typename Scalar>
struct SegmentPair {
  Scalar s;         // parameter on the first segment
  Scalar t;         // parameter on the second segment
  Scalar distance;  // distance between the two closest points
};

/// Closest points between segments [p1,q1] and [p2,q2] (Ericson, RTCD 5.1.9).
template <typename Scalar>
SegmentPair<Scalar> segment_segment_closest(const Vec3T<Scalar>& p1,
                                            const Vec3T<Scalar>& q1,
                                            const Vec3T<Scalar>& p2,
                                            const Vec3T<Scalar>& q2) {
  constexpr Scalar eps = Scalar(1e-20);
  const Vec3T<Scalar> d1 = q1 - p1;
  const Vec3T<Scalar> d2 = q2 - p2;
  const Vec3T<Scalar> r = p1 - p2;
  const Scalar a = d1.squaredNorm();
  const Scalar e = d2.squaredNorm();
  const Scalar f = d2.dot(r);
  Scalar s = 0;
  Scalar t = 0;
  if (a <= eps && e <= eps) {
    // both degenerate
  } else if (a <= eps) {
    t = std::clamp(f / e, Scalar(0), Scalar(1));
  } else {
    const Scalar c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, Scalar(0), Scalar(1));
    } else {
      const Scalar b = d1.dot(d2);
      const Scalar denom = a * e - b * b;
      if (denom > eps * a * e) s = std::clamp((b * f - c * e) / denom, Scalar(0), Scalar(1));
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, Scalar(0), Scalar(1));
      } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, Scalar(0), Scalar(1));
      }
    }
  }
  const Vec3T<Scalar> c1 = p1 + s * d1;
  const Vec3T<Scalar> c2 = p2 + t * d2;
  return {s, t, (c1 - c2).norm()};
}

/// Closest point on triangle abc to p (Ericson, RTCD 5.1.5).
template <typename Scalar>
Vec3T<Scalar> closest_point_on_triangle(const Vec3T<Scalar>& p,
                                        const Vec3T<Scalar>& a,
                                        const Vec3T<Scalar>& b,
                                        const Vec3T<Scalar>& c) {
  const Vec3T<Scalar> ab = b - a;
  const Vec3T<Scalar> ac = c - a;
  const Vec3T<Scalar> ap = p - a;
  const Scalar d1 = ab.dot(ap);
  const Scalar d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;

  const Vec3T<Scalar> bp = p - b;
  const Scalar d3 = ab.dot(bp);
  const Scalar d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;

  const Scalar vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3T<Scalar> cp = p - c;
  const Scalar d5 = ab.dot(cp);
  const Scalar d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;

  const Scalar vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;

  const Scalar va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  const Scalar denom = Scalar(1) / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

template <typename Scalar>
Scalar point_triangle_distance(const Vec3T<Scalar>& p, const Vec3T<Scalar>& a,
                               const Vec3T<Scalar>& b, const Vec3T<Scalar>& c) {
  return (p - closest_point_on_triangle(p, a, b, c)).norm();
}

/// Signed solid angle subtended by triangle abc seen from p
/// (Van Oosterom & Strackee). Positive when abc winds counter-clockwise
/// as seen from p's side opposite the normal.
template <typename Scalar>
Scalar solid_angle(const Vec3T<Scalar>& p, const Vec3T<Scalar>& a,
                   const Vec3T<Scalar>& b, const Vec3T<Scalar>& c) {
  const Vec3T<Scalar> ra = a - p;
  const Vec3T<Scalar> rb = b - p;
  const Vec3T<Scalar> rc = c - p;
  const Scalar la = ra.norm();
  const Scalar lb = rb.norm();
  const Scalar lc = rc.norm();
  const Scalar num = ra.dot(rb.cross(rc));
  const Scalar den = la * lb * lc + ra.dot(rb) * lc + ra.dot(rc) * lb + rb.dot(rc) * la;
  return Scalar(2) * std::atan2(num, den);
}

}  // namespace gradlattice
