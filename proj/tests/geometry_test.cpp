#include "support.hpp"

#include <gradlattice/stl.hpp>

#include <doctest.h>

#include <cstring>
#include <limits>
#include <random>
#include <string>

using namespace gradlattice;
using testing::box_mesh;
using testing::icosphere;
using testing::unit_cube;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("binary cube loads with welded vertices") {
  const auto bytes = save_stl(unit_cube(), StlFormat::binary);
  CHECK(bytes.size() == 684u);
  const auto m = load_stl(bytes);
  CHECK(m.vertices.size() == 8);
  CHECK(m.triangles.size() == 12);
  CHECK(is_watertight(m));
}

TEST_CASE("empty mesh is an 84 byte binary stl") {
  const auto bytes = save_stl(TriMesh{}, StlFormat::binary);
  REQUIRE(bytes.size() == 84u);
  std::uint32_t count = 1;
  std::memcpy(&count, bytes.data() + 80, 4);
  CHECK(count == 0);
  CHECK(load_stl(bytes).empty());
}

TEST_CASE("ascii single triangle") {
  const std::string text =
      "solid t\n facet normal 0 0 1\n  outer loop\n   vertex 0 0 0\n   vertex 1 0 0\n   vertex 0 1 0\n"
      "  endloop\n endfacet\nendsolid t\n";
  const auto m = load_stl(bytes_of(text));
  CHECK(m.vertices.size() == 3);
  CHECK(m.triangles.size() == 1);
  CHECK_FALSE(is_watertight(m));
}

TEST_CASE("stl round trip keeps float precision") {
  auto sphere = icosphere(5.0, 2, Vec3(0.1, -2.3, 7.7));
  for (auto format : {StlFormat::binary, StlFormat::ascii}) {
    const auto back = load_stl(save_stl(sphere, format));
    REQUIRE(back.vertices.size() == sphere.vertices.size());
    REQUIRE(back.triangles.size() == sphere.triangles.size());
    // welding preserves first-appearance order, so compare triangle by triangle
    for (std::size_t t = 0; t < sphere.triangles.size(); ++t)
      for (int k = 0; k < 3; ++k) {
        const Vec3 a = sphere.vertices[sphere.triangles[t][k]];
        const Vec3 b = back.vertices[back.triangles[t][k]];
        CHECK((a - b).norm() < 1e-5);
        CHECK((a.cast<float>().cast<double>() - b).norm() < 1e-6);
      }
    CHECK(is_watertight(back));
  }
}

TEST_CASE("malformed stl is rejected") {
  auto bytes = save_stl(unit_cube(), StlFormat::binary);
  SUBCASE("truncated") {
    bytes.resize(bytes.size() - 10);
    CHECK_THROWS_AS(load_stl(bytes), Error);
  }
  SUBCASE("count mismatch") {
    const std::uint32_t wrong = 13;
    std::memcpy(bytes.data() + 80, &wrong, 4);
    CHECK_THROWS_AS(load_stl(bytes), Error);
  }
  SUBCASE("non-finite coordinate") {
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + 84 + 12, &nan, 4);
    CHECK_THROWS_AS(load_stl(bytes), Error);
  }
  SUBCASE("ascii garbage") {
    CHECK_THROWS_AS(load_stl(bytes_of("solid x\n facet normal 0 0 1\n outer loop\n vertex 0 0\n")), Error);
  }
}

TEST_CASE("watertightness") {
  auto cube = unit_cube();
  CHECK(is_watertight(cube));
  CHECK(testing::edges_paired(cube));

  auto open = cube;
  open.triangles.pop_back();
  CHECK_FALSE(is_watertight(open));
  CHECK_FALSE(testing::edges_paired(open));

  const auto two = merged(cube, box_mesh(Vec3(3, 0, 0), Vec3(4, 1, 1)));
  CHECK(testing::edges_paired(two));
  CHECK(is_watertight(two));

  auto flipped = cube;
  std::swap(flipped.triangles[0][1], flipped.triangles[0][2]);
  CHECK_FALSE(is_watertight(flipped));
}

TEST_CASE("point inside cube") {
  const auto cube = unit_cube();
  CHECK(point_inside(cube, Vec3(0.5, 0.5, 0.5)));
  CHECK_FALSE(point_inside(cube, Vec3(2, 0, 0)));
  // on the surface counts as outside
  CHECK_FALSE(point_inside(cube, Vec3(0.5, 0.5, 1.0)));
  CHECK_FALSE(point_inside(cube, Vec3(1, 1, 1)));
  CHECK(point_inside(cube, Vec3(0.5, 0.5, 1.0 - 1e-6)));
}

TEST_CASE("non-watertight mesh rejected by inside test") {
  auto open = unit_cube();
  open.triangles.pop_back();
  CHECK_THROWS_AS(point_inside(open, Vec3(0.5, 0.5, 0.5)), Error);
}

TEST_CASE("sphere classification matches the analytic ball") {
  const auto sphere = icosphere(5.0, 3);
  const double chord = testing::longest_edge(sphere);
  const SolidQuery solid(sphere);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-7, 7);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p(u(rng), u(rng), u(rng));
    if (std::abs(p.norm() - 5.0) <= chord) continue;
    ++checked;
    CHECK(solid.contains(p) == (p.norm() < 5.0));
  }
  CHECK(checked > 800);
}

TEST_CASE("inside test is invariant under rigid motion") {
  const auto sphere = merged(icosphere(3.0, 2), testing::box_mesh(Vec3(4, -1, -1), Vec3(6, 1, 1)));
  const Eigen::Isometry3d xf = Eigen::Translation3d(12.5, -3.0, 40.25) *
                               Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized());
  const SolidQuery a(sphere), b(transformed(sphere, xf));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-4, 7);
  for (int i = 0; i < 400; ++i) {
    const Vec3 p(u(rng), u(rng) * 0.7, u(rng) * 0.7);
    CHECK(a.contains(p) == b.contains(xf * p));
  }
}

TEST_CASE("signed volume is positive for outward winding") {
  CHECK(signed_volume(unit_cube()) == doctest::Approx(1.0));
  const auto sphere = icosphere(2.0, 4);
  const double v = signed_volume(sphere);
  CHECK(v > 0);
  CHECK(testing::rel_err(v, 4.0 / 3.0 * M_PI * 8.0) < 0.01);
  auto inverted = sphere;
  for (auto& t : inverted.triangles) std::swap(t[1], t[2]);
  CHECK(signed_volume(inverted) < 0);
}

TEST_CASE("degenerate triangles fail validation") {
  auto m = unit_cube();
  validate_mesh(m);
  m.triangles.push_back({0, 0, 1});
  CHECK_THROWS_AS(validate_mesh(m), Error);
  m.triangles.back() = {0, 1, 99};
  CHECK_THROWS_AS(validate_mesh(m), Error);
}
