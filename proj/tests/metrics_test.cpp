#include "support.hpp"

#include <gradlattice/metrics.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace gradlattice;

namespace {

Trajectory make(const std::vector<TrajectorySample>& s) { return Trajectory{s}; }

// Random piecewise-linear path with strictly increasing times.
Trajectory random_path(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> dt(0.05, 1.0), xy(-30, 30);
  Trajectory t;
  double time = dt(rng);
  for (int i = 0; i < n; ++i) {
    t.samples.push_back({time, xy(rng), xy(rng)});
    time += dt(rng);
  }
  return t;
}

Trajectory translated(Trajectory t, double dx, double dy) {
  for (auto& s : t.samples) s.x += dx, s.y += dy;
  return t;
}

// Population std of a list, computed directly.
double pop_std(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

std::string slurp_error(const std::string& csv) {
  try {
    parse_trajectory_csv(csv);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("normalize_time") {
  const auto a = normalize_time(make({{2, 1, 1}, {4, 2, 3}, {6, 5, 5}}));
  CHECK(a.samples[0].t == 0.0);
  CHECK(a.samples[1].t == 0.5);
  CHECK(a.samples[2].t == 1.0);
  CHECK(a.samples[1].x == 2.0);
  CHECK(a.samples[1].y == 3.0);

  const auto b = make({{0, 1, 2}, {0.25, 3, 4}, {1, 5, 6}});
  const auto nb = normalize_time(b);
  for (std::size_t i = 0; i < b.samples.size(); ++i) CHECK(nb.samples[i].t == b.samples[i].t);

  const auto c = normalize_time(make({{0, 7, 8}, {5, 9, 10}}));
  CHECK(c.samples[1].t == 1.0);
  CHECK(c.samples[1].x == 9.0);

  CHECK_THROWS_AS(normalize_time(make({{1, 0, 0}, {1, 1, 1}})), Error);
}

TEST_CASE("normalize_time is idempotent") {
  std::mt19937 rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto once = normalize_time(random_path(rng, 2 + k));
    const auto twice = normalize_time(once);
    for (std::size_t i = 0; i < once.samples.size(); ++i) CHECK(twice.samples[i].t == once.samples[i].t);
  }
}

TEST_CASE("trajectory validation") {
  CHECK_THROWS_AS(make({{0, 0, 0}}).validate(), Error);
  CHECK_THROWS_AS(make({{0, 0, 0}, {0, 1, 1}}).validate(), Error);
  CHECK_THROWS_AS(make({{1, 0, 0}, {0, 1, 1}}).validate(), Error);
  CHECK_THROWS_AS(make({{0, 0, 0}, {1, NAN, 1}}).validate(), Error);
  CHECK_NOTHROW(make({{0, 0, 0}, {1, 1, 1}}).validate());
}

TEST_CASE("resample a line") {
  const auto r = resample(make({{0, 0, 0}, {1, 10, -5}}), 40);
  REQUIRE(r.samples.size() == 40);
  for (int i = 0; i < 40; ++i) {
    CHECK(r.samples[i].t == doctest::Approx(i / 39.0).epsilon(1e-15));
    CHECK(r.samples[i].x == doctest::Approx(10.0 * i / 39.0).epsilon(1e-12));
    CHECK(r.samples[i].y == doctest::Approx(-5.0 * i / 39.0).epsilon(1e-12));
  }
  CHECK(r.samples.front().x == 0.0);
  CHECK(r.samples.back().x == 10.0);
}

TEST_CASE("resample at the original times is the identity") {
  Trajectory t;
  for (int i = 0; i < 7; ++i) t.samples.push_back({i / 6.0, std::sin(i), std::cos(i)});
  const auto r = resample(t, 7);
  for (int i = 0; i < 7; ++i) {
    CHECK(r.samples[i].x == doctest::Approx(t.samples[i].x).epsilon(1e-12));
    CHECK(r.samples[i].y == doctest::Approx(t.samples[i].y).epsilon(1e-12));
  }
}

TEST_CASE("resample a sine") {
  Trajectory t;
  for (int i = 0; i < 200; ++i) {
    const double u = i / 199.0;
    t.samples.push_back({u, std::sin(2 * std::numbers::pi * u), 0.5 * u});
  }
  const auto r = resample(t, 40);
  for (const auto& s : r.samples) {
    CHECK(std::abs(s.x - std::sin(2 * std::numbers::pi * s.t)) < 1e-3);
    CHECK(std::abs(s.y - 0.5 * s.t) < 1e-12);
  }
}

TEST_CASE("mean_distance examples") {
  std::mt19937 rng(11);
  const auto a = resample(normalize_time(random_path(rng, 15)), 40);
  const auto same = mean_distance(a, a);
  CHECK(same.mean_distance == 0.0);
  CHECK(same.std_distance == 0.0);
  CHECK(same.distances.size() == 40);

  const auto shifted = mean_distance(a, translated(a, 3, 4));
  CHECK(shifted.mean_distance == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(shifted.std_distance < 1e-9);

  Trajectory short_one = a;
  short_one.samples.pop_back();
  CHECK_THROWS_AS(mean_distance(a, short_one), Error);
}

TEST_CASE("mean_distance against a direct oracle") {
  std::mt19937 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto a = resample(normalize_time(random_path(rng, 8)), 40);
    const auto b = resample(normalize_time(random_path(rng, 12)), 40);
    const auto r = mean_distance(a, b);
    std::vector<double> d;
    for (int i = 0; i < 40; ++i)
      d.push_back(std::hypot(a.samples[i].x - b.samples[i].x, a.samples[i].y - b.samples[i].y));
    double m = 0;
    for (double x : d) m += x / 40.0;
    CHECK(r.mean_distance == doctest::Approx(m).epsilon(1e-12));
    CHECK(r.std_distance == doctest::Approx(pop_std(d)).epsilon(1e-9));
    for (int i = 0; i < 40; ++i) CHECK(r.distances[i] == doctest::Approx(d[i]).epsilon(1e-12));
  }
}

TEST_CASE("comparison properties") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> v(-10, 10);
  for (int k = 0; k < 25; ++k) {
    const auto a = random_path(rng, 5 + k % 7);
    const auto b = random_path(rng, 4 + k % 5);
    const auto ab = compare_trajectories(a, b);
    const auto ba = compare_trajectories(b, a);
    CHECK(ab.mean_distance == doctest::Approx(ba.mean_distance).epsilon(1e-12));
    CHECK(ab.std_distance == doctest::Approx(ba.std_distance).epsilon(1e-12));

    const auto aa = compare_trajectories(a, a);
    CHECK(aa.mean_distance == 0.0);
    CHECK(aa.std_distance == 0.0);

    // both moved: unchanged
    const double dx = v(rng), dy = v(rng);
    const auto moved = compare_trajectories(translated(a, dx, dy), translated(b, dx, dy));
    CHECK(std::abs(moved.mean_distance - ab.mean_distance) < 1e-9);

    // one moved off an identical copy: |v|
    const auto off = compare_trajectories(a, translated(a, dx, dy));
    CHECK(std::abs(off.mean_distance - std::hypot(dx, dy)) < 1e-9);
    CHECK(off.std_distance < 1e-9);
  }
}

TEST_CASE("affine time change is invisible after normalization") {
  std::mt19937 rng(23);
  for (int k = 0; k < 10; ++k) {
    const auto a = random_path(rng, 10);
    Trajectory b = a;
    for (auto& s : b.samples) s.t = 0.37 * s.t + 12.5;
    CHECK(compare_trajectories(a, b).mean_distance <= 1e-6);
  }
  // a straight line recorded at different rates and sample counts
  Trajectory slow, fast;
  for (int i = 0; i <= 10; ++i) slow.samples.push_back({2.0 * i, 1.0 + 0.3 * i, -0.2 * i});
  for (int i = 0; i <= 37; ++i) fast.samples.push_back({5 + 0.1 * i, 1.0 + 3.0 * i / 37, -2.0 * i / 37});
  CHECK(compare_trajectories(slow, fast).mean_distance <= 1e-6);
}

TEST_CASE("fit_stiffness") {
  for (double k : {0.128, 0.988}) {
    StiffnessSeries s;
    for (int i = 0; i < 25; ++i) s.samples.push_back({0.2 * i, k * 0.2 * i});
    CHECK(std::abs(fit_stiffness(s) - k) < 1e-9);
  }
  std::mt19937 rng(29);
  std::normal_distribution<double> noise(0, 1e-6);
  StiffnessSeries noisy;
  for (int i = 0; i < 50; ++i) noisy.samples.push_back({0.1 * i, 0.988 * 0.1 * i + noise(rng)});
  CHECK(std::abs(fit_stiffness(noisy) - 0.988) < 1e-4);

  StiffnessSeries flat;
  for (int i = 0; i < 5; ++i) flat.samples.push_back({1.0, 0.1 * i});
  CHECK_THROWS_AS(fit_stiffness(flat), Error);
  CHECK_THROWS_AS(fit_stiffness(StiffnessSeries{0, {{1, 1}}}), Error);
}

TEST_CASE("fit_stiffness is exact with an offset and ignores order") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> d(0, 5), slope(0.01, 3), offset(-2, 2);
  for (int k = 0; k < 20; ++k) {
    const double m = slope(rng), c = offset(rng);
    StiffnessSeries s;
    for (int i = 0; i < 12; ++i) {
      const double x = d(rng);
      s.samples.push_back({x, m * x + c});
    }
    const double f = fit_stiffness(s);
    CHECK(std::abs(f - m) <= 1e-12 * std::max(1.0, m) * 10);
    std::shuffle(s.samples.begin(), s.samples.end(), rng);
    CHECK(std::abs(fit_stiffness(s) - f) <= 1e-12 * m * 10);
  }
}

TEST_CASE("rank_designs") {
  auto res = [](double m, double s) {
    ComparisonResult r;
    r.mean_distance = m;
    r.std_distance = s;
    return r;
  };
  auto r1 = rank_designs({{"b", res(2.0, 0.1)}, {"a", res(1.0, 0.5)}});
  CHECK(r1[0].label == "a");
  CHECK(r1[0].rank == 1);
  CHECK(r1[1].rank == 2);
  auto r2 = rank_designs({{"x", res(1.0, 0.8)}, {"y", res(1.0, 0.5)}});
  CHECK(r2[0].label == "y");
  auto r3 = rank_designs({{"q", res(1.0, 0.5)}, {"p", res(1.0, 0.5)}});
  CHECK(r3[0].label == "p");
  CHECK_THROWS_AS(rank_designs({}), Error);

  // sort oracle over random sets with deliberate ties
  std::mt19937 rng(37);
  std::uniform_int_distribution<int> q(0, 3);
  for (int k = 0; k < 30; ++k) {
    std::vector<std::pair<std::string, ComparisonResult>> d;
    for (int i = 0; i < 5; ++i) d.emplace_back("d" + std::to_string((i * 7 + k) % 10), res(q(rng) * 0.5, q(rng) * 0.1));
    auto expect = d;
    std::stable_sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
      return std::tie(a.second.mean_distance, a.second.std_distance, a.first) <
             std::tie(b.second.mean_distance, b.second.std_distance, b.first);
    });
    const auto got = rank_designs(d);
    for (int i = 0; i < 5; ++i) {
      CHECK(got[i].label == expect[i].first);
      CHECK(got[i].rank == i + 1);
    }
  }
}

TEST_CASE("report and chart") {
  ComparisonResult a, b;
  a.mean_distance = 1.5;
  a.std_distance = 0.25;
  b.mean_distance = 3;
  const auto ranked = rank_designs({{"finger<2>", a}, {"finger 3", b}});
  const auto text = ranking_report(ranked);
  CHECK(text.find("finger<2>") < text.find("finger 3"));
  CHECK(text.find("1.500000") != std::string::npos);
  const auto svg = ranking_svg(ranked);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("finger&lt;2&gt;") != std::string::npos);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 3);
}

TEST_CASE("trajectory csv") {
  const auto t = parse_trajectory_csv("t,x,y\n0,1.5,2\n0.5, 2 ,3\n\n1,4,-1e-3\n");
  REQUIRE(t.samples.size() == 3);
  CHECK(t.samples[1].x == 2.0);
  CHECK(t.samples[2].y == -1e-3);
  const auto back = parse_trajectory_csv(trajectory_csv(t));
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.samples[i].t == t.samples[i].t);
    CHECK(back.samples[i].x == t.samples[i].x);
    CHECK(back.samples[i].y == t.samples[i].y);
  }
  CHECK(parse_trajectory_csv("t,x,y\r\n0,0,0\r\n1,1,1\r\n").samples.size() == 2);
}

TEST_CASE("malformed csv names the line") {
  CHECK(slurp_error("t,x,y\n0,0,0\n1,abc,2\n").find("line 3") != std::string::npos);
  CHECK(slurp_error("t,x,y\n0,0,0\n1,2\n").find("line 3") != std::string::npos);
  CHECK(slurp_error("time,x,y\n0,0,0\n").find("line 1") != std::string::npos);
  CHECK(slurp_error("t,x,y\n0,0,0\n1,1,1\n2,2,1e999\n").find("line 4") != std::string::npos);
  CHECK(slurp_error("t,x,y\n0,0,0\n0,1,1\n").find("increase") != std::string::npos);
  CHECK_FALSE(slurp_error("").empty());
}

TEST_CASE("stiffness csv and files") {
  const auto s = parse_stiffness_csv("deflection_mm,force_N\n0,0\n1,0.128\n2,0.256\n", 15);
  CHECK(s.angle == 15);
  CHECK(std::abs(fit_stiffness(s) - 0.128) < 1e-12);
  CHECK_THROWS_AS(parse_stiffness_csv("d,f\n0,0\n"), Error);

  const auto dir = std::filesystem::temp_directory_path() / "gradlattice_metrics_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "bad.csv";
  std::ofstream(path) << "t,x,y\n0,0,0\n1,1\n";
  try {
    read_trajectory_csv(path);
    FAIL("no throw");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.csv") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_trajectory_csv(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}
