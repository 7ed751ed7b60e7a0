#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ctroi/errors.hpp"
#include "ctroi/geometry.hpp"

using namespace ctroi;

namespace {
constexpr double kPi = std::numbers::pi;

SourceGeometry circle_geom(double radius, int views, double sdd, double spacing = 1.0) {
  SourceGeometry g;
  g.kind = CurveKind::Circle;
  g.radius = radius;
  g.views = views;
  g.det.sdd = sdd;
  g.det.spacing = spacing;
  return g;
}
}  // namespace

TEST_SUITE_BEGIN("geometry");

TEST_CASE("cap_cos matches the aperture cosine") {
  CHECK(cap_cos(0.0, 2.0) == doctest::Approx(1.0));
  CHECK(cap_cos(1.0, 1.0 + 1e-12) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cap_cos(1.5, 1.5 + 1e-12) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(cap_cos(1.0, std::sqrt(3.0)) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK_THROWS_AS(cap_cos(2.0, 1.0), Error);
  CHECK_THROWS_AS(cap_cos(1.0, 1.0), Error);
  CHECK_THROWS_AS(cap_cos(-0.1, 1.0), Error);
}

TEST_CASE("cap_area of standard cosines") {
  CHECK(cap_area(1.0) == doctest::Approx(0.0));
  CHECK(cap_area(0.0) == doctest::Approx(2.0 * kPi));
  CHECK(cap_area(0.5) == doctest::Approx(kPi));
  CHECK(cap_area(-1.0) == doctest::Approx(4.0 * kPi));
  CHECK_THROWS_AS(cap_area(1.1), Error);
}

TEST_CASE("cap aperture monotonicity") {
  double prev = cap_area(cap_cos(0.1, 4.0));
  for (double u = 0.5; u < 3.0; u += 0.5) {
    double a = cap_area(cap_cos(u, 4.0));
    CHECK(a > prev);
    prev = a;
  }
  prev = cap_area(cap_cos(1.0, 1.5));
  for (double v = 2.0; v < 8.0; v += 0.5) {
    double a = cap_area(cap_cos(1.0, v));
    CHECK(a < prev);
    prev = a;
  }
}

TEST_CASE("ray_hits_ball half-line semantics") {
  Ball unit{{0, 0, 0}, 1.0};
  CHECK(ray_hits_ball({{2, 0, 0}, {-1, 0, 0}}, unit));
  CHECK_FALSE(ray_hits_ball({{2, 0, 0}, {0, 1, 0}}, unit));
  CHECK_FALSE(ray_hits_ball({{2, 0, 0}, {1, 0, 0}}, unit));
  // tangent ray counts as a hit
  CHECK(ray_hits_ball({{2, 1, 0}, {-1, 0, 0}}, unit));
  // source inside the ball, any direction
  CHECK(ray_hits_ball({{0.5, 0, 0}, {0, 0, 1}}, unit));
  // full line hits even when the half-line points away
  CHECK(line_hits_ball({{2, 0, 0}, {1, 0, 0}}, unit));
}

TEST_CASE("rays through the roi also meet the enclosing ball") {
  Ball B{{0, 0, 0}, 2.0};
  Ball C{{0.5, -0.3, 0.2}, 0.8};
  auto dirs = fibonacci_hemisphere(40);
  auto pts = halton_points_in_ball(Ball{{0, 0, 0}, 6.0}, 60);
  for (const auto& s : pts)
    for (const auto& d : dirs) {
      Ray r{s, d};
      if (ray_hits_ball(r, C)) CHECK(ray_hits_ball(r, B));
    }
}

TEST_CASE("sample_sources counts and spacing") {
  auto g = circle_geom(1472.0, 360, 1472.0);
  g.det.rows = g.det.cols = 8;  // not validated here
  auto poses = sample_sources(g);
  REQUIRE(poses.size() == 360);
  for (int i = 0; i < 360; ++i) {
    CHECK(norm(poses[i].pos) == doctest::Approx(1472.0));
    double ang = std::atan2(poses[i].pos.y, poses[i].pos.x);
    if (ang < 0) ang += 2 * kPi;
    CHECK(ang == doctest::Approx(2 * kPi * i / 360.0).epsilon(1e-9));
  }

  SourceGeometry h;
  h.kind = CurveKind::Helix;
  h.radius = 384;
  h.pitch = 35;
  h.turns = 8;
  h.views = 128;
  h.det.sdd = 768;
  CHECK(sample_sources(h).size() == 1024);

  SourceGeometry s;
  s.kind = CurveKind::Sphere;
  s.radius = 400;
  s.polar_step_deg = 180;
  s.azim_step_deg = 360;
  s.det.sdd = 900;
  auto poles = sample_sources(s);
  REQUIRE(poles.size() == 2);
  CHECK(poles[0].pos.z == doctest::Approx(400.0));
  CHECK(poles[1].pos.z == doctest::Approx(-400.0));
}

TEST_CASE("detector frames aim at the origin") {
  SourceGeometry g;
  g.kind = CurveKind::TwinCircles;
  g.radius = 10;
  g.views = 24;
  g.det.sdd = 20;
  for (const auto& p : sample_sources(g)) {
    CHECK(dot(p.axis, normalized(-p.pos)) == doctest::Approx(1.0));
    CHECK(norm(p.det_center - p.pos) == doctest::Approx(20.0));
    CHECK(std::abs(dot(p.eu, p.ev)) < 1e-12);
    CHECK(std::abs(dot(p.eu, p.axis)) < 1e-12);
    CHECK(std::abs(dot(p.ev, p.axis)) < 1e-12);
    CHECK(norm(p.eu) == doctest::Approx(1.0));
    CHECK(norm(p.ev) == doctest::Approx(1.0));
  }
}

TEST_CASE("source measure weights integrate the locus") {
  auto g = circle_geom(5.0, 97, 10.0);
  auto w = source_measure_weights(g);
  double total = 0;
  for (double x : w) total += x;
  CHECK(total == doctest::Approx(2 * kPi * 5.0));

  SourceGeometry s;
  s.kind = CurveKind::Sphere;
  s.radius = 3.0;
  s.polar_step_deg = 12;
  s.azim_step_deg = 15;
  s.det.sdd = 6.0;
  auto ws = source_measure_weights(s);
  CHECK(ws.size() == sample_sources(s).size());
  total = 0;
  for (double x : ws) total += x;
  CHECK(total == doctest::Approx(4 * kPi * 9.0));

  SourceGeometry h;
  h.kind = CurveKind::Helix;
  h.radius = 2.0;
  h.pitch = 1.0;
  h.turns = 3;
  h.views = 50;
  h.det.sdd = 4.0;
  auto wh = source_measure_weights(h);
  total = 0;
  for (double x : wh) total += x;
  CHECK(total == doctest::Approx(3 * std::hypot(2 * kPi * 2.0, 1.0)));
}

TEST_CASE("truncated_ray_volume closed form on a concentric circle") {
  auto g = circle_geom(8.0, 256, 16.0);
  Ball B{{0, 0, 0}, 2.0};
  Ball C{{0, 0, 0}, 1.0};
  CHECK(truncated_ray_volume(g, B, B) == doctest::Approx(0.0));
  double cosB = cap_cos(2.0, 8.0), cosC = cap_cos(1.0, 8.0);
  double expect = 2 * kPi * 8.0 * 2 * kPi * (cosC - cosB);
  CHECK(truncated_ray_volume(g, B, C) == doctest::Approx(expect).epsilon(1e-9));
  CHECK_THROWS_AS(truncated_ray_volume(g, C, B), Error);
  CHECK_THROWS_AS(truncated_ray_volume(g, B, Ball{{1.5, 0, 0}, 1.0}), Error);
}

TEST_CASE("truncated_ray_volume shrinks like the radius gap") {
  SourceGeometry s;
  s.kind = CurveKind::Sphere;
  s.radius = 9.0;
  s.polar_step_deg = 10;
  s.azim_step_deg = 10;
  s.det.sdd = 18.0;
  Ball B{{0, 0, 0}, 2.0};
  double prev = -1;
  std::vector<double> ratios;
  for (int i = 0; i < 9; ++i) {
    double rc = 0.2 + 1.75 * i / 8.0;
    double vol = truncated_ray_volume(s, B, Ball{{0, 0, 0}, rc});
    if (prev >= 0) CHECK(vol <= prev + 1e-12);
    prev = vol;
    ratios.push_back(vol / (B.radius - rc));
  }
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  for (double r : ratios) {
    CHECK(r <= 3.0 * median);
    CHECK(r >= median / 3.0);
  }
}

TEST_CASE("plane intersections with a circle") {
  auto g = circle_geom(2.0, 64, 4.0);
  // plane x = 0 crosses at t = pi/2 and 3pi/2
  auto hits = plane_curve_intersections(g, {1, 0, 0}, 0.0);
  REQUIRE(hits.size() == 2);
  std::sort(hits.begin(), hits.end(),
            [](const CurveHit& a, const CurveHit& b) { return a.t < b.t; });
  CHECK(hits[0].t == doctest::Approx(kPi / 2));
  CHECK(hits[1].t == doctest::Approx(3 * kPi / 2));
  CHECK(hits[0].pos.y == doctest::Approx(2.0));
  // tangent plane x = 2 touches once
  CHECK(plane_curve_intersections(g, {1, 0, 0}, 2.0).size() == 1);
  // plane x = 3 misses
  CHECK(plane_curve_intersections(g, {1, 0, 0}, 3.0).empty());
  // plane z = 1 parallel to the circle plane misses
  CHECK(plane_curve_intersections(g, {0, 0, 1}, 1.0).empty());
}

TEST_CASE("plane intersections with a helix against a dense scan") {
  SourceGeometry h;
  h.kind = CurveKind::Helix;
  h.radius = 3.0;
  h.pitch = 1.5;
  h.turns = 8;
  h.views = 128;
  h.det.sdd = 6.0;
  double k = h.pitch / (2 * kPi), z0 = -0.5 * h.pitch * h.turns;
  auto gamma = [&](double t) {
    return Vec3{3 * std::cos(t), 3 * std::sin(t), k * t + z0};
  };
  auto dirs = fibonacci_hemisphere(25);
  int checked = 0;
  for (const auto& th : dirs) {
    for (double p : {-0.6, 0.0, 0.8}) {
      auto hits = plane_curve_intersections(h, th, p);
      for (const auto& hit : hits) {
        CHECK(dot(th, hit.pos) == doctest::Approx(p).epsilon(1e-6));
        CHECK(dist(hit.pos, gamma(hit.t)) < 1e-6);
      }
      // brute-force count of sign changes over a fine grid
      int brute = 0;
      int steps = 20000;
      double T = 2 * kPi * h.turns;
      double prev = dot(th, gamma(0)) - p;
      for (int i = 1; i <= steps; ++i) {
        double cur = dot(th, gamma(T * i / steps)) - p;
        if (prev == 0 || prev * cur < 0) ++brute;
        prev = cur;
      }
      CHECK((int)hits.size() >= brute);
      CHECK((int)hits.size() <= brute + 2);
      ++checked;
    }
  }
  CHECK(checked == 75);
}

TEST_CASE("tuy_check accepts twin circles and rejects a single circle") {
  SourceGeometry tw;
  tw.kind = CurveKind::TwinCircles;
  tw.radius = 4.0;
  tw.views = 180;
  tw.det.sdd = 8.0;
  Ball B{{0, 0, 0}, 1.5};
  auto rep = tuy_check(tw, B, 96, 96, 0.02);
  CHECK(rep.pass);
  CHECK(rep.worst_margin > 0.02);

  auto c = circle_geom(4.0, 180, 8.0);
  auto bad = tuy_check(c, B, 96, 96, 0.02);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.failures.empty());
  // recorded failures are near-axial plane normals missing the circle
  for (const auto& f : bad.failures)
    CHECK(plane_curve_intersections(c, f.normal, dot(f.normal, f.point)).empty());
}

TEST_CASE("tuy_check passes a surrounded ball inside a bounded helix") {
  SourceGeometry h;
  h.kind = CurveKind::Helix;
  h.radius = 3.0;
  h.pitch = 1.5;
  h.turns = 8;
  h.views = 128;
  h.det.sdd = 6.0;
  auto rep = tuy_check(h, Ball{{0, 0, 0}, 0.8}, 96, 96, 0.02);
  CHECK(rep.pass);
}

TEST_CASE("tuy_check on the sphere kind is trivially satisfied") {
  SourceGeometry s;
  s.kind = CurveKind::Sphere;
  s.radius = 4.0;
  s.polar_step_deg = 30;
  s.azim_step_deg = 30;
  s.det.sdd = 8.0;
  auto rep = tuy_check(s, Ball{{0, 0, 0}, 1.0});
  CHECK(rep.pass);
  CHECK_FALSE(rep.note.empty());
}

TEST_CASE("geometry json round-trip is deterministic") {
  SourceGeometry h;
  h.kind = CurveKind::Helix;
  h.radius = 384;
  h.pitch = 35;
  h.turns = 8;
  h.views = 128;
  h.det = {256, 256, 1.5, 768};
  std::string a = geometry_to_json(h);
  SourceGeometry back = geometry_from_json(a);
  CHECK(geometry_to_json(back) == a);
  CHECK(geometry_hash(back) == geometry_hash(h));
  CHECK(geometry_hash(back).size() == 16);
  SourceGeometry other = h;
  other.pitch = 36;
  CHECK(geometry_hash(other) != geometry_hash(h));
  CHECK_THROWS_AS(geometry_from_json("{"), Error);
  CHECK_THROWS_AS(geometry_from_json("{\"kind\":\"blob\"}"), Error);
}

TEST_CASE("validate_geometry sizes detectors to the shadow") {
  Ball B{{0, 0, 0}, 2.0};
  auto g = circle_geom(6.0, 32, 12.0, 0.25);
  validate_geometry(g, B);
  CHECK(g.det.rows > 0);
  CHECK(g.det.cols > 0);
  // every boundary point projects inside the pixel extent
  auto poses = sample_sources(g);
  auto dirs = fibonacci_hemisphere(200);
  double ucov = (g.det.cols - 1 - g.det.cols / 2 + 0.5) * g.det.spacing;
  double vcov = (g.det.rows - 1 - g.det.rows / 2 + 0.5) * g.det.spacing;
  for (const auto& p : poses)
    for (const auto& d : dirs)
      for (double sgn : {-1.0, 1.0}) {
        Vec3 q = B.center + sgn * B.radius * d;
        Vec3 w = q - p.pos;
        Vec3 hit = p.pos + (g.det.sdd / dot(w, p.axis)) * w - p.det_center;
        CHECK(std::abs(dot(hit, p.eu)) <= ucov);
        CHECK(std::abs(dot(hit, p.ev)) <= vcov);
      }

  auto tiny = circle_geom(6.0, 32, 12.0, 0.25);
  tiny.det.rows = tiny.det.cols = 4;
  CHECK_THROWS_AS(validate_geometry(tiny, B), Error);

  auto inside = circle_geom(1.5, 32, 3.0, 0.25);
  CHECK_THROWS_AS(validate_geometry(inside, B), Error);
}

TEST_CASE("low-discrepancy samplers are deterministic and in range") {
  CHECK(halton(0, 2) == doctest::Approx(0.5));
  CHECK(halton(1, 2) == doctest::Approx(0.25));
  CHECK(halton(0, 3) == doctest::Approx(1.0 / 3));
  Ball b{{1, 2, 3}, 2.0};
  auto pts = halton_points_in_ball(b, 50);
  REQUIRE(pts.size() == 50);
  for (const auto& p : pts) CHECK(dist(p, b.center) <= 2.0 + 1e-12);
  CHECK(pts == halton_points_in_ball(b, 50));
  auto dirs = fibonacci_hemisphere(64);
  for (const auto& d : dirs) {
    CHECK(norm(d) == doctest::Approx(1.0));
    CHECK(d.z >= 0);
  }
}

TEST_SUITE_END();
