#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ctroi/errors.hpp"
#include "ctroi/projector.hpp"
#include "helpers.hpp"

using namespace ctroi;

namespace {

Phantom ball_phantom(double radius, double delta, Vec3 center = {0, 0, 0},
                     double support = 0) {
  Phantom p;
  p.support_ball = {{0, 0, 0}, support > 0 ? support : norm(center) + radius};
  p.ellipsoids.push_back({center, {radius, radius, radius}, {0, 0, 0}, delta});
  return p;
}

SourceGeometry carm_circle(double ball_radius, int views = 24, double spacing = 1.0) {
  SourceGeometry g;
  g.kind = CurveKind::Circle;
  g.radius = 6.66 * ball_radius;
  g.views = views;
  g.det.sdd = g.radius;
  g.det.spacing = spacing;
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE_BEGIN("projector");

TEST_CASE("zero volume projects to zero") {
  VoxelVolume v = make_volume(24, 1.0);
  auto p = forward_cone(v, carm_circle(inscribed_ball(v).radius, 8));
  for (double x : p.data) CHECK(x == 0.0);
  auto q = forward_parallel(v, make_parallel_grid(12, 25, 1.0));
  for (double x : q.data) CHECK(x == 0.0);
}

TEST_CASE("central pixel of a centered ball sees a diameter") {
  Phantom p = ball_phantom(7.0, 1.0);
  auto g = carm_circle(7.0, 12);
  auto proj = forward_cone(p, g);
  for (int v = 0; v < proj.views; ++v)
    CHECK(proj.at(v, proj.rows / 2, proj.cols / 2) == doctest::Approx(14.0));
}

TEST_CASE("parallel transform of a centered ball at u = 0") {
  Phantom p = ball_phantom(5.0, 1.0);
  auto grid = make_parallel_grid(9, 15, 1.0);
  auto proj = forward_parallel(p, grid);
  for (int v = 0; v < proj.views; ++v)
    CHECK(proj.at(v, grid.nu / 2, grid.nu / 2) == doctest::Approx(10.0));
}

TEST_CASE("full lines give the same ray in both orientations") {
  Phantom ph = scaled(shepp_logan_3d(), 10.0);
  VoxelVolume v = voxelize(ph, 24, 1.0);
  ParallelGrid fwd = make_parallel_grid(5, 27, 1.0);
  ParallelGrid bwd = fwd;
  for (auto& d : bwd.dirs) d = -d;  // same frames, opposite direction
  auto a = forward_parallel(v, fwd);
  auto b = forward_parallel(v, bwd);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    CHECK(a.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
}

TEST_CASE("phantom path equals the analytic oracle ray by ray") {
  Phantom ph = scaled(shepp_logan_3d(), 9.0);
  auto g = carm_circle(9.0, 6);
  auto proj = forward_cone(ph, g);
  auto poses = sample_sources(proj.geom);
  for (int v = 0; v < proj.views; ++v)
    for (int r = 0; r < proj.rows; r += 3)
      for (int c = 0; c < proj.cols; c += 3) {
        Ray ray = projection_ray(proj, poses, v, r, c);
        CHECK(proj.at(v, r, c) == doctest::Approx(analytic_line_integral(ph, ray))
                                      .epsilon(1e-12));
      }
}

TEST_CASE("voxel path tracks analytic projections of smooth blobs") {
  std::vector<testing::GaussianBlob> blobs = {{{2, 1, -1}, 3.0, 1.0},
                                              {{-4, 3, 2}, 2.0, 0.7}};
  VoxelVolume v = testing::blob_volume(48, 1.0, blobs);
  auto g = carm_circle(inscribed_ball(v).radius, 4);
  auto voxel = forward_cone(v, g);
  auto poses = sample_sources(voxel.geom);
  double num = 0, den = 0;
  for (int view = 0; view < voxel.views; ++view)
    for (int r = 0; r < voxel.rows; ++r)
      for (int c = 0; c < voxel.cols; ++c) {
        Ray ray = projection_ray(voxel, poses, view, r, c);
        double exact = testing::blob_ray_integral(blobs, ray, true);
        double got = voxel.at(view, r, c);
        num += (got - exact) * (got - exact);
        den += exact * exact;
      }
  CHECK(std::sqrt(num / den) < 0.005);
}

TEST_CASE("forward operators are linear on the voxel path") {
  VoxelVolume f = voxelize(scaled(shepp_logan_3d(), 9.0), 24, 1.0);
  VoxelVolume g = voxelize(ball_phantom(4.0, 0.8, {2, 1, -1}, 9.0), 24, 1.0);
  VoxelVolume combo = f;
  for (std::size_t i = 0; i < combo.values.size(); ++i)
    combo.values[i] = 1.75 * f.values[i] - 0.6 * g.values[i];

  auto geom = carm_circle(inscribed_ball(f).radius, 6);
  auto pf = forward_cone(f, geom), pg = forward_cone(g, geom),
       pc = forward_cone(combo, geom);
  double scale = 0;
  for (double x : pf.data) scale = std::max(scale, std::abs(x));
  for (std::size_t i = 0; i < pc.data.size(); ++i)
    CHECK(pc.data[i] ==
          doctest::Approx(1.75 * pf.data[i] - 0.6 * pg.data[i]).scale(scale).epsilon(1e-9));

  auto grid = make_parallel_grid(7, 27, 1.0);
  auto qf = forward_parallel(f, grid), qg = forward_parallel(g, grid),
       qc = forward_parallel(combo, grid);
  for (std::size_t i = 0; i < qc.data.size(); ++i)
    CHECK(qc.data[i] ==
          doctest::Approx(1.75 * qf.data[i] - 0.6 * qg.data[i]).scale(scale).epsilon(1e-9));
}

TEST_CASE("truncate keeps exactly the rays meeting the roi") {
  Phantom ph = scaled(shepp_logan_3d(), 10.0);
  auto g = carm_circle(10.0, 10);
  auto full = forward_cone(ph, g);
  Ball roi{{0, 0, 0}, 4.0};
  auto tr = truncate(full, roi);
  REQUIRE(tr.roi.has_value());
  auto poses = sample_sources(full.geom);
  for (int v = 0; v < full.views; ++v)
    for (int r = 0; r < full.rows; ++r)
      for (int c = 0; c < full.cols; ++c) {
        std::size_t i = full.idx(v, r, c);
        bool hit = ray_hits_ball(projection_ray(full, poses, v, r, c), roi);
        CHECK(tr.mask[i] == (hit ? 1 : 0));
        CHECK(tr.data[i] == (hit ? full.data[i] : 0.0));
      }
  // idempotent for the same roi
  auto tr2 = truncate(tr, roi);
  CHECK(tr2.data == tr.data);
  CHECK(tr2.mask == tr.mask);

  CHECK_THROWS_AS(truncate(full, Ball{{0, 0, 0}, 20.0}), Error);
  CHECK_THROWS_AS(truncate(full, Ball{{9, 0, 0}, 4.0}), Error);
}

TEST_CASE("roi equal to B keeps everything") {
  Phantom ph = ball_phantom(6.0, 1.0);
  auto full = forward_cone(ph, carm_circle(6.0, 8));
  auto tr = truncate(full, full.ball);
  CHECK(tr.data == full.data);
  // every ray meeting B stays; only margin rays that miss B are unmasked
  auto poses = sample_sources(full.geom);
  for (int v = 0; v < full.views; ++v)
    for (int r = 0; r < full.rows; ++r)
      for (int c = 0; c < full.cols; ++c) {
        bool hit = ray_hits_ball(projection_ray(full, poses, v, r, c), full.ball);
        CHECK(tr.mask[full.idx(v, r, c)] == (hit ? 1 : 0));
      }
  CHECK(masked_fraction(tr) == 0.0);
  auto comp = complement(full, full.ball);
  for (double x : comp.data) CHECK(x == 0.0);
}

TEST_CASE("tiny roi keeps only near-center rays") {
  Phantom ph = ball_phantom(6.0, 1.0);
  auto full = forward_cone(ph, carm_circle(6.0, 8));
  auto tr = truncate(full, Ball{{0, 0, 0}, 0.06});
  CHECK(masked_fraction(tr) > 0.95);
  std::size_t kept = 0;
  for (auto m : tr.mask) kept += m;
  CHECK(kept >= 1);
}

TEST_CASE("truncate and complement partition the data exactly") {
  Phantom ph = scaled(shepp_logan_3d(), 8.0);
  auto full = forward_cone(ph, carm_circle(8.0, 9));
  Ball roi{{1.0, -0.5, 0.5}, 3.0};
  auto tr = truncate(full, roi);
  auto co = complement(full, roi);
  CHECK(co.complement_mask);
  for (std::size_t i = 0; i < full.data.size(); ++i) {
    CHECK(tr.data[i] + co.data[i] == full.data[i]);
    CHECK((tr.mask[i] ^ co.mask[i]) == 1);
    CHECK(tr.data[i] * co.data[i] == 0.0);
  }
  CHECK_THROWS_AS(complement(tr, roi), Error);
}

TEST_CASE("masked fraction matches the cap-calculus prediction") {
  // distant locus so the aperture formula regime applies
  Phantom ph = ball_phantom(10.0, 1.0);
  auto g = carm_circle(10.0, 36, 0.5);
  auto full = forward_cone(ph, g);
  Ball B = full.ball;
  for (double frac : {0.35, 0.5, 0.7}) {
    Ball roi{{0, 0, 0}, frac * B.radius};
    auto tr = truncate(full, roi);
    double measured = masked_fraction(tr);
    double predicted = truncated_ray_volume(g, B, roi) / ray_set_volume(g, B);
    CHECK(measured == doctest::Approx(predicted).epsilon(0.02));
  }
}

TEST_CASE("complement norm shrinks as the roi grows") {
  Phantom ph = scaled(shepp_logan_3d(), 10.0);
  auto full = forward_cone(ph, carm_circle(10.0, 18));
  double prev = -1;
  for (double frac : {0.2, 0.4, 0.6, 0.8}) {
    auto co = complement(full, Ball{{0, 0, 0}, frac * full.ball.radius});
    double l2 = projection_l2(co);
    if (prev >= 0) CHECK(l2 < prev);
    prev = l2;
  }
}

TEST_CASE("complement norm follows the square-root radius law") {
  // || Y_C f ||_L2 <= c sqrt(rad B - rad C) ||f||_inf; the coefficient,
  // fitted by least squares over a radius sweep, should agree across
  // phantoms of the same support to within a factor of two
  Phantom blobs = ball_phantom(9.0, 0.5, {0, 0, 0}, 10.0);
  blobs.ellipsoids.push_back({{3, 2, -1}, {4, 4, 4}, {0, 0, 0}, 0.4});
  std::vector<double> coeffs;
  for (const Phantom& ph : {scaled(shepp_logan_3d(), 10.0), blobs}) {
    auto full = forward_cone(ph, carm_circle(10.0, 18));
    double sup = max_abs(voxelize(ph, 48, 10.0 / 23.0));
    double sxy = 0, sxx = 0;
    for (double frac : {0.3, 0.5, 0.7, 0.85}) {
      Ball roi{{0, 0, 0}, frac * full.ball.radius};
      double x = std::sqrt(full.ball.radius - roi.radius) * sup;
      double y = projection_l2(complement(full, roi));
      sxy += x * y;
      sxx += x * x;
    }
    coeffs.push_back(sxy / sxx);
  }
  CHECK(coeffs[0] > 0.0);
  CHECK(coeffs[1] > 0.0);
  double ratio = coeffs[0] / coeffs[1];
  CHECK(std::max(ratio, 1.0 / ratio) < 2.0);
}

TEST_CASE("projection files round-trip with masks and geometry") {
  Phantom ph = scaled(shepp_logan_3d(), 8.0);
  auto full = forward_cone(ph, carm_circle(8.0, 7));
  auto tr = truncate(full, Ball{{0.5, 0, -0.5}, 3.0});
  std::filesystem::create_directories(CTROI_TMP);
  std::string raw = std::string(CTROI_TMP) + "/proj_rt.raw";
  write_projections(tr, raw);
  auto back = read_projections(raw);
  CHECK(back.views == tr.views);
  CHECK(back.rows == tr.rows);
  CHECK(back.cols == tr.cols);
  CHECK(back.mask == tr.mask);
  CHECK(back.roi.has_value());
  CHECK(back.roi->radius == tr.roi->radius);
  CHECK(geometry_hash(back.geom) == geometry_hash(tr.geom));
  for (std::size_t i = 0; i < tr.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(tr.data[i]).epsilon(1e-6));

  std::string again = std::string(CTROI_TMP) + "/proj_rt2.raw";
  write_projections(tr, again);
  CHECK(slurp(raw) == slurp(again));
  CHECK(slurp(raw + ".mask") == slurp(again + ".mask"));

  // parallel sets round-trip through the regenerated grid
  auto par = forward_parallel(voxelize(ph, 24, 1.0), make_parallel_grid(6, 27, 1.0));
  std::string praw = std::string(CTROI_TMP) + "/proj_par.raw";
  write_projections(par, praw);
  auto pback = read_projections(praw);
  CHECK(pback.parallel);
  CHECK(pback.grid.dirs.size() == par.grid.dirs.size());
  CHECK(pback.grid.dirs[3] == par.grid.dirs[3]);
}

TEST_SUITE_END();
