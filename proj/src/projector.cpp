#include "ctroi/projector.hpp"

#include <cmath>
#include <numbers>

#include "ctroi/errors.hpp"

namespace ctroi {

namespace {

constexpr double kPi = std::numbers::pi;

// Line integral of the trilinear field: trapezoid rule at voxel_size/2
// steps, clipped to the support ball (densities live in L^inf(B), so rays
// missing B integrate to exactly zero) and to the sample hull.
double volume_line_integral(const VoxelVolume& f, Vec3 src, Vec3 dir, bool half_ray) {
  double t0 = half_ray ? 0.0 : -1e30, t1 = 1e30;
  double h = f.voxel_size;
  Ball ball = inscribed_ball(f);
  Vec3 rel = src - ball.center;
  double b = dot(rel, dir), c = norm2(rel) - ball.radius * ball.radius;
  double disc = b * b - c;
  if (disc <= 0) return 0.0;
  double root = std::sqrt(disc);
  t0 = std::max(t0, -b - root);
  t1 = std::min(t1, -b + root);
  const double* o = &f.origin.x;
  const double* s = &src.x;
  const double* d = &dir.x;
  for (int a = 0; a < 3; ++a) {
    double lo = o[a], hi = o[a] + (f.n - 1) * h;
    if (std::abs(d[a]) < 1e-15) {
      if (s[a] < lo || s[a] > hi) return 0.0;
      continue;
    }
    double ta = (lo - s[a]) / d[a], tb = (hi - s[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t1 <= t0) return 0.0;
  int m = std::max(1, (int)std::ceil((t1 - t0) / (0.5 * h)));
  double dt = (t1 - t0) / m;
  double sum = 0.5 * (f.trilinear(src + t0 * dir) + f.trilinear(src + t1 * dir));
  for (int i = 1; i < m; ++i) sum += f.trilinear(src + (t0 + i * dt) * dir);
  return sum * dt;
}

ProjectionSet alloc_cone(const SourceGeometry& geom, const Ball& ball, int views) {
  ProjectionSet p;
  p.parallel = false;
  p.geom = geom;
  p.ball = ball;
  p.views = views;
  p.rows = geom.det.rows;
  p.cols = geom.det.cols;
  p.data.assign((std::size_t)views * p.rows * p.cols, 0.0);
  p.mask.assign(p.data.size(), 1);
  return p;
}

ProjectionSet alloc_parallel(const ParallelGrid& grid, const Ball& ball) {
  ProjectionSet p;
  p.parallel = true;
  p.grid = grid;
  p.ball = ball;
  p.views = (int)grid.dirs.size();
  p.rows = grid.nu;
  p.cols = grid.nu;
  p.data.assign((std::size_t)p.views * p.rows * p.cols, 0.0);
  p.mask.assign(p.data.size(), 1);
  return p;
}

template <class Integrate>
void fill_cone(ProjectionSet& p, const std::vector<SourcePose>& poses, Integrate line) {
  double sp = p.geom.det.spacing;
#pragma omp parallel for schedule(dynamic, 1)
  for (int v = 0; v < p.views; ++v) {
    const SourcePose& s = poses[v];
    for (int r = 0; r < p.rows; ++r) {
      Vec3 row0 = s.det_center + (r - p.rows / 2) * sp * s.ev -
                  (p.cols / 2) * sp * s.eu;
      for (int c = 0; c < p.cols; ++c) {
        Vec3 pix = row0 + c * sp * s.eu;
        p.at(v, r, c) = line(s.pos, normalized(pix - s.pos));
      }
    }
  }
}

template <class Integrate>
void fill_parallel(ProjectionSet& p, Integrate line) {
  const ParallelGrid& g = p.grid;
#pragma omp parallel for schedule(dynamic, 1)
  for (int v = 0; v < p.views; ++v) {
    for (int r = 0; r < g.nu; ++r)
      for (int c = 0; c < g.nu; ++c) {
        Vec3 u = (c - g.nu / 2) * g.du * g.eu[v] + (r - g.nu / 2) * g.du * g.ev[v];
        p.at(v, r, c) = line(u, g.dirs[v]);
      }
  }
}

}  // namespace

ProjectionSet forward_cone(const VoxelVolume& f, SourceGeometry geom) {
  Ball b = inscribed_ball(f);
  validate_geometry(geom, b);
  auto poses = sample_sources(geom);
  ProjectionSet p = alloc_cone(geom, b, (int)poses.size());
  fill_cone(p, poses,
            [&](Vec3 s, Vec3 d) { return volume_line_integral(f, s, d, true); });
  return p;
}

ProjectionSet forward_cone(const Phantom& f, SourceGeometry geom) {
  validate_phantom(f);
  validate_geometry(geom, f.support_ball);
  auto poses = sample_sources(geom);
  ProjectionSet p = alloc_cone(geom, f.support_ball, (int)poses.size());
  PhantomEval eval(f);
  fill_cone(p, poses, [&](Vec3 s, Vec3 d) { return eval.half_line({s, d}); });
  return p;
}

ProjectionSet forward_parallel(const VoxelVolume& f, const ParallelGrid& grid) {
  Ball b = inscribed_ball(f);
  validate_grid(grid, b);
  ProjectionSet p = alloc_parallel(grid, b);
  fill_parallel(p, [&](Vec3 s, Vec3 d) { return volume_line_integral(f, s, d, false); });
  return p;
}

ProjectionSet forward_parallel(const Phantom& f, const ParallelGrid& grid) {
  validate_phantom(f);
  validate_grid(grid, f.support_ball);
  ProjectionSet p = alloc_parallel(grid, f.support_ball);
  PhantomEval eval(f);
  fill_parallel(p, [&](Vec3 s, Vec3 d) { return eval.full_line({s, d}); });
  return p;
}

ProjectionSet truncate(const ProjectionSet& p, const Ball& roi) {
  if (p.complement_mask) throw Error("truncate: input carries a complement mask");
  if (dist(roi.center, p.ball.center) + roi.radius > p.ball.radius + 1e-9)
    throw Error("truncate: roi exceeds the support ball");
  ProjectionSet out = p;
  out.roi = roi;
  auto poses = p.parallel ? std::vector<SourcePose>{} : sample_sources(p.geom);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < p.views; ++v)
    for (int r = 0; r < p.rows; ++r)
      for (int c = 0; c < p.cols; ++c) {
        Ray ray = projection_ray(p, poses, v, r, c);
        bool hit = p.parallel ? line_hits_ball(ray, roi) : ray_hits_ball(ray, roi);
        std::size_t i = p.idx(v, r, c);
        out.mask[i] = hit;
        if (!hit) out.data[i] = 0.0;
      }
  return out;
}

ProjectionSet complement(const ProjectionSet& full, const Ball& roi) {
  if (full.roi) throw Error("complement: input must be untruncated");
  ProjectionSet tr = truncate(full, roi);
  ProjectionSet out = full;
  out.roi = roi;
  out.complement_mask = true;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.mask[i] = !tr.mask[i];
    out.data[i] = tr.mask[i] ? 0.0 : full.data[i];
  }
  return out;
}

namespace {

// Calls fn(index, weight, hits_ball) for every ray.
template <class Fn>
void for_each_ray_weight(const ProjectionSet& p, Fn fn) {
  if (p.parallel) {
    double w = 2.0 * kPi / p.views * p.grid.du * p.grid.du;
    for (int v = 0; v < p.views; ++v)
      for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) {
          Ray ray = projection_ray(p, {}, v, r, c);
          fn(p.idx(v, r, c), w, line_hits_ball(ray, p.ball));
        }
    return;
  }
  auto poses = sample_sources(p.geom);
  auto ws = source_measure_weights(p.geom);
  double area = p.geom.det.spacing * p.geom.det.spacing;
  for (int v = 0; v < p.views; ++v) {
    const SourcePose& s = poses[v];
    for (int r = 0; r < p.rows; ++r)
      for (int c = 0; c < p.cols; ++c) {
        Vec3 pix = s.det_center + (c - p.cols / 2) * p.geom.det.spacing * s.eu +
                   (r - p.rows / 2) * p.geom.det.spacing * s.ev;
        Vec3 d = pix - s.pos;
        double dist2 = norm2(d);
        double solid = area * dot(d, s.axis) / (dist2 * std::sqrt(dist2));
        Ray ray{s.pos, d / std::sqrt(dist2)};
        fn(p.idx(v, r, c), ws[v] * solid, ray_hits_ball(ray, p.ball));
      }
  }
}

}  // namespace

double projection_l2(const ProjectionSet& p) {
  double acc = 0;
  for_each_ray_weight(p, [&](std::size_t i, double w, bool) {
    acc += w * p.data[i] * p.data[i];
  });
  return std::sqrt(acc);
}

double masked_fraction(const ProjectionSet& p) {
  double total = 0, outside = 0;
  for_each_ray_weight(p, [&](std::size_t i, double w, bool hits) {
    if (!hits) return;
    total += w;
    if (!p.mask[i]) outside += w;
  });
  if (total <= 0) throw Error("masked_fraction: no rays meet the support ball");
  return outside / total;
}

}  // namespace ctroi
