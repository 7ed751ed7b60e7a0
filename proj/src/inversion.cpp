#include "ctroi/inversion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ctroi/errors.hpp"
#include "ctroi/geometry.hpp"

namespace ctroi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kCirclePts = 96;

void require_invertible(const ProjectionSet& p) {
  if (p.roi.has_value() && !p.complement_mask)
    throw Error("inverse operators need untruncated (or complement) data");
}

// bilinear detector lookup of the ray leaving `view` in direction omega
struct DetectorSampler {
  const ProjectionSet& p;
  const std::vector<SourcePose>& poses;
  double sp, sdd;

  DetectorSampler(const ProjectionSet& ps, const std::vector<SourcePose>& po)
      : p(ps), poses(po), sp(ps.geom.det.spacing), sdd(ps.geom.det.sdd) {}

  double sample(int view, Vec3 omega) const {
    const SourcePose& s = poses[view];
    double denom = dot(omega, s.axis);
    if (denom <= 1e-9) return 0.0;
    Vec3 q = s.pos + (sdd / denom) * omega - s.det_center;
    double cf = dot(q, s.eu) / sp + (double)(p.cols / 2);
    double rf = dot(q, s.ev) / sp + (double)(p.rows / 2);
    int c0 = (int)std::floor(cf), r0 = (int)std::floor(rf);
    double fc = cf - c0, fr = rf - r0;
    double acc = 0;
    for (int dr = 0; dr <= 1; ++dr)
      for (int dc = 0; dc <= 1; ++dc) {
        int rr = r0 + dr, cc = c0 + dc;
        if (rr < 0 || rr >= p.rows || cc < 0 || cc >= p.cols) continue;
        acc += ((dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc)) * p.at(view, rr, cc);
      }
    return acc;
  }
};

Vec3 perp_frame_u(Vec3 d) {
  Vec3 up = std::abs(d.z) > 0.999 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  return normalized(cross(up, d));
}

}  // namespace

std::complex<double> SliceSpectrum::sample(double nu_u, double nu_v) const {
  double ku = nu_u / dnu, kv = nu_v / dnu;
  int u0 = (int)std::floor(ku), v0 = (int)std::floor(kv);
  double fu = ku - u0, fv = kv - v0;
  auto wrap = [this](int i) { return ((i % m) + m) % m; };
  std::complex<double> acc = 0;
  for (int du_ = 0; du_ <= 1; ++du_)
    for (int dv = 0; dv <= 1; ++dv)
      acc += ((du_ ? fu : 1.0 - fu) * (dv ? fv : 1.0 - fv)) *
             f[(std::size_t)wrap(v0 + dv) * m + wrap(u0 + du_)];
  return acc;
}

SliceSpectrum slice_spectrum(const ProjectionSet& p, int dir_index) {
  if (!p.parallel) throw Error("slice_spectrum needs parallel data");
  if (dir_index < 0 || dir_index >= p.views)
    throw Error("slice_spectrum: direction index out of range");
  int nu = p.grid.nu, m = 2 * nu;
  SliceSpectrum s;
  s.m = m;
  s.dnu = 2.0 * kPi / (m * p.grid.du);
  s.f.assign((std::size_t)m * m, 0.0);
  // embed so that u = 0 lands at index 0 (centered transform, no phases)
  int shift = m - nu / 2;
  for (int r = 0; r < nu; ++r) {
    int rr = (r + shift) % m;
    for (int c = 0; c < nu; ++c)
      s.f[(std::size_t)rr * m + (c + shift) % m] = p.at(dir_index, r, c);
  }
  fft_2d(s.f, m, m, true);
  double scale = p.grid.du * p.grid.du;
  for (auto& z : s.f) z *= scale;
  return s;
}

VoxelVolume fourier_slice_inverse(const ProjectionSet& p, int n, double h,
                                  double cutoff) {
  if (!p.parallel) throw Error("fourier_slice_inverse needs parallel data");
  require_invertible(p);
  if (n < 8 || n % 2) throw Error("output grid size must be even and >= 8");
  if (h <= 0) throw Error("voxel size must be positive");
  if (p.grid.du > h * (1.0 + 1e-12))
    throw Error("parallel grid spacing exceeds the output voxel size");
  validate_grid(p.grid, p.ball);
  if (cutoff <= 0 || cutoff > 1) throw Error("cutoff must be in (0, 1]");

  int n_dir = p.views;
  std::vector<SliceSpectrum> slices(n_dir);
  for (int d = 0; d < n_dir; ++d) slices[d] = slice_spectrum(p, d);

  double zc = cutoff * kPi / h;
  double dw = 2.0 * kPi / (n * h);
  cvec cube((std::size_t)n * n * n, 0.0);
  struct Gap {
    int i, j, k;
    double best;
  };
  std::vector<Gap> gaps;
  std::size_t gap_count = 0;

#pragma omp parallel
  {
    std::vector<Gap> my_gaps;
    std::size_t my_count = 0;
#pragma omp for collapse(2) schedule(static)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double wz = dw * (k < n / 2 ? k : k - n);
        double wy = dw * (j < n / 2 ? j : j - n);
        for (int i = 0; i < n; ++i) {
          double wx = dw * (i < n / 2 ? i : i - n);
          double wn = std::sqrt(wx * wx + wy * wy + wz * wz);
          if (wn > zc) continue;
          double apod = 1.0;
          if (wn > 0.8 * zc)
            apod = 0.5 * (1.0 + std::cos(kPi * (wn - 0.8 * zc) / (0.2 * zc)));
          Vec3 w{wx, wy, wz};
          Vec3 wh = wn > 0 ? w / wn : Vec3{0, 0, 1};
          int best[4] = {-1, -1, -1, -1};
          double bd[4] = {2, 2, 2, 2};
          for (int d = 0; d < n_dir; ++d) {
            double a = std::abs(dot(wh, p.grid.dirs[d]));
            if (a >= bd[3]) continue;
            int q = 3;
            while (q > 0 && a < bd[q - 1]) {
              bd[q] = bd[q - 1];
              best[q] = best[q - 1];
              --q;
            }
            bd[q] = a;
            best[q] = d;
          }
          if (bd[0] > 0.2) {
            if (my_gaps.size() < 8) my_gaps.push_back({i, j, k, bd[0]});
            ++my_count;
            continue;
          }
          std::complex<double> acc = 0;
          double wsum = 0;
          for (int q = 0; q < 4; ++q) {
            int d = best[q];
            double wt = 1.0 / (bd[q] + 1e-6);
            acc += wt * slices[d].sample(dot(w, p.grid.eu[d]),
                                         dot(w, p.grid.ev[d]));
            wsum += wt;
          }
          cube[((std::size_t)k * n + j) * n + i] = apod * acc / wsum;
        }
      }
#pragma omp critical
    {
      gap_count += my_count;
      gaps.insert(gaps.end(), my_gaps.begin(), my_gaps.end());
    }
  }

  if (gap_count > 0) {
    std::sort(gaps.begin(), gaps.end(), [n](const Gap& a, const Gap& b) {
      return ((std::size_t)a.k * n + a.j) * n + a.i <
             ((std::size_t)b.k * n + b.j) * n + b.i;
    });
    std::ostringstream os;
    os << "angular coverage gaps at " << gap_count << " frequency cells;";
    for (std::size_t g = 0; g < gaps.size() && g < 5; ++g)
      os << " cell(" << gaps[g].i << "," << gaps[g].j << "," << gaps[g].k
         << ") nearest slice " << gaps[g].best << ";";
    throw Error(os.str());
  }

  fft_3d(cube, n, false);
  VoxelVolume out = make_volume(n, h);
  double scale = 1.0 / ((double)n * n * n * h * h * h);
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        out.at(i, j, k) =
            scale *
            cube[(((std::size_t)(k + n / 2) % n) * n + (j + n / 2) % n) * n +
                 (i + n / 2) % n]
                .real();
  mask_to_ball(out, p.ball);
  return out;
}

namespace {

// wrapped spatial ramp kernel, transformed; length m, spacing dt
cvec ramp_kernel_fft(int m, double dt, RampWindow window) {
  cvec k(m, 0.0);
  k[0] = 1.0 / (4.0 * dt * dt);
  for (int j = 1; j <= m / 2; ++j) {
    double v = (j % 2) ? -1.0 / (kPi * kPi * j * j * dt * dt) : 0.0;
    k[j] = v;
    k[m - j] = v;
  }
  fft_1d(k, true);
  if (window == RampWindow::Hamming) {
    for (int q = 0; q < m; ++q) {
      int qs = q < m / 2 ? q : q - m;
      k[q] *= 0.54 + 0.46 * std::cos(kPi * qs / (0.5 * m));
    }
  }
  return k;
}

}  // namespace

VoxelVolume fdk(const ProjectionSet& p, int n, double h, RampWindow window) {
  if (p.parallel || p.geom.kind != CurveKind::Circle)
    throw Error("fdk needs circular cone-beam data");
  require_invertible(p);
  if (n < 8 || n % 2) throw Error("output grid size must be even and >= 8");

  double R = p.geom.radius, sdd = p.geom.det.sdd, sp = p.geom.det.spacing;
  double dt = sp * R / sdd;  // virtual detector pixel
  int views = p.views, rows = p.rows, cols = p.cols;

  int m = 1;
  while (m < 2 * cols) m <<= 1;
  cvec kf = ramp_kernel_fft(m, dt, window);

  std::vector<double> filtered((std::size_t)views * rows * cols);
#pragma omp parallel
  {
    cvec row(m);
#pragma omp for collapse(2) schedule(static)
    for (int v = 0; v < views; ++v)
      for (int r = 0; r < rows; ++r) {
        double tv = (r - rows / 2) * dt;
        std::fill(row.begin(), row.end(), 0.0);
        for (int c = 0; c < cols; ++c) {
          double tu = (c - cols / 2) * dt;
          row[c] = p.at(v, r, c) * R / std::sqrt(R * R + tu * tu + tv * tv);
        }
        fft_1d(row, true);
        for (int q = 0; q < m; ++q) row[q] *= kf[q];
        fft_1d(row, false);
        double scale = dt / m;
        for (int c = 0; c < cols; ++c)
          filtered[((std::size_t)v * rows + r) * cols + c] = scale * row[c].real();
      }
  }

  auto poses = sample_sources(p.geom);
  VoxelVolume out = make_volume(n, h);
  double dbeta = 2.0 * kPi / views;
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec3 x = out.voxel_center(i, j, k);
        if (!p.ball.contains(x)) continue;
        double acc = 0;
        for (int v = 0; v < views; ++v) {
          const SourcePose& s = poses[v];
          Vec3 d = x - s.pos;
          double U = dot(d, s.axis);
          double tu = R * dot(d, s.eu) / U;
          double tv = R * dot(d, s.ev) / U;
          double cf = tu / dt + (double)(cols / 2);
          double rf = tv / dt + (double)(rows / 2);
          int c0 = (int)std::floor(cf), r0 = (int)std::floor(rf);
          double fc = cf - c0, fr = rf - r0;
          double g2 = 0;
          for (int dr = 0; dr <= 1; ++dr)
            for (int dc = 0; dc <= 1; ++dc) {
              int rr = r0 + dr, cc = c0 + dc;
              if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
              g2 += ((dr ? fr : 1.0 - fr) * (dc ? fc : 1.0 - fc)) *
                    filtered[((std::size_t)v * rows + rr) * cols + cc];
            }
          acc += g2 * R * R / (U * U);
        }
        out.at(i, j, k) = 0.5 * dbeta * acc;
      }
  return out;
}

GrangeatIntermediate grangeat_intermediate(const ProjectionSet& p, int n_dir) {
  if (p.parallel) throw Error("grangeat_intermediate needs cone-beam data");
  if (p.geom.kind == CurveKind::Sphere)
    throw Error("grangeat_intermediate needs a source curve, not a sphere");
  require_invertible(p);
  if (n_dir < 16) throw Error("need at least 16 plane normals");

  auto poses = sample_sources(p.geom);
  DetectorSampler det(p, poses);
  GrangeatIntermediate gi;
  gi.dirs = fibonacci_hemisphere(n_dir);
  gi.n_src = (int)poses.size();
  gi.offsets.assign(gi.dirs.size() * poses.size(), 0.0);
  gi.deriv.assign(gi.offsets.size(), 0.0);
  gi.deriv_dt.assign(gi.offsets.size(), 0.0);

  double delta = 0.5 * p.geom.det.spacing / p.geom.det.sdd;
  double cd = std::cos(delta), sd = std::sin(delta);
  // resolve the detector: one quadrature point per pixel-sized arc
  int n_q = std::max(kCirclePts,
                     (int)std::ceil(2.0 * kPi * p.geom.det.sdd /
                                    p.geom.det.spacing));

#pragma omp parallel for schedule(dynamic, 1)
  for (int d = 0; d < (int)gi.dirs.size(); ++d) {
    Vec3 xi = gi.dirs[d];
    Vec3 e1 = perp_frame_u(xi), e2 = cross(xi, e1);
    for (int s = 0; s < gi.n_src; ++s) {
      gi.offsets[gi.idx(d, s)] = dot(poses[s].pos, xi);
      double sum = 0;
      for (int q = 0; q < n_q; ++q) {
        double phi = 2.0 * kPi * q / n_q;
        Vec3 alpha = std::cos(phi) * e1 + std::sin(phi) * e2;
        double plus = det.sample(s, cd * alpha + sd * xi);
        double minus = det.sample(s, cd * alpha - sd * xi);
        sum += (plus - minus) / (2.0 * delta);
      }
      gi.deriv[gi.idx(d, s)] = sum * 2.0 * kPi / n_q;
    }
    // d/dt along each branch of the curve (uniform parameter steps)
    int s0 = 0;
    while (s0 < gi.n_src) {
      int s1 = s0;
      while (s1 < gi.n_src && poses[s1].branch == poses[s0].branch) ++s1;
      int cnt = s1 - s0;
      bool periodic = p.geom.kind != CurveKind::Helix;
      double step = cnt > 1 ? poses[s0 + 1].t - poses[s0].t : 1.0;
      for (int s = 0; s < cnt; ++s) {
        double fwd, bwd, span;
        if (periodic || (s > 0 && s + 1 < cnt)) {
          fwd = gi.deriv[gi.idx(d, s0 + (s + 1) % cnt)];
          bwd = gi.deriv[gi.idx(d, s0 + (s + cnt - 1) % cnt)];
          span = 2.0 * step;
        } else if (s == 0) {
          fwd = gi.deriv[gi.idx(d, s0 + 1)];
          bwd = gi.deriv[gi.idx(d, s0)];
          span = step;
        } else {
          fwd = gi.deriv[gi.idx(d, s0 + s)];
          bwd = gi.deriv[gi.idx(d, s0 + s - 1)];
          span = step;
        }
        gi.deriv_dt[gi.idx(d, s0 + s)] = (fwd - bwd) / span;
      }
      s0 = s1;
    }
  }
  return gi;
}

VoxelVolume grangeat_inverse(const ProjectionSet& p, int n, double h, int n_dir) {
  if (n < 8 || n % 2) throw Error("output grid size must be even and >= 8");
  TuyReport tuy = tuy_check(p.geom, p.ball);
  if (!tuy.pass) {
    std::ostringstream os;
    os << "source curve fails the completeness check (worst margin "
       << tuy.worst_margin << ", " << tuy.failures.size() << " recorded";
    if (!tuy.failures.empty())
      os << ", e.g. point (" << tuy.failures[0].point.x << ","
         << tuy.failures[0].point.y << "," << tuy.failures[0].point.z << ")";
    os << ")";
    throw Error(os.str());
  }

  GrangeatIntermediate gi = grangeat_intermediate(p, n_dir);
  auto poses = sample_sources(p.geom);

  // per-branch parameter tables for interpolating dS/dt at intersection t
  struct BranchTab {
    int start = 0, count = 0;
    double t0 = 0, step = 1;
    bool periodic = true;
  };
  std::vector<BranchTab> branches;
  {
    int s0 = 0;
    while (s0 < gi.n_src) {
      int s1 = s0;
      while (s1 < gi.n_src && poses[s1].branch == poses[s0].branch) ++s1;
      BranchTab b;
      b.start = s0;
      b.count = s1 - s0;
      b.t0 = poses[s0].t;
      b.step = b.count > 1 ? poses[s0 + 1].t - poses[s0].t : 1.0;
      b.periodic = p.geom.kind != CurveKind::Helix;
      branches.push_back(b);
      s0 = s1;
    }
  }

  const double tangent_tol = 0.02;
  VoxelVolume out = make_volume(n, h);
  std::atomic<bool> failed{false};
  std::string fail_msg;

#pragma omp parallel for collapse(2) schedule(dynamic, 1)
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      if (failed) continue;
      for (int i = 0; i < n; ++i) {
        Vec3 x = out.voxel_center(i, j, k);
        if (!p.ball.contains(x)) continue;
        double acc = 0;
        for (std::size_t d = 0; d < gi.dirs.size(); ++d) {
          Vec3 xi = gi.dirs[d];
          auto hits = plane_curve_intersections(p.geom, xi, dot(x, xi));
          double sum = 0;
          int valid = 0;
          for (const auto& hit : hits) {
            double dp = dot(hit.tangent, xi);
            if (std::abs(dp) < tangent_tol * norm(hit.tangent)) continue;
            const BranchTab& b = branches[hit.branch];
            double u = (hit.t - b.t0) / b.step;
            int u0 = (int)std::floor(u);
            double fu = u - u0;
            int ia, ib;
            if (b.periodic) {
              ia = ((u0 % b.count) + b.count) % b.count;
              ib = (ia + 1) % b.count;
            } else {
              ia = std::clamp(u0, 0, b.count - 1);
              ib = std::clamp(u0 + 1, 0, b.count - 1);
              fu = std::clamp(fu, 0.0, 1.0);
            }
            double sprime = (1.0 - fu) * gi.deriv_dt[gi.idx((int)d, b.start + ia)] +
                            fu * gi.deriv_dt[gi.idx((int)d, b.start + ib)];
            sum += sprime / dp;
            ++valid;
          }
          if (valid == 0) {
#pragma omp critical
            {
              if (!failed) {
                std::ostringstream os;
                os << "no transversal plane through voxel (" << x.x << ","
                   << x.y << "," << x.z << ") with normal (" << xi.x << ","
                   << xi.y << "," << xi.z << ")";
                fail_msg = os.str();
                failed = true;
              }
            }
            break;
          }
          acc += sum / valid;
        }
        if (failed) break;
        out.at(i, j, k) = -acc / (8.0 * kPi * kPi) * 4.0 * kPi / gi.dirs.size();
      }
    }
  if (failed) throw Error(fail_msg);
  return out;
}

ProjectionSet rebin_to_parallel(const ProjectionSet& p, const ParallelGrid& grid) {
  if (p.parallel || p.geom.kind != CurveKind::Sphere)
    throw Error("rebin_to_parallel needs spherical-source data");
  require_invertible(p);
  validate_grid(grid, p.ball);

  auto poses = sample_sources(p.geom);
  DetectorSampler det(p, poses);
  double rs = p.geom.radius;

  // source lattice: rows of constant polar angle (branch id), uniform azimuth
  struct Row {
    int start, count;
    double polar;
  };
  std::vector<Row> rows;
  for (int s = 0; s < (int)poses.size(); ++s) {
    if (rows.empty() || poses[s].branch != poses[rows.back().start].branch)
      rows.push_back({s, 0, std::acos(std::clamp(poses[s].pos.z / rs, -1.0, 1.0))});
    ++rows.back().count;
  }

  ProjectionSet out;
  out.parallel = true;
  out.grid = grid;
  out.ball = p.ball;
  out.views = (int)grid.dirs.size();
  out.rows = grid.nu;
  out.cols = grid.nu;
  out.data.assign((std::size_t)out.views * grid.nu * grid.nu, 0.0);
  out.mask.assign(out.data.size(), 1);

  int nu = grid.nu;
#pragma omp parallel for schedule(dynamic, 1)
  for (int d = 0; d < out.views; ++d) {
    Vec3 th = grid.dirs[d];
    for (int r = 0; r < nu; ++r)
      for (int c = 0; c < nu; ++c) {
        Vec3 u = (c - nu / 2) * grid.du * grid.eu[d] +
                 (r - nu / 2) * grid.du * grid.ev[d];
        if (!line_hits_ball({u, th}, p.ball)) continue;
        double u2 = norm2(u);
        if (u2 >= rs * rs) continue;
        Vec3 a = u - std::sqrt(rs * rs - u2) * th;

        double polar = std::acos(std::clamp(a.z / rs, -1.0, 1.0));
        double azim = std::atan2(a.y, a.x);
        if (azim < 0) azim += 2.0 * kPi;

        std::size_t hi = 1;
        while (hi + 1 < rows.size() && rows[hi].polar < polar) ++hi;
        const Row& lo_row = rows[hi - 1];
        const Row& hi_row = rows[hi];
        double fr = (polar - lo_row.polar) / (hi_row.polar - lo_row.polar);
        fr = std::clamp(fr, 0.0, 1.0);

        auto row_value = [&](const Row& row) {
          if (row.count == 1) {
            Vec3 pos = poses[row.start].pos;
            return det.sample(row.start, normalized(u - pos));
          }
          double da = 2.0 * kPi / row.count;
          double pa = azim / da;
          int j0 = (int)std::floor(pa) % row.count;
          double fa = pa - std::floor(pa);
          int j1 = (j0 + 1) % row.count;
          double v0 = det.sample(row.start + j0,
                                 normalized(u - poses[row.start + j0].pos));
          double v1 = det.sample(row.start + j1,
                                 normalized(u - poses[row.start + j1].pos));
          return (1.0 - fa) * v0 + fa * v1;
        };
        out.at(d, r, c) = (1.0 - fr) * row_value(lo_row) + fr * row_value(hi_row);
      }
  }
  return out;
}

VoxelVolume spherical_inverse(const ProjectionSet& p, int n, double h,
                              int n_dir, int nu, double du, double cutoff) {
  if (p.parallel || p.geom.kind != CurveKind::Sphere)
    throw Error("spherical_inverse needs spherical-source data");
  double du0 = du > 0 ? du : h;
  int nu0 = nu;
  if (nu0 == 0) {
    double need = p.ball.radius + norm(p.ball.center);
    nu0 = 2 * (int)std::ceil(need / du0) + 2;
  }
  ParallelGrid grid = make_parallel_grid(n_dir, nu0, du0);
  return fourier_slice_inverse(rebin_to_parallel(p, grid), n, h, cutoff);
}

std::string inverse_kind_name(InverseKind k) {
  switch (k) {
    case InverseKind::FourierSlice: return "fourier_slice";
    case InverseKind::FDK: return "fdk";
    case InverseKind::Grangeat: return "grangeat";
    case InverseKind::SphericalRebin: return "spherical_rebin";
  }
  throw Error("unknown inverse kind");
}

InverseKind inverse_kind_from_name(const std::string& name) {
  if (name == "fourier_slice") return InverseKind::FourierSlice;
  if (name == "fdk") return InverseKind::FDK;
  if (name == "grangeat") return InverseKind::Grangeat;
  if (name == "spherical_rebin") return InverseKind::SphericalRebin;
  throw Error("unknown inverse kind: " + name);
}

VoxelVolume InverseOperator::apply(const ProjectionSet& p) const {
  require_invertible(p);
  switch (kind) {
    case InverseKind::FourierSlice:
      if (!p.parallel) throw Error("fourier_slice inverse needs parallel data");
      return fourier_slice_inverse(p, out_n, out_voxel, cutoff);
    case InverseKind::FDK:
      if (p.parallel || p.geom.kind != CurveKind::Circle)
        throw Error("fdk inverse needs circular cone-beam data");
      return fdk(p, out_n, out_voxel, window);
    case InverseKind::Grangeat:
      if (p.parallel || p.geom.kind == CurveKind::Sphere)
        throw Error("grangeat inverse needs a cone-beam source curve");
      return grangeat_inverse(p, out_n, out_voxel, n_dir);
    case InverseKind::SphericalRebin:
      if (p.parallel || p.geom.kind != CurveKind::Sphere)
        throw Error("spherical_rebin inverse needs spherical-source data");
      return spherical_inverse(p, out_n, out_voxel, n_dir, nu, du, cutoff);
  }
  throw Error("unknown inverse kind");
}

}  // namespace ctroi
