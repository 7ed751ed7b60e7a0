#include "ctroi/roi_iter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include <json.hpp>

#include "ctroi/errors.hpp"
#include "ctroi/projector.hpp"

namespace ctroi {

namespace {

using nlohmann::json;

void require_finite(const std::vector<double>& x, int iter, const char* stage) {
  for (double v : x)
    if (!std::isfinite(v))
      throw Error("roi_reconstruct: non-finite values at iteration " +
                  std::to_string(iter) + " after stage '" + stage + "'");
}

// Zero-filled data on the full ray set: the masked-out entries are already
// exactly zero, so dropping the mask metadata realizes the zero extension
// the inverse operators expect.
ProjectionSet zero_extend(ProjectionSet p) {
  p.roi.reset();
  p.complement_mask = false;
  std::fill(p.mask.begin(), p.mask.end(), std::uint8_t{1});
  return p;
}

ProjectionSet forward_same_sampling(const VoxelVolume& f, const ProjectionSet& g) {
  return g.parallel ? forward_parallel(f, g.grid) : forward_cone(f, g.geom);
}

double l1_roi(const VoxelVolume& v, const Ball& roi) {
  double cell = v.voxel_size * v.voxel_size * v.voxel_size;
  return cell * l1_in_ball(v, roi);
}

double l1_diff_roi(const VoxelVolume& a, const VoxelVolume& b, const Ball& roi) {
  double r2 = roi.radius * roi.radius, s = 0;
  for (int k = 0; k < a.n; ++k)
    for (int j = 0; j < a.n; ++j)
      for (int i = 0; i < a.n; ++i)
        if (norm2(a.voxel_center(i, j, k) - roi.center) <= r2)
          s += std::abs(a.at(i, j, k) - b.at(i, j, k));
  double cell = a.voxel_size * a.voxel_size * a.voxel_size;
  return cell * s;
}

// One application of sigma Z tau to zero-extended projections.
VoxelVolume smooth_invert(const ProjectionSet& p, const InverseOperator& z,
                          const MollifierKernel& mol, const IterConfig& cfg,
                          const Ball& support, int iter) {
  ProjectionSet m = mollify(p, mol);
  require_finite(m.data, iter, "mollify");
  VoxelVolume f = z.apply(zero_extend(m));
  if (!all_finite(f))
    throw Error("roi_reconstruct: non-finite values at iteration " +
                std::to_string(iter) + " after stage 'inverse'");
  if (cfg.use_image_regularizer) {
    f = wavelet_shrink(f, cfg.wavelet);
    if (!all_finite(f))
      throw Error("roi_reconstruct: non-finite values at iteration " +
                  std::to_string(iter) + " after stage 'shrink'");
  }
  mask_to_ball(f, support);
  return f;
}

VoxelVolume apply_u(const VoxelVolume& f, const ProjectionSet& g,
                    const InverseOperator& z, const Ball& roi,
                    const MollifierKernel& mol, const IterConfig& cfg,
                    const Ball& support, int iter) {
  ProjectionSet df = forward_same_sampling(f, g);
  require_finite(df.data, iter, "forward");
  ProjectionSet yc = complement(df, roi);
  return smooth_invert(yc, z, mol, cfg, support, iter);
}

double geometric_mean_ratio(const std::vector<double>& residuals) {
  double logsum = 0;
  int count = 0;
  for (std::size_t j = 1; j < residuals.size(); ++j) {
    if (residuals[j - 1] <= 0 || residuals[j] <= 0) continue;
    logsum += std::log(residuals[j] / residuals[j - 1]);
    ++count;
  }
  return count ? std::exp(logsum / count) : 0.0;
}

}  // namespace

std::string stopping_name(StoppingMode m) {
  return m == StoppingMode::Relative ? "relative" : "absolute";
}

StoppingMode stopping_from_name(const std::string& name) {
  if (name == "relative") return StoppingMode::Relative;
  if (name == "absolute") return StoppingMode::Absolute;
  throw Error("unknown stopping mode: " + name);
}

void validate_iter_config(const IterConfig& cfg) {
  if (!(cfg.b > 0)) throw Error("iter config: stopping tolerance must be positive");
  if (cfg.max_iter < 1) throw Error("iter config: max_iter must be at least 1");
  if (cfg.mollifier_scale < 1)
    throw Error("iter config: mollifier scale must be at least 1");
}

std::string report_to_json(const ReconReport& r) {
  json j;
  j["iterations_run"] = r.iterations_run;
  j["residuals"] = r.residuals;
  j["converged"] = r.converged;
  j["threshold"] = r.threshold;
  j["contraction"] = r.contraction;
  if (r.rl1 >= 0) j["rl1"] = r.rl1;
  return j.dump(2);
}

ReconReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  ReconReport r;
  r.iterations_run = j.at("iterations_run").get<int>();
  r.residuals = j.at("residuals").get<std::vector<double>>();
  r.converged = j.at("converged").get<bool>();
  r.threshold = j.at("threshold").get<double>();
  r.contraction = j.at("contraction").get<double>();
  if (j.contains("rl1")) r.rl1 = j.at("rl1").get<double>();
  return r;
}

ReconResult roi_reconstruct(const ProjectionSet& g, const InverseOperator& z,
                            const Ball& roi, const IterConfig& cfg,
                            const VoxelVolume* ground_truth) {
  validate_iter_config(cfg);
  if (dist(roi.center, g.ball.center) + roi.radius > g.ball.radius + 1e-9)
    throw Error("roi_reconstruct: roi exceeds the support ball");
  if (g.roi) {
    if (dist(g.roi->center, roi.center) > 1e-9 * (1 + g.ball.radius) ||
        std::abs(g.roi->radius - roi.radius) > 1e-9 * (1 + g.ball.radius))
      throw Error("roi_reconstruct: data was truncated to a different roi");
    if (g.complement_mask)
      throw Error("roi_reconstruct: data carries a complement mask");
  }
  Ball out_ball = inscribed_ball(z.out_n, z.out_voxel);
  if (std::abs(out_ball.radius - g.ball.radius) > 1e-9 * g.ball.radius ||
      dist(out_ball.center, g.ball.center) > 1e-9 * g.ball.radius)
    throw Error(
        "roi_reconstruct: inverse output grid does not reproduce the "
        "acquisition support ball");
  MollifierKernel mol = make_mollifier(cfg.mollifier_scale);

  VoxelVolume f0 = smooth_invert(g, z, mol, cfg, g.ball, 0);

  ReconResult res;
  res.volume = f0;
  VoxelVolume& f = res.volume;
  ReconReport& rep = res.report;
  for (int j = 1; j <= cfg.max_iter; ++j) {
    VoxelVolume uf = apply_u(f, g, z, roi, mol, cfg, g.ball, j);
    VoxelVolume next = f0;
    for (std::size_t i = 0; i < next.values.size(); ++i)
      next.values[i] += uf.values[i];
    mask_to_ball(next, g.ball);
    require_finite(next.values, j, "update");

    double residual = l1_diff_roi(next, f, roi);
    double threshold =
        cfg.stopping == StoppingMode::Absolute ? cfg.b : cfg.b * l1_roi(f, roi);
    rep.residuals.push_back(residual);
    rep.iterations_run = j;
    rep.threshold = threshold;
    f = std::move(next);
    if (residual <= threshold) {
      rep.converged = true;
      break;
    }
  }
  rep.contraction = geometric_mean_ratio(rep.residuals);
  if (ground_truth) rep.rl1 = rl1_error(*ground_truth, f, roi);
  return res;
}

ContractionEstimate estimate_contraction(SourceGeometry geom,
                                         const InverseOperator& z,
                                         const Ball& roi, const IterConfig& cfg,
                                         int trials, int steps, unsigned seed) {
  validate_iter_config(cfg);
  if (trials < 3) throw Error("estimate_contraction: need at least 3 trials");
  if (steps < 1) throw Error("estimate_contraction: need at least 1 step");
  Ball support = inscribed_ball(z.out_n, z.out_voxel);
  validate_geometry(geom, support);
  MollifierKernel mol = make_mollifier(cfg.mollifier_scale);

  // Carries the validated geometry so every U application reuses the same
  // sampling; apply_u reprojects from it, the data itself is never read.
  ProjectionSet shape;
  shape.geom = geom;
  shape.ball = support;

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  ContractionEstimate est;
  double logsum = 0;
  int count = 0;
  for (int t = 0; t < trials; ++t) {
    VoxelVolume v = make_volume(z.out_n, z.out_voxel);
    for (double& x : v.values) x = uni(rng);
    mask_to_ball(v, support);
    v = wavelet_shrink(v, cfg.wavelet);
    mask_to_ball(v, support);

    double prev = max_abs(v);
    double worst = 0;
    for (int s = 0; s < steps; ++s) {
      v = apply_u(v, shape, z, roi, mol, cfg, support, s + 1);
      double cur = max_abs(v);
      if (prev <= 0) break;
      double ratio = cur / prev;
      worst = std::max(worst, ratio);
      logsum += std::log(std::max(ratio, 1e-300));
      ++count;
      prev = cur;
    }
    est.trial_max.push_back(worst);
  }
  est.factor = count ? std::exp(logsum / count) : 0.0;
  return est;
}

double rl1_error(const VoxelVolume& f, const VoxelVolume& fhat, const Ball& roi) {
  if (f.n != fhat.n || std::abs(f.voxel_size - fhat.voxel_size) > 1e-12 ||
      dist(f.origin, fhat.origin) > 1e-12)
    throw Error("rl1_error: volumes live on different grids");
  double r2 = roi.radius * roi.radius, num = 0, den = 0;
  for (int k = 0; k < f.n; ++k)
    for (int j = 0; j < f.n; ++j)
      for (int i = 0; i < f.n; ++i) {
        if (norm2(f.voxel_center(i, j, k) - roi.center) > r2) continue;
        num += std::abs(f.at(i, j, k) - fhat.at(i, j, k));
        den += std::abs(f.at(i, j, k));
      }
  if (den == 0) throw Error("rl1_error: reference is zero over the roi");
  return num / den;
}

std::string sweep_to_json(const SweepResult& s) {
  json rows = json::array();
  for (const SweepRow& r : s.rows) {
    json row;
    row["radius"] = r.radius;
    if (r.rl1 >= 0) row["rl1"] = r.rl1;
    row["iterations"] = r.iterations;
    row["converged"] = r.converged;
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(row);
  }
  json j;
  j["rows"] = rows;
  j["found"] = s.found;
  if (s.found) j["critical_radius"] = s.critical_radius;
  return j.dump(2);
}

SweepResult critical_radius_sweep(const Phantom& ph, SourceGeometry geom,
                                  const InverseOperator& z,
                                  const std::vector<double>& radii,
                                  double epsilon, const IterConfig& cfg) {
  if (radii.empty()) throw Error("critical_radius_sweep: no radii given");
  if (!std::is_sorted(radii.begin(), radii.end()))
    throw Error("critical_radius_sweep: radii must be ascending");
  validate_iter_config(cfg);
  Ball support = inscribed_ball(z.out_n, z.out_voxel);
  validate_geometry(geom, support);
  VoxelVolume truth = voxelize(ph, z.out_n, z.out_voxel, true);
  mask_to_ball(truth, support);
  ProjectionSet full = forward_cone(truth, geom);

  SweepResult out;
  for (double radius : radii) {
    SweepRow row;
    row.radius = radius;
    try {
      Ball roi{support.center, radius};
      ReconResult rec = roi_reconstruct(truncate(full, roi), z, roi, cfg, &truth);
      row.rl1 = rec.report.rl1;
      row.iterations = rec.report.iterations_run;
      row.converged = rec.report.converged;
      if (!out.found && row.converged && row.rl1 <= epsilon) {
        out.found = true;
        out.critical_radius = radius;
      }
    } catch (const Error& e) {
      row.note = e.what();
    }
    out.rows.push_back(row);
  }
  return out;
}

EpsilonInverseCheck epsilon_inverse_check(const VoxelVolume& f,
                                          SourceGeometry geom,
                                          const InverseOperator& z,
                                          const Ball& roi,
                                          const IterConfig& cfg,
                                          double epsilon) {
  Ball support = inscribed_ball(z.out_n, z.out_voxel);
  validate_geometry(geom, support);
  double fmax = max_abs(f);
  if (fmax == 0) throw Error("epsilon_inverse_check: reference volume is zero");

  EpsilonInverseCheck chk;
  chk.epsilon = epsilon;
  try {
    ProjectionSet data = truncate(forward_cone(f, geom), roi);
    ReconResult rec = roi_reconstruct(data, z, roi, cfg);
    double worst = 0;
    double r2 = support.radius * support.radius;
    for (int k = 0; k < f.n; ++k)
      for (int j = 0; j < f.n; ++j)
        for (int i = 0; i < f.n; ++i) {
          if (norm2(f.voxel_center(i, j, k) - support.center) > r2) continue;
          worst = std::max(worst,
                           std::abs(f.at(i, j, k) - rec.volume.at(i, j, k)));
        }
    chk.measured = worst / fmax;
  } catch (const Error& e) {
    chk.measured = std::numeric_limits<double>::infinity();
    chk.note = e.what();
  }
  chk.pass = chk.measured <= epsilon;
  return chk;
}

}  // namespace ctroi
