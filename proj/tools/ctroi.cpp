#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "ctroi/errors.hpp"
#include "ctroi/geometry.hpp"
#include "ctroi/inversion.hpp"
#include "ctroi/io.hpp"
#include "ctroi/phantom.hpp"
#include "ctroi/projector.hpp"
#include "ctroi/roi_iter.hpp"
#include "ctroi/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ctroi;

namespace {

// Bad invocations and malformed configs exit 2; domain failures exit 1.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

struct RunConfig {
  int n = 64;
  double voxel_size = 1.0;
  std::string phantom = "shepp-logan";  // or path to an ellipsoid json
  std::string volume;                   // optional raw volume to project
  std::optional<SourceGeometry> geometry;
  Vec3 roi_center{0, 0, 0};
  double roi_radius = 0.0;           // world units; exclusive with fraction
  double roi_radius_fraction = 0.0;  // of the support ball radius
  InverseKind inverse_kind = InverseKind::FDK;
  bool inverse_kind_set = false;
  double cutoff = 0.9;
  RampWindow window = RampWindow::RamLak;
  int n_dir = 256;
  int rebin_nu = 0;
  double rebin_du = 0.0;
  IterConfig iter;
  std::vector<double> sweep_fractions;
  double sweep_epsilon = 0.1;
  long seed = 1;
};

double num_at(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

RampWindow window_from_name(const std::string& name) {
  if (name == "ram-lak" || name == "ramlak") return RampWindow::RamLak;
  if (name == "hamming") return RampWindow::Hamming;
  throw UsageError("config: unknown ramp window: " + name);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config not found: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  RunConfig cfg;
  try {
    cfg.n = (int)num_at(j, "n", cfg.n);
    cfg.voxel_size = num_at(j, "voxel_size", cfg.voxel_size);
    if (j.contains("phantom")) cfg.phantom = j.at("phantom").get<std::string>();
    if (j.contains("volume")) cfg.volume = j.at("volume").get<std::string>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<long>();
    if (j.contains("geometry"))
      cfg.geometry = geometry_from_json(j.at("geometry").dump());
    if (j.contains("roi")) {
      const json& r = j.at("roi");
      if (r.contains("center")) {
        auto c = r.at("center").get<std::vector<double>>();
        if (c.size() != 3) throw UsageError("config: roi center needs 3 numbers");
        cfg.roi_center = {c[0], c[1], c[2]};
      }
      cfg.roi_radius = num_at(r, "radius", 0.0);
      cfg.roi_radius_fraction = num_at(r, "radius_fraction", 0.0);
    }
    if (j.contains("inverse")) {
      const json& z = j.at("inverse");
      if (z.contains("kind")) {
        cfg.inverse_kind = inverse_kind_from_name(z.at("kind").get<std::string>());
        cfg.inverse_kind_set = true;
      }
      cfg.cutoff = num_at(z, "cutoff", cfg.cutoff);
      if (z.contains("window"))
        cfg.window = window_from_name(z.at("window").get<std::string>());
      cfg.n_dir = (int)num_at(z, "n_dir", cfg.n_dir);
      cfg.rebin_nu = (int)num_at(z, "nu", cfg.rebin_nu);
      cfg.rebin_du = num_at(z, "du", cfg.rebin_du);
    }
    if (j.contains("iter")) {
      const json& it = j.at("iter");
      cfg.iter.b = num_at(it, "b", cfg.iter.b);
      cfg.iter.max_iter = (int)num_at(it, "max_iter", cfg.iter.max_iter);
      if (it.contains("stopping"))
        cfg.iter.stopping = stopping_from_name(it.at("stopping").get<std::string>());
      cfg.iter.mollifier_scale =
          (int)num_at(it, "mollifier_scale", cfg.iter.mollifier_scale);
      if (it.contains("wavelet")) {
        const json& w = it.at("wavelet");
        cfg.iter.wavelet.levels = (int)num_at(w, "levels", cfg.iter.wavelet.levels);
        cfg.iter.wavelet.keep_fraction =
            num_at(w, "keep_fraction", cfg.iter.wavelet.keep_fraction);
        if (w.contains("hard")) cfg.iter.wavelet.hard = w.at("hard").get<bool>();
      }
      if (it.contains("use_image_regularizer"))
        cfg.iter.use_image_regularizer =
            it.at("use_image_regularizer").get<bool>();
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      if (s.contains("radii_fractions"))
        cfg.sweep_fractions = s.at("radii_fractions").get<std::vector<double>>();
      cfg.sweep_epsilon = num_at(s, "epsilon", cfg.sweep_epsilon);
    }
  } catch (const json::exception& e) {
    throw UsageError("config: " + std::string(e.what()));
  } catch (const Error& e) {
    throw UsageError("config: " + std::string(e.what()));
  }
  if (cfg.n < 8) throw UsageError("config: n must be at least 8");
  if (cfg.voxel_size <= 0) throw UsageError("config: voxel_size must be positive");
  return cfg;
}

Ball support_ball(const RunConfig& cfg) {
  return inscribed_ball(cfg.n, cfg.voxel_size);
}

Ball roi_ball(const RunConfig& cfg) {
  Ball b = support_ball(cfg);
  double r = cfg.roi_radius;
  if (cfg.roi_radius_fraction > 0) r = cfg.roi_radius_fraction * b.radius;
  if (r <= 0) throw UsageError("config: roi radius (or radius_fraction) required");
  return Ball{cfg.roi_center, r};
}

SourceGeometry geometry_of(const RunConfig& cfg) {
  if (!cfg.geometry) throw UsageError("config: geometry required for this command");
  return *cfg.geometry;
}

Phantom phantom_of(const RunConfig& cfg) {
  if (cfg.phantom == "shepp-logan")
    return scaled(shepp_logan_3d(), support_ball(cfg).radius);
  std::ifstream in(cfg.phantom);
  if (!in) throw UsageError("config: phantom file not found: " + cfg.phantom);
  std::stringstream ss;
  ss << in.rdbuf();
  return phantom_from_json(ss.str());
}

InverseKind default_kind(const SourceGeometry& g) {
  switch (g.kind) {
    case CurveKind::Sphere: return InverseKind::SphericalRebin;
    case CurveKind::Circle: return InverseKind::FDK;
    default: return InverseKind::Grangeat;
  }
}

InverseOperator inverse_of(const RunConfig& cfg) {
  InverseOperator z;
  z.kind = cfg.inverse_kind_set || !cfg.geometry ? cfg.inverse_kind
                                                 : default_kind(*cfg.geometry);
  z.out_n = cfg.n;
  z.out_voxel = cfg.voxel_size;
  z.cutoff = cfg.cutoff;
  z.window = cfg.window;
  z.n_dir = cfg.n_dir;
  z.nu = cfg.rebin_nu;
  z.du = cfg.rebin_du;
  return z;
}

bool all_exist(const std::vector<std::string>& paths) {
  return std::all_of(paths.begin(), paths.end(),
                     [](const std::string& p) { return fs::exists(p); });
}

// Shared --config/--out/--seed/--workers/--force plumbing per subcommand.
struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  long seed = -1;  // overrides the config seed when >= 0
  int workers = 0;
  bool force = false;

  void attach(CLI::App* cmd, bool config_required = true) {
    auto* c = cmd->add_option("--config", config_path, "run-config json");
    if (config_required) c->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--workers", workers, "openmp thread count");
    cmd->add_flag("--force", force, "rewrite existing outputs");
  }

  RunConfig load() const {
    RunConfig cfg = load_config(config_path);
    if (seed >= 0) cfg.seed = seed;
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#endif
    fs::create_directories(out_dir);
    return cfg;
  }

  std::string path(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }
};

int cmd_phantom(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string raw = args.path("phantom.raw");
  if (!args.force && all_exist({raw, sidecar_path(raw)})) {
    std::cout << "phantom: up to date\n";
    return 0;
  }
  Phantom ph = phantom_of(cfg);
  VoxelVolume v = voxelize(ph, cfg.n, cfg.voxel_size, true);
  write_volume(v, raw);
  std::cout << "phantom: wrote " << raw << "\n";
  return 0;
}

int cmd_project(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string raw = args.path("projections.raw");
  if (!args.force && fs::exists(raw)) {
    std::cout << "project: up to date\n";
    return 0;
  }
  SourceGeometry geom = geometry_of(cfg);
  ProjectionSet p;
  if (!cfg.volume.empty()) {
    if (!fs::exists(cfg.volume))
      throw UsageError("config: volume file not found: " + cfg.volume);
    p = forward_cone(read_volume(cfg.volume), geom);
  } else {
    p = forward_cone(phantom_of(cfg), geom);
  }
  write_projections(p, raw);
  std::cout << "project: wrote " << raw << " (" << p.views << " views)\n";
  return 0;
}

int cmd_truncate(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string raw = args.path("truncated.raw");
  if (!args.force && fs::exists(raw)) {
    std::cout << "truncate: up to date\n";
    return 0;
  }
  std::string src = args.path("projections.raw");
  if (!fs::exists(src))
    throw Error("truncate: missing " + src + " (run the project command first)");
  ProjectionSet t = truncate(read_projections(src), roi_ball(cfg));
  write_projections(t, raw);
  std::cout << "truncate: wrote " << raw << "\n";
  return 0;
}

int cmd_reconstruct(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string raw = args.path("recon.raw");
  std::string report_path = args.path("recon_report.json");
  if (!args.force && all_exist({raw, report_path})) {
    std::cout << "reconstruct: up to date\n";
    return 0;
  }
  std::string src = args.path("truncated.raw");
  if (!fs::exists(src))
    throw Error("reconstruct: missing " + src +
                " (run the truncate command first)");
  ProjectionSet g = read_projections(src);
  InverseOperator z = inverse_of(cfg);

  VoxelVolume truth;
  const VoxelVolume* truth_ptr = nullptr;
  if (cfg.volume.empty()) {
    truth = voxelize(phantom_of(cfg), cfg.n, cfg.voxel_size, true);
    mask_to_ball(truth, support_ball(cfg));
    truth_ptr = &truth;
  }
  ReconResult res = roi_reconstruct(g, z, roi_ball(cfg), cfg.iter, truth_ptr);

  write_volume(res.volume, raw);
  std::ofstream rep(report_path, std::ios::trunc);
  rep << report_to_json(res.report) << "\n";
  if (!rep) throw Error("reconstruct: cannot write " + report_path);
  write_mid_slices(res.volume, args.path("recon"));
  write_profile_csv(res.volume, args.path("recon_profile.csv"));
  std::cout << "reconstruct: " << (res.report.converged ? "converged" : "capped")
            << " after " << res.report.iterations_run << " iterations\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string jpath = args.path("sweep.json");
  std::string cpath = args.path("sweep.csv");
  if (!args.force && all_exist({jpath, cpath})) {
    std::cout << "sweep: up to date\n";
    return 0;
  }
  if (cfg.sweep_fractions.empty())
    throw UsageError("config: sweep.radii_fractions required");
  Ball b = support_ball(cfg);
  std::vector<double> radii;
  for (double f : cfg.sweep_fractions) radii.push_back(f * b.radius);
  SweepResult res = critical_radius_sweep(phantom_of(cfg), geometry_of(cfg),
                                          inverse_of(cfg), radii,
                                          cfg.sweep_epsilon, cfg.iter);
  std::ofstream js(jpath, std::ios::trunc);
  js << sweep_to_json(res) << "\n";
  if (!js) throw Error("sweep: cannot write " + jpath);

  std::vector<std::vector<std::string>> rows;
  char buf[64];
  for (const SweepRow& r : res.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.radius);
    std::string radius = buf;
    std::string rl1 = "";
    if (r.rl1 >= 0) {
      std::snprintf(buf, sizeof buf, "%.17g", r.rl1);
      rl1 = buf;
    }
    rows.push_back({radius, rl1, std::to_string(r.iterations),
                    r.converged ? "true" : "false", r.note});
  }
  write_csv(cpath, {"radius", "rl1", "iterations", "converged", "note"}, rows);
  if (res.found)
    std::cout << "sweep: critical radius " << res.critical_radius << "\n";
  else
    std::cout << "sweep: no tested radius reaches epsilon "
              << cfg.sweep_epsilon << "\n";
  return 0;
}

int cmd_tuy(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string jpath = args.path("tuy.json");
  if (!args.force && fs::exists(jpath)) {
    std::ifstream in(jpath);
    json j;
    in >> j;
    bool pass = j.at("pass").get<bool>();
    std::cout << "tuy: up to date (" << (pass ? "pass" : "fail") << ")\n";
    return pass ? 0 : 1;
  }
  SourceGeometry geom = geometry_of(cfg);
  Ball b = support_ball(cfg);
  validate_geometry(geom, b);
  TuyReport rep = tuy_check(geom, b);
  json j;
  j["pass"] = rep.pass;
  j["worst_margin"] = rep.worst_margin;
  j["note"] = rep.note;
  json fails = json::array();
  for (std::size_t i = 0; i < rep.failures.size() && i < 8; ++i) {
    const TuyFailure& f = rep.failures[i];
    fails.push_back({{"point", {f.point.x, f.point.y, f.point.z}},
                     {"normal", {f.normal.x, f.normal.y, f.normal.z}}});
  }
  j["failures"] = fails;
  std::ofstream out(jpath, std::ios::trunc);
  out << j.dump(2) << "\n";
  if (!out) throw Error("tuy: cannot write " + jpath);
  std::cout << "tuy: " << (rep.pass ? "pass" : "fail") << " (worst margin "
            << rep.worst_margin << ")\n";
  return rep.pass ? 0 : 1;
}

int cmd_metrics(const CommonArgs& args) {
  RunConfig cfg = args.load();
  std::string cpath = args.path("metrics.csv");
  std::string tpath = args.path("metrics.txt");
  if (!args.force && all_exist({cpath, tpath})) {
    std::cout << "metrics: up to date\n";
    return 0;
  }
  std::string report_path = args.path("recon_report.json");
  if (!fs::exists(report_path))
    throw Error("metrics: missing " + report_path +
                " (run the reconstruct command first)");
  std::ifstream in(report_path);
  std::stringstream ss;
  ss << in.rdbuf();
  ReconReport rep = report_from_json(ss.str());
  Ball roi = roi_ball(cfg);

  std::string density = cfg.volume.empty() ? cfg.phantom : cfg.volume;
  std::string geometry =
      cfg.geometry ? kind_name(cfg.geometry->kind) : std::string("none");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", roi.radius);
  std::string radius = buf;
  std::string rl1 = "";
  if (rep.rl1 >= 0) {
    std::snprintf(buf, sizeof buf, "%.17g", rep.rl1);
    rl1 = buf;
  }
  write_csv(cpath,
            {"density", "geometry", "roi_radius", "rl1", "iterations",
             "converged"},
            {{density, geometry, radius, rl1,
              std::to_string(rep.iterations_run),
              rep.converged ? "true" : "false"}});

  std::ostringstream txt;
  txt << "density      " << density << "\n";
  txt << "geometry     " << geometry << "\n";
  txt << "roi_radius   " << roi.radius << "\n";
  txt << "iterations   " << rep.iterations_run << "\n";
  txt << "converged    " << (rep.converged ? "yes" : "no") << "\n";
  if (rep.rl1 >= 0) txt << "rl1          " << rep.rl1 << "\n";

  std::string trunc_path = args.path("truncated.raw");
  if (cfg.geometry && fs::exists(trunc_path)) {
    ProjectionSet t = read_projections(trunc_path);
    SourceGeometry geom = *cfg.geometry;
    Ball b = support_ball(cfg);
    validate_geometry(geom, b);
    double measured = masked_fraction(t);
    double predicted =
        truncated_ray_volume(geom, b, roi) / ray_set_volume(geom, b);
    txt << "masked_fraction_measured  " << measured << "\n";
    txt << "masked_fraction_predicted " << predicted << "\n";
    json jm;
    jm["measured"] = measured;
    jm["predicted"] = predicted;
    std::ofstream mj(args.path("mask_check.json"), std::ios::trunc);
    mj << jm.dump(2) << "\n";
  }
  std::ofstream out(tpath, std::ios::trunc);
  out << txt.str();
  if (!out) throw Error("metrics: cannot write " + tpath);
  std::cout << "metrics: wrote " << cpath << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cone-beam roi reconstruction toolkit"};
  app.require_subcommand(1);

  CommonArgs phantom_args, project_args, truncate_args, reconstruct_args,
      sweep_args, tuy_args, metrics_args;
  phantom_args.attach(app.add_subcommand("phantom", "voxelize the phantom"));
  project_args.attach(app.add_subcommand("project", "simulate projections"));
  truncate_args.attach(app.add_subcommand("truncate", "mask rays to the roi"));
  reconstruct_args.attach(
      app.add_subcommand("reconstruct", "run the roi iteration"));
  sweep_args.attach(app.add_subcommand("sweep", "critical-radius sweep"));
  tuy_args.attach(app.add_subcommand("tuy", "check the completeness condition"));
  metrics_args.attach(app.add_subcommand("metrics", "summarize a run"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("phantom")) return cmd_phantom(phantom_args);
    if (app.got_subcommand("project")) return cmd_project(project_args);
    if (app.got_subcommand("truncate")) return cmd_truncate(truncate_args);
    if (app.got_subcommand("reconstruct"))
      return cmd_reconstruct(reconstruct_args);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_args);
    if (app.got_subcommand("tuy")) return cmd_tuy(tuy_args);
    if (app.got_subcommand("metrics")) return cmd_metrics(metrics_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
