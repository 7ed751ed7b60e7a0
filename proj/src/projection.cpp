#include "ctroi/projection.hpp"

#include <fstream>

#include <json.hpp>

#include "ctroi/errors.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

ParallelGrid make_parallel_grid(int n_dir, int nu, double du) {
  if (n_dir < 1 || nu < 2 || du <= 0) throw Error("make_parallel_grid: bad parameters");
  ParallelGrid g;
  g.nu = nu;
  g.du = du;
  g.dirs = fibonacci_hemisphere(n_dir);
  for (Vec3 d : g.dirs) {
    Vec3 up = std::abs(d.z) > 0.999 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
    Vec3 eu = normalized(cross(up, d));
    g.eu.push_back(eu);
    g.ev.push_back(cross(d, eu));
  }
  return g;
}

void validate_grid(const ParallelGrid& g, const Ball& b) {
  double cover = (g.nu - 1 - g.nu / 2 + 0.5) * g.du;
  if (cover < b.radius + norm(b.center))
    throw Error("parallel grid does not cover the shadow of the target ball");
}

Ray projection_ray(const ProjectionSet& p, const std::vector<SourcePose>& poses,
                   int view, int r, int c) {
  if (p.parallel) {
    const auto& g = p.grid;
    Vec3 u = (c - g.nu / 2) * g.du * g.eu[view] + (r - g.nu / 2) * g.du * g.ev[view];
    return {u, g.dirs[view]};
  }
  const SourcePose& s = poses[view];
  Vec3 pix = s.det_center + (c - p.cols / 2) * p.geom.det.spacing * s.eu +
             (r - p.rows / 2) * p.geom.det.spacing * s.ev;
  return {s.pos, normalized(pix - s.pos)};
}

void write_projections(const ProjectionSet& p, const std::string& raw_path) {
  std::ofstream f(raw_path, std::ios::binary);
  if (!f) throw Error("cannot write " + raw_path);
  std::vector<float> buf(p.data.begin(), p.data.end());
  f.write((const char*)buf.data(), (std::streamsize)(buf.size() * sizeof(float)));
  if (!f) throw Error("short write to " + raw_path);

  std::string mask_path = raw_path + ".mask";
  std::ofstream m(mask_path, std::ios::binary);
  if (!m) throw Error("cannot write " + mask_path);
  std::vector<std::uint8_t> packed((p.mask.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < p.mask.size(); ++i)
    if (p.mask[i]) packed[i / 8] |= (std::uint8_t)(1u << (i % 8));
  m.write((const char*)packed.data(), (std::streamsize)packed.size());

  nlohmann::json j;
  j["parallel"] = p.parallel;
  if (p.parallel) {
    j["grid"] = {{"n_dir", (int)p.grid.dirs.size()}, {"nu", p.grid.nu}, {"du", p.grid.du}};
  } else {
    j["geometry"] = nlohmann::json::parse(geometry_to_json(p.geom));
    j["geometry_hash"] = geometry_hash(p.geom);
  }
  j["ball"] = {{"center", {p.ball.center.x, p.ball.center.y, p.ball.center.z}},
               {"radius", p.ball.radius}};
  if (p.roi)
    j["roi"] = {{"center", {p.roi->center.x, p.roi->center.y, p.roi->center.z}},
                {"radius", p.roi->radius}};
  j["complement_mask"] = p.complement_mask;
  j["shape"] = {{"views", p.views}, {"rows", p.rows}, {"cols", p.cols}};
  j["mask_file"] = mask_path.substr(mask_path.find_last_of('/') + 1);
  std::ofstream s(sidecar_path(raw_path));
  if (!s) throw Error("cannot write " + sidecar_path(raw_path));
  s << j.dump(2) << "\n";
}

ProjectionSet read_projections(const std::string& raw_path) {
  std::ifstream sf(sidecar_path(raw_path));
  if (!sf) throw Error("cannot read " + sidecar_path(raw_path));
  nlohmann::json j;
  try {
    sf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("projection sidecar: " + std::string(e.what()));
  }
  ProjectionSet p;
  try {
    p.parallel = j.at("parallel").get<bool>();
    if (p.parallel) {
      auto g = j.at("grid");
      p.grid = make_parallel_grid(g.at("n_dir").get<int>(), g.at("nu").get<int>(),
                                  g.at("du").get<double>());
    } else {
      p.geom = geometry_from_json(j.at("geometry").dump());
    }
    auto b = j.at("ball");
    auto bc = b.at("center");
    p.ball = {{bc.at(0).get<double>(), bc.at(1).get<double>(), bc.at(2).get<double>()},
              b.at("radius").get<double>()};
    if (j.contains("roi")) {
      auto r = j.at("roi");
      auto rc = r.at("center");
      p.roi = Ball{{rc.at(0).get<double>(), rc.at(1).get<double>(), rc.at(2).get<double>()},
                   r.at("radius").get<double>()};
    }
    p.complement_mask = j.value("complement_mask", false);
    auto sh = j.at("shape");
    p.views = sh.at("views").get<int>();
    p.rows = sh.at("rows").get<int>();
    p.cols = sh.at("cols").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("projection sidecar: " + std::string(e.what()));
  }

  std::size_t count = (std::size_t)p.views * p.rows * p.cols;
  std::ifstream f(raw_path, std::ios::binary);
  if (!f) throw Error("cannot read " + raw_path);
  std::vector<float> buf(count);
  f.read((char*)buf.data(), (std::streamsize)(count * sizeof(float)));
  if ((std::size_t)f.gcount() != count * sizeof(float))
    throw Error("truncated projection file " + raw_path);
  p.data.assign(buf.begin(), buf.end());

  std::ifstream m(raw_path + ".mask", std::ios::binary);
  if (!m) throw Error("cannot read " + raw_path + ".mask");
  std::vector<std::uint8_t> packed((count + 7) / 8);
  m.read((char*)packed.data(), (std::streamsize)packed.size());
  if ((std::size_t)m.gcount() != packed.size())
    throw Error("truncated mask file " + raw_path + ".mask");
  p.mask.assign(count, 0);
  for (std::size_t i = 0; i < count; ++i)
    p.mask[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return p;
}

}  // namespace ctroi
