#include "ctroi/volume.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ctroi/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw volume format is little-endian");

namespace ctroi {

double VoxelVolume::trilinear(Vec3 world) const {
  double gx = (world.x - origin.x) / voxel_size;
  double gy = (world.y - origin.y) / voxel_size;
  double gz = (world.z - origin.z) / voxel_size;
  int i0 = (int)std::floor(gx), j0 = (int)std::floor(gy), k0 = (int)std::floor(gz);
  double fx = gx - i0, fy = gy - j0, fz = gz - k0;
  if (i0 >= 0 && i0 + 1 < n && j0 >= 0 && j0 + 1 < n && k0 >= 0 && k0 + 1 < n) {
    const double* p = values.data() + idx(i0, j0, k0);
    std::size_t sj = n, sk = (std::size_t)n * n;
    double c00 = p[0] + fx * (p[1] - p[0]);
    double c10 = p[sj] + fx * (p[sj + 1] - p[sj]);
    double c01 = p[sk] + fx * (p[sk + 1] - p[sk]);
    double c11 = p[sk + sj] + fx * (p[sk + sj + 1] - p[sk + sj]);
    double c0 = c00 + fy * (c10 - c00);
    double c1 = c01 + fy * (c11 - c01);
    return c0 + fz * (c1 - c0);
  }
  if (i0 < -1 || i0 >= n || j0 < -1 || j0 >= n || k0 < -1 || k0 >= n) return 0.0;
  auto fetch = [&](int i, int j, int k) {
    return (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n) ? 0.0 : at(i, j, k);
  };
  double acc = 0;
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        double w = (di ? fx : 1 - fx) * (dj ? fy : 1 - fy) * (dk ? fz : 1 - fz);
        acc += w * fetch(i0 + di, j0 + dj, k0 + dk);
      }
  return acc;
}

VoxelVolume make_volume(int n, double voxel_size) {
  if (n < 2) throw Error("make_volume: grid side too small");
  VoxelVolume v;
  v.n = n;
  v.voxel_size = voxel_size;
  double c = -(n / 2) * voxel_size;
  v.origin = {c, c, c};
  v.values.assign((std::size_t)n * n * n, 0.0);
  return v;
}

Ball inscribed_ball(int n, double voxel_size) {
  return Ball{{0, 0, 0}, (0.5 * n - 1.0) * voxel_size};
}

Ball inscribed_ball(const VoxelVolume& v) { return inscribed_ball(v.n, v.voxel_size); }

void mask_to_ball(VoxelVolume& v, const Ball& b) {
  double r2 = b.radius * b.radius;
  for (int k = 0; k < v.n; ++k)
    for (int j = 0; j < v.n; ++j)
      for (int i = 0; i < v.n; ++i)
        if (norm2(v.voxel_center(i, j, k) - b.center) > r2) v.at(i, j, k) = 0.0;
}

double max_abs(const VoxelVolume& v) {
  double m = 0;
  for (double x : v.values) m = std::max(m, std::abs(x));
  return m;
}

double l1_in_ball(const VoxelVolume& v, const Ball& b) {
  double r2 = b.radius * b.radius, s = 0;
  for (int k = 0; k < v.n; ++k)
    for (int j = 0; j < v.n; ++j)
      for (int i = 0; i < v.n; ++i)
        if (norm2(v.voxel_center(i, j, k) - b.center) <= r2)
          s += std::abs(v.at(i, j, k));
  return s;
}

double l2_norm(const VoxelVolume& v) {
  double s = 0;
  for (double x : v.values) s += x * x;
  return std::sqrt(s);
}

bool all_finite(const VoxelVolume& v) {
  for (double x : v.values)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string sidecar_path(const std::string& raw_path) {
  auto dot = raw_path.find_last_of('.');
  auto slash = raw_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return raw_path + ".json";
  return raw_path.substr(0, dot) + ".json";
}

void write_volume(const VoxelVolume& v, const std::string& raw_path) {
  std::ofstream f(raw_path, std::ios::binary);
  if (!f) throw Error("cannot write " + raw_path);
  std::vector<float> buf(v.values.begin(), v.values.end());
  f.write((const char*)buf.data(), (std::streamsize)(buf.size() * sizeof(float)));
  if (!f) throw Error("short write to " + raw_path);

  nlohmann::json j;
  j["n"] = v.n;
  j["voxel_size"] = v.voxel_size;
  j["origin"] = {v.origin.x, v.origin.y, v.origin.z};
  std::ofstream s(sidecar_path(raw_path));
  if (!s) throw Error("cannot write " + sidecar_path(raw_path));
  s << j.dump(2) << "\n";
}

VoxelVolume read_volume(const std::string& raw_path) {
  std::ifstream s(sidecar_path(raw_path));
  if (!s) throw Error("cannot read " + sidecar_path(raw_path));
  nlohmann::json j;
  try {
    s >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("volume sidecar: " + std::string(e.what()));
  }
  VoxelVolume v;
  try {
    v.n = j.at("n").get<int>();
    v.voxel_size = j.at("voxel_size").get<double>();
    auto o = j.at("origin");
    v.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw Error("volume sidecar: " + std::string(e.what()));
  }
  std::size_t count = (std::size_t)v.n * v.n * v.n;
  std::ifstream f(raw_path, std::ios::binary);
  if (!f) throw Error("cannot read " + raw_path);
  std::vector<float> buf(count);
  f.read((char*)buf.data(), (std::streamsize)(count * sizeof(float)));
  if ((std::size_t)f.gcount() != count * sizeof(float))
    throw Error("truncated volume file " + raw_path);
  v.values.assign(buf.begin(), buf.end());
  return v;
}

}  // namespace ctroi
