#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ctroi/vec.hpp"

namespace ctroi {

// Cubic grid of densities, x fastest. Voxel (i,j,k) center sits at
// origin + voxel_size*(i,j,k); the default grid is centered so that voxel
// n/2 lies at the world origin.
struct VoxelVolume {
  int n = 0;
  double voxel_size = 1.0;
  Vec3 origin;
  std::vector<double> values;

  std::size_t idx(int i, int j, int k) const {
    return ((std::size_t)k * n + j) * n + i;
  }
  double& at(int i, int j, int k) { return values[idx(i, j, k)]; }
  double at(int i, int j, int k) const { return values[idx(i, j, k)]; }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + voxel_size * Vec3{(double)i, (double)j, (double)k};
  }

  // Zero outside the sample hull, zero-padded at the boundary.
  double trilinear(Vec3 world) const;
};

VoxelVolume make_volume(int n, double voxel_size);

// The object support ball B for a default centered grid.
Ball inscribed_ball(const VoxelVolume& v);
Ball inscribed_ball(int n, double voxel_size);

void mask_to_ball(VoxelVolume& v, const Ball& b);

double max_abs(const VoxelVolume& v);
double l1_in_ball(const VoxelVolume& v, const Ball& b);
double l2_norm(const VoxelVolume& v);
bool all_finite(const VoxelVolume& v);

// Raw float32 little-endian x-fastest, JSON sidecar (n, voxel_size, origin)
// next to it with the extension replaced by .json.
void write_volume(const VoxelVolume& v, const std::string& raw_path);
VoxelVolume read_volume(const std::string& raw_path);

std::string sidecar_path(const std::string& raw_path);

}  // namespace ctroi
