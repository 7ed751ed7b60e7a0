#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctroi/geometry.hpp"
#include "ctroi/vec.hpp"

namespace ctroi {

// Directions over the upper hemisphere with a square u-grid in each plane
// through the origin orthogonal to the direction. Sample (r, c) sits at
// (c - nu/2)*du*eu + (r - nu/2)*du*ev.
struct ParallelGrid {
  std::vector<Vec3> dirs;
  std::vector<Vec3> eu, ev;
  int nu = 0;
  double du = 1.0;
};

ParallelGrid make_parallel_grid(int n_dir, int nu, double du);
void validate_grid(const ParallelGrid& g, const Ball& b);

// Sampled line integrals: one detector image per source (cone) or one
// u-grid image per direction (parallel). mask marks rays kept by the last
// truncation; masked-out entries are exactly 0.
struct ProjectionSet {
  bool parallel = false;
  SourceGeometry geom;  // cone kinds
  ParallelGrid grid;    // parallel
  Ball ball;            // acquisition support ball B
  std::optional<Ball> roi;
  bool complement_mask = false;  // mask covers R_B - R_C instead of R_C
  int views = 0, rows = 0, cols = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> mask;

  std::size_t idx(int v, int r, int c) const {
    return ((std::size_t)v * rows + r) * cols + c;
  }
  double& at(int v, int r, int c) { return data[idx(v, r, c)]; }
  double at(int v, int r, int c) const { return data[idx(v, r, c)]; }
  std::size_t size() const { return data.size(); }
};

// The sampled ray behind entry (view, r, c). Cone rays are half-rays from
// the source; parallel rays are full lines through the returned point.
Ray projection_ray(const ProjectionSet& p, const std::vector<SourcePose>& poses,
                   int view, int r, int c);

// Raw float32 data plus JSON sidecar; the ray mask goes to a packed-bit
// file next to the data, referenced from the sidecar.
void write_projections(const ProjectionSet& p, const std::string& raw_path);
ProjectionSet read_projections(const std::string& raw_path);

}  // namespace ctroi
