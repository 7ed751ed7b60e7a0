#pragma once

#include <string>
#include <vector>

#include "ctroi/vec.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

struct Ellipsoid {
  Vec3 center;
  Vec3 semi_axes;             // strictly positive
  Vec3 euler_deg;             // z-y-z rotation angles, degrees
  double density_delta = 0.0; // additive contribution
};

struct Phantom {
  std::vector<Ellipsoid> ellipsoids;
  Ball support_ball;
};

// Precomputed ellipsoid frames for fast repeated evaluation.
class PhantomEval {
 public:
  explicit PhantomEval(const Phantom& p);
  double value(Vec3 x) const;
  double half_line(const Ray& r) const;
  double full_line(const Ray& r) const;

 private:
  struct Frame {
    Vec3 m0, m1, m2;  // rows of diag(1/axes) * R^T
    Vec3 center;
    double delta;
  };
  std::vector<Frame> frames_;
};

// Standard 3D Shepp-Logan head phantom (Kak-Slaney parameter table),
// normalized to the unit support ball. The table lives in sl3d_table_json.
Phantom shepp_logan_3d();
extern const char* const sl3d_table_json;

Phantom scaled(const Phantom& p, double s);
void validate_phantom(const Phantom& p);

double phantom_value(const Phantom& p, Vec3 x);
double analytic_line_integral(const Phantom& p, const Ray& r);       // half-ray
double analytic_full_line_integral(const Phantom& p, const Ray& r);  // full line

VoxelVolume voxelize(const Phantom& p, int n, double voxel_size,
                     bool supersample = false);

std::string phantom_to_json(const Phantom& p);
Phantom phantom_from_json(const std::string& text);

}  // namespace ctroi
