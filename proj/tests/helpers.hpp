#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "ctroi/vec.hpp"
#include "ctroi/volume.hpp"

namespace ctroi::testing {

struct GaussianBlob {
  Vec3 center{0, 0, 0};
  double sigma = 1.0;
  double amp = 1.0;

  double value(Vec3 x) const {
    double r2 = norm2(x - center);
    return amp * std::exp(-r2 / (2.0 * sigma * sigma));
  }

  // integral along s + t d, t in [0, inf) (half) or (-inf, inf)
  double line_integral(const Ray& ray, bool half) const {
    Vec3 d = normalized(ray.direction);
    double t0 = dot(center - ray.source, d);
    double rho2 = norm2(center - ray.source) - t0 * t0;
    double axial = half ? sigma * std::sqrt(std::numbers::pi / 2.0) *
                              std::erfc(-t0 / (sigma * std::numbers::sqrt2))
                        : sigma * std::sqrt(2.0 * std::numbers::pi);
    return amp * std::exp(-rho2 / (2.0 * sigma * sigma)) * axial;
  }

  // 3D Fourier transform (non-unitary, angular frequency):
  // F(k) = amp (2 pi)^{3/2} sigma^3 exp(-sigma^2 |k|^2 / 2) exp(-i <k, center>)
  double ft_magnitude(double k) const {
    double s2 = sigma * sigma;
    return amp * std::pow(2.0 * std::numbers::pi, 1.5) * sigma * s2 *
           std::exp(-s2 * k * k / 2.0);
  }

  std::complex<double> ft(Vec3 k) const {
    double ph = -dot(k, center);
    return ft_magnitude(norm(k)) * std::complex<double>{std::cos(ph), std::sin(ph)};
  }

  // planar Radon transform R f(xi, p) for unit xi
  double radon(Vec3 xi, double p) const {
    double q = p - dot(center, xi);
    return amp * 2.0 * std::numbers::pi * sigma * sigma *
           std::exp(-q * q / (2.0 * sigma * sigma));
  }

  // d/dp of the planar Radon transform
  double radon_dp(Vec3 xi, double p) const {
    double q = p - dot(center, xi);
    return -q / (sigma * sigma) * radon(xi, p);
  }
};

inline VoxelVolume blob_volume(int n, double h, const std::vector<GaussianBlob>& blobs) {
  VoxelVolume v = make_volume(n, h);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        double s = 0;
        for (const auto& b : blobs) s += b.value(v.voxel_center(i, j, k));
        v.at(i, j, k) = s;
      }
  return v;
}

inline double blob_ray_integral(const std::vector<GaussianBlob>& blobs,
                                const Ray& ray, bool half) {
  double s = 0;
  for (const auto& b : blobs) s += b.line_integral(ray, half);
  return s;
}

}  // namespace ctroi::testing
