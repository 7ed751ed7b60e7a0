#pragma once

#include <vector>

#include "ctroi/projection.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

// Nonnegative unit-sum bump kernel on the detector grid; width shrinks as
// 1/scale (scale 1 spans 5 pixels, the default scale 2 spans 3).
struct MollifierKernel {
  int scale = 2;
  int half = 0;                 // footprint is (2*half+1)^2
  std::vector<double> weights;  // row-major, sums to 1
};

MollifierKernel make_mollifier(int scale = 2);

// Per-view zero-padded 2D convolution; masks are carried through untouched.
ProjectionSet mollify(const ProjectionSet& p, const MollifierKernel& k);

struct WaveletConfig {
  int levels = 3;
  double keep_fraction = 0.1;  // fraction of detail coefficients kept per scale
  bool hard = true;            // false: soft (magnitude-shrinking) threshold
};

void validate_wavelet(const WaveletConfig& cfg, int n);

// Separable periodic orthonormal Daubechies-4 transform, standard nested
// layout: after L levels the approximation block is the leading
// (n/2^L)^3 corner. dwt3 returns coefficients in volume shape.
VoxelVolume dwt3(const VoxelVolume& v, int levels);
VoxelVolume idwt3(const VoxelVolume& coeffs, int levels);

// Per-scale hard (or soft) thresholding at the (1 - keep_fraction) magnitude
// quantile of each detail scale; the coarsest approximation block passes
// through unchanged.
VoxelVolume wavelet_shrink(const VoxelVolume& v, const WaveletConfig& cfg);

}  // namespace ctroi
