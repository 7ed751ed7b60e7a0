#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ctroi/fftutil.hpp"
#include "ctroi/projection.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

// 2D continuous-frequency spectrum of one parallel view, zero-padded to
// twice the grid and sampled at angular frequencies 2*pi*k/(m*du).
struct SliceSpectrum {
  int m = 0;        // padded side length
  double dnu = 0;   // frequency spacing
  cvec f;           // row-major, wrapped layout (DC at [0][0])

  std::complex<double> sample(double nu_u, double nu_v) const;  // bilinear
};

SliceSpectrum slice_spectrum(const ProjectionSet& p, int dir_index);

// Fourier-slice reconstruction of untruncated parallel data onto an n^3
// grid with spacing h. Frequencies are gathered from the four most nearly
// orthogonal view directions with inverse-distance weights, apodized with a
// raised cosine from 0.8 to 1.0 of cutoff * (pi/h), then inverted by FFT.
// Throws when some in-band frequency has no direction within 0.2 of its
// plane (angular coverage gap).
VoxelVolume fourier_slice_inverse(const ProjectionSet& p, int n, double h,
                                  double cutoff = 0.9);

enum class RampWindow { RamLak, Hamming };

// Feldkamp reconstruction of full-scan circular cone-beam data: cosine
// pre-weighting on the virtual detector through the isocenter, row-wise
// ramp filtering, distance-weighted backprojection; masked to B.
VoxelVolume fdk(const ProjectionSet& p, int n, double h,
                RampWindow window = RampWindow::RamLak);

// First radial derivative of the plane integrals of f, sampled per plane
// normal (hemisphere) and per source: planes through source gamma(t) with
// normal xi have offset <gamma(t), xi>. deriv_dt holds d/dt of deriv along
// the curve, used for the second radial derivative via the chain rule.
struct GrangeatIntermediate {
  std::vector<Vec3> dirs;
  int n_src = 0;
  std::vector<double> offsets;   // dirs x sources
  std::vector<double> deriv;
  std::vector<double> deriv_dt;

  std::size_t idx(int d, int s) const { return (std::size_t)d * n_src + s; }
};

GrangeatIntermediate grangeat_intermediate(const ProjectionSet& p, int n_dir);

// Derivative-based reconstruction for Tuy-complete source curves: for each
// voxel and plane normal, the plane-curve intersections supply the second
// radial derivative, averaged over intersections away from tangency and
// backprojected with the -1/(8 pi^2) prefactor.
VoxelVolume grangeat_inverse(const ProjectionSet& p, int n, double h,
                             int n_dir = 256);

// Resample spherical-source cone data onto a parallel grid: each grid line
// enters the source sphere at one point; the four surrounding lattice
// sources are sampled along the line and blended bilinearly.
ProjectionSet rebin_to_parallel(const ProjectionSet& p, const ParallelGrid& grid);

VoxelVolume spherical_inverse(const ProjectionSet& p, int n, double h,
                              int n_dir = 256, int nu = 0, double du = 0,
                              double cutoff = 0.9);

enum class InverseKind { FourierSlice, FDK, Grangeat, SphericalRebin };

std::string inverse_kind_name(InverseKind k);
InverseKind inverse_kind_from_name(const std::string& name);

// One pluggable inverse: kind must match the data (FourierSlice needs
// parallel data, FDK a circle, Grangeat a Tuy-complete curve, SphericalRebin
// a sphere). Truncated data is rejected; complement data passes through.
struct InverseOperator {
  InverseKind kind = InverseKind::FourierSlice;
  int out_n = 64;
  double out_voxel = 1.0;
  double cutoff = 0.9;
  RampWindow window = RampWindow::RamLak;
  int n_dir = 256;   // rebin target directions / plane normals
  int nu = 0;        // rebin grid size, 0 = match out_n + padding
  double du = 0;     // rebin grid spacing, 0 = out_voxel

  VoxelVolume apply(const ProjectionSet& p) const;
};

}  // namespace ctroi
