#pragma once

#include "ctroi/phantom.hpp"
#include "ctroi/projection.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

// Cone-beam transform: one half-ray integral per detector pixel per source.
// Voxel volumes are sampled by trilinear interpolation at steps of
// voxel_size/2 and summed with the trapezoid rule; phantoms are exact.
// Detector sizes of 0 are auto-fitted to the shadow of the support ball.
ProjectionSet forward_cone(const VoxelVolume& f, SourceGeometry geom);
ProjectionSet forward_cone(const Phantom& f, SourceGeometry geom);

// Ray transform: full-line integrals over the parallel grid.
ProjectionSet forward_parallel(const VoxelVolume& f, const ParallelGrid& grid);
ProjectionSet forward_parallel(const Phantom& f, const ParallelGrid& grid);

// Keep rays meeting roi, zero the rest; mask records the kept rays.
ProjectionSet truncate(const ProjectionSet& p, const Ball& roi);

// full - truncate(full, roi): data on rays missing the roi.
ProjectionSet complement(const ProjectionSet& full, const Ball& roi);

// L2 norm over the ray manifold: per-ray weights are arclength (or surface
// patch) times pixel solid angle for cone data, hemisphere step times pixel
// area for parallel data.
double projection_l2(const ProjectionSet& p);

// Measure-weighted fraction of rays meeting B that fall outside the mask.
double masked_fraction(const ProjectionSet& p);

}  // namespace ctroi
