#pragma once

#include <string>
#include <vector>

#include "ctroi/geometry.hpp"
#include "ctroi/inversion.hpp"
#include "ctroi/phantom.hpp"
#include "ctroi/projection.hpp"
#include "ctroi/regularize.hpp"
#include "ctroi/volume.hpp"

namespace ctroi {

enum class StoppingMode { Relative, Absolute };

std::string stopping_name(StoppingMode m);
StoppingMode stopping_from_name(const std::string& name);

// Fixed-point scheme f_{j+1} = f_0 + U f_j with
//   f_0 = shrink(Z(mollify(g)))            g zero-filled outside its ray mask
//   U f = shrink(Z(mollify(complement(D f, roi))))
// shrink() is skipped when use_image_regularizer is false. L1 norms over the
// ROI are voxel sums times the voxel volume; relative stopping compares the
// iteration change against b * ||f_j||_L1(roi), absolute against b itself.
struct IterConfig {
  double b = 0.02;
  int max_iter = 40;
  StoppingMode stopping = StoppingMode::Relative;
  int mollifier_scale = 2;
  WaveletConfig wavelet;
  bool use_image_regularizer = true;
};

void validate_iter_config(const IterConfig& cfg);

struct ReconReport {
  int iterations_run = 0;
  std::vector<double> residuals;  // ||f_{j+1} - f_j||_L1(roi) per iteration
  bool converged = false;
  double threshold = 0.0;   // stopping threshold at the last iteration
  double contraction = 0.0; // geometric mean of successive residual ratios
  double rl1 = -1.0;        // set when ground truth is supplied
};

std::string report_to_json(const ReconReport& r);
ReconReport report_from_json(const std::string& text);

struct ReconResult {
  VoxelVolume volume;
  ReconReport report;
};

// g: acquired projections truncated to roi (full sets are accepted when roi
// covers the support ball). The output grid of z must reproduce the
// acquisition support ball so the in-loop forward projection can reuse the
// acquisition sampling. Non-finite values abort with the iteration and
// pipeline stage named.
ReconResult roi_reconstruct(const ProjectionSet& g, const InverseOperator& z,
                            const Ball& roi, const IterConfig& cfg,
                            const VoxelVolume* ground_truth = nullptr);

struct ContractionEstimate {
  double factor = 0.0;            // geometric mean over all measured ratios
  std::vector<double> trial_max;  // worst ratio seen per trial
};

// Power-iteration style probe of ||U||_inf: applies U `steps` times to
// uniform[-1,1] volumes masked to the support ball and wavelet-shrunk once,
// measuring successive sup-norm ratios.
ContractionEstimate estimate_contraction(SourceGeometry geom,
                                         const InverseOperator& z,
                                         const Ball& roi, const IterConfig& cfg,
                                         int trials, int steps = 3,
                                         unsigned seed = 1);

// Sum of |f - fhat| over voxel centers in the closed roi, divided by the sum
// of |f| over the same voxels.
double rl1_error(const VoxelVolume& f, const VoxelVolume& fhat, const Ball& roi);

struct SweepRow {
  double radius = 0.0;
  double rl1 = -1.0;
  int iterations = 0;
  bool converged = false;
  std::string note;  // set when the run aborted instead of finishing
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool found = false;
  double critical_radius = 0.0;  // smallest tested radius with RL1 <= epsilon
};

std::string sweep_to_json(const SweepResult& s);

// Voxelizes the phantom on the output grid, projects that volume, truncates
// to each concentric radius, reconstructs, and scores RL1 against the same
// voxelization, so acquisition matches the in-loop forward model. Aborted
// runs are recorded in their row, not rethrown.
SweepResult critical_radius_sweep(const Phantom& ph, SourceGeometry geom,
                                  const InverseOperator& z,
                                  const std::vector<double>& radii,
                                  double epsilon, const IterConfig& cfg);

struct EpsilonInverseCheck {
  double epsilon = 0.0;
  double measured = 0.0;  // sup |f - fhat| over B / sup |f| over B
  bool pass = false;
  std::string note;  // set when the reconstruction aborted
};

// Full-pipeline accuracy probe: truncate D f to roi, reconstruct, compare
// against f in the sup norm over the support ball.
EpsilonInverseCheck epsilon_inverse_check(const VoxelVolume& f,
                                          SourceGeometry geom,
                                          const InverseOperator& z,
                                          const Ball& roi,
                                          const IterConfig& cfg,
                                          double epsilon);

}  // namespace ctroi
