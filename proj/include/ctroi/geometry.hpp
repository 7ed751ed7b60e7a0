#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctroi/vec.hpp"

namespace ctroi {

enum class CurveKind { Sphere, Circle, TwinCircles, Helix };

std::string kind_name(CurveKind k);
CurveKind kind_from_name(const std::string& name);

struct DetectorSpec {
  int rows = 0;          // 0 = auto-size to the shadow of B at validation
  int cols = 0;
  double spacing = 1.0;  // square pixels, world units
  double sdd = 0.0;      // source to detector-center distance
};

// Source locus centered at the world origin; detectors aim at the origin.
struct SourceGeometry {
  CurveKind kind = CurveKind::Circle;
  double radius = 0.0;          // sphere/circle radius, helix cylinder radius
  double pitch = 0.0;           // helix z advance per turn
  int turns = 1;                // helix
  int views = 360;              // positions per circle / per helix turn
  double polar_step_deg = 12.0; // sphere lattice
  double azim_step_deg = 12.0;
  DetectorSpec det;
};

// One sampled source with its detector frame. Pixel (r, c) sits at
// det_center + (c - cols/2)*spacing*eu + (r - rows/2)*spacing*ev.
struct SourcePose {
  Vec3 pos;
  Vec3 axis;        // unit, source -> origin
  Vec3 eu, ev;      // detector in-plane basis
  Vec3 det_center;  // pos + sdd*axis
  double t = 0.0;   // curve parameter (curve kinds)
  int branch = 0;   // twin circles: 0 or 1
};

struct TuyFailure {
  Vec3 point;
  Vec3 normal;
};

struct TuyReport {
  bool pass = false;
  double worst_margin = 0.0;  // min over samples of best |<theta, gamma'/|gamma'|>|
  std::vector<TuyFailure> failures;
  std::string note;
};

// A point where the plane <normal, y> = offset crosses the source curve.
struct CurveHit {
  Vec3 pos;
  Vec3 tangent;  // gamma'(t), not normalized
  double t = 0.0;
  int branch = 0;
};

// --- sampling of the source locus ---

std::vector<SourcePose> sample_sources(const SourceGeometry& geom);

// Quadrature weight per sampled source: arclength ds for curve kinds,
// surface area patch dA for the sphere kind. Aligned with sample_sources.
std::vector<double> source_measure_weights(const SourceGeometry& geom);

// Throws if the locus is not exterior to b or a sampled detector fails to
// contain the shadow of b. Detector rows/cols of 0 are filled in first
// (smallest size covering the shadow with the given margin).
void validate_geometry(SourceGeometry& geom, const Ball& b, double margin = 1.08);

// --- ray/ball and cap calculus ---

bool ray_hits_ball(const Ray& r, const Ball& b);   // half-line, closed ball
bool line_hits_ball(const Ray& r, const Ball& b);  // full line, closed ball

double cap_cos(double roi_radius, double source_dist);
double cap_area(double cos_alpha);

// Measure of rays meeting the ball from the whole locus: integral over the
// locus of the aperture cap area.
double ray_set_volume(const SourceGeometry& geom, const Ball& ball);

// Measure of rays meeting B but not C.
double truncated_ray_volume(const SourceGeometry& geom, const Ball& B, const Ball& C);

// --- plane/curve intersections and the Tuy condition ---

std::vector<CurveHit> plane_curve_intersections(const SourceGeometry& geom,
                                                Vec3 normal, double offset);

TuyReport tuy_check(const SourceGeometry& geom, const Ball& B,
                    int n_point_samples = 128, int n_dir_samples = 128,
                    double tolerance = 0.02);

// --- deterministic low-discrepancy samplers ---

double halton(int index, int base);
std::vector<Vec3> halton_points_in_ball(const Ball& b, int count);
std::vector<Vec3> fibonacci_hemisphere(int count);  // z >= 0

// --- JSON round-trip ---

std::string geometry_to_json(const SourceGeometry& geom);
SourceGeometry geometry_from_json(const std::string& text);
std::string geometry_hash(const SourceGeometry& geom);  // FNV-1a of canonical form

}  // namespace ctroi
