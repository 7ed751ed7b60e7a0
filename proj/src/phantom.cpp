#include "ctroi/phantom.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "ctroi/errors.hpp"

namespace ctroi {

namespace {

// Rows of the z-y-z rotation matrix for angles in degrees.
void euler_rows(Vec3 deg, Vec3& r0, Vec3& r1, Vec3& r2) {
  double s = std::numbers::pi / 180.0;
  double cp = std::cos(deg.x * s), sp = std::sin(deg.x * s);
  double ct = std::cos(deg.y * s), st = std::sin(deg.y * s);
  double cs = std::cos(deg.z * s), ss = std::sin(deg.z * s);
  r0 = {cp * ct * cs - sp * ss, -cp * ct * ss - sp * cs, cp * st};
  r1 = {sp * ct * cs + cp * ss, -sp * ct * ss + cp * cs, sp * st};
  r2 = {-st * cs, st * ss, ct};
}

}  // namespace

PhantomEval::PhantomEval(const Phantom& p) {
  frames_.reserve(p.ellipsoids.size());
  for (const auto& e : p.ellipsoids) {
    Vec3 r0, r1, r2;
    euler_rows(e.euler_deg, r0, r1, r2);
    Frame f;
    // q = diag(1/axes) * R^T * (x - c); rows of R^T are columns of R.
    f.m0 = Vec3{r0.x, r1.x, r2.x} / e.semi_axes.x;
    f.m1 = Vec3{r0.y, r1.y, r2.y} / e.semi_axes.y;
    f.m2 = Vec3{r0.z, r1.z, r2.z} / e.semi_axes.z;
    f.center = e.center;
    f.delta = e.density_delta;
    frames_.push_back(f);
  }
}

double PhantomEval::value(Vec3 x) const {
  double v = 0;
  for (const auto& f : frames_) {
    Vec3 d = x - f.center;
    Vec3 q{dot(f.m0, d), dot(f.m1, d), dot(f.m2, d)};
    if (norm2(q) <= 1.0) v += f.delta;
  }
  return v;
}

double PhantomEval::half_line(const Ray& r) const {
  double v = 0;
  for (const auto& f : frames_) {
    Vec3 od = r.source - f.center;
    Vec3 p{dot(f.m0, od), dot(f.m1, od), dot(f.m2, od)};
    Vec3 d{dot(f.m0, r.direction), dot(f.m1, r.direction), dot(f.m2, r.direction)};
    double a = norm2(d), b = dot(p, d), c = norm2(p) - 1.0;
    double disc = b * b - a * c;
    if (disc <= 0) continue;
    double sq = std::sqrt(disc);
    double t1 = (-b - sq) / a, t2 = (-b + sq) / a;
    double lo = std::max(t1, 0.0);
    if (t2 > lo) v += f.delta * (t2 - lo);
  }
  return v;
}

double PhantomEval::full_line(const Ray& r) const {
  double v = 0;
  for (const auto& f : frames_) {
    Vec3 od = r.source - f.center;
    Vec3 p{dot(f.m0, od), dot(f.m1, od), dot(f.m2, od)};
    Vec3 d{dot(f.m0, r.direction), dot(f.m1, r.direction), dot(f.m2, r.direction)};
    double a = norm2(d), b = dot(p, d), c = norm2(p) - 1.0;
    double disc = b * b - a * c;
    if (disc <= 0) continue;
    v += f.delta * 2.0 * std::sqrt(disc) / a;
  }
  return v;
}

// Kak-Slaney 3D head phantom table: per ellipsoid
// [density, a, b, c, x0, y0, z0, phi_deg] with rotation about z only.
const char* const sl3d_table_json = R"([
  [ 2.00, 0.6900, 0.9200, 0.9000,  0.00,  0.000,  0.000,   0],
  [-0.98, 0.6624, 0.8740, 0.8800,  0.00,  0.000,  0.000,   0],
  [-0.02, 0.4100, 0.1600, 0.2100, -0.22,  0.000, -0.250, 108],
  [-0.02, 0.3100, 0.1100, 0.2200,  0.22,  0.000, -0.250,  72],
  [ 0.02, 0.2100, 0.2500, 0.5000,  0.00,  0.350, -0.250,   0],
  [ 0.02, 0.0460, 0.0460, 0.0460,  0.00,  0.100, -0.250,   0],
  [ 0.01, 0.0460, 0.0230, 0.0200, -0.08, -0.650, -0.250,   0],
  [ 0.01, 0.0460, 0.0230, 0.0200,  0.06, -0.650, -0.250,  90],
  [ 0.02, 0.0560, 0.0400, 0.1000,  0.06, -0.105,  0.625,  90],
  [-0.02, 0.0560, 0.0560, 0.1000,  0.00,  0.100,  0.625,   0]
])";

Phantom shepp_logan_3d() {
  Phantom p;
  p.support_ball = {{0, 0, 0}, 1.0};
  auto rows = nlohmann::json::parse(sl3d_table_json);
  for (const auto& r : rows) {
    Ellipsoid e;
    e.density_delta = r.at(0).get<double>();
    e.semi_axes = {r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
    e.center = {r.at(4).get<double>(), r.at(5).get<double>(), r.at(6).get<double>()};
    e.euler_deg = {r.at(7).get<double>(), 0, 0};
    p.ellipsoids.push_back(e);
  }
  return p;
}

Phantom scaled(const Phantom& p, double s) {
  Phantom q = p;
  q.support_ball.center = s * q.support_ball.center;
  q.support_ball.radius *= s;
  for (auto& e : q.ellipsoids) {
    e.center = s * e.center;
    e.semi_axes = s * e.semi_axes;
  }
  return q;
}

void validate_phantom(const Phantom& p) {
  for (const auto& e : p.ellipsoids) {
    if (e.semi_axes.x <= 0 || e.semi_axes.y <= 0 || e.semi_axes.z <= 0)
      throw Error("phantom: semi-axes must be positive");
    double reach = std::max({e.semi_axes.x, e.semi_axes.y, e.semi_axes.z});
    if (dist(e.center, p.support_ball.center) + reach >
        p.support_ball.radius + 1e-9)
      throw Error("phantom: ellipsoid extends outside the support ball");
  }
}

double phantom_value(const Phantom& p, Vec3 x) { return PhantomEval(p).value(x); }

double analytic_line_integral(const Phantom& p, const Ray& r) {
  return PhantomEval(p).half_line(r);
}

double analytic_full_line_integral(const Phantom& p, const Ray& r) {
  return PhantomEval(p).full_line(r);
}

VoxelVolume voxelize(const Phantom& p, int n, double voxel_size, bool supersample) {
  if (n < 8) throw Error("voxelize: grid side must be at least 8");
  VoxelVolume v = make_volume(n, voxel_size);
  PhantomEval eval(p);
  double q = voxel_size / 4.0;
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec3 c = v.voxel_center(i, j, k);
        if (!supersample) {
          v.at(i, j, k) = eval.value(c);
          continue;
        }
        double acc = 0;
        for (int dz = -1; dz <= 1; dz += 2)
          for (int dy = -1; dy <= 1; dy += 2)
            for (int dx = -1; dx <= 1; dx += 2)
              acc += eval.value(c + Vec3{dx * q, dy * q, dz * q});
        v.at(i, j, k) = acc / 8.0;
      }
  mask_to_ball(v, inscribed_ball(v));
  return v;
}

std::string phantom_to_json(const Phantom& p) {
  nlohmann::json j;
  j["support_ball"] = {{"center", {p.support_ball.center.x, p.support_ball.center.y,
                                   p.support_ball.center.z}},
                       {"radius", p.support_ball.radius}};
  auto& arr = j["ellipsoids"] = nlohmann::json::array();
  for (const auto& e : p.ellipsoids)
    arr.push_back({{"center", {e.center.x, e.center.y, e.center.z}},
                   {"semi_axes", {e.semi_axes.x, e.semi_axes.y, e.semi_axes.z}},
                   {"euler_deg", {e.euler_deg.x, e.euler_deg.y, e.euler_deg.z}},
                   {"density_delta", e.density_delta}});
  return j.dump(2);
}

Phantom phantom_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("phantom json: ") + e.what());
  }
  Phantom p;
  try {
    auto b = j.at("support_ball");
    auto c = b.at("center");
    p.support_ball = {{c.at(0).get<double>(), c.at(1).get<double>(),
                       c.at(2).get<double>()},
                      b.at("radius").get<double>()};
    for (const auto& je : j.at("ellipsoids")) {
      Ellipsoid e;
      auto ec = je.at("center");
      e.center = {ec.at(0).get<double>(), ec.at(1).get<double>(), ec.at(2).get<double>()};
      auto ea = je.at("semi_axes");
      e.semi_axes = {ea.at(0).get<double>(), ea.at(1).get<double>(), ea.at(2).get<double>()};
      auto eu = je.value("euler_deg", std::vector<double>{0, 0, 0});
      e.euler_deg = {eu.at(0), eu.at(1), eu.at(2)};
      e.density_delta = je.at("density_delta").get<double>();
      p.ellipsoids.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("phantom json: ") + e.what());
  }
  validate_phantom(p);
  return p;
}

}  // namespace ctroi
