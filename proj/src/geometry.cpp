#include "ctroi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <json.hpp>

#include "ctroi/errors.hpp"

namespace ctroi {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 frame_up(Vec3 axis) {
  return std::abs(axis.z) > 0.999 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
}

SourcePose make_pose(Vec3 pos, double sdd, double t, int branch) {
  SourcePose p;
  p.pos = pos;
  p.axis = normalized(-pos);
  Vec3 up = frame_up(p.axis);
  p.eu = normalized(cross(up, p.axis));
  p.ev = cross(p.axis, p.eu);
  p.det_center = pos + sdd * p.axis;
  p.t = t;
  p.branch = branch;
  return p;
}

std::vector<double> sphere_polar_rows(const SourceGeometry& g) {
  std::vector<double> rows;
  double step = deg2rad(g.polar_step_deg);
  for (double p = 0.0; p <= kPi + 1e-9; p += step) rows.push_back(std::min(p, kPi));
  return rows;
}

int sphere_azims(const SourceGeometry& g) {
  return std::max(1, (int)std::lround(360.0 / g.azim_step_deg));
}

}  // namespace

std::string kind_name(CurveKind k) {
  switch (k) {
    case CurveKind::Sphere: return "sphere";
    case CurveKind::Circle: return "circle";
    case CurveKind::TwinCircles: return "twin_circles";
    case CurveKind::Helix: return "helix";
  }
  throw Error("unknown curve kind");
}

CurveKind kind_from_name(const std::string& name) {
  if (name == "sphere") return CurveKind::Sphere;
  if (name == "circle") return CurveKind::Circle;
  if (name == "twin_circles") return CurveKind::TwinCircles;
  if (name == "helix") return CurveKind::Helix;
  throw Error("unknown geometry kind: " + name);
}

std::vector<SourcePose> sample_sources(const SourceGeometry& g) {
  std::vector<SourcePose> out;
  double sdd = g.det.sdd;
  switch (g.kind) {
    case CurveKind::Sphere: {
      int na = sphere_azims(g);
      double dazim = 2.0 * kPi / na;
      int row = 0;
      for (double p : sphere_polar_rows(g)) {
        bool pole = p < 1e-12 || p > kPi - 1e-12;
        int cols = pole ? 1 : na;
        for (int j = 0; j < cols; ++j) {
          double a = j * dazim;
          Vec3 pos = g.radius * Vec3{std::sin(p) * std::cos(a),
                                     std::sin(p) * std::sin(a), std::cos(p)};
          out.push_back(make_pose(pos, sdd, (double)out.size(), row));
        }
        ++row;
      }
      break;
    }
    case CurveKind::Circle: {
      for (int i = 0; i < g.views; ++i) {
        double t = 2.0 * kPi * i / g.views;
        out.push_back(make_pose(g.radius * Vec3{std::cos(t), std::sin(t), 0}, sdd, t, 0));
      }
      break;
    }
    case CurveKind::TwinCircles: {
      for (int i = 0; i < g.views; ++i) {
        double t = 2.0 * kPi * i / g.views;
        out.push_back(make_pose(g.radius * Vec3{std::cos(t), std::sin(t), 0}, sdd, t, 0));
      }
      for (int i = 0; i < g.views; ++i) {
        double t = 2.0 * kPi * i / g.views;
        out.push_back(make_pose(g.radius * Vec3{std::cos(t), 0, std::sin(t)}, sdd, t, 1));
      }
      break;
    }
    case CurveKind::Helix: {
      int n = g.turns * g.views;
      double k = g.pitch / (2.0 * kPi);
      double z0 = -0.5 * g.pitch * g.turns;
      for (int i = 0; i < n; ++i) {
        double t = 2.0 * kPi * g.turns * i / n;
        Vec3 pos{g.radius * std::cos(t), g.radius * std::sin(t), k * t + z0};
        out.push_back(make_pose(pos, sdd, t, 0));
      }
      break;
    }
  }
  return out;
}

std::vector<double> source_measure_weights(const SourceGeometry& g) {
  std::vector<double> w;
  switch (g.kind) {
    case CurveKind::Sphere: {
      int na = sphere_azims(g);
      double half = 0.5 * deg2rad(g.polar_step_deg);
      double r2 = g.radius * g.radius;
      for (double p : sphere_polar_rows(g)) {
        double lo = std::max(0.0, p - half), hi = std::min(kPi, p + half);
        double band = 2.0 * kPi * r2 * (std::cos(lo) - std::cos(hi));
        bool pole = p < 1e-12 || p > kPi - 1e-12;
        int cols = pole ? 1 : na;
        for (int j = 0; j < cols; ++j) w.push_back(band / cols);
      }
      break;
    }
    case CurveKind::Circle:
      w.assign(g.views, 2.0 * kPi * g.radius / g.views);
      break;
    case CurveKind::TwinCircles:
      w.assign(2 * g.views, 2.0 * kPi * g.radius / g.views);
      break;
    case CurveKind::Helix: {
      int n = g.turns * g.views;
      double len = g.turns * std::hypot(2.0 * kPi * g.radius, g.pitch);
      w.assign(n, len / n);
      break;
    }
  }
  return w;
}

void validate_geometry(SourceGeometry& g, const Ball& b, double margin) {
  if (g.radius <= 0) throw Error("geometry: radius must be positive");
  if (g.det.sdd <= 0) throw Error("geometry: detector sdd must be positive");
  if (g.det.spacing <= 0) throw Error("geometry: detector spacing must be positive");
  if (g.views < 1 || g.turns < 1) throw Error("geometry: sampling counts must be >= 1");
  if (g.kind == CurveKind::Sphere &&
      (g.polar_step_deg <= 0 || g.azim_step_deg <= 0))
    throw Error("geometry: sphere steps must be positive");

  auto poses = sample_sources(g);
  for (const auto& p : poses)
    if (dist(p.pos, b.center) <= b.radius)
      throw Error("geometry: source locus not exterior to the target ball");

  // Shadow of B on each detector, probed over boundary points of B.
  auto hemi = fibonacci_hemisphere(128);
  std::vector<Vec3> boundary;
  boundary.reserve(256);
  for (Vec3 d : hemi) {
    boundary.push_back(b.center + b.radius * d);
    boundary.push_back(b.center - b.radius * d);
  }
  double umax = 0, vmax = 0;
  for (const auto& p : poses) {
    for (Vec3 q : boundary) {
      Vec3 d = q - p.pos;
      double s = dot(d, p.axis);
      if (s <= 1e-9) throw Error("geometry: ball extends behind a source");
      Vec3 hit = p.pos + (g.det.sdd / s) * d - p.det_center;
      umax = std::max(umax, std::abs(dot(hit, p.eu)));
      vmax = std::max(vmax, std::abs(dot(hit, p.ev)));
    }
  }
  auto need = [&](double extent) {
    return 2 * (int)std::ceil(extent * margin / g.det.spacing) + 1;
  };
  if (g.det.cols == 0) g.det.cols = need(umax);
  if (g.det.rows == 0) g.det.rows = need(vmax);
  double ucover = (g.det.cols - 1 - g.det.cols / 2 + 0.5) * g.det.spacing;
  double vcover = (g.det.rows - 1 - g.det.rows / 2 + 0.5) * g.det.spacing;
  if (umax > ucover || vmax > vcover)
    throw Error("geometry: detector does not contain the shadow of the target ball");
}

bool ray_hits_ball(const Ray& r, const Ball& b) {
  Vec3 oc = r.source - b.center;
  double bb = dot(oc, r.direction);
  double disc = bb * bb - (norm2(oc) - b.radius * b.radius);
  if (disc < 0) return false;
  return -bb + std::sqrt(disc) >= 0;
}

bool line_hits_ball(const Ray& r, const Ball& b) {
  Vec3 oc = r.source - b.center;
  double bb = dot(oc, r.direction);
  return bb * bb - (norm2(oc) - b.radius * b.radius) >= 0;
}

double cap_cos(double u, double v) {
  if (u < 0) throw Error("cap_cos: roi radius must be nonnegative");
  if (v <= u) throw Error("cap_cos: source distance must exceed roi radius");
  return v / std::sqrt(u * u + v * v);
}

double cap_area(double cos_alpha) {
  if (cos_alpha < -1.0 - 1e-12 || cos_alpha > 1.0 + 1e-12)
    throw Error("cap_area: cosine outside [-1, 1]");
  return 2.0 * kPi * (1.0 - std::clamp(cos_alpha, -1.0, 1.0));
}

double ray_set_volume(const SourceGeometry& g, const Ball& ball) {
  auto poses = sample_sources(g);
  auto w = source_measure_weights(g);
  double vol = 0;
  for (std::size_t i = 0; i < poses.size(); ++i)
    vol += w[i] * cap_area(cap_cos(ball.radius, dist(poses[i].pos, ball.center)));
  return vol;
}

double truncated_ray_volume(const SourceGeometry& g, const Ball& B, const Ball& C) {
  if (dist(B.center, C.center) + C.radius > B.radius + 1e-9)
    throw Error("truncated_ray_volume: roi not contained in the target ball");
  auto poses = sample_sources(g);
  auto w = source_measure_weights(g);
  double vol = 0;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    double ab = cap_area(cap_cos(B.radius, dist(poses[i].pos, B.center)));
    double ac = cap_area(cap_cos(C.radius, dist(poses[i].pos, C.center)));
    vol += w[i] * (ab - ac);
  }
  return std::max(0.0, vol);
}

namespace {

// Roots of A*cos(t - phi) = p on a circle of parameter length 2*pi.
void circle_roots(double A, double phi, double p, double R, int branch,
                  bool vertical, std::vector<CurveHit>& out) {
  if (A < 1e-12 || std::abs(p) > A) return;
  double delta = std::acos(std::clamp(p / A, -1.0, 1.0));
  double cand[2] = {phi + delta, phi - delta};
  int count = delta < 1e-9 || delta > kPi - 1e-9 ? 1 : 2;
  for (int i = 0; i < count; ++i) {
    double t = std::fmod(cand[i], 2.0 * kPi);
    if (t < 0) t += 2.0 * kPi;
    CurveHit h;
    h.t = t;
    h.branch = branch;
    if (vertical) {
      h.pos = {R * std::cos(t), 0, R * std::sin(t)};
      h.tangent = {-R * std::sin(t), 0, R * std::cos(t)};
    } else {
      h.pos = {R * std::cos(t), R * std::sin(t), 0};
      h.tangent = {-R * std::sin(t), R * std::cos(t), 0};
    }
    out.push_back(h);
  }
}

}  // namespace

std::vector<CurveHit> plane_curve_intersections(const SourceGeometry& g,
                                                Vec3 normal, double offset) {
  double nl = norm(normal);
  if (nl < 1e-300) throw Error("plane_curve_intersections: zero normal");
  Vec3 nn = normal / nl;
  double p = offset / nl;
  std::vector<CurveHit> hits;
  switch (g.kind) {
    case CurveKind::Sphere:
      throw Error("plane_curve_intersections: sphere kind is not a curve");
    case CurveKind::Circle:
      circle_roots(g.radius * std::hypot(nn.x, nn.y), std::atan2(nn.y, nn.x), p,
                   g.radius, 0, false, hits);
      break;
    case CurveKind::TwinCircles:
      circle_roots(g.radius * std::hypot(nn.x, nn.y), std::atan2(nn.y, nn.x), p,
                   g.radius, 0, false, hits);
      circle_roots(g.radius * std::hypot(nn.x, nn.z), std::atan2(nn.z, nn.x), p,
                   g.radius, 1, true, hits);
      break;
    case CurveKind::Helix: {
      double a = g.radius, k = g.pitch / (2.0 * kPi);
      double z0 = -0.5 * g.pitch * g.turns;
      double A = a * std::hypot(nn.x, nn.y);
      double phi = std::atan2(nn.y, nn.x);
      double m = nn.z * k;
      double d0 = nn.z * z0 - p;
      double T = 2.0 * kPi * g.turns;
      auto h = [&](double t) { return A * std::cos(t - phi) + m * t + d0; };
      // Monotone pieces split at the critical points of h.
      std::vector<double> knots{0.0, T};
      if (A > 1e-15 && std::abs(m) <= A) {
        double base = std::asin(std::clamp(m / A, -1.0, 1.0));
        for (double c : {phi + base, phi + kPi - base}) {
          double start = c + 2.0 * kPi * std::floor((0.0 - c) / (2.0 * kPi));
          for (double t = start; t <= T + 1e-9; t += 2.0 * kPi)
            if (t > 1e-9 && t < T - 1e-9) knots.push_back(t);
        }
      }
      std::sort(knots.begin(), knots.end());
      for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        double lo = knots[i], hi = knots[i + 1];
        double flo = h(lo);
        if (flo * h(hi) > 0) continue;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          (h(mid) * flo <= 0 ? hi : lo) = mid;
        }
        double t = 0.5 * (lo + hi);
        CurveHit hit;
        hit.t = t;
        hit.pos = {a * std::cos(t), a * std::sin(t), k * t + z0};
        hit.tangent = {-a * std::sin(t), a * std::cos(t), k};
        hits.push_back(hit);
      }
      // Deduplicate roots that landed on shared knots.
      std::sort(hits.begin(), hits.end(),
                [](const CurveHit& x, const CurveHit& y) { return x.t < y.t; });
      hits.erase(std::unique(hits.begin(), hits.end(),
                             [](const CurveHit& x, const CurveHit& y) {
                               return std::abs(x.t - y.t) < 1e-7;
                             }),
                 hits.end());
      break;
    }
  }
  return hits;
}

TuyReport tuy_check(const SourceGeometry& g, const Ball& B, int n_points,
                    int n_dirs, double tolerance) {
  TuyReport rep;
  if (g.kind == CurveKind::Sphere) {
    rep.pass = true;
    rep.worst_margin = 1.0;
    rep.note = "surface source set: every plane through the ball meets the sphere";
    return rep;
  }
  auto points = halton_points_in_ball(B, n_points);
  auto dirs = fibonacci_hemisphere(n_dirs);
  double worst = 2.0;
  for (const Vec3& x : points) {
    for (const Vec3& th : dirs) {
      auto hits = plane_curve_intersections(g, th, dot(th, x));
      double best = 0.0;
      for (const auto& h : hits)
        best = std::max(best, std::abs(dot(th, normalized(h.tangent))));
      if (hits.empty() || best <= tolerance) {
        if (rep.failures.size() < 16) rep.failures.push_back({x, th});
        continue;
      }
      worst = std::min(worst, best);
    }
  }
  rep.worst_margin = worst > 1.5 ? 0.0 : worst;
  rep.pass = rep.failures.empty() && rep.worst_margin > tolerance;
  return rep;
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index + 1; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

std::vector<Vec3> halton_points_in_ball(const Ball& b, int count) {
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (int i = 0; (int)pts.size() < count; ++i) {
    Vec3 p{2 * halton(i, 2) - 1, 2 * halton(i, 3) - 1, 2 * halton(i, 5) - 1};
    if (norm2(p) <= 1.0) pts.push_back(b.center + b.radius * p);
  }
  return pts;
}

std::vector<Vec3> fibonacci_hemisphere(int count) {
  std::vector<Vec3> dirs;
  dirs.reserve(count);
  double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    double z = (i + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    dirs.push_back({r * std::cos(golden * i), r * std::sin(golden * i), z});
  }
  return dirs;
}

std::string geometry_to_json(const SourceGeometry& g) {
  nlohmann::json j;
  j["kind"] = kind_name(g.kind);
  j["radius"] = g.radius;
  j["pitch"] = g.pitch;
  j["turns"] = g.turns;
  j["views"] = g.views;
  j["polar_step_deg"] = g.polar_step_deg;
  j["azim_step_deg"] = g.azim_step_deg;
  j["detector"] = {{"rows", g.det.rows},
                   {"cols", g.det.cols},
                   {"spacing", g.det.spacing},
                   {"sdd", g.det.sdd}};
  return j.dump();
}

SourceGeometry geometry_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("geometry json: ") + e.what());
  }
  SourceGeometry g;
  try {
    g.kind = kind_from_name(j.at("kind").get<std::string>());
    g.radius = j.at("radius").get<double>();
    g.pitch = j.value("pitch", 0.0);
    g.turns = j.value("turns", 1);
    g.views = j.value("views", 360);
    g.polar_step_deg = j.value("polar_step_deg", 12.0);
    g.azim_step_deg = j.value("azim_step_deg", 12.0);
    auto d = j.at("detector");
    g.det.rows = d.value("rows", 0);
    g.det.cols = d.value("cols", 0);
    g.det.spacing = d.at("spacing").get<double>();
    g.det.sdd = d.at("sdd").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("geometry json: ") + e.what());
  }
  return g;
}

std::string geometry_hash(const SourceGeometry& g) {
  std::string s = geometry_to_json(g);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

}  // namespace ctroi
