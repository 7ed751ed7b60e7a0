#include "ctroi/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctroi/errors.hpp"

namespace ctroi {

MollifierKernel make_mollifier(int scale) {
  if (scale < 1) throw Error("mollifier scale must be >= 1");
  MollifierKernel k;
  k.scale = scale;
  double rad = 3.0 / scale;  // pixels
  k.half = std::max(0, (int)std::ceil(rad) - 1);
  int w = 2 * k.half + 1;
  k.weights.assign((std::size_t)w * w, 0.0);
  double sum = 0;
  for (int dy = -k.half; dy <= k.half; ++dy)
    for (int dx = -k.half; dx <= k.half; ++dx) {
      double r = std::sqrt((double)dx * dx + (double)dy * dy) / rad;
      if (r >= 1.0) continue;
      double t = 1.0 - r * r;
      double v = t * t * t * t * t;
      k.weights[(std::size_t)(dy + k.half) * w + (dx + k.half)] = v;
      sum += v;
    }
  for (double& v : k.weights) v /= sum;
  return k;
}

ProjectionSet mollify(const ProjectionSet& p, const MollifierKernel& k) {
  ProjectionSet out = p;
  if (k.half == 0) return out;
  int w = 2 * k.half + 1;
  int rows = p.rows, cols = p.cols;
#pragma omp parallel for schedule(static)
  for (int v = 0; v < p.views; ++v) {
    const double* src = p.data.data() + p.idx(v, 0, 0);
    double* dst = out.data.data() + out.idx(v, 0, 0);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        double acc = 0;
        for (int dy = -k.half; dy <= k.half; ++dy) {
          int rr = r + dy;
          if (rr < 0 || rr >= rows) continue;
          const double* wrow = k.weights.data() + (std::size_t)(dy + k.half) * w;
          for (int dx = -k.half; dx <= k.half; ++dx) {
            int cc = c + dx;
            if (cc < 0 || cc >= cols) continue;
            acc += wrow[dx + k.half] * src[(std::size_t)rr * cols + cc];
          }
        }
        dst[(std::size_t)r * cols + c] = acc;
      }
  }
  return out;
}

void validate_wavelet(const WaveletConfig& cfg, int n) {
  if (cfg.levels < 1) throw Error("wavelet levels must be >= 1");
  if (cfg.keep_fraction <= 0.0 || cfg.keep_fraction > 1.0)
    throw Error("keep_fraction must be in (0, 1]");
  int m = n;
  for (int l = 0; l < cfg.levels; ++l) {
    if (m % 2 != 0) throw Error("volume size not divisible by 2^levels");
    m /= 2;
  }
  if (m < 4) throw Error("too many wavelet levels for this volume size");
}

namespace {

// Daubechies-4 orthonormal filter
const double D0 = (1.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0));
const double D1 = (3.0 + std::sqrt(3.0)) / (4.0 * std::sqrt(2.0));
const double D2 = (3.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0));
const double D3 = (1.0 - std::sqrt(3.0)) / (4.0 * std::sqrt(2.0));
const double H[4] = {D0, D1, D2, D3};
const double G[4] = {D3, -D2, D1, -D0};

void dwt_line(double* x, std::size_t stride, int m, std::vector<double>& tmp) {
  tmp.resize(m);
  int half = m / 2;
  for (int i = 0; i < half; ++i) {
    double lo = 0, hi = 0;
    for (int k = 0; k < 4; ++k) {
      double s = x[stride * (std::size_t)((2 * i + k) % m)];
      lo += H[k] * s;
      hi += G[k] * s;
    }
    tmp[i] = lo;
    tmp[half + i] = hi;
  }
  for (int i = 0; i < m; ++i) x[stride * (std::size_t)i] = tmp[i];
}

void idwt_line(double* x, std::size_t stride, int m, std::vector<double>& tmp) {
  tmp.assign(m, 0.0);
  int half = m / 2;
  for (int i = 0; i < half; ++i) {
    double lo = x[stride * (std::size_t)i];
    double hi = x[stride * (std::size_t)(half + i)];
    for (int k = 0; k < 4; ++k)
      tmp[(2 * i + k) % m] += H[k] * lo + G[k] * hi;
  }
  for (int i = 0; i < m; ++i) x[stride * (std::size_t)i] = tmp[i];
}

template <typename LineOp>
void transform_cube(VoxelVolume& v, int m, LineOp op) {
  int n = v.n;
  std::size_t sx = 1, sy = n, sz = (std::size_t)n * n;
#pragma omp parallel
  {
    std::vector<double> tmp;
#pragma omp for collapse(2) schedule(static)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        op(&v.values[k * sz + j * sy], sx, m, tmp);
#pragma omp for collapse(2) schedule(static)
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        op(&v.values[k * sz + (std::size_t)i], sy, m, tmp);
#pragma omp for collapse(2) schedule(static)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        op(&v.values[j * sy + (std::size_t)i], sz, m, tmp);
  }
}

}  // namespace

VoxelVolume dwt3(const VoxelVolume& v, int levels) {
  validate_wavelet({levels, 1.0, true}, v.n);
  VoxelVolume c = v;
  int m = v.n;
  for (int l = 0; l < levels; ++l) {
    transform_cube(c, m, dwt_line);
    m /= 2;
  }
  return c;
}

VoxelVolume idwt3(const VoxelVolume& coeffs, int levels) {
  validate_wavelet({levels, 1.0, true}, coeffs.n);
  VoxelVolume v = coeffs;
  int m = v.n >> (levels - 1);
  for (int l = 0; l < levels; ++l) {
    transform_cube(v, m, idwt_line);
    m *= 2;
  }
  return v;
}

VoxelVolume wavelet_shrink(const VoxelVolume& v, const WaveletConfig& cfg) {
  validate_wavelet(cfg, v.n);
  VoxelVolume c = dwt3(v, cfg.levels);
  std::vector<double> mags;
  for (int l = 0; l < cfg.levels; ++l) {
    int m = v.n >> l;    // sub-cube holding this scale
    int half = m / 2;    // its approximation corner
    mags.clear();
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          if (i < half && j < half && k < half) continue;
          mags.push_back(std::abs(c.at(i, j, k)));
        }
    std::size_t drop = (std::size_t)std::floor((1.0 - cfg.keep_fraction) *
                                               (double)mags.size());
    if (drop == 0) continue;
    if (drop >= mags.size()) drop = mags.size() - 1;
    std::nth_element(mags.begin(), mags.begin() + drop, mags.end());
    double thr = mags[drop];
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          if (i < half && j < half && k < half) continue;
          double& a = c.at(i, j, k);
          if (cfg.hard) {
            if (std::abs(a) < thr) a = 0.0;
          } else {
            double mag = std::abs(a) - thr;
            a = mag > 0 ? (a > 0 ? mag : -mag) : 0.0;
          }
        }
  }
  return idwt3(c, cfg.levels);
}

}  // namespace ctroi
