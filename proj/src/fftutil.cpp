#include "ctroi/fftutil.hpp"

#include <fftw3.h>

#include "ctroi/errors.hpp"

namespace ctroi {

namespace {

void run_plan(fftw_plan plan) {
  if (!plan) throw Error("fft plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

}  // namespace

void fft_1d(cvec& data, bool forward) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  run_plan(fftw_plan_dft_1d((int)data.size(), p, p,
                            forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE));
}

void fft_2d(cvec& data, int n0, int n1, bool forward) {
  if ((std::size_t)n0 * n1 != data.size()) throw Error("fft_2d: shape mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  run_plan(fftw_plan_dft_2d(n0, n1, p, p,
                            forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE));
}

void fft_3d(cvec& data, int n, bool forward) {
  if ((std::size_t)n * n * n != data.size()) throw Error("fft_3d: shape mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  run_plan(fftw_plan_dft_3d(n, n, n, p, p,
                            forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE));
}

}  // namespace ctroi
