#pragma once

#include <complex>
#include <vector>

namespace ctroi {

using cvec = std::vector<std::complex<double>>;

// Unnormalized DFTs (FFTW convention): forward uses exp(-i...), backward
// exp(+i...); backward(forward(x)) = N * x. Serial plans, deterministic.
void fft_1d(cvec& data, bool forward);
void fft_2d(cvec& data, int n0, int n1, bool forward);      // data[i0*n1 + i1]
void fft_3d(cvec& data, int n, bool forward);               // cubic, x fastest

}  // namespace ctroi
