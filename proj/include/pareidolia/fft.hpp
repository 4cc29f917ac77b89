#pragma once

#include <complex>
#include <vector>

namespace pareidolia::fft {

/// In/out-of-place 2-D complex DFT on an n x n row-major grid (FFTW backend).
/// Forward is unnormalized; inverse divides by n^2.  Plans are cached per
/// size and shared, so results are bit-identical across runs and across
/// thread counts; concurrent calls are safe.
void dft2(int n, const std::complex<double>* in, std::complex<double>* out,
          bool inverse);

/// Forward DFT of a real n x n grid.
std::vector<std::complex<double>> forward_real(int n, const double* pixels);

}  // namespace pareidolia::fft
