#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::stimuli {

/// Parameters of one band-limited noise image: a random Fourier spectrum
/// modulated by a Gaussian envelope of standard deviation `width`
/// (frequency-grid units) centered at DC.
struct NoiseSpec {
  int size = 0;          // pixels per side, square
  double width = 0.0;    // envelope std, > 0
  std::uint64_t seed = 0;

  void validate() const;
};

struct NoiseImage {
  int size = 0;
  std::vector<double> pixels;  // row-major size*size, exactly real
  NoiseSpec spec;              // provenance (child spec for batch elements)

  [[nodiscard]] double at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * size + col];
  }
};

struct RadialBin {
  double frequency = 0.0;    // bin center, cycles/image
  double mean_power = 0.0;   // mean |DFT|^2 over coefficients in the bin
  std::uint64_t count = 0;   // coefficients in the bin
};

struct PowerSpectrum {
  std::vector<RadialBin> radial_bins;  // frequencies strictly increasing
};

/// Deterministic in spec: an i.i.d. standard-normal field is transformed,
/// multiplied by exp(-(u^2+v^2)/(2 width^2)) over signed frequencies
/// u,v in [-size/2, size/2), and transformed back; the real part is kept
/// after checking the imaginary residue is < 1e-9 of the signal RMS.
NoiseImage gen_noise(const NoiseSpec& spec);

/// Mean squared DFT magnitude binned by frequency radius over
/// (0, r_max], r_max = hypot(size/2, size/2); DC excluded, empty bins
/// dropped.
PowerSpectrum radial_spectrum(const NoiseImage& img, int n_bins);

/// Power-weighted mean frequency radius of a measured spectrum.
double spectral_centroid(const PowerSpectrum& spectrum);

/// Image k of the batch is gen_noise with seed child_seed(spec.seed, k);
/// elements are reproducible individually and in any order.
std::vector<NoiseImage> gen_batch(const NoiseSpec& spec, std::uint64_t count,
                                  int max_threads = 0);

/// Streaming batch generation: sink(k, image) is invoked once per element,
/// possibly concurrently (sink must be thread-safe or index-addressed).
void gen_batch_foreach(const NoiseSpec& spec, std::uint64_t count, int max_threads,
                       const std::function<void(std::uint64_t, NoiseImage&&)>& sink);

/// Affine map of [min, max] onto [0, 255], round half up.
/// Throws data_error on a constant image (degenerate range).
ImageU8 quantize(const NoiseImage& img);

}  // namespace pareidolia::stimuli
