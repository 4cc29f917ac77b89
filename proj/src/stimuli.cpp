#include "pareidolia/stimuli.hpp"

#include <cmath>
#include <complex>

#include "pareidolia/fft.hpp"
#include "pareidolia/parallel.hpp"
#include "pareidolia/rng.hpp"

namespace pareidolia::stimuli {
namespace {

/// Signed frequency of row/column index i on an n-point grid:
/// 0..ceil(n/2)-1 then -floor(n/2)..-1 (the standard DFT layout).
inline int signed_freq(int i, int n) noexcept {
  return i < (n + 1) / 2 ? i : i - n;
}

}  // namespace

void NoiseSpec::validate() const {
  if (size < 2) throw parameter_error("NoiseSpec: size must be >= 2");
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw parameter_error("NoiseSpec: width must be positive and finite");
  }
}

NoiseImage gen_noise(const NoiseSpec& spec) {
  spec.validate();
  const int n = spec.size;
  const std::size_t total = static_cast<std::size_t>(n) * n;

  // i.i.d. standard-normal field, filled pairwise from the seed stream
  std::vector<std::complex<double>> field(total);
  {
    Rng rng(spec.seed);
    std::size_t i = 0;
    for (; i + 1 < total; i += 2) {
      double z0, z1;
      rng.normal_pair(z0, z1);
      field[i] = z0;
      field[i + 1] = z1;
    }
    if (i < total) field[i] = rng.normal();
  }

  std::vector<std::complex<double>> spectrum(total);
  fft::dft2(n, field.data(), spectrum.data(), false);

  const double inv_two_w2 = 1.0 / (2.0 * spec.width * spec.width);
  for (int r = 0; r < n; ++r) {
    const double u = signed_freq(r, n);
    for (int c = 0; c < n; ++c) {
      const double v = signed_freq(c, n);
      spectrum[static_cast<std::size_t>(r) * n + c] *=
          std::exp(-(u * u + v * v) * inv_two_w2);
    }
  }

  std::vector<std::complex<double>> out(total);
  fft::dft2(n, spectrum.data(), out.data(), true);

  double real_sq = 0.0, imag_sq = 0.0;
  for (const auto& z : out) {
    real_sq += z.real() * z.real();
    imag_sq += z.imag() * z.imag();
  }
  if (imag_sq > 1e-18 * real_sq) {
    throw data_error("gen_noise: imaginary residue exceeds 1e-9 of signal RMS");
  }

  NoiseImage img;
  img.size = n;
  img.spec = spec;
  img.pixels.resize(total);
  for (std::size_t i = 0; i < total; ++i) img.pixels[i] = out[i].real();
  return img;
}

PowerSpectrum radial_spectrum(const NoiseImage& img, int n_bins) {
  if (n_bins < 2) throw parameter_error("radial_spectrum: n_bins must be >= 2");
  const int n = img.size;
  if (n < 2 || img.pixels.size() != static_cast<std::size_t>(n) * n) {
    throw parameter_error("radial_spectrum: malformed image");
  }

  const auto spectrum = fft::forward_real(n, img.pixels.data());

  const double max_axis = std::floor(n / 2.0);
  const double r_max = std::hypot(max_axis, max_axis);
  std::vector<double> power_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n_bins), 0);

  for (int r = 0; r < n; ++r) {
    const double u = signed_freq(r, n);
    for (int c = 0; c < n; ++c) {
      const double v = signed_freq(c, n);
      const double radius = std::hypot(u, v);
      if (radius == 0.0) continue;  // DC excluded
      int b = static_cast<int>(radius / r_max * n_bins);
      if (b >= n_bins) b = n_bins - 1;
      const auto& z = spectrum[static_cast<std::size_t>(r) * n + c];
      power_sum[b] += std::norm(z);
      ++counts[b];
    }
  }

  PowerSpectrum out;
  for (int b = 0; b < n_bins; ++b) {
    if (counts[b] == 0) continue;
    out.radial_bins.push_back(RadialBin{r_max * (b + 0.5) / n_bins,
                                        power_sum[b] / counts[b], counts[b]});
  }
  return out;
}

double spectral_centroid(const PowerSpectrum& spectrum) {
  double num = 0.0, den = 0.0;
  for (const auto& bin : spectrum.radial_bins) {
    const double total = bin.mean_power * static_cast<double>(bin.count);
    num += bin.frequency * total;
    den += total;
  }
  if (den == 0.0) throw data_error("spectral_centroid: zero total power");
  return num / den;
}

void gen_batch_foreach(const NoiseSpec& spec, std::uint64_t count, int max_threads,
                       const std::function<void(std::uint64_t, NoiseImage&&)>& sink) {
  spec.validate();
  if (count < 1) throw parameter_error("gen_batch: count must be >= 1");
  parallel_for_index(count, max_threads, [&](std::uint64_t k) {
    NoiseSpec child = spec;
    child.seed = child_seed(spec.seed, k);
    sink(k, gen_noise(child));
  });
}

std::vector<NoiseImage> gen_batch(const NoiseSpec& spec, std::uint64_t count,
                                  int max_threads) {
  std::vector<NoiseImage> images(count);
  gen_batch_foreach(spec, count, max_threads,
                    [&](std::uint64_t k, NoiseImage&& img) { images[k] = std::move(img); });
  return images;
}

ImageU8 quantize(const NoiseImage& img) {
  if (img.pixels.empty()) throw parameter_error("quantize: empty image");
  double lo = img.pixels[0], hi = img.pixels[0];
  for (const double v : img.pixels) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) throw data_error("quantize: degenerate range (constant image)");

  ImageU8 out;
  out.width = img.size;
  out.height = img.size;
  out.channels = 1;
  out.data.resize(img.pixels.size());
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>(
        std::floor((img.pixels[i] - lo) * scale + 0.5));
  }
  return out;
}

}  // namespace pareidolia::stimuli
