#include "pareidolia/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "pareidolia/fft.hpp"
#include "pareidolia/parallel.hpp"
#include "pareidolia/rng.hpp"
#include "pareidolia/stimuli.hpp"

namespace pareidolia::montecarlo {
namespace {

constexpr std::uint64_t kMcBlock = 1u << 16;
constexpr double kNmsIou = 0.3;
constexpr double kVarEps = 1e-9;

/// Welford accumulator; merging is deterministic in block order and keeps
/// identical-sample streams at exactly zero variance.
struct RunningMoments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void merge(const RunningMoments& other) noexcept {
    if (other.n == 0) return;
    if (n == 0) {
      *this = other;
      return;
    }
    const double delta = other.mean - mean;
    const std::uint64_t total = n + other.n;
    mean += delta * static_cast<double>(other.n) / static_cast<double>(total);
    m2 += other.m2 + delta * delta * static_cast<double>(n) *
                         static_cast<double>(other.n) / static_cast<double>(total);
    n = total;
  }
};

double gauss_likelihood(double a, double y, double gamma) noexcept {
  const double d = (a - y) / gamma;
  return std::exp(-0.5 * d * d) / (gamma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

McEstimate mc_mode_density(double a, double sigma, double gamma,
                           std::uint64_t trials, std::uint64_t seed,
                           int max_threads) {
  if (!(gamma > 0.0)) throw parameter_error("mc_mode_density: gamma must be positive");
  if (!(sigma >= 0.0)) throw parameter_error("mc_mode_density: sigma must be >= 0");
  if (trials < 100) throw parameter_error("mc_mode_density: trials must be >= 100");

  const std::uint64_t n_blocks = (trials + kMcBlock - 1) / kMcBlock;
  std::vector<RunningMoments> blocks(n_blocks);
  parallel_for_index(n_blocks, max_threads, [&](std::uint64_t b) {
    const std::uint64_t begin = b * kMcBlock;
    const std::uint64_t end = std::min(begin + kMcBlock, trials);
    RunningMoments acc;
    for (std::uint64_t k = begin; k < end; ++k) {
      Rng rng(child_seed(seed, k));
      const double y = sigma * rng.normal();
      acc.add(gauss_likelihood(a, y, gamma));
    }
    blocks[b] = acc;
  });

  RunningMoments total;
  for (const auto& b : blocks) total.merge(b);

  McEstimate est;
  est.mean = total.mean;
  est.trials = trials;
  est.seed = seed;
  if (trials > 1 && total.m2 > 0.0) {
    const double sample_var = total.m2 / static_cast<double>(trials - 1);
    est.std_error = std::sqrt(sample_var / static_cast<double>(trials));
  }
  return est;
}

McEstimate mc_feature_detect(const feature_model::FeatureModelParams& params,
                             std::uint64_t trials, std::uint64_t seed,
                             int max_threads) {
  params.validate();
  if (trials < 1000) throw parameter_error("mc_feature_detect: trials must be >= 1000");

  const double mean_count = params.lambda * params.area;
  const int m = params.regions;

  const std::uint64_t n_blocks = (trials + kMcBlock - 1) / kMcBlock;
  std::vector<std::uint64_t> block_hits(n_blocks, 0);
  parallel_for_index(n_blocks, max_threads, [&](std::uint64_t b) {
    const std::uint64_t begin = b * kMcBlock;
    const std::uint64_t end = std::min(begin + kMcBlock, trials);
    std::uint64_t hits = 0;
    for (std::uint64_t k = begin; k < end; ++k) {
      Rng rng(child_seed(seed, k));
      bool success = true;
      for (int i = 0; i < m && success; ++i) {
        for (int j = 0; j < m; ++j) {
          const std::uint32_t n_ij = rng.poisson(mean_count);
          const std::uint32_t want = (i == j) ? 1u : 0u;
          if (n_ij != want) {
            success = false;
            break;
          }
        }
      }
      if (success) ++hits;
    }
    block_hits[b] = hits;
  });

  std::uint64_t hits = 0;
  for (const auto h : block_hits) hits += h;

  McEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.mean = static_cast<double>(hits) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(trials));
  return est;
}

// ============================================================================
// Template bank
// ============================================================================

void TemplateBank::validate() const {
  if (templates.empty()) throw parameter_error("TemplateBank: must be nonempty");
  for (const auto& t : templates) {
    if (t.size < 2 || t.values.size() != static_cast<std::size_t>(t.size) * t.size) {
      throw parameter_error("TemplateBank: malformed template");
    }
  }
}

TemplateBank::Template TemplateBank::face_template(int size, double blur_sigma_frac) {
  if (size < 4) throw parameter_error("face_template: size must be >= 4");
  const double k = size;
  std::vector<double> t(static_cast<std::size_t>(size) * size, 1.0);

  auto ink_disk = [&](double cx, double cy, double radius) {
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double dx = (c + 0.5) - cx;
        const double dy = (r + 0.5) - cy;
        if (dx * dx + dy * dy < radius * radius) {
          t[static_cast<std::size_t>(r) * size + c] = -1.0;
        }
      }
    }
  };
  ink_disk(0.32 * k, 0.34 * k, 0.11 * k);  // left eye
  ink_disk(0.68 * k, 0.34 * k, 0.11 * k);  // right eye
  for (int r = 0; r < size; ++r) {         // mouth bar
    for (int c = 0; c < size; ++c) {
      if (std::abs((c + 0.5) - 0.5 * k) < 0.24 * k &&
          std::abs((r + 0.5) - 0.72 * k) < 0.07 * k) {
        t[static_cast<std::size_t>(r) * size + c] = -1.0;
      }
    }
  }

  if (blur_sigma_frac > 0.0) {
    // separable Gaussian blur with reflect padding
    const double s = blur_sigma_frac * k;
    const int radius = static_cast<int>(std::ceil(3.0 * s));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
      kernel[i + radius] = std::exp(-0.5 * i * i / (s * s));
      ksum += kernel[i + radius];
    }
    for (double& v : kernel) v /= ksum;

    const auto reflect = [size](int i) {
      while (i < 0 || i >= size) i = i < 0 ? -i - 1 : 2 * size - i - 1;
      return i;
    };
    std::vector<double> tmp(t.size());
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * t[static_cast<std::size_t>(r) * size + reflect(c + i)];
        }
        tmp[static_cast<std::size_t>(r) * size + c] = acc;
      }
    }
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += kernel[i + radius] * tmp[static_cast<std::size_t>(reflect(r + i)) * size + c];
        }
        t[static_cast<std::size_t>(r) * size + c] = acc;
      }
    }
  }

  double mean = 0.0;
  for (const double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  double norm = 0.0;
  for (double& v : t) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : t) v /= norm;

  return Template{size, std::move(t)};
}

TemplateBank TemplateBank::default_bank() {
  TemplateBank bank;
  for (const int size : {12, 18, 24}) bank.templates.push_back(face_template(size));
  return bank;
}

// ============================================================================
// Detection
// ============================================================================

namespace {

struct Candidate {
  double score;
  int x, y, size;
  std::size_t template_index;
};

double box_iou(const Candidate& a, const Candidate& b) noexcept {
  const double ix = std::min<double>(a.x + a.size, b.x + b.size) - std::max(a.x, b.x);
  const double iy = std::min<double>(a.y + a.size, b.y + b.size) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = static_cast<double>(a.size) * a.size +
                     static_cast<double>(b.size) * b.size - inter;
  return inter / uni;
}

/// Correlation of `tmpl` against every (n-k+1)^2 window of the n x n image:
/// FFT cross-correlation for the numerator (templates are zero-mean) and
/// integral images for the window standard deviation.
void ncc_candidates(const std::vector<double>& img, int n,
                    const TemplateBank::Template& tmpl, std::size_t tmpl_index,
                    double threshold, std::vector<Candidate>& out) {
  const int k = tmpl.size;
  const int valid = n - k + 1;

  // numerator: IFFT(FFT(img) * conj(FFT(padded template)))
  std::vector<std::complex<double>> img_c(img.begin(), img.end());
  std::vector<std::complex<double>> img_f(img_c.size());
  fft::dft2(n, img_c.data(), img_f.data(), false);

  std::vector<std::complex<double>> tpl_c(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      tpl_c[static_cast<std::size_t>(r) * n + c] = tmpl.values[static_cast<std::size_t>(r) * k + c];
    }
  }
  std::vector<std::complex<double>> tpl_f(tpl_c.size());
  fft::dft2(n, tpl_c.data(), tpl_f.data(), false);

  for (std::size_t i = 0; i < img_f.size(); ++i) img_f[i] *= std::conj(tpl_f[i]);
  std::vector<std::complex<double>> corr(img_f.size());
  fft::dft2(n, img_f.data(), corr.data(), true);

  // window sums for mean/variance (exact for 8-bit-derived values)
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  std::vector<double> ii(stride * stride, 0.0), ii2(stride * stride, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double v = img[static_cast<std::size_t>(r) * n + c];
      ii[(r + 1) * stride + (c + 1)] =
          v + ii[r * stride + (c + 1)] + ii[(r + 1) * stride + c] - ii[r * stride + c];
      ii2[(r + 1) * stride + (c + 1)] = v * v + ii2[r * stride + (c + 1)] +
                                        ii2[(r + 1) * stride + c] - ii2[r * stride + c];
    }
  }
  const double win_n = static_cast<double>(k) * k;

  for (int y = 0; y < valid; ++y) {
    for (int x = 0; x < valid; ++x) {
      const auto win = [&](const std::vector<double>& t) {
        return t[(y + k) * stride + (x + k)] - t[static_cast<std::size_t>(y) * stride + (x + k)] -
               t[(y + k) * stride + x] + t[static_cast<std::size_t>(y) * stride + x];
      };
      const double s1 = win(ii);
      const double var = win(ii2) - s1 * s1 / win_n;
      if (!(var > kVarEps)) continue;  // flat window: correlation undefined
      double c = corr[static_cast<std::size_t>(y) * n + x].real() / std::sqrt(var);
      c = std::min(std::max(c, -1.0), 1.0);
      const double score = (c + 1.0) / 2.0;
      if (score > threshold) {
        out.push_back(Candidate{score, x, y, k, tmpl_index});
      }
    }
  }
}

}  // namespace

std::vector<Detection> scan_detect(const ImageU8& img, const TemplateBank& bank,
                                   double threshold) {
  bank.validate();
  if (img.channels != 1) throw parameter_error("scan_detect: image must be grayscale");
  if (img.width != img.height) throw parameter_error("scan_detect: image must be square");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw parameter_error("scan_detect: threshold must be in (0, 1)");
  }
  const int n = img.width;
  for (const auto& t : bank.templates) {
    if (t.size >= n) throw parameter_error("scan_detect: template must be smaller than image");
  }

  std::vector<double> pixels(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = img.data[i];

  std::vector<Candidate> candidates;
  for (std::size_t ti = 0; ti < bank.templates.size(); ++ti) {
    ncc_candidates(pixels, n, bank.templates[ti], ti, threshold, candidates);
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.template_index < b.template_index;
  });

  std::vector<Candidate> kept;
  for (const auto& cand : candidates) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (box_iou(cand, k) > kNmsIou) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(cand);
  }

  std::vector<Detection> out;
  out.reserve(kept.size());
  for (const auto& k : kept) {
    out.push_back(Detection{
        evalkit::Box{static_cast<double>(k.x), static_cast<double>(k.y),
                     static_cast<double>(k.x + k.size), static_cast<double>(k.y + k.size)},
        k.score});
  }
  return out;
}

Curve detection_curve(const std::vector<double>& widths, int per_width, int size,
                      const TemplateBank& bank, double threshold,
                      std::uint64_t seed, int max_threads) {
  if (widths.empty()) throw parameter_error("detection_curve: widths must be nonempty");
  if (per_width < 1) throw parameter_error("detection_curve: per_width must be >= 1");
  bank.validate();

  Curve curve;
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    stimuli::NoiseSpec spec{size, widths[wi], child_seed(seed, wi)};
    std::vector<double> counts(static_cast<std::size_t>(per_width), 0.0);
    stimuli::gen_batch_foreach(
        spec, static_cast<std::uint64_t>(per_width), max_threads,
        [&](std::uint64_t k, stimuli::NoiseImage&& noise) {
          const ImageU8 raster = stimuli::quantize(noise);
          counts[k] = static_cast<double>(scan_detect(raster, bank, threshold).size());
        });

    double mean = 0.0;
    for (const double c : counts) mean += c;
    mean /= static_cast<double>(per_width);
    double ci = 0.0;
    if (per_width > 1) {
      double ss = 0.0;
      for (const double c : counts) ss += (c - mean) * (c - mean);
      const double sd = std::sqrt(ss / static_cast<double>(per_width - 1));
      ci = 1.96 * sd / std::sqrt(static_cast<double>(per_width));
    }
    curve.points.push_back({widths[wi], mean, ci});
  }
  curve.validate();
  return curve;
}

}  // namespace pareidolia::montecarlo
