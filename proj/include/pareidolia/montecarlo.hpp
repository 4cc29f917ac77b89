#pragma once

#include <cstdint>
#include <vector>

#include "pareidolia/evalkit.hpp"
#include "pareidolia/feature_model.hpp"
#include "pareidolia/types.hpp"

namespace pareidolia::montecarlo {

/// One stochastic estimate with its standard error and provenance.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Estimates the marginal density of observing target value `a` by averaging
/// the Gaussian likelihood N(a; y_k, gamma) over samples y_k ~ N(0, sigma).
/// Trial k draws from child_seed(seed, k); the estimate is bit-identical
/// across thread counts.
McEstimate mc_mode_density(double a, double sigma, double gamma,
                           std::uint64_t trials, std::uint64_t seed,
                           int max_threads = 0);

/// Per trial draws regions x regions independent Poisson(lambda*area) counts
/// n_ij (region i, feature type j); success iff every region has n_ii = 1 and
/// n_ij = 0 for j != i.  std_error = sqrt(p(1-p)/trials).
McEstimate mc_feature_detect(const feature_model::FeatureModelParams& params,
                             std::uint64_t trials, std::uint64_t seed,
                             int max_threads = 0);

// ============================================================================
// Toy template detector
// ============================================================================

struct Detection {
  evalkit::Box box;
  double score = 0.0;  // (correlation + 1) / 2, in [0, 1]
};

/// Procedurally drawn face schematics (two dark disks and a dark bar on
/// light ground), zero-mean and unit-norm.
struct TemplateBank {
  struct Template {
    int size = 0;
    std::vector<double> values;  // row-major size*size
  };
  std::vector<Template> templates;

  void validate() const;

  /// Smoothed schematics at sizes 12, 18 and 24.
  static TemplateBank default_bank();
  /// One schematic at the given size; blur_sigma_frac scales the smoothing
  /// kernel relative to the canvas (0 disables it).
  static Template face_template(int size, double blur_sigma_frac = 0.08);
};

/// Normalized cross-correlation of every template at every valid position,
/// score = (corr+1)/2; candidates above `threshold` go through greedy
/// non-maximum suppression at IoU > 0.3.  Zero-variance windows are skipped.
/// Output is ordered by descending score, then row-major position, then
/// template index.
std::vector<Detection> scan_detect(const ImageU8& img, const TemplateBank& bank,
                                   double threshold);

/// Mean detection count per envelope width over per_width generated noise
/// images of the given size; ci_half_width = 1.96 * sample std / sqrt(n)
/// (0 when per_width == 1).  Width index w uses batch seed
/// child_seed(seed, w).
Curve detection_curve(const std::vector<double>& widths, int per_width, int size,
                      const TemplateBank& bank, double threshold,
                      std::uint64_t seed, int max_threads = 0);

}  // namespace pareidolia::montecarlo
