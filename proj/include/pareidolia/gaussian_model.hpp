#pragma once

#include <utility>
#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::gaussian_model {

/// Per-mode generating standard deviations; mode i (1-based) doubles as
/// radial frequency i in cycles/image.
struct ModeSpectrum {
  std::vector<double> sigmas;
  void validate() const;
};

/// Target coefficients of the matched template, one per mode.
struct TemplateSpectrum {
  std::vector<double> coeffs;
  void validate() const;
};

/// Uniform per-mode detection tolerance.
struct GaussianDetectionParams {
  double gamma = 0.0;
  void validate() const;
};

// Defaults for the width-vs-density curve and the model fit.  The mode
// count and tolerance follow the narrow-detector setting; amplitude and
// s0 are calibrated so the curve exhibits its interior peak (see README).
inline constexpr int kDefaultModes = 64;
inline constexpr double kDefaultAmplitude = 200.0;
inline constexpr double kDefaultS0 = 10.0;
inline constexpr double kDefaultGamma = 10.0;

/// Marginal density of drawing target value `a` from a zero-mean Gaussian
/// mode of std sigma under a Gaussian detector of tolerance gamma:
///   (2 pi (gamma^2 + sigma^2))^(-1/2) * exp(-a^2 / (2 (sigma^2 + gamma^2)))
double mode_match_density(double a, double sigma, double gamma);

/// log of mode_match_density, evaluated directly in log space.
double log_mode_match_density(double a, double sigma, double gamma);

/// Sum of per-mode log densities (the log of the product over modes).
double log_pareidolia_density(const TemplateSpectrum& tmpl, const ModeSpectrum& modes,
                              const GaussianDetectionParams& params);

/// Generating std of radial mode f under an envelope of the given width:
/// s0 * exp(-f^2 / (2 width^2)).
double envelope_sigma(double f, double width, double s0);

/// Template with a_i = amplitude / i, i = 1..modes.
TemplateSpectrum template_one_over_f(int modes, double amplitude);

/// sigma_i = envelope_sigma(i, width, s0) for i = 1..modes.
ModeSpectrum envelope_modes(int modes, double width, double s0);

/// y(w) = log_pareidolia_density of the 1/f template against the
/// width-w envelope modes; x = w.
Curve curve_over_widths(const std::vector<double>& widths, int modes,
                        double amplitude, double s0,
                        const GaussianDetectionParams& params);

/// Point of maximal y; ties broken toward smaller x.
std::pair<double, double> peak_of_curve(const Curve& curve);

}  // namespace pareidolia::gaussian_model
