#include "pareidolia/gaussian_model.hpp"

#include <cmath>
#include <numbers>

namespace pareidolia::gaussian_model {

void ModeSpectrum::validate() const {
  if (sigmas.empty()) throw parameter_error("ModeSpectrum: needs at least one mode");
  for (const double s : sigmas) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw parameter_error("ModeSpectrum: sigmas must be finite and >= 0");
    }
  }
}

void TemplateSpectrum::validate() const {
  for (const double a : coeffs) {
    if (!std::isfinite(a)) throw parameter_error("TemplateSpectrum: coefficients must be finite");
  }
}

void GaussianDetectionParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw parameter_error("GaussianDetectionParams: gamma must be positive and finite");
  }
}

double log_mode_match_density(double a, double sigma, double gamma) {
  if (!(gamma > 0.0)) throw parameter_error("mode_match_density: gamma must be positive");
  if (!(sigma >= 0.0)) throw parameter_error("mode_match_density: sigma must be >= 0");
  const double var = sigma * sigma + gamma * gamma;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - a * a / (2.0 * var);
}

double mode_match_density(double a, double sigma, double gamma) {
  return std::exp(log_mode_match_density(a, sigma, gamma));
}

double log_pareidolia_density(const TemplateSpectrum& tmpl, const ModeSpectrum& modes,
                              const GaussianDetectionParams& params) {
  tmpl.validate();
  modes.validate();
  params.validate();
  if (tmpl.coeffs.size() != modes.sigmas.size()) {
    throw parameter_error("log_pareidolia_density: template/mode length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < tmpl.coeffs.size(); ++i) {
    sum += log_mode_match_density(tmpl.coeffs[i], modes.sigmas[i], params.gamma);
  }
  return sum;
}

double envelope_sigma(double f, double width, double s0) {
  if (!(f > 0.0) || !(width > 0.0) || !(s0 > 0.0)) {
    throw parameter_error("envelope_sigma: f, width, s0 must be positive");
  }
  return s0 * std::exp(-f * f / (2.0 * width * width));
}

TemplateSpectrum template_one_over_f(int modes, double amplitude) {
  if (modes < 1) throw parameter_error("template_one_over_f: modes must be >= 1");
  TemplateSpectrum t;
  t.coeffs.reserve(static_cast<std::size_t>(modes));
  for (int i = 1; i <= modes; ++i) t.coeffs.push_back(amplitude / i);
  return t;
}

ModeSpectrum envelope_modes(int modes, double width, double s0) {
  if (modes < 1) throw parameter_error("envelope_modes: modes must be >= 1");
  ModeSpectrum m;
  m.sigmas.reserve(static_cast<std::size_t>(modes));
  for (int i = 1; i <= modes; ++i) m.sigmas.push_back(envelope_sigma(i, width, s0));
  return m;
}

Curve curve_over_widths(const std::vector<double>& widths, int modes,
                        double amplitude, double s0,
                        const GaussianDetectionParams& params) {
  if (widths.empty()) throw parameter_error("curve_over_widths: widths must be nonempty");
  const TemplateSpectrum tmpl = template_one_over_f(modes, amplitude);
  Curve curve;
  curve.points.reserve(widths.size());
  for (const double w : widths) {
    const ModeSpectrum m = envelope_modes(modes, w, s0);
    curve.points.push_back({w, log_pareidolia_density(tmpl, m, params), 0.0});
  }
  curve.validate();
  return curve;
}

std::pair<double, double> peak_of_curve(const Curve& curve) {
  if (curve.empty()) throw parameter_error("peak_of_curve: empty curve");
  const CurvePoint* best = &curve.points.front();
  for (const auto& p : curve.points) {
    if (p.y > best->y) best = &p;  // strict: ties keep the smaller x
  }
  return {best->x, best->y};
}

}  // namespace pareidolia::gaussian_model
