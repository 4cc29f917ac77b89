#include "pareidolia/feature_model.hpp"

#include <cmath>

namespace pareidolia::feature_model {

void FeatureModelParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw parameter_error("FeatureModelParams: lambda must be finite and >= 0");
  }
  if (regions < 1) throw parameter_error("FeatureModelParams: regions must be >= 1");
  if (!(area > 0.0) || !std::isfinite(area)) {
    throw parameter_error("FeatureModelParams: area must be positive and finite");
  }
}

double poisson_pmf(long long n, double lambda, double area) {
  if (n < 0) throw parameter_error("poisson_pmf: n must be nonnegative");
  if (!(lambda >= 0.0)) throw parameter_error("poisson_pmf: lambda must be >= 0");
  if (!(area > 0.0)) throw parameter_error("poisson_pmf: area must be positive");
  const double mean = lambda * area;
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  // log-space keeps large n stable; lgamma(n+1) = log n!
  return std::exp(static_cast<double>(n) * std::log(mean) -
                  std::lgamma(static_cast<double>(n) + 1.0) - mean);
}

double template_detect_prob(const FeatureModelParams& params) {
  params.validate();
  const double mean = params.lambda * params.area;
  const double m = static_cast<double>(params.regions);
  if (mean == 0.0) return 0.0;
  return std::pow(mean, m) * std::exp(-mean * m * m);
}

Curve feature_curve(const std::vector<double>& lambdas, int regions, double area) {
  if (lambdas.empty()) throw parameter_error("feature_curve: lambdas must be nonempty");
  Curve curve;
  curve.points.reserve(lambdas.size());
  for (const double lam : lambdas) {
    FeatureModelParams p{lam, regions, area};
    curve.points.push_back({lam, template_detect_prob(p), 0.0});
  }
  curve.validate();
  return curve;
}

PeakRate peak_rate(int regions, double area) {
  if (regions < 1) throw parameter_error("peak_rate: regions must be >= 1");
  if (!(area > 0.0)) throw parameter_error("peak_rate: area must be positive");
  PeakRate out;
  out.lambda_star = 1.0 / (area * static_cast<double>(regions));
  out.p_star = template_detect_prob(FeatureModelParams{out.lambda_star, regions, area});
  return out;
}

}  // namespace pareidolia::feature_model
