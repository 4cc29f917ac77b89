#pragma once

#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::feature_model {

/// Spatial Poisson feature process: rate lambda per unit area, `regions`
/// template regions of `area` each, one distinct feature type per region.
struct FeatureModelParams {
  double lambda = 0.0;
  int regions = 1;
  double area = 1.0;
  void validate() const;
};

/// P(n features of one type in one region) = (lambda*area)^n / n! * exp(-lambda*area);
/// the n = 0, lambda = 0 case is 1 (0^0 convention).
double poisson_pmf(long long n, double lambda, double area);

/// Probability of exactly one correct feature and zero wrong-type features
/// in every region: (lambda*B)^M * exp(-lambda*B*M^2).
double template_detect_prob(const FeatureModelParams& params);

/// y(lambda) = template_detect_prob over the given rates.
Curve feature_curve(const std::vector<double>& lambdas, int regions, double area);

struct PeakRate {
  double lambda_star = 0.0;  // analytic maximizer 1 / (area * regions)
  double p_star = 0.0;       // detection probability at the maximizer
};
PeakRate peak_rate(int regions, double area);

}  // namespace pareidolia::feature_model
