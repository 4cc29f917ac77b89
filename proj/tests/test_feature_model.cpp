#include <doctest.h>

#include <cmath>

#include "pareidolia/feature_model.hpp"

using namespace pareidolia;
using namespace pareidolia::feature_model;

TEST_CASE("poisson_pmf") {
  SUBCASE("empty count") {
    for (const double lam : {0.0, 0.3, 2.0}) {
      for (const double area : {0.5, 1.0, 4.0}) {
        CHECK(poisson_pmf(0, lam, area) ==
              doctest::Approx(std::exp(-lam * area)).epsilon(1e-14));
      }
    }
  }
  SUBCASE("unit rate, unit area, one event") {
    CHECK(poisson_pmf(1, 1.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  }
  SUBCASE("normalizes at mean 5") {
    double total = 0.0;
    for (long long n = 0; n <= 200; ++n) total += poisson_pmf(n, 5.0, 1.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("zero rate concentrates at zero") {
    CHECK(poisson_pmf(0, 0.0, 1.0) == 1.0);
    CHECK(poisson_pmf(3, 0.0, 1.0) == 0.0);
  }
  SUBCASE("negative count rejected") {
    CHECK_THROWS_AS(poisson_pmf(-1, 1.0, 1.0), parameter_error);
  }
}

TEST_CASE("template_detect_prob") {
  SUBCASE("no features, no detection") {
    for (const int m : {1, 2, 4, 9}) {
      CHECK(template_detect_prob({0.0, m, 1.0}) == 0.0);
    }
  }
  SUBCASE("the four-region instantiation") {
    CHECK(template_detect_prob({0.25, 4, 1.0}) ==
          doctest::Approx(7.154546440911789e-05).epsilon(1e-12));
    CHECK(template_detect_prob({0.1, 4, 1.0}) ==
          doctest::Approx(2.0189651799465542e-05).epsilon(1e-12));
    // spelled-out route: lambda^4 * exp(-16 lambda)
    for (const double lam : {0.1, 0.25, 0.5}) {
      const double direct = lam * lam * lam * lam * std::exp(-16.0 * lam);
      CHECK(template_detect_prob({lam, 4, 1.0}) == doctest::Approx(direct).epsilon(1e-13));
    }
  }
  SUBCASE("compositional identity against poisson_pmf") {
    for (const int m : {1, 2, 4, 7}) {
      for (const double lam : {0.05, 0.25, 1.0}) {
        for (const double area : {0.5, 1.0, 2.0}) {
          const double one = poisson_pmf(1, lam, area);
          const double zero = poisson_pmf(0, lam, area);
          const double composed = std::pow(one * std::pow(zero, m - 1), m);
          CHECK(template_detect_prob({lam, m, area}) ==
                doctest::Approx(composed).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("depends on lambda and area only through their product") {
    const double reference = template_detect_prob({0.3, 4, 1.0});
    for (const double c : {0.5, 2.0, 10.0}) {
      CHECK(template_detect_prob({0.3 / c, 4, c}) ==
            doctest::Approx(reference).epsilon(1e-12));
    }
  }
}

TEST_CASE("feature_curve") {
  SUBCASE("single rate equals a direct call") {
    const Curve c = feature_curve({0.4}, 4, 1.0);
    REQUIRE(c.size() == 1);
    CHECK(c.points[0].y == template_detect_prob({0.4, 4, 1.0}));
  }
  SUBCASE("vanishes at both extremes") {
    const Curve c = feature_curve({0.0, 0.25, 40.0}, 4, 1.0);
    CHECK(c.points[0].y == 0.0);
    const double peak = peak_rate(4, 1.0).p_star;
    CHECK(c.points[2].y / peak < 1e-20);
  }
  SUBCASE("unimodal on a dense grid") {
    std::vector<double> grid;
    for (int i = 0; i < 1000; ++i) grid.push_back(2.0 * i / 999.0);
    const Curve c = feature_curve(grid, 4, 1.0);
    std::size_t k = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
      if (c.points[i].y > c.points[k].y) k = i;
    }
    for (std::size_t i = 1; i <= k; ++i) CHECK(c.points[i].y > c.points[i - 1].y);
    for (std::size_t i = k + 1; i < c.size(); ++i) CHECK(c.points[i].y < c.points[i - 1].y);
  }
}

TEST_CASE("peak_rate") {
  SUBCASE("single region") {
    const PeakRate p = peak_rate(1, 1.0);
    CHECK(p.lambda_star == 1.0);
    CHECK(p.p_star == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
  }
  SUBCASE("grid search confirms the analytic maximizer") {
    for (const int m : {1, 2, 4, 8}) {
      const PeakRate p = peak_rate(m, 1.0);
      double best_lambda = 0.0, best_y = -1.0;
      // step 1e-5 over [0, 2]
      for (long i = 0; i <= 200000; ++i) {
        const double lam = static_cast<double>(i) * 1e-5;
        const double y = template_detect_prob({lam, m, 1.0});
        if (y > best_y) {
          best_y = y;
          best_lambda = lam;
        }
      }
      CHECK(std::abs(best_lambda - p.lambda_star) <= 1e-4);
      CHECK(std::abs(best_lambda - 1.0 / m) <= 1e-4);
    }
  }
  SUBCASE("is a strict local maximum") {
    for (const int m : {2, 3, 4, 8}) {
      const PeakRate p = peak_rate(m, 1.0);
      const double eps = 1e-3;
      CHECK(template_detect_prob({p.lambda_star - eps, m, 1.0}) < p.p_star);
      CHECK(template_detect_prob({p.lambda_star + eps, m, 1.0}) < p.p_star);
    }
  }
}
