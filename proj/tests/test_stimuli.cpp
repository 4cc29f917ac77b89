#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pareidolia/rng.hpp"
#include "pareidolia/stimuli.hpp"

using namespace pareidolia;
using namespace pareidolia::stimuli;

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("gen_noise validates its spec") {
  CHECK_THROWS_AS(gen_noise({1, 4.0, 0}), parameter_error);
  CHECK_THROWS_AS(gen_noise({64, 0.0, 0}), parameter_error);
  CHECK_THROWS_AS(gen_noise({64, -2.0, 0}), parameter_error);
}

TEST_CASE("degenerate envelope passes only DC") {
  const NoiseImage img = gen_noise({64, 1e-6, 42});
  const double dc = mean_of(img.pixels);
  const double sd = std_of(img.pixels);
  REQUIRE(std::abs(dc) > 1e-6);  // mean of 4096 normals; zero is astronomically unlikely
  CHECK(sd / std::abs(dc) < 1e-3);
}

TEST_CASE("gen_noise is deterministic") {
  const NoiseSpec spec{32, 4.0, 1234};
  const NoiseImage a = gen_noise(spec);
  const NoiseImage b = gen_noise(spec);
  REQUIRE(a.pixels.size() == b.pixels.size());
  for (std::size_t i = 0; i < a.pixels.size(); ++i) CHECK(a.pixels[i] == b.pixels[i]);
}

TEST_CASE("gen_noise works on odd sizes and stays finite") {
  const NoiseImage img = gen_noise({65, 3.0, 9});
  REQUIRE(img.pixels.size() == 65u * 65u);
  for (const double v : img.pixels) CHECK(std::isfinite(v));
}

TEST_CASE("radial spectrum of a constant image is empty of power") {
  NoiseImage img;
  img.size = 64;
  img.spec = {64, 1.0, 0};
  img.pixels.assign(64 * 64, 5.0);
  const PowerSpectrum ps = radial_spectrum(img, 8);
  for (const auto& bin : ps.radial_bins) CHECK(bin.mean_power < 1e-12);
}

TEST_CASE("pure sinusoid concentrates in the bin containing its radius") {
  const int n = 64;
  NoiseImage img;
  img.size = n;
  img.spec = {n, 1.0, 0};
  img.pixels.resize(static_cast<std::size_t>(n) * n);
  // frequency (3, 4): radius 5
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      img.pixels[static_cast<std::size_t>(r) * n + c] =
          std::cos(2.0 * std::numbers::pi * (3.0 * r + 4.0 * c) / n);
    }
  }
  const int n_bins = 16;
  const PowerSpectrum ps = radial_spectrum(img, n_bins);
  const double r_max = std::hypot(32.0, 32.0);
  const int expect_bin = static_cast<int>(5.0 / r_max * n_bins);

  double total = 0.0, in_bin = 0.0;
  for (const auto& bin : ps.radial_bins) {
    const double p = bin.mean_power * static_cast<double>(bin.count);
    total += p;
    const int b = static_cast<int>(bin.frequency / r_max * n_bins);
    if (b == expect_bin) in_bin += p;
  }
  CHECK(in_bin / total > 1.0 - 1e-9);
}

TEST_CASE("white-noise envelope gives a flat radial spectrum") {
  // width >> Nyquist: the envelope is 1 everywhere that matters
  const int n = 64, n_bins = 8, n_seeds = 50;
  std::vector<std::vector<double>> per_seed;  // [seed][bin]
  std::size_t bins_count = 0;
  for (int s = 0; s < n_seeds; ++s) {
    const NoiseImage img = gen_noise({n, 1e9, 100 + static_cast<std::uint64_t>(s)});
    const PowerSpectrum ps = radial_spectrum(img, n_bins);
    std::vector<double> powers;
    for (const auto& bin : ps.radial_bins) powers.push_back(bin.mean_power);
    if (bins_count == 0) bins_count = powers.size();
    REQUIRE(powers.size() == bins_count);
    per_seed.push_back(std::move(powers));
  }
  std::vector<double> bin_means(bins_count), bin_ses(bins_count);
  for (std::size_t b = 0; b < bins_count; ++b) {
    std::vector<double> vals;
    for (const auto& row : per_seed) vals.push_back(row[b]);
    bin_means[b] = mean_of(vals);
    bin_ses[b] = std_of(vals) / std::sqrt(static_cast<double>(n_seeds));
  }
  const double grand = mean_of(bin_means);
  for (std::size_t b = 0; b < bins_count; ++b) {
    CHECK(std::abs(bin_means[b] - grand) <= 3.0 * bin_ses[b]);
  }
}

TEST_CASE("spectral envelope regression: log power vs -f^2/width^2") {
  const int n = 1024, n_seeds = 100;
  const double width = 16.0;
  const int n_bins = 724;  // ~1 frequency unit per bin

  std::vector<std::vector<double>> per_seed_power(n_seeds);
  std::vector<double> freqs;
  gen_batch_foreach({n, width, 2024}, n_seeds, 0, [&](std::uint64_t k, NoiseImage&& img) {
    const PowerSpectrum ps = radial_spectrum(img, n_bins);
    std::vector<double> powers(ps.radial_bins.size());
    for (std::size_t i = 0; i < ps.radial_bins.size(); ++i) {
      powers[i] = ps.radial_bins[i].mean_power;
    }
    per_seed_power[k] = std::move(powers);
    if (k == 0) {
      for (const auto& bin : ps.radial_bins) freqs.push_back(bin.frequency);
    }
  });

  // seed-averaged power per bin, restricted to f in [2, 3*width]
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const double f = freqs[i];
    if (f < 2.0 || f > 3.0 * width) continue;
    double mean_power = 0.0;
    for (const auto& row : per_seed_power) mean_power += row[i];
    mean_power /= static_cast<double>(n_seeds);
    xs.push_back(-f * f / (width * width));
    ys.push_back(std::log(mean_power));
  }
  REQUIRE(xs.size() > 20);

  const double mx = mean_of(xs), my = mean_of(ys);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = (sxy * sxy) / (sxx * syy);
  INFO("slope ", slope, " r2 ", r2);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r2 > 0.99);
}

TEST_CASE("spectral centroid is strictly increasing in width") {
  double prev = -1.0;
  for (const double width : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    double centroid_sum = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const NoiseImage img = gen_noise({128, width, 500 + s});
      centroid_sum += spectral_centroid(radial_spectrum(img, 90));
    }
    const double centroid = centroid_sum / 20.0;
    CHECK(centroid > prev);
    prev = centroid;
  }
}

TEST_CASE("gen_batch children are independent of order and thread count") {
  const NoiseSpec spec{48, 6.0, 77};

  SUBCASE("count=1 equals gen_noise with the child seed of index 0") {
    const auto batch = gen_batch(spec, 1);
    NoiseSpec child = spec;
    child.seed = child_seed(spec.seed, 0);
    const NoiseImage direct = gen_noise(child);
    REQUIRE(batch.size() == 1);
    CHECK(batch[0].pixels == direct.pixels);
    CHECK(batch[0].spec.seed == child.seed);
  }

  SUBCASE("two batches are elementwise identical") {
    const auto a = gen_batch(spec, 5);
    const auto b = gen_batch(spec, 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a[k].pixels == b[k].pixels);
  }

  SUBCASE("prefix of a larger batch matches the smaller batch") {
    const auto small = gen_batch(spec, 2);
    const auto large = gen_batch(spec, 6);
    for (std::size_t k = 0; k < 2; ++k) CHECK(small[k].pixels == large[k].pixels);
  }

  SUBCASE("thread count does not change the bits") {
    const auto serial = gen_batch(spec, 8, 1);
    const auto threaded = gen_batch(spec, 8, 4);
    for (std::size_t k = 0; k < 8; ++k) CHECK(serial[k].pixels == threaded[k].pixels);
  }
}

TEST_CASE("large batch has zero-mean pixel means") {
  const std::uint64_t count = 5000;
  std::vector<double> image_means(count);
  gen_batch_foreach({256, 16.0, 31337}, count, 0, [&](std::uint64_t k, NoiseImage&& img) {
    image_means[k] = mean_of(img.pixels);
  });
  const double m = mean_of(image_means);
  const double se = std_of(image_means) / std::sqrt(static_cast<double>(count));
  CHECK(std::abs(m) <= 3.0 * se);
}

TEST_CASE("quantize maps the range onto [0, 255] with round-half-up") {
  NoiseImage img;
  img.size = 2;
  img.spec = {2, 1.0, 0};

  SUBCASE("three-level example") {
    img.pixels = {-1.0, 0.0, 1.0, 1.0};
    const ImageU8 q = quantize(img);
    CHECK(q.data[0] == 0);
    CHECK(q.data[1] == 128);  // midpoint 127.5 rounds up
    CHECK(q.data[2] == 255);
  }

  SUBCASE("extremes always land on 0 and 255") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const NoiseImage noise = gen_noise({32, 8.0, 900 + s});
      const ImageU8 q = quantize(noise);
      std::uint8_t lo = 255, hi = 0;
      for (const auto v : q.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(lo == 0);
      CHECK(hi == 255);
    }
  }

  SUBCASE("idempotent after lifting back to reals") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const NoiseImage noise = gen_noise({32, 8.0, 1000 + s});
      const ImageU8 q1 = quantize(noise);
      NoiseImage lifted;
      lifted.size = noise.size;
      lifted.spec = noise.spec;
      lifted.pixels.assign(q1.data.begin(), q1.data.end());
      const ImageU8 q2 = quantize(lifted);
      CHECK(q1.data == q2.data);
    }
  }

  SUBCASE("constant image is a degenerate range") {
    img.pixels = {3.0, 3.0, 3.0, 3.0};
    CHECK_THROWS_AS(quantize(img), data_error);
  }
}
