#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pareidolia {

/// Invalid parameter or shape; the CLI maps this to a usage error (exit 1).
class parameter_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data; the CLI maps this to exit 2.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double ci_half_width = 0.0;  // 0 means "no interval attached"
};

/// Shared (x, y, ci) series. x strictly increasing.
struct Curve {
  std::vector<CurvePoint> points;

  [[nodiscard]] bool empty() const noexcept { return points.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }

  void validate() const {
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i - 1].x < points[i].x)) {
        throw parameter_error("Curve: x values must be strictly increasing");
      }
    }
    for (const auto& p : points) {
      if (p.ci_half_width < 0.0) {
        throw parameter_error("Curve: ci_half_width must be nonnegative");
      }
    }
  }
};

/// 8-bit raster, row-major, 1 (grayscale) or 3 (RGB) interleaved channels.
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  [[nodiscard]] std::uint8_t at(int row, int col, int ch = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
  [[nodiscard]] std::uint8_t& at(int row, int col, int ch = 0) {
    return data[(static_cast<std::size_t>(row) * width + col) * channels + ch];
  }
};

}  // namespace pareidolia
