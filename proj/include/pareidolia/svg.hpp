#pragma once

#include <string>

#include "pareidolia/types.hpp"

namespace pareidolia::svg {

struct PlotOptions {
  std::string x_label;
  std::string y_label;
  std::string title;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

struct RenderResult {
  std::string document;
  int dropped_points = 0;  // non-finite/nonpositive y dropped under log_y
};

/// Self-contained line plot: one polyline, a CI band when any
/// ci_half_width > 0, tick labels.  Byte-deterministic for identical inputs.
RenderResult render_svg(const Curve& curve, const PlotOptions& options);

}  // namespace pareidolia::svg
