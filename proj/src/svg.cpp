#include "pareidolia/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace pareidolia::svg {
namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

RenderResult render_svg(const Curve& curve, const PlotOptions& options) {
  curve.validate();
  if (curve.empty()) throw parameter_error("render_svg: empty curve");

  RenderResult result;

  // usable points (log-y drops nonpositive / non-finite values)
  struct Pt { double x, y, lo, hi; };
  std::vector<Pt> pts;
  bool any_ci = false;
  for (const auto& p : curve.points) {
    double y = p.y, lo = p.y - p.ci_half_width, hi = p.y + p.ci_half_width;
    if (options.log_y) {
      if (!(p.y > 0.0) || !std::isfinite(p.y)) {
        ++result.dropped_points;
        continue;
      }
      y = std::log10(p.y);
      lo = lo > 0.0 ? std::log10(lo) : y;
      hi = hi > 0.0 ? std::log10(hi) : y;
    } else if (!std::isfinite(p.y)) {
      ++result.dropped_points;
      continue;
    }
    if (p.ci_half_width > 0.0) any_ci = true;
    pts.push_back({p.x, y, lo, hi});
  }
  if (pts.empty()) throw data_error("render_svg: no renderable points");

  double x_lo = pts.front().x, x_hi = pts.back().x;
  double y_lo = pts.front().lo, y_hi = pts.front().hi;
  for (const auto& p : pts) {
    y_lo = std::min(y_lo, p.lo);
    y_hi = std::max(y_hi, p.hi);
  }
  if (x_hi == x_lo) { x_hi += 1.0; x_lo -= 1.0; }
  if (y_hi == y_lo) { y_hi += 1.0; y_lo -= 1.0; }

  const double ml = 70, mr = 20, mt = options.title.empty() ? 20 : 40, mb = 50;
  const double pw = options.width - ml - mr;
  const double ph = options.height - mt - mb;
  const auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  const auto py = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
      << options.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  if (!options.title.empty()) {
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << escape_xml(options.title) << "</text>\n";
  }

  // CI band
  if (any_ci) {
    out << "<polygon fill=\"#c9d8f0\" stroke=\"none\" points=\"";
    for (const auto& p : pts) out << fmt(px(p.x)) << ',' << fmt(py(p.hi)) << ' ';
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
      out << fmt(px(it->x)) << ',' << fmt(py(it->lo)) << ' ';
    }
    out << "\"/>\n";
  }

  // axes
  out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(ml + pw)
      << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
      << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\"/>\n";

  // ticks
  const int n_ticks = 5;
  for (int i = 0; i <= n_ticks; ++i) {
    const double tx = x_lo + (x_hi - x_lo) * i / n_ticks;
    out << "<line x1=\"" << fmt(px(tx)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
        << fmt(px(tx)) << "\" y2=\"" << fmt(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px(tx)) << "\" y=\"" << fmt(mt + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(tx, "%.6g") << "</text>\n";

    const double ty = y_lo + (y_hi - y_lo) * i / n_ticks;
    out << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py(ty)) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(py(ty)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(ty) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt(ty, "%.6g") << "</text>\n";
  }

  // labels
  if (!options.x_label.empty()) {
    out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 38)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape_xml(options.x_label) << "</text>\n";
  }
  if (!options.y_label.empty()) {
    const std::string label =
        options.log_y ? "log10 " + options.y_label : options.y_label;
    out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 16 "
        << fmt(mt + ph / 2) << ")\">" << escape_xml(label) << "</text>\n";
  }

  // the curve itself
  out << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (const auto& p : pts) out << fmt(px(p.x)) << ',' << fmt(py(p.y)) << ' ';
  out << "\"/>\n";
  out << "</svg>\n";

  result.document = out.str();
  return result;
}

}  // namespace pareidolia::svg
