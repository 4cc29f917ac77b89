#include "pareidolia/csv.hpp"

#include <cstdio>
#include <sstream>

namespace pareidolia::csv {

std::string write_curve(const Curve& curve, const std::string& x_name,
                        const std::string& y_name, const std::string& ci_name) {
  curve.validate();
  std::ostringstream out;
  out << x_name << ',' << y_name;
  if (!ci_name.empty()) out << ',' << ci_name;
  out << '\n';
  char buf[64];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g", p.x);
    out << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.y);
    out << buf;
    if (!ci_name.empty()) {
      std::snprintf(buf, sizeof buf, "%.17g", p.ci_half_width);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

Curve read_curve(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw data_error("curve CSV: empty content");

  Curve curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(ls, field, ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw data_error("curve CSV line " + std::to_string(line_no) + ": bad number '" +
                         field + "'");
      }
    }
    if (values.size() != 2 && values.size() != 3) {
      throw data_error("curve CSV line " + std::to_string(line_no) +
                       ": expected 2 or 3 columns");
    }
    curve.points.push_back({values[0], values[1], values.size() == 3 ? values[2] : 0.0});
  }
  curve.validate();
  return curve;
}

}  // namespace pareidolia::csv
