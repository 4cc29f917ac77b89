#include "pareidolia/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace pareidolia::evalkit {

using nlohmann::json;

void Box::validate() const {
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw parameter_error("Box: requires x_min < x_max and y_min < y_max");
  }
}

double iou(const Box& a, const Box& b) {
  a.validate();
  b.validate();
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& attribute_schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> schema = {
      {"difficulty", {"easy", "medium", "hard"}},
      {"emotion", {"neutral", "happy", "sad", "surprised", "angry", "disgusted", "scared", "other"}},
      {"origin", {"accident", "design"}},
      {"resemblance", {"human-baby", "human-child", "human-adult", "human-older",
                       "alien", "animal", "cartoon", "robot", "other"}},
      {"gender", {"neutral", "female", "male"}},
      {"amusing", {"no", "somewhat", "yes"}},
      {"commonness", {"uncommon", "somewhat", "common"}},
  };
  return schema;
}

namespace {

std::string& attribute_field(BoxAttributes& a, const std::string& name) {
  if (name == "difficulty") return a.difficulty;
  if (name == "emotion") return a.emotion;
  if (name == "origin") return a.origin;
  if (name == "resemblance") return a.resemblance;
  if (name == "gender") return a.gender;
  if (name == "amusing") return a.amusing;
  if (name == "commonness") return a.commonness;
  throw data_error("unknown attribute: " + name);
}

const std::string& attribute_field(const BoxAttributes& a, const std::string& name) {
  return attribute_field(const_cast<BoxAttributes&>(a), name);
}

void check_attribute_value(const std::string& attr, const std::string& value,
                           const std::string& image_id) {
  for (const auto& [name, values] : attribute_schema()) {
    if (name != attr) continue;
    if (std::find(values.begin(), values.end(), value) != values.end()) return;
    throw data_error("annotation '" + image_id + "': attribute " + attr +
                     " has unknown value '" + value + "'");
  }
  throw data_error("annotation '" + image_id + "': unknown attribute " + attr);
}

Box box_from_json(const json& j, const std::string& where) {
  if (!j.contains("x_min") || !j.contains("y_min") || !j.contains("x_max") ||
      !j.contains("y_max")) {
    throw data_error(where + ": box needs x_min, y_min, x_max, y_max");
  }
  Box b{j.at("x_min").get<double>(), j.at("y_min").get<double>(),
        j.at("x_max").get<double>(), j.at("y_max").get<double>()};
  try {
    b.validate();
  } catch (const parameter_error& e) {
    throw data_error(where + ": " + e.what());
  }
  return b;
}

json box_to_json(const Box& b) {
  return json{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}};
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw data_error("line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
  }
}

}  // namespace

std::vector<AnnotationRecord> read_annotations_jsonl(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    AnnotationRecord rec;
    if (!j.contains("image_id")) {
      throw data_error("line " + std::to_string(line_no) + ": missing image_id");
    }
    rec.image_id = j.at("image_id").get<std::string>();
    for (const auto& jb : j.value("boxes", json::array())) {
      AnnotatedBox ab;
      ab.box = box_from_json(jb, "annotation '" + rec.image_id + "'");
      const json attrs = jb.value("attributes", json::object());
      for (const auto& [name, values] : attribute_schema()) {
        if (!attrs.contains(name)) {
          throw data_error("annotation '" + rec.image_id + "': missing attribute " + name);
        }
        const auto value = attrs.at(name).get<std::string>();
        check_attribute_value(name, value, rec.image_id);
        attribute_field(ab.attributes, name) = value;
      }
      rec.boxes.push_back(std::move(ab));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AnnotationRecord> read_annotations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open annotations file: " + path);
  return read_annotations_jsonl(in);
}

std::string write_annotations_jsonl(const std::vector<AnnotationRecord>& records) {
  std::ostringstream out;
  for (const auto& rec : records) {
    json jboxes = json::array();
    for (const auto& ab : rec.boxes) {
      json jb = box_to_json(ab.box);
      json attrs;
      for (const auto& [name, values] : attribute_schema()) {
        attrs[name] = attribute_field(ab.attributes, name);
      }
      jb["attributes"] = attrs;
      jboxes.push_back(std::move(jb));
    }
    out << json{{"image_id", rec.image_id}, {"boxes", jboxes}}.dump() << '\n';
  }
  return out.str();
}

std::vector<DetectionRecord> read_detections_jsonl(std::istream& in) {
  std::vector<DetectionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_line(line, line_no);
    if (!j.contains("image_id")) {
      throw data_error("line " + std::to_string(line_no) + ": missing image_id");
    }
    const auto image_id = j.at("image_id").get<std::string>();
    for (const auto& jb : j.value("boxes", json::array())) {
      DetectionRecord det;
      det.image_id = image_id;
      det.box = box_from_json(jb, "detection '" + image_id + "'");
      if (!jb.contains("score")) {
        throw data_error("detection '" + image_id + "': missing score");
      }
      det.score = jb.at("score").get<double>();
      if (!(det.score >= 0.0 && det.score <= 1.0)) {
        throw data_error("detection '" + image_id + "': score outside [0, 1]");
      }
      out.push_back(std::move(det));
    }
  }
  return out;
}

std::vector<DetectionRecord> read_detections_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open detections file: " + path);
  return read_detections_jsonl(in);
}

std::string write_detections_jsonl(const std::vector<DetectionRecord>& records) {
  // group consecutive records of one image into a single line
  std::ostringstream out;
  std::size_t i = 0;
  while (i < records.size()) {
    const std::string& id = records[i].image_id;
    json jboxes = json::array();
    while (i < records.size() && records[i].image_id == id) {
      json jb = box_to_json(records[i].box);
      jb["score"] = records[i].score;
      jboxes.push_back(std::move(jb));
      ++i;
    }
    out << json{{"image_id", id}, {"boxes", jboxes}}.dump() << '\n';
  }
  return out.str();
}

// ============================================================================
// Average Precision
// ============================================================================

ApResult average_precision(const std::vector<DetectionRecord>& dets,
                           const std::vector<AnnotationRecord>& gts,
                           double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh < 1.0)) {
    throw parameter_error("average_precision: iou_thresh must be in (0, 1)");
  }

  std::size_t n_gt = 0;
  std::map<std::string, std::vector<const Box*>> gt_by_image;
  for (const auto& rec : gts) {
    for (const auto& ab : rec.boxes) {
      gt_by_image[rec.image_id].push_back(&ab.box);
      ++n_gt;
    }
  }
  if (n_gt == 0 && dets.empty()) {
    throw data_error("average_precision: no detections and no ground truth");
  }
  if (n_gt == 0) return {0.0, true};
  if (dets.empty()) return {0.0, false};

  // score-descending order, stable in the input order
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score > dets[b].score;
  });

  std::map<std::string, std::vector<bool>> matched;
  for (const auto& [id, boxes] : gt_by_image) matched[id].assign(boxes.size(), false);

  std::vector<bool> is_tp(dets.size(), false);
  for (const std::size_t di : order) {
    const auto it = gt_by_image.find(dets[di].image_id);
    if (it == gt_by_image.end()) continue;
    auto& used = matched[dets[di].image_id];
    double best_iou = 0.0;
    std::size_t best_gi = 0;
    bool found = false;
    for (std::size_t gi = 0; gi < it->second.size(); ++gi) {
      if (used[gi]) continue;
      const double v = iou(dets[di].box, *it->second[gi]);
      if (v >= iou_thresh && v > best_iou) {
        best_iou = v;
        best_gi = gi;
        found = true;
      }
    }
    if (found) {
      used[best_gi] = true;
      is_tp[di] = true;
    }
  }

  std::vector<double> precision(dets.size()), recall(dets.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (is_tp[order[k]]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(n_gt);
  }

  // precision envelope from the right, then sum recall increments
  for (std::size_t k = precision.size() - 1; k-- > 0;) {
    precision[k] = std::max(precision[k], precision[k + 1]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < recall.size(); ++k) {
    if (recall[k] > prev_recall) {
      ap += (recall[k] - prev_recall) * precision[k];
      prev_recall = recall[k];
    }
  }
  return {ap, false};
}

// ============================================================================
// Dataset statistics
// ============================================================================

StatsReport dataset_stats(const std::vector<AnnotationRecord>& annotations) {
  if (annotations.empty()) throw data_error("dataset_stats: no annotation records");

  StatsReport report;
  report.n_images = annotations.size();
  for (const auto& [name, values] : attribute_schema()) {
    report.per_face[name] = {};
    report.per_image[name] = {};
  }

  for (const auto& rec : annotations) {
    report.boxes_per_image[rec.boxes.size()]++;
    std::map<std::string, std::map<std::string, bool>> seen_in_image;
    for (const auto& ab : rec.boxes) {
      ++report.n_boxes;
      for (const auto& [name, values] : attribute_schema()) {
        const std::string& v = attribute_field(ab.attributes, name);
        report.per_face[name].counts[v]++;
        seen_in_image[name][v] = true;
      }
    }
    for (auto& [name, vals] : seen_in_image) {
      for (auto& [v, present] : vals) report.per_image[name].counts[v]++;
    }
  }

  for (auto& [name, hist] : report.per_face) {
    for (auto& [v, c] : hist.counts) {
      hist.fractions[v] = static_cast<double>(c) / static_cast<double>(report.n_boxes);
    }
  }
  for (auto& [name, hist] : report.per_image) {
    for (auto& [v, c] : hist.counts) {
      hist.fractions[v] = static_cast<double>(c) / static_cast<double>(report.n_images);
    }
  }
  return report;
}

// ============================================================================
// Average face
// ============================================================================

namespace {

/// Bilinear sample of channel ch at real coordinates (x, y), clamped.
double sample_bilinear(const ImageU8& img, double x, double y, int ch) {
  const auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  const int x0 = clampi(static_cast<int>(std::floor(x)), 0, img.width - 1);
  const int y0 = clampi(static_cast<int>(std::floor(y)), 0, img.height - 1);
  const int x1 = clampi(x0 + 1, 0, img.width - 1);
  const int y1 = clampi(y0 + 1, 0, img.height - 1);
  const double fx = std::min(std::max(x - x0, 0.0), 1.0);
  const double fy = std::min(std::max(y - y0, 0.0), 1.0);
  const double top = (1.0 - fx) * img.at(y0, x0, ch) + fx * img.at(y0, x1, ch);
  const double bot = (1.0 - fx) * img.at(y1, x0, ch) + fx * img.at(y1, x1, ch);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace

AverageFace average_face(const std::vector<CropRef>& crops, int out_size) {
  if (crops.empty()) throw data_error("average_face: no crops");
  if (out_size < 8) throw parameter_error("average_face: out_size must be >= 8");
  const int channels = crops.front().image->channels;
  for (const auto& c : crops) {
    if (c.image == nullptr) throw parameter_error("average_face: null image");
    if (c.image->channels != channels) {
      throw data_error("average_face: mixed channel counts");
    }
    c.box.validate();
  }

  AverageFace avg;
  avg.size = out_size;
  avg.channels = channels;
  avg.mean.assign(static_cast<std::size_t>(out_size) * out_size * channels, 0.0);

  for (const auto& crop : crops) {
    const double bw = crop.box.x_max - crop.box.x_min;
    const double bh = crop.box.y_max - crop.box.y_min;
    std::size_t idx = 0;
    for (int r = 0; r < out_size; ++r) {
      // half-pixel-center mapping from output grid into the box
      const double sy = crop.box.y_min + (r + 0.5) * bh / out_size - 0.5;
      for (int c = 0; c < out_size; ++c) {
        const double sx = crop.box.x_min + (c + 0.5) * bw / out_size - 0.5;
        for (int ch = 0; ch < channels; ++ch) {
          avg.mean[idx++] += sample_bilinear(*crop.image, sx, sy, ch);
        }
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(crops.size());
  for (double& v : avg.mean) v *= inv;
  return avg;
}

ImageU8 AverageFace::raw8() const {
  ImageU8 out;
  out.width = size;
  out.height = size;
  out.channels = channels;
  out.data.resize(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double v = std::floor(mean[i] + 0.5);
    out.data[i] = static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
  }
  return out;
}

ImageU8 AverageFace::equalized8() const {
  const ImageU8 raw = raw8();
  ImageU8 out = raw;
  for (int ch = 0; ch < channels; ++ch) {
    std::vector<std::uint8_t> plane(static_cast<std::size_t>(size) * size);
    for (std::size_t p = 0; p < plane.size(); ++p) plane[p] = raw.data[p * channels + ch];
    const auto eq = hist_equalize(plane);
    for (std::size_t p = 0; p < plane.size(); ++p) out.data[p * channels + ch] = eq[p];
  }
  return out;
}

std::vector<std::uint8_t> hist_equalize(const std::vector<std::uint8_t>& channel) {
  if (channel.empty()) throw parameter_error("hist_equalize: empty raster");
  std::uint64_t hist[256] = {};
  for (const std::uint8_t v : channel) ++hist[v];

  const double n = static_cast<double>(channel.size());
  double cdf[256];
  double running = 0.0;
  for (int v = 0; v < 256; ++v) {
    running += static_cast<double>(hist[v]) / n;
    cdf[v] = running;
  }
  double cdf_min = 0.0;
  for (int v = 0; v < 256; ++v) {
    if (hist[v] > 0) {
      cdf_min = cdf[v];
      break;
    }
  }

  std::uint8_t lut[256];
  const double denom = 1.0 - cdf_min;
  for (int v = 0; v < 256; ++v) {
    double mapped = 0.0;  // constant input: everything sits at cdf_min -> 0
    if (denom > 0.0) {
      mapped = std::floor(255.0 * (cdf[v] - cdf_min) / denom + 0.5);
      mapped = std::min(std::max(mapped, 0.0), 255.0);
    }
    lut[v] = static_cast<std::uint8_t>(mapped);
  }

  std::vector<std::uint8_t> out(channel.size());
  for (std::size_t i = 0; i < channel.size(); ++i) out[i] = lut[channel[i]];
  return out;
}

}  // namespace pareidolia::evalkit
