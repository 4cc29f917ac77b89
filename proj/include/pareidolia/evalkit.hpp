#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::evalkit {

// ============================================================================
// Boxes and annotation attributes
// ============================================================================

struct Box {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  void validate() const;
  [[nodiscard]] double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const Box& a, const Box& b);

/// Per-box attributes, each restricted to its fixed vocabulary.  Values are
/// kept as strings (they round-trip through JSONL verbatim); parsing rejects
/// anything outside the vocabulary.
struct BoxAttributes {
  std::string difficulty;   // easy | medium | hard
  std::string emotion;      // neutral | happy | sad | surprised | angry | disgusted | scared | other
  std::string origin;       // accident | design
  std::string resemblance;  // human-baby | human-child | human-adult | human-older | alien | animal | cartoon | robot | other
  std::string gender;       // neutral | female | male
  std::string amusing;      // no | somewhat | yes
  std::string commonness;   // uncommon | somewhat | common
};

/// attribute name -> allowed values, in schema order.
const std::vector<std::pair<std::string, std::vector<std::string>>>& attribute_schema();

struct AnnotatedBox {
  Box box;
  BoxAttributes attributes;
};

struct AnnotationRecord {
  std::string image_id;
  std::vector<AnnotatedBox> boxes;
};

struct DetectionRecord {
  std::string image_id;
  Box box;
  double score = 0.0;  // in [0, 1]
};

// ============================================================================
// JSONL interchange
// One JSON object per line: {"image_id": ..., "boxes": [{x_min, y_min,
// x_max, y_max, attributes{...}}]}; detection boxes carry "score" instead
// of "attributes".
// ============================================================================

std::vector<AnnotationRecord> read_annotations_jsonl(std::istream& in);
std::vector<AnnotationRecord> read_annotations_file(const std::string& path);
std::string write_annotations_jsonl(const std::vector<AnnotationRecord>& records);

std::vector<DetectionRecord> read_detections_jsonl(std::istream& in);
std::vector<DetectionRecord> read_detections_file(const std::string& path);
std::string write_detections_jsonl(const std::vector<DetectionRecord>& records);

// ============================================================================
// Average Precision
// ============================================================================

struct ApResult {
  double value = 0.0;
  bool empty_gt_warning = false;  // nonempty detections scored against no ground truth
};

/// Greedy highest-IoU matching per image over detections sorted by
/// descending score (ties by input order), then all-points interpolated AP:
/// sum over recall steps of (recall increment) * (max precision at >= that
/// recall).  Throws data_error when both inputs are empty.
ApResult average_precision(const std::vector<DetectionRecord>& dets,
                           const std::vector<AnnotationRecord>& gts,
                           double iou_thresh = 0.5);

// ============================================================================
// Dataset statistics
// ============================================================================

struct AttributeHistogram {
  std::map<std::string, std::uint64_t> counts;      // value -> boxes
  std::map<std::string, double> fractions;          // value -> count / n_boxes
};

struct StatsReport {
  std::uint64_t n_images = 0;
  std::uint64_t n_boxes = 0;
  std::map<std::string, AttributeHistogram> per_face;          // attribute -> histogram
  std::map<std::string, AttributeHistogram> per_image;         // images containing the value
  std::map<std::uint64_t, std::uint64_t> boxes_per_image;      // box count -> images
};

StatsReport dataset_stats(const std::vector<AnnotationRecord>& annotations);

// ============================================================================
// Average face
// ============================================================================

struct CropRef {
  const ImageU8* image = nullptr;
  Box box;
};

struct AverageFace {
  int size = 0;
  int channels = 1;
  std::vector<double> mean;  // row-major size*size*channels, real-valued

  /// Raw average rounded half-up to 8 bits.
  [[nodiscard]] ImageU8 raw8() const;
  /// Per-channel histogram equalization applied to raw8().
  [[nodiscard]] ImageU8 equalized8() const;
};

/// Crops each box, bilinear-resizes to out_size^2 and averages per channel
/// in real arithmetic.  All crops must share a channel count.
AverageFace average_face(const std::vector<CropRef>& crops, int out_size);

/// Standard 256-bin CDF equalization:
/// out = round(255 * (cdf(v) - cdf_min) / (1 - cdf_min)); a constant input
/// maps to 0 by the cdf_min convention.
std::vector<std::uint8_t> hist_equalize(const std::vector<std::uint8_t>& channel);

}  // namespace pareidolia::evalkit
