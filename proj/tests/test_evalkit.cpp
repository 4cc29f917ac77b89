#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pareidolia/evalkit.hpp"
#include "pareidolia/io.hpp"
#include "pareidolia/rng.hpp"

using namespace pareidolia;
using namespace pareidolia::evalkit;

namespace {

// ----------------------------------------------------------------------------
// Exhaustive small-instance AP oracle: the matching and PR walk re-derived
// from the definition with its own arithmetic, independent of the library
// implementation.
// ----------------------------------------------------------------------------

struct OracleDet {
  int image;
  double x0, y0, x1, y1, score;
};
struct OracleGt {
  int image;
  double x0, y0, x1, y1;
};

double oracle_iou(const OracleDet& d, const OracleGt& g) {
  const double w = std::min(d.x1, g.x1) - std::max(d.x0, g.x0);
  const double h = std::min(d.y1, g.y1) - std::max(d.y0, g.y0);
  if (w <= 0 || h <= 0) return 0.0;
  const double inter = w * h;
  const double area_d = (d.x1 - d.x0) * (d.y1 - d.y0);
  const double area_g = (g.x1 - g.x0) * (g.y1 - g.y0);
  return inter / (area_d + area_g - inter);
}

double oracle_ap(std::vector<OracleDet> dets, const std::vector<OracleGt>& gts,
                 double thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const OracleDet& a, const OracleDet& b) { return a.score > b.score; });
  std::vector<bool> taken(gts.size(), false);
  std::vector<int> tp_flags;
  for (const auto& d : dets) {
    int best = -1;
    double best_v = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].image != d.image) continue;
      const double v = oracle_iou(d, gts[g]);
      if (v >= thresh && v > best_v) {
        best_v = v;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      taken[best] = true;
      tp_flags.push_back(1);
    } else {
      tp_flags.push_back(0);
    }
  }
  const double n_gt = static_cast<double>(gts.size());
  std::vector<double> prec(tp_flags.size()), rec(tp_flags.size());
  int tp = 0;
  for (std::size_t k = 0; k < tp_flags.size(); ++k) {
    tp += tp_flags[k];
    prec[k] = tp / static_cast<double>(k + 1);
    rec[k] = tp / n_gt;
  }
  double ap = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    if (rec[k] <= prev) continue;
    double max_right = 0.0;  // max precision at recall >= rec[k]
    for (std::size_t j = k; j < prec.size(); ++j) max_right = std::max(max_right, prec[j]);
    ap += (rec[k] - prev) * max_right;
    prev = rec[k];
  }
  return ap;
}

// bridges oracle structures to library records
std::pair<std::vector<DetectionRecord>, std::vector<AnnotationRecord>> to_records(
    const std::vector<OracleDet>& dets, const std::vector<OracleGt>& gts) {
  std::vector<DetectionRecord> d;
  for (const auto& od : dets) {
    d.push_back({"img" + std::to_string(od.image), Box{od.x0, od.y0, od.x1, od.y1}, od.score});
  }
  std::map<int, AnnotationRecord> recs;
  for (const auto& og : gts) {
    auto& rec = recs[og.image];
    rec.image_id = "img" + std::to_string(og.image);
    AnnotatedBox ab;
    ab.box = Box{og.x0, og.y0, og.x1, og.y1};
    ab.attributes = {"easy", "neutral", "accident", "animal", "neutral", "no", "common"};
    rec.boxes.push_back(ab);
  }
  std::vector<AnnotationRecord> g;
  for (auto& [id, rec] : recs) g.push_back(std::move(rec));
  return {std::move(d), std::move(g)};
}

BoxAttributes default_attrs() {
  return {"easy", "neutral", "accident", "animal", "neutral", "no", "common"};
}

}  // namespace

TEST_CASE("iou") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
  CHECK(iou(Box{0, 0, 1, 1}, Box{0.5, 0, 1.5, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(iou(a, Box{5, 5, 15, 15}) == iou(Box{5, 5, 15, 15}, a));
  CHECK_THROWS_AS(iou(a, Box{3, 3, 3, 9}), parameter_error);

  SUBCASE("equals one only for identical boxes") {
    const Box b{0, 0, 10, 10.0001};
    CHECK(iou(a, b) < 1.0);
  }
}

TEST_CASE("average_precision basics") {
  const BoxAttributes attrs = default_attrs();
  AnnotationRecord gt;
  gt.image_id = "im";
  gt.boxes = {{Box{0, 0, 10, 10}, attrs}, {Box{100, 100, 110, 110}, attrs}};

  SUBCASE("perfect detector") {
    std::vector<DetectionRecord> dets = {{"im", Box{0, 0, 10, 10}, 0.6},
                                         {"im", Box{100, 100, 110, 110}, 0.4}};
    CHECK(average_precision(dets, {gt}).value == 1.0);
  }

  SUBCASE("all misses") {
    std::vector<DetectionRecord> dets = {{"im", Box{300, 300, 310, 310}, 0.9}};
    CHECK(average_precision(dets, {gt}).value == 0.0);
  }

  SUBCASE("hand-computed hit-miss-hit walk gives 5/6") {
    std::vector<DetectionRecord> dets = {{"im", Box{0, 0, 10, 10}, 0.9},
                                         {"im", Box{50, 50, 60, 60}, 0.8},
                                         {"im", Box{100, 100, 110, 110}, 0.7}};
    CHECK(average_precision(dets, {gt}).value ==
          doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  }

  SUBCASE("empty ground truth warns and scores zero") {
    std::vector<DetectionRecord> dets = {{"im", Box{0, 0, 10, 10}, 0.9}};
    const auto r = average_precision(dets, {});
    CHECK(r.value == 0.0);
    CHECK(r.empty_gt_warning);
  }

  SUBCASE("no detections against ground truth is plain zero") {
    const auto r = average_precision({}, {gt});
    CHECK(r.value == 0.0);
    CHECK(!r.empty_gt_warning);
  }

  SUBCASE("both empty is undefined") {
    CHECK_THROWS_AS(average_precision({}, {}), data_error);
  }

  SUBCASE("iou threshold validation") {
    CHECK_THROWS_AS(average_precision({{"im", Box{0, 0, 1, 1}, 0.5}}, {gt}, 0.0),
                    parameter_error);
  }
}

TEST_CASE("average_precision equals the exhaustive oracle on random instances") {
  Rng rng(314159);
  const auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };
  for (int inst = 0; inst < 200; ++inst) {
    const int n_gt = 1 + static_cast<int>(rng.next_u64() % 3);
    const int n_det = 1 + static_cast<int>(rng.next_u64() % 5);
    std::vector<OracleGt> gts;
    std::vector<OracleDet> dets;
    for (int g = 0; g < n_gt; ++g) {
      const double x = u(0, 80), y = u(0, 80), w = u(5, 20), h = u(5, 20);
      gts.push_back({static_cast<int>(rng.next_u64() % 2), x, y, x + w, y + h});
    }
    for (int d = 0; d < n_det; ++d) {
      // half the detections jitter a ground-truth box, half are random
      if (d < n_gt && rng.next_double() < 0.5) {
        const auto& g = gts[static_cast<std::size_t>(d)];
        const double dx = u(-4, 4), dy = u(-4, 4);
        dets.push_back({g.image, g.x0 + dx, g.y0 + dy, g.x1 + dx, g.y1 + dy, u(0, 1)});
      } else {
        const double x = u(0, 80), y = u(0, 80), w = u(5, 20), h = u(5, 20);
        dets.push_back({static_cast<int>(rng.next_u64() % 2), x, y, x + w, y + h, u(0, 1)});
      }
    }
    const double expected = oracle_ap(dets, gts, 0.5);
    const auto [drecs, grecs] = to_records(dets, gts);
    const double actual = average_precision(drecs, grecs, 0.5).value;
    CHECK(actual == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("average_precision invariances") {
  Rng rng(2718);
  const auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };

  for (int inst = 0; inst < 50; ++inst) {
    std::vector<OracleGt> gts;
    std::vector<OracleDet> dets;
    for (int g = 0; g < 3; ++g) {
      const double x = u(0, 60), y = u(0, 60), w = u(8, 25), h = u(8, 25);
      gts.push_back({0, x, y, x + w, y + h});
    }
    for (int d = 0; d < 5; ++d) {
      const auto& g = gts[static_cast<std::size_t>(d % 3)];
      const double dx = u(-6, 6), dy = u(-6, 6);
      dets.push_back({0, g.x0 + dx, g.y0 + dy, g.x1 + dx, g.y1 + dy, u(0.01, 0.99)});
    }
    auto [drecs, grecs] = to_records(dets, gts);
    const double base = average_precision(drecs, grecs).value;

    // strictly increasing score transform: s -> (s^2 + s) / 2 stays in [0, 1)
    auto transformed = drecs;
    for (auto& d : transformed) d.score = (d.score * d.score + d.score) / 2.0;
    CHECK(average_precision(transformed, grecs).value == base);

    // permutation of the input order (scores are distinct with prob. 1)
    auto shuffled = drecs;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(average_precision(shuffled, grecs).value == base);
  }
}

TEST_CASE("dataset_stats") {
  const BoxAttributes attrs = default_attrs();

  SUBCASE("single happy record") {
    AnnotationRecord rec;
    rec.image_id = "a";
    AnnotatedBox ab{Box{0, 0, 5, 5}, attrs};
    ab.attributes.emotion = "happy";
    rec.boxes = {ab};
    const auto report = dataset_stats({rec});
    CHECK(report.n_images == 1);
    CHECK(report.n_boxes == 1);
    CHECK(report.per_face.at("emotion").fractions.at("happy") == 1.0);
  }

  SUBCASE("fractions sum to one per attribute") {
    Rng rng(55);
    std::vector<AnnotationRecord> recs;
    const auto& schema = attribute_schema();
    for (int i = 0; i < 30; ++i) {
      AnnotationRecord rec;
      rec.image_id = "img" + std::to_string(i);
      const int nb = 1 + static_cast<int>(rng.next_u64() % 3);
      for (int b = 0; b < nb; ++b) {
        AnnotatedBox ab{Box{0, 0, 10, 10}, attrs};
        for (const auto& [name, values] : schema) {
          const auto& v = values[rng.next_u64() % values.size()];
          if (name == "difficulty") ab.attributes.difficulty = v;
          else if (name == "emotion") ab.attributes.emotion = v;
          else if (name == "origin") ab.attributes.origin = v;
          else if (name == "resemblance") ab.attributes.resemblance = v;
          else if (name == "gender") ab.attributes.gender = v;
          else if (name == "amusing") ab.attributes.amusing = v;
          else ab.attributes.commonness = v;
        }
        rec.boxes.push_back(ab);
      }
      recs.push_back(std::move(rec));
    }
    const auto report = dataset_stats(recs);
    for (const auto& [attr, hist] : report.per_face) {
      double total = 0.0;
      for (const auto& [v, f] : hist.fractions) total += f;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(dataset_stats({}), data_error);
  }
}

TEST_CASE("annotation JSONL round-trips through the fixture") {
  const std::string path = std::string(FIXTURES_DIR) + "/annotations.jsonl";
  const auto first = read_annotations_file(path);
  REQUIRE(!first.empty());

  const std::string rewritten = write_annotations_jsonl(first);
  std::istringstream in(rewritten);
  const auto second = read_annotations_jsonl(in);
  REQUIRE(second.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(second[i].image_id == first[i].image_id);
    REQUIRE(second[i].boxes.size() == first[i].boxes.size());
    for (std::size_t b = 0; b < first[i].boxes.size(); ++b) {
      CHECK(second[i].boxes[b].box.x_min == first[i].boxes[b].box.x_min);
      CHECK(second[i].boxes[b].box.y_max == first[i].boxes[b].box.y_max);
      CHECK(second[i].boxes[b].attributes.emotion == first[i].boxes[b].attributes.emotion);
      CHECK(second[i].boxes[b].attributes.gender == first[i].boxes[b].attributes.gender);
    }
  }

  const auto report = dataset_stats(first);
  for (const auto& [attr, hist] : report.per_face) {
    double total = 0.0;
    for (const auto& [v, f] : hist.fractions) total += f;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unknown attribute values are ingestion errors with the record id") {
  const std::string line =
      R"({"image_id": "bad_one", "boxes": [{"x_min": 0, "y_min": 0, "x_max": 5, "y_max": 5,)"
      R"( "attributes": {"difficulty": "impossible", "emotion": "happy", "origin": "accident",)"
      R"( "resemblance": "animal", "gender": "neutral", "amusing": "no", "commonness": "common"}}]})";
  std::istringstream in(line);
  try {
    read_annotations_jsonl(in);
    FAIL("expected data_error");
  } catch (const data_error& e) {
    const std::string what = e.what();
    CHECK(what.find("bad_one") != std::string::npos);
    CHECK(what.find("impossible") != std::string::npos);
  }
}

TEST_CASE("average_face") {
  SUBCASE("single crop equals the resized crop (linear ramp)") {
    // bilinear interpolation reproduces an affine image exactly away from edges
    ImageU8 img;
    img.width = img.height = 40;
    img.channels = 1;
    img.data.resize(40 * 40);
    for (int r = 0; r < 40; ++r) {
      for (int c = 0; c < 40; ++c) img.at(r, c) = static_cast<std::uint8_t>(2 * r + 3 * c);
    }
    const Box box{8, 8, 24, 24};
    const auto avg = average_face({{&img, box}}, 16);
    // out pixel (r, c) samples source (8 + c + 0.5 - 0.5, 8 + r + 0.5 - 0.5)
    for (int r = 1; r < 15; ++r) {
      for (int c = 1; c < 15; ++c) {
        const double sx = 8.0 + c, sy = 8.0 + r;
        CHECK(avg.mean[static_cast<std::size_t>(r) * 16 + c] ==
              doctest::Approx(2.0 * sy + 3.0 * sx).epsilon(1e-12));
      }
    }
  }

  SUBCASE("a crop and its negative average to flat mid-gray") {
    ImageU8 img, neg;
    img.width = img.height = neg.width = neg.height = 20;
    img.channels = neg.channels = 1;
    img.data.resize(400);
    neg.data.resize(400);
    Rng rng(8);
    for (std::size_t i = 0; i < 400; ++i) {
      img.data[i] = static_cast<std::uint8_t>(rng.next_u64() % 256);
      neg.data[i] = static_cast<std::uint8_t>(255 - img.data[i]);
    }
    const Box box{2, 2, 18, 18};
    const auto avg = average_face({{&img, box}, {&neg, box}}, 8);
    for (const double v : avg.mean) CHECK(v == 127.5);
  }

  SUBCASE("mean of identical crops equals one crop") {
    ImageU8 img;
    img.width = img.height = 30;
    img.channels = 3;
    img.data.resize(30 * 30 * 3);
    Rng rng(9);
    for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.next_u64() % 256);
    const Box box{3, 5, 27, 29};
    const auto one = average_face({{&img, box}}, 12);
    for (const int n : {2, 7}) {
      std::vector<CropRef> crops(static_cast<std::size_t>(n), {&img, box});
      const auto many = average_face(crops, 12);
      for (std::size_t i = 0; i < one.mean.size(); ++i) {
        CHECK(many.mean[i] == doctest::Approx(one.mean[i]).epsilon(1e-12));
      }
    }
  }

  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(average_face({}, 16), data_error);
  }
}

TEST_CASE("hist_equalize") {
  SUBCASE("constant image maps to zero") {
    const std::vector<std::uint8_t> flat(100, 163);
    const auto out = hist_equalize(flat);
    for (const auto v : out) CHECK(v == 0);
  }

  SUBCASE("balanced two-level image maps to the extremes") {
    std::vector<std::uint8_t> img;
    for (int i = 0; i < 50; ++i) img.push_back(10);
    for (int i = 0; i < 50; ++i) img.push_back(200);
    const auto out = hist_equalize(img);
    for (int i = 0; i < 50; ++i) CHECK(out[static_cast<std::size_t>(i)] == 0);
    for (int i = 50; i < 100; ++i) CHECK(out[static_cast<std::size_t>(i)] == 255);
  }

  SUBCASE("preserves value ordering") {
    Rng rng(12);
    std::vector<std::uint8_t> img(4096);
    for (auto& v : img) v = static_cast<std::uint8_t>(rng.next_u64() % 256);
    const auto out = hist_equalize(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
      for (std::size_t j = i + 1; j < std::min(img.size(), i + 50); ++j) {
        if (img[i] < img[j]) CHECK(out[i] <= out[j]);
        if (img[i] == img[j]) CHECK(out[i] == out[j]);
      }
    }
  }

  SUBCASE("uniform input stays uniform (chi-squared on 256 bins)") {
    Rng rng(77);
    std::vector<std::uint8_t> img(1000000);
    for (auto& v : img) v = static_cast<std::uint8_t>(rng.next_u64() % 256);
    const auto out = hist_equalize(img);
    double counts[256] = {};
    for (const auto v : out) counts[v] += 1.0;
    const double expected = static_cast<double>(img.size()) / 256.0;
    double chi2 = 0.0;
    for (const double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 310.457);  // critical value, p = 0.01, 255 dof
  }
}
