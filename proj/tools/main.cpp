// pareidolia: noise-stimulus generation, closed-form pareidolia models,
// Monte Carlo verification, detection-curve simulation, annotation
// evaluation, and psychophysics trial analysis behind one executable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pareidolia/csv.hpp"
#include "pareidolia/evalkit.hpp"
#include "pareidolia/feature_model.hpp"
#include "pareidolia/gaussian_model.hpp"
#include "pareidolia/io.hpp"
#include "pareidolia/montecarlo.hpp"
#include "pareidolia/pnm.hpp"
#include "pareidolia/psycho.hpp"
#include "pareidolia/rng.hpp"
#include "pareidolia/stimuli.hpp"
#include "pareidolia/svg.hpp"
#include "pareidolia/types.hpp"
#include "pareidolia/version.hpp"

namespace {

using nlohmann::json;
using namespace pareidolia;

constexpr std::uint64_t kDefaultSeed = 1;

// ----------------------------------------------------------------------------
// run metadata sidecar
// ----------------------------------------------------------------------------

class RunMeta {
 public:
  RunMeta(int argc, char** argv) : start_(std::chrono::steady_clock::now()) {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << shell_quote(argv[i]);
    command_ = cmd.str();
  }

  /// Single-quotes arguments that contain shell metacharacters so the
  /// recorded command replays verbatim through a POSIX shell.
  static std::string shell_quote(const std::string& arg) {
    const bool plain = !arg.empty() &&
                       arg.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyz"
                           "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                           "0123456789_-./:=,+@%") == std::string::npos;
    if (plain) return arg;
    std::string quoted = "'";
    for (const char c : arg) {
      if (c == '\'') quoted += "'\\''";
      else quoted += c;
    }
    quoted += "'";
    return quoted;
  }

  template <typename T>
  void param(const std::string& name, const T& value) {
    parameters_[name] = value;
  }
  void seed(std::uint64_t s) { seed_ = s; }
  void output(const std::string& path) { outputs_.push_back(path); }

  /// Writes <anchor>.meta.json (or anchor/run.meta.json for directories).
  void write(const std::string& anchor, bool anchor_is_dir = false) const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json meta{{"command", command_},
              {"version", kVersion},
              {"parameters", parameters_},
              {"outputs", outputs_},
              {"wall_time_s", wall}};
    if (seed_) meta["seed"] = *seed_;
    const std::string path = anchor_is_dir
                                 ? (std::filesystem::path(anchor) / "run.meta.json").string()
                                 : anchor + ".meta.json";
    io::write_file_atomic(path, meta.dump(2) + "\n");
  }

 private:
  std::string command_;
  json parameters_ = json::object();
  std::optional<std::uint64_t> seed_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// ----------------------------------------------------------------------------
// range/list parsing: "a:b:n" (linear), "a:b:n(log)", or "v1,v2,..."
// ----------------------------------------------------------------------------

std::vector<double> parse_grid(const std::string& text) {
  const auto bad = [&](const std::string& why) {
    throw parameter_error("bad grid '" + text + "': " + why);
  };
  if (text.find(':') == std::string::npos) {
    std::vector<double> values;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        bad("not a number: '" + tok + "'");
      }
    }
    if (values.empty()) bad("empty list");
    return values;
  }

  bool log_spaced = false;
  std::string spec = text;
  if (spec.size() > 5 && spec.substr(spec.size() - 5) == "(log)") {
    log_spaced = true;
    spec = spec.substr(0, spec.size() - 5);
  }
  double a = 0, b = 0;
  long n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !ss.eof()) {
    bad("expected a:b:n or a:b:n(log)");
  }
  if (n < 1) bad("n must be >= 1");
  if (log_spaced && (a <= 0.0 || b <= 0.0)) bad("log spacing needs positive endpoints");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n));
  if (n == 1) {
    values.push_back(a);
    return values;
  }
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    values.push_back(log_spaced ? std::exp(std::log(a) + t * (std::log(b) - std::log(a)))
                                : a + t * (b - a));
  }
  return values;
}

std::string format_width(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", w);
  return buf;
}

void maybe_write_svg(const std::string& path, const Curve& curve,
                     const svg::PlotOptions& options, RunMeta& meta) {
  if (path.empty()) return;
  const auto render = svg::render_svg(curve, options);
  if (render.dropped_points > 0) {
    std::cerr << "warning: dropped " << render.dropped_points
              << " non-positive point(s) for the log-scale plot\n";
  }
  io::write_file_atomic(path, render.document);
  meta.output(path);
}

// ----------------------------------------------------------------------------
// subcommands
// ----------------------------------------------------------------------------

void run_gen_noise(RunMeta& meta, int size, double width, std::uint64_t seed,
                   int count, const std::string& out_dir) {
  stimuli::NoiseSpec spec{size, width, seed};
  spec.validate();
  if (count < 1) throw parameter_error("gen-noise: count must be >= 1");
  std::filesystem::create_directories(out_dir);

  json manifest{{"size", size}, {"width", width}, {"seed", seed}, {"count", count}};
  json files = json::array();
  std::vector<std::string> names(static_cast<std::size_t>(count));
  stimuli::gen_batch_foreach(
      spec, static_cast<std::uint64_t>(count), 0,
      [&](std::uint64_t k, stimuli::NoiseImage&& img) {
        std::ostringstream name;
        name << "noise_w" << format_width(width) << "_s" << seed << "_" << k << ".pgm";
        const auto path = std::filesystem::path(out_dir) / name.str();
        io::write_file_atomic(path.string(), pnm::encode(stimuli::quantize(img)));
        names[k] = name.str();
      });
  for (int k = 0; k < count; ++k) {
    files.push_back(json{{"file", names[static_cast<std::size_t>(k)]},
                         {"index", k},
                         {"child_seed", child_seed(seed, static_cast<std::uint64_t>(k))}});
    meta.output((std::filesystem::path(out_dir) / names[static_cast<std::size_t>(k)]).string());
  }
  manifest["files"] = files;
  const auto manifest_path = std::filesystem::path(out_dir) / "manifest.json";
  io::write_file_atomic(manifest_path.string(), manifest.dump(2) + "\n");
  meta.output(manifest_path.string());
  meta.write(out_dir, /*anchor_is_dir=*/true);
  std::cout << "wrote " << count << " image(s) to " << out_dir << "\n";
}

void run_model_curve(RunMeta& meta, const std::string& model, double gamma, int modes,
                     double amplitude, double s0, const std::string& widths_spec,
                     int regions, double area, const std::string& lambdas_spec,
                     const std::string& out_path, const std::string& svg_path) {
  Curve curve;
  std::string csv_text;
  svg::PlotOptions plot;
  if (model == "gaussian") {
    const auto widths = parse_grid(widths_spec);
    curve = gaussian_model::curve_over_widths(widths, modes, amplitude, s0, {gamma});
    // report log10 of the probability density
    Curve out = curve;
    for (auto& p : out.points) p.y /= std::numbers::ln10;
    csv_text = csv::write_curve(out, "width", "log10_density");
    curve = out;
    plot = {"filter width", "log10 density", "pareidolia density vs noise width", false};
  } else if (model == "feature") {
    const auto lambdas = parse_grid(lambdas_spec);
    curve = feature_model::feature_curve(lambdas, regions, area);
    csv_text = csv::write_curve(curve, "lambda", "probability");
    plot = {"feature rate lambda", "detection probability",
            "pareidolia probability vs feature rate", false};
  } else {
    throw parameter_error("model-curve: --model must be gaussian or feature");
  }
  io::write_file_atomic(out_path, csv_text);
  meta.output(out_path);
  maybe_write_svg(svg_path, curve, plot, meta);
  meta.write(out_path);

  const auto [x_at_max, y_max] = gaussian_model::peak_of_curve(curve);
  std::cout << "peak: x=" << x_at_max << " y=" << y_max << "\n";
}

void run_simulate_mode_density(RunMeta& meta, double a, double sigma, double gamma,
                               std::uint64_t trials, std::uint64_t seed,
                               const std::string& out_path) {
  const auto est = montecarlo::mc_mode_density(a, sigma, gamma, trials, seed);
  const double analytic = gaussian_model::mode_match_density(a, sigma, gamma);
  std::ostringstream out;
  char buf[64];
  out << "a,sigma,gamma,trials,seed,mean,std_error,analytic\n";
  out << a << ',' << sigma << ',' << gamma << ',' << trials << ',' << seed << ',';
  std::snprintf(buf, sizeof buf, "%.17g", est.mean);
  out << buf << ',';
  std::snprintf(buf, sizeof buf, "%.17g", est.std_error);
  out << buf << ',';
  std::snprintf(buf, sizeof buf, "%.17g", analytic);
  out << buf << '\n';
  io::write_file_atomic(out_path, out.str());
  meta.output(out_path);
  meta.write(out_path);
  std::cout << "mc mean " << est.mean << " +- " << est.std_error << " (analytic " << analytic
            << ")\n";
}

void run_simulate_feature(RunMeta& meta, double lambda, int regions, double area,
                          std::uint64_t trials, std::uint64_t seed,
                          const std::string& out_path) {
  const feature_model::FeatureModelParams params{lambda, regions, area};
  const auto est = montecarlo::mc_feature_detect(params, trials, seed);
  const double analytic = feature_model::template_detect_prob(params);
  std::ostringstream out;
  char buf[64];
  out << "lambda,regions,area,trials,seed,mean,std_error,analytic\n";
  out << lambda << ',' << regions << ',' << area << ',' << trials << ',' << seed << ',';
  std::snprintf(buf, sizeof buf, "%.17g", est.mean);
  out << buf << ',';
  std::snprintf(buf, sizeof buf, "%.17g", est.std_error);
  out << buf << ',';
  std::snprintf(buf, sizeof buf, "%.17g", analytic);
  out << buf << '\n';
  io::write_file_atomic(out_path, out.str());
  meta.output(out_path);
  meta.write(out_path);
  std::cout << "mc mean " << est.mean << " +- " << est.std_error << " (analytic " << analytic
            << ")\n";
}

void run_simulate_detect_curve(RunMeta& meta, const std::string& widths_spec, int per_width,
                               int size, double threshold, std::uint64_t seed,
                               const std::string& out_path, const std::string& svg_path) {
  const auto widths = parse_grid(widths_spec);
  const auto bank = montecarlo::TemplateBank::default_bank();
  const Curve curve =
      montecarlo::detection_curve(widths, per_width, size, bank, threshold, seed);
  io::write_file_atomic(out_path, csv::write_curve(curve, "width", "mean_detections",
                                                   "ci_half_width"));
  meta.output(out_path);
  maybe_write_svg(svg_path, curve,
                  {"filter width", "mean detections", "detections vs noise width", false},
                  meta);
  meta.write(out_path);
  const auto [x_at_max, y_max] = gaussian_model::peak_of_curve(curve);
  std::cout << "peak: width=" << x_at_max << " mean=" << y_max << "\n";
}

std::vector<evalkit::AnnotationRecord> filter_subset(
    std::vector<evalkit::AnnotationRecord> gts, const std::string& subset) {
  if (subset.empty()) return gts;
  const auto eq = subset.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= subset.size()) {
    throw parameter_error("--subset expects attribute=value");
  }
  const std::string attr = subset.substr(0, eq);
  const std::string value = subset.substr(eq + 1);
  bool known = false;
  for (const auto& [name, values] : evalkit::attribute_schema()) known |= (name == attr);
  if (!known) throw parameter_error("--subset: unknown attribute '" + attr + "'");

  for (auto& rec : gts) {
    std::vector<evalkit::AnnotatedBox> keep;
    for (auto& ab : rec.boxes) {
      const std::string& v = attr == "difficulty"    ? ab.attributes.difficulty
                             : attr == "emotion"     ? ab.attributes.emotion
                             : attr == "origin"      ? ab.attributes.origin
                             : attr == "resemblance" ? ab.attributes.resemblance
                             : attr == "gender"      ? ab.attributes.gender
                             : attr == "amusing"     ? ab.attributes.amusing
                                                     : ab.attributes.commonness;
      if (v == value) keep.push_back(std::move(ab));
    }
    rec.boxes = std::move(keep);
  }
  return gts;
}

void run_eval_ap(RunMeta& meta, const std::string& gt_path, const std::string& det_path,
                 double iou_thresh, const std::string& subset, const std::string& out_path) {
  const auto gts = filter_subset(evalkit::read_annotations_file(gt_path), subset);
  const auto dets = evalkit::read_detections_file(det_path);
  const auto result = evalkit::average_precision(dets, gts, iou_thresh);
  if (result.empty_gt_warning) {
    std::cerr << "warning: no ground-truth boxes"
              << (subset.empty() ? "" : " in subset '" + subset + "'")
              << "; AP reported as 0\n";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", result.value);
  std::cout << "AP " << buf << "\n";
  if (!out_path.empty()) {
    json report{{"ap", result.value},
                {"iou_thresh", iou_thresh},
                {"empty_gt_warning", result.empty_gt_warning},
                {"n_detections", dets.size()}};
    if (!subset.empty()) report["subset"] = subset;
    io::write_file_atomic(out_path, report.dump(2) + "\n");
    meta.output(out_path);
    meta.write(out_path);
  }
}

void run_stats(RunMeta& meta, const std::string& gt_path, const std::string& out_path) {
  const auto annotations = evalkit::read_annotations_file(gt_path);
  const auto report = evalkit::dataset_stats(annotations);

  json j{{"n_images", report.n_images}, {"n_boxes", report.n_boxes}};
  const auto hist_json = [](const std::map<std::string, evalkit::AttributeHistogram>& m) {
    json out = json::object();
    for (const auto& [attr, hist] : m) {
      json h = json::object();
      for (const auto& [value, count] : hist.counts) {
        h[value] = json{{"count", count}, {"fraction", hist.fractions.at(value)}};
      }
      out[attr] = h;
    }
    return out;
  };
  j["per_face"] = hist_json(report.per_face);
  j["per_image"] = hist_json(report.per_image);
  json bpi = json::object();
  for (const auto& [n, c] : report.boxes_per_image) bpi[std::to_string(n)] = c;
  j["boxes_per_image"] = bpi;

  io::write_file_atomic(out_path, j.dump(2) + "\n");
  meta.output(out_path);
  meta.write(out_path);
  std::cout << "images " << report.n_images << ", boxes " << report.n_boxes << "\n";
}

void run_avg_face(RunMeta& meta, const std::string& gt_path, const std::string& images_dir,
                  int out_size, const std::string& out_path,
                  const std::string& equalized_path) {
  const auto annotations = evalkit::read_annotations_file(gt_path);

  std::vector<ImageU8> images;
  std::vector<std::pair<std::size_t, evalkit::Box>> crops;  // image index + box
  images.reserve(annotations.size());
  for (const auto& rec : annotations) {
    if (rec.boxes.empty()) continue;
    const auto base = std::filesystem::path(images_dir) / rec.image_id;
    std::filesystem::path path = base;
    if (!std::filesystem::exists(path)) {
      for (const char* ext : {".ppm", ".pgm"}) {
        std::filesystem::path candidate = base;
        candidate += ext;
        if (std::filesystem::exists(candidate)) {
          path = candidate;
          break;
        }
      }
    }
    if (!std::filesystem::exists(path)) {
      throw data_error("avg-face: no image file for '" + rec.image_id + "' under " +
                       images_dir);
    }
    images.push_back(pnm::read_file(path.string()));
    for (const auto& ab : rec.boxes) crops.emplace_back(images.size() - 1, ab.box);
  }
  if (crops.empty()) throw data_error("avg-face: no annotated boxes");

  std::vector<evalkit::CropRef> refs;
  refs.reserve(crops.size());
  for (const auto& [idx, box] : crops) refs.push_back({&images[idx], box});

  const auto avg = evalkit::average_face(refs, out_size);
  io::write_file_atomic(out_path, pnm::encode(avg.raw8()));
  meta.output(out_path);
  if (!equalized_path.empty()) {
    io::write_file_atomic(equalized_path, pnm::encode(avg.equalized8()));
    meta.output(equalized_path);
  }
  meta.write(out_path);
  std::cout << "averaged " << refs.size() << " crop(s)\n";
}

// --- psycho subcommands ---

void run_psycho_clean(RunMeta& meta, const std::string& trials_path,
                      const std::string& out_path) {
  const auto trials = psycho::read_trials_file(trials_path);
  const auto result = psycho::clean_trials(trials);
  io::write_file_atomic(out_path, psycho::write_trials_csv(result.kept));
  meta.output(out_path);

  std::ostringstream dropped;
  dropped << "reason,subject_id,width_level,rt_ms\n";
  for (const auto& d : result.dropped) {
    dropped << psycho::to_string(d.reason) << ',' << d.trial.subject_id << ','
            << d.trial.width_level << ',' << d.trial.rt_ms << '\n';
  }
  const std::string dropped_path = out_path + ".dropped.csv";
  io::write_file_atomic(dropped_path, dropped.str());
  meta.output(dropped_path);
  meta.write(out_path);
  std::cout << "kept " << result.kept.size() << ", dropped " << result.dropped.size() << "\n";
}

void run_psycho_curve(RunMeta& meta, const std::string& trials_path,
                      const std::string& level_name, const std::string& out_path,
                      const std::string& svg_path) {
  const auto trials = psycho::clean_trials(psycho::read_trials_file(trials_path)).kept;
  const psycho::Level level =
      level_name == "subject" ? psycho::Level::subject : psycho::Level::population;
  const Curve curve = psycho::aggregate_curve(trials, level);
  io::write_file_atomic(out_path,
                        csv::write_curve(curve, "width", "mean_response", "ci_half_width"));
  meta.output(out_path);
  maybe_write_svg(svg_path, curve,
                  {"filter width", "mean faces reported", "face counts vs noise width", false},
                  meta);
  meta.write(out_path);
}

void run_psycho_rt(RunMeta& meta, const std::string& trials_path, const std::string& out_path,
                   const std::string& svg_path) {
  const auto trials = psycho::clean_trials(psycho::read_trials_file(trials_path)).kept;
  const Curve curve = psycho::rt_curve(trials);
  io::write_file_atomic(out_path, csv::write_curve(curve, "width", "mean_rt_ms", "std_band"));
  meta.output(out_path);
  maybe_write_svg(svg_path, curve,
                  {"filter width", "mean response time (ms)", "response time vs noise width",
                   false},
                  meta);
  meta.write(out_path);
}

void run_psycho_groups(RunMeta& meta, const std::string& trials_path,
                       const std::string& factor_name, const std::string& out_path) {
  const auto trials = psycho::clean_trials(psycho::read_trials_file(trials_path)).kept;
  const psycho::Factor factor =
      factor_name == "gender" ? psycho::Factor::gender : psycho::Factor::group;
  const auto cmp = psycho::compare_groups(trials, factor);

  std::ostringstream out;
  char buf[64];
  out << "factor_value,width,mean_response,ci_half_width\n";
  for (const auto& [value, curve] : cmp.curves) {
    for (const auto& p : curve.points) {
      out << value << ',';
      std::snprintf(buf, sizeof buf, "%.17g", p.x);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", p.y);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", p.ci_half_width);
      out << buf << '\n';
    }
  }
  io::write_file_atomic(out_path, out.str());
  meta.output(out_path);

  std::ostringstream diff;
  diff << "width,abs_diff,pooled_std\n";
  for (const auto& row : cmp.differences) {
    std::snprintf(buf, sizeof buf, "%.17g", row.width);
    diff << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.abs_diff);
    diff << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", row.pooled_std);
    diff << buf << '\n';
  }
  const std::string diff_path = out_path + ".diff.csv";
  io::write_file_atomic(diff_path, diff.str());
  meta.output(diff_path);
  meta.write(out_path);
  for (const auto& flag : cmp.flagged) {
    std::cerr << "warning: factor value '" << flag << "' has fewer than 2 subjects\n";
  }
}

void run_psycho_fit(RunMeta& meta, const std::string& trials_path,
                    const std::string& grid_spec, int modes, double amplitude, double s0,
                    const std::string& out_path) {
  const auto trials = psycho::clean_trials(psycho::read_trials_file(trials_path)).kept;
  const Curve curve = psycho::aggregate_curve(trials, psycho::Level::population);
  const auto grid = parse_grid(grid_spec);
  const psycho::ModelConfig cfg{modes, amplitude, s0};
  const auto fit = psycho::fit_gaussian_model(curve, grid, cfg);

  json j{{"gamma_hat", fit.gamma_hat},
         {"scale_hat", fit.scale_hat},
         {"rss", fit.rss},
         {"log_peak_density", fit.log_peak_density},
         {"model", {{"modes", cfg.modes}, {"amplitude", cfg.amplitude}, {"s0", cfg.s0}}},
         {"skipped", fit.skipped}};
  json grid_json = json::array();
  for (const auto& [g, rss] : fit.grid) grid_json.push_back(json{{"gamma", g}, {"rss", rss}});
  j["grid"] = grid_json;
  io::write_file_atomic(out_path, j.dump(2) + "\n");
  meta.output(out_path);
  meta.write(out_path);
  std::cout << "gamma_hat " << fit.gamma_hat << ", scale_hat " << fit.scale_hat << ", rss "
            << fit.rss << "\n";
}

void run_psycho_synth(RunMeta& meta, const std::string& design_name, std::uint64_t seed,
                      const std::string& out_path) {
  if (design_name != "appendix") {
    throw parameter_error("psycho synth: unknown design '" + design_name + "'");
  }
  const auto trials = psycho::synth_trials(psycho::SynthDesign{}, seed);
  io::write_file_atomic(out_path, psycho::write_trials_csv(trials));
  meta.output(out_path);
  meta.write(out_path);
  std::cout << "wrote " << trials.size() << " trials\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pareidolia models, stimuli, simulation and evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  RunMeta meta(argc, argv);

  // --- gen-noise ---
  auto* gen = app.add_subcommand("gen-noise", "generate band-limited noise images (PGM)");
  int gn_size = 256, gn_count = 1;
  double gn_width = 16.0;
  std::uint64_t gn_seed = kDefaultSeed;
  std::string gn_out;
  gen->add_option("--size", gn_size, "image side length")->capture_default_str();
  gen->add_option("--width", gn_width, "Gaussian envelope std (frequency units)")
      ->capture_default_str();
  gen->add_option("--seed", gn_seed, "RNG seed")->capture_default_str();
  gen->add_option("--count", gn_count, "number of images")->capture_default_str();
  gen->add_option("--out", gn_out, "output directory")->required();
  gen->callback([&] {
    meta.param("size", gn_size);
    meta.param("width", gn_width);
    meta.param("count", gn_count);
    meta.param("out", gn_out);
    meta.seed(gn_seed);
    run_gen_noise(meta, gn_size, gn_width, gn_seed, gn_count, gn_out);
  });

  // --- model-curve ---
  auto* mc = app.add_subcommand("model-curve", "closed-form model curves (CSV/SVG)");
  std::string mc_model = "gaussian";
  double mc_gamma = gaussian_model::kDefaultGamma;
  int mc_modes = gaussian_model::kDefaultModes;
  double mc_amplitude = gaussian_model::kDefaultAmplitude;
  double mc_s0 = gaussian_model::kDefaultS0;
  std::string mc_widths = "0.25:64:25(log)";
  int mc_regions = 4;
  double mc_area = 1.0;
  std::string mc_lambdas = "0:2:100";
  std::string mc_out, mc_svg;
  mc->add_option("--model", mc_model, "gaussian or feature")->capture_default_str();
  mc->add_option("--gamma", mc_gamma, "detection tolerance")->capture_default_str();
  mc->add_option("--modes", mc_modes, "number of modes")->capture_default_str();
  mc->add_option("--amplitude", mc_amplitude, "1/f template amplitude")->capture_default_str();
  mc->add_option("--s0", mc_s0, "generating std at DC")->capture_default_str();
  mc->add_option("--widths", mc_widths, "width grid a:b:n or a:b:n(log)")
      ->capture_default_str();
  mc->add_option("--regions", mc_regions, "feature model regions")->capture_default_str();
  mc->add_option("--area", mc_area, "region area")->capture_default_str();
  mc->add_option("--lambdas", mc_lambdas, "rate grid a:b:n")->capture_default_str();
  mc->add_option("--out", mc_out, "CSV output path")->required();
  mc->add_option("--svg", mc_svg, "optional SVG plot path");
  mc->callback([&] {
    meta.param("model", mc_model);
    meta.param("gamma", mc_gamma);
    meta.param("modes", mc_modes);
    meta.param("amplitude", mc_amplitude);
    meta.param("s0", mc_s0);
    meta.param("widths", mc_widths);
    meta.param("regions", mc_regions);
    meta.param("area", mc_area);
    meta.param("lambdas", mc_lambdas);
    run_model_curve(meta, mc_model, mc_gamma, mc_modes, mc_amplitude, mc_s0, mc_widths,
                    mc_regions, mc_area, mc_lambdas, mc_out, mc_svg);
  });

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Monte Carlo oracles and the toy detector");
  sim->require_subcommand(1);

  auto* sim_md = sim->add_subcommand("mode-density", "marginal mode-match density estimate");
  double md_a = 1.0, md_sigma = 1.0, md_gamma = 1.0;
  std::uint64_t md_trials = 1000000, md_seed = kDefaultSeed;
  std::string md_out;
  sim_md->add_option("--a", md_a, "target coefficient")->capture_default_str();
  sim_md->add_option("--sigma", md_sigma, "generating std")->capture_default_str();
  sim_md->add_option("--gamma", md_gamma, "detection tolerance")->capture_default_str();
  sim_md->add_option("--trials", md_trials, "trial count")->capture_default_str();
  sim_md->add_option("--seed", md_seed, "RNG seed")->capture_default_str();
  sim_md->add_option("--out", md_out, "CSV output path")->required();
  sim_md->callback([&] {
    meta.param("a", md_a);
    meta.param("sigma", md_sigma);
    meta.param("gamma", md_gamma);
    meta.param("trials", md_trials);
    meta.seed(md_seed);
    run_simulate_mode_density(meta, md_a, md_sigma, md_gamma, md_trials, md_seed, md_out);
  });

  auto* sim_ft = sim->add_subcommand("feature", "Poisson feature-detection estimate");
  double ft_lambda = 0.25, ft_area = 1.0;
  int ft_regions = 4;
  std::uint64_t ft_trials = 10000000, ft_seed = kDefaultSeed;
  std::string ft_out;
  sim_ft->add_option("--lambda", ft_lambda, "feature rate")->capture_default_str();
  sim_ft->add_option("--regions", ft_regions, "template regions")->capture_default_str();
  sim_ft->add_option("--area", ft_area, "region area")->capture_default_str();
  sim_ft->add_option("--trials", ft_trials, "trial count")->capture_default_str();
  sim_ft->add_option("--seed", ft_seed, "RNG seed")->capture_default_str();
  sim_ft->add_option("--out", ft_out, "CSV output path")->required();
  sim_ft->callback([&] {
    meta.param("lambda", ft_lambda);
    meta.param("regions", ft_regions);
    meta.param("area", ft_area);
    meta.param("trials", ft_trials);
    meta.seed(ft_seed);
    run_simulate_feature(meta, ft_lambda, ft_regions, ft_area, ft_trials, ft_seed, ft_out);
  });

  auto* sim_dc = sim->add_subcommand("detect-curve", "detections vs width on noise images");
  std::string dc_widths = "0.25,0.5,1,2,4,8,16,32,64";
  int dc_per_width = 100, dc_size = 256;
  double dc_threshold = 0.55;
  std::uint64_t dc_seed = kDefaultSeed;
  std::string dc_out, dc_svg;
  sim_dc->add_option("--widths", dc_widths, "width list or a:b:n grid")->capture_default_str();
  sim_dc->add_option("--per-width", dc_per_width, "images per width")->capture_default_str();
  sim_dc->add_option("--size", dc_size, "image side length")->capture_default_str();
  sim_dc->add_option("--threshold", dc_threshold, "detection score threshold")
      ->capture_default_str();
  sim_dc->add_option("--seed", dc_seed, "RNG seed")->capture_default_str();
  sim_dc->add_option("--out", dc_out, "CSV output path")->required();
  sim_dc->add_option("--svg", dc_svg, "optional SVG plot path");
  sim_dc->callback([&] {
    meta.param("widths", dc_widths);
    meta.param("per_width", dc_per_width);
    meta.param("size", dc_size);
    meta.param("threshold", dc_threshold);
    meta.seed(dc_seed);
    run_simulate_detect_curve(meta, dc_widths, dc_per_width, dc_size, dc_threshold, dc_seed,
                              dc_out, dc_svg);
  });

  // --- eval-ap ---
  auto* ap = app.add_subcommand("eval-ap", "Average Precision of detections vs annotations");
  std::string ap_gt, ap_dets, ap_subset, ap_out;
  double ap_iou = 0.5;
  ap->add_option("--gt", ap_gt, "annotations JSONL")->required();
  ap->add_option("--dets", ap_dets, "detections JSONL")->required();
  ap->add_option("--iou", ap_iou, "IoU matching threshold")->capture_default_str();
  ap->add_option("--subset", ap_subset, "restrict ground truth to attribute=value");
  ap->add_option("--out", ap_out, "optional JSON report path");
  ap->callback([&] {
    meta.param("gt", ap_gt);
    meta.param("dets", ap_dets);
    meta.param("iou", ap_iou);
    meta.param("subset", ap_subset);
    run_eval_ap(meta, ap_gt, ap_dets, ap_iou, ap_subset, ap_out);
  });

  // --- stats ---
  auto* st = app.add_subcommand("stats", "dataset attribute statistics");
  std::string st_gt, st_out;
  st->add_option("--gt", st_gt, "annotations JSONL")->required();
  st->add_option("--out", st_out, "JSON report path")->required();
  st->callback([&] {
    meta.param("gt", st_gt);
    run_stats(meta, st_gt, st_out);
  });

  // --- avg-face ---
  auto* af = app.add_subcommand("avg-face", "registered average of annotated boxes");
  std::string af_gt, af_images, af_out, af_eq;
  int af_size = 128;
  af->add_option("--gt", af_gt, "annotations JSONL")->required();
  af->add_option("--images", af_images, "image directory (PPM/PGM)")->required();
  af->add_option("--size", af_size, "output side length")->capture_default_str();
  af->add_option("--out", af_out, "raw average output (PPM/PGM)")->required();
  af->add_option("--equalized", af_eq, "histogram-equalized output path");
  af->callback([&] {
    meta.param("gt", af_gt);
    meta.param("images", af_images);
    meta.param("size", af_size);
    run_avg_face(meta, af_gt, af_images, af_size, af_out, af_eq);
  });

  // --- psycho ---
  auto* psy = app.add_subcommand("psycho", "trial cleaning, curves, groups, fit, synthesis");
  psy->require_subcommand(1);

  std::string p_trials, p_out, p_svg;

  auto* p_clean = psy->add_subcommand("clean", "apply response-time trial cleaning");
  p_clean->add_option("--trials", p_trials, "trials CSV")->required();
  p_clean->add_option("--out", p_out, "kept-trials CSV path")->required();
  p_clean->callback([&] {
    meta.param("trials", p_trials);
    run_psycho_clean(meta, p_trials, p_out);
  });

  auto* p_curve = psy->add_subcommand("curve", "face-count curve with 95% CI");
  std::string p_level = "population";
  p_curve->add_option("--trials", p_trials, "trials CSV")->required();
  p_curve->add_option("--level", p_level, "population or subject")->capture_default_str();
  p_curve->add_option("--out", p_out, "curve CSV path")->required();
  p_curve->add_option("--svg", p_svg, "optional SVG plot path");
  p_curve->callback([&] {
    meta.param("trials", p_trials);
    meta.param("level", p_level);
    run_psycho_curve(meta, p_trials, p_level, p_out, p_svg);
  });

  auto* p_rt = psy->add_subcommand("rt", "response-time curve with +-1 std band");
  p_rt->add_option("--trials", p_trials, "trials CSV")->required();
  p_rt->add_option("--out", p_out, "curve CSV path")->required();
  p_rt->add_option("--svg", p_svg, "optional SVG plot path");
  p_rt->callback([&] {
    meta.param("trials", p_trials);
    run_psycho_rt(meta, p_trials, p_out, p_svg);
  });

  auto* p_groups = psy->add_subcommand("groups", "per-group curves and differences");
  std::string p_factor = "group";
  p_groups->add_option("--trials", p_trials, "trials CSV")->required();
  p_groups->add_option("--factor", p_factor, "group or gender")->capture_default_str();
  p_groups->add_option("--out", p_out, "curves CSV path")->required();
  p_groups->callback([&] {
    meta.param("trials", p_trials);
    meta.param("factor", p_factor);
    run_psycho_groups(meta, p_trials, p_factor, p_out);
  });

  auto* p_fit = psy->add_subcommand("fit", "fit the width-density model to the human curve");
  std::string p_grid = "3:10:8";
  int p_modes = gaussian_model::kDefaultModes;
  double p_amplitude = gaussian_model::kDefaultAmplitude;
  double p_s0 = gaussian_model::kDefaultS0;
  p_fit->add_option("--trials", p_trials, "trials CSV")->required();
  p_fit->add_option("--gamma-grid", p_grid, "gamma grid a:b:n or list")->capture_default_str();
  p_fit->add_option("--modes", p_modes, "model modes")->capture_default_str();
  p_fit->add_option("--amplitude", p_amplitude, "model amplitude")->capture_default_str();
  p_fit->add_option("--s0", p_s0, "model s0")->capture_default_str();
  p_fit->add_option("--out", p_out, "fit JSON path")->required();
  p_fit->callback([&] {
    meta.param("trials", p_trials);
    meta.param("gamma_grid", p_grid);
    meta.param("modes", p_modes);
    meta.param("amplitude", p_amplitude);
    meta.param("s0", p_s0);
    run_psycho_fit(meta, p_trials, p_grid, p_modes, p_amplitude, p_s0, p_out);
  });

  auto* p_synth = psy->add_subcommand("synth", "synthetic trials in the experiment design");
  std::string p_design = "appendix";
  std::uint64_t p_seed = kDefaultSeed;
  p_synth->add_option("--design", p_design, "design name (appendix)")->capture_default_str();
  p_synth->add_option("--seed", p_seed, "RNG seed")->capture_default_str();
  p_synth->add_option("--out", p_out, "trials CSV path")->required();
  p_synth->callback([&] {
    meta.param("design", p_design);
    meta.seed(p_seed);
    run_psycho_synth(meta, p_design, p_seed, p_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the error message
    return 1;
  } catch (const parameter_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
