#include "pareidolia/psycho.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "pareidolia/gaussian_model.hpp"
#include "pareidolia/rng.hpp"

namespace pareidolia::psycho {

void TrialRecord::validate() const {
  if (subject_id.empty()) throw data_error("trial: empty subject_id");
  if (!(width_level > 0.0)) throw data_error("trial: width_level must be positive");
  if (response < 0 || response > 9) throw data_error("trial: response must be in [0, 9]");
  if (!(rt_ms > 0.0)) throw data_error("trial: rt_ms must be positive");
}

const char* to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::too_fast: return "too-fast";
    case DropReason::took_break: return "break";
  }
  return "?";
}

CleanResult clean_trials(const std::vector<TrialRecord>& trials) {
  CleanResult result;
  for (const auto& t : trials) {
    if (t.rt_ms < 100.0) {
      result.dropped.push_back({t, DropReason::too_fast});
    } else if (t.rt_ms > 120000.0) {
      result.dropped.push_back({t, DropReason::took_break});
    } else {
      result.kept.push_back(t);
    }
  }
  return result;
}

namespace {

// subject -> width -> image -> responses over repetitions
using NestedValues =
    std::map<std::string, std::map<double, std::map<long, std::vector<double>>>>;

NestedValues nest(const std::vector<TrialRecord>& trials, bool use_rt) {
  NestedValues nested;
  for (const auto& t : trials) {
    t.validate();
    nested[t.subject_id][t.width_level][t.image_index].push_back(
        use_rt ? t.rt_ms : static_cast<double>(t.response));
  }
  return nested;
}

/// Repetition mean per image, then mean over images.
double subject_width_mean(const std::map<long, std::vector<double>>& images) {
  double sum = 0.0;
  for (const auto& [img, reps] : images) {
    double rep_sum = 0.0;
    for (const double v : reps) rep_sum += v;
    sum += rep_sum / static_cast<double>(reps.size());
  }
  return sum / static_cast<double>(images.size());
}

/// width -> per-subject means, in subject order.
std::map<double, std::vector<double>> width_subject_means(const NestedValues& nested) {
  std::map<double, std::vector<double>> by_width;
  for (const auto& [subject, widths] : nested) {
    for (const auto& [w, images] : widths) {
      by_width[w].push_back(subject_width_mean(images));
    }
  }
  return by_width;
}

Curve population_curve(const NestedValues& nested, double ci_factor, bool per_sqrt_n) {
  Curve curve;
  for (const auto& [w, means] : width_subject_means(nested)) {
    double mean = 0.0;
    for (const double m : means) mean += m;
    mean /= static_cast<double>(means.size());
    double ci = 0.0;
    if (means.size() > 1) {
      double ss = 0.0;
      for (const double m : means) ss += (m - mean) * (m - mean);
      const double sd = std::sqrt(ss / static_cast<double>(means.size() - 1));
      ci = ci_factor * sd;
      if (per_sqrt_n) ci /= std::sqrt(static_cast<double>(means.size()));
    }
    curve.points.push_back({w, mean, ci});
  }
  curve.validate();
  return curve;
}

}  // namespace

Curve aggregate_curve(const std::vector<TrialRecord>& trials, Level level) {
  if (trials.empty()) throw data_error("aggregate_curve: no trials");
  const NestedValues nested = nest(trials, /*use_rt=*/false);
  if (level == Level::subject) {
    if (nested.size() != 1) {
      throw parameter_error("aggregate_curve: subject level expects one subject's trials");
    }
    Curve curve;
    for (const auto& [w, images] : nested.begin()->second) {
      curve.points.push_back({w, subject_width_mean(images), 0.0});
    }
    curve.validate();
    return curve;
  }
  return population_curve(nested, 1.96, /*per_sqrt_n=*/true);
}

std::vector<SubjectCurve> subject_curves(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw data_error("subject_curves: no trials");
  const NestedValues nested = nest(trials, /*use_rt=*/false);
  std::vector<SubjectCurve> out;
  for (const auto& [subject, widths] : nested) {
    SubjectCurve sc;
    sc.subject_id = subject;
    for (const auto& [w, images] : widths) {
      std::uint64_t n = 0;
      for (const auto& [img, reps] : images) n += reps.size();
      sc.points.push_back({w, subject_width_mean(images), n});
    }
    out.push_back(std::move(sc));
  }
  return out;
}

Curve rt_curve(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw data_error("rt_curve: no trials");
  return population_curve(nest(trials, /*use_rt=*/true), 1.0, /*per_sqrt_n=*/false);
}

GroupComparison compare_groups(const std::vector<TrialRecord>& trials, Factor factor) {
  if (trials.empty()) throw data_error("compare_groups: no trials");

  std::map<std::string, std::vector<TrialRecord>> by_value;
  bool saw_empty = false;
  for (const auto& t : trials) {
    const std::string& v = factor == Factor::group ? t.group : t.gender;
    if (v.empty()) {
      saw_empty = true;
      continue;
    }
    by_value[v].push_back(t);
  }
  if (by_value.empty()) throw data_error("compare_groups: factor has no values");

  GroupComparison cmp;
  std::map<std::string, std::map<double, std::vector<double>>> subject_means;
  for (const auto& [value, subset] : by_value) {
    const NestedValues nested = nest(subset, /*use_rt=*/false);
    if (nested.size() < 2) cmp.flagged.push_back(value);
    cmp.curves[value] = population_curve(nested, 1.96, /*per_sqrt_n=*/true);
    subject_means[value] = width_subject_means(nested);
  }
  if (saw_empty) cmp.flagged.push_back("(unreported)");

  if (by_value.size() == 2) {
    const auto& a = subject_means.begin()->second;
    const auto& b = std::next(subject_means.begin())->second;
    for (const auto& [w, means_a] : a) {
      const auto it = b.find(w);
      if (it == b.end()) continue;
      const auto& means_b = it->second;
      const auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (const double x : v) s += x;
        return s / static_cast<double>(v.size());
      };
      const double ma = mean_of(means_a), mb = mean_of(means_b);
      const auto ss_of = [](const std::vector<double>& v, double m) {
        double s = 0.0;
        for (const double x : v) s += (x - m) * (x - m);
        return s;
      };
      const std::size_t dof = means_a.size() + means_b.size() >= 2
                                  ? means_a.size() + means_b.size() - 2
                                  : 0;
      const double pooled =
          dof > 0 ? std::sqrt((ss_of(means_a, ma) + ss_of(means_b, mb)) /
                              static_cast<double>(dof))
                  : 0.0;
      cmp.differences.push_back({w, std::abs(ma - mb), pooled});
    }
  }
  return cmp;
}

// ============================================================================
// Model fit
// ============================================================================

FitResult fit_gaussian_model(const Curve& curve, const std::vector<double>& gamma_grid,
                             const ModelConfig& cfg) {
  curve.validate();
  if (curve.size() < 3) throw parameter_error("fit_gaussian_model: curve needs >= 3 points");
  if (gamma_grid.empty()) throw parameter_error("fit_gaussian_model: empty gamma grid");

  const auto tmpl = gaussian_model::template_one_over_f(cfg.modes, cfg.amplitude);

  FitResult result;
  result.rss = std::numeric_limits<double>::infinity();
  bool found = false;

  for (const double gamma : gamma_grid) {
    gaussian_model::GaussianDetectionParams params{gamma};
    params.validate();

    std::vector<double> ll(curve.size());
    double max_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto modes = gaussian_model::envelope_modes(cfg.modes, curve.points[i].x, cfg.s0);
      ll[i] = gaussian_model::log_pareidolia_density(tmpl, modes, params);
      max_ll = std::max(max_ll, ll[i]);
    }
    if (!std::isfinite(max_ll)) {
      result.skipped.push_back(gamma);
      continue;
    }

    double sum_yp = 0.0, sum_pp = 0.0;
    std::vector<double> pred(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      pred[i] = std::exp(ll[i] - max_ll);
      sum_yp += curve.points[i].y * pred[i];
      sum_pp += pred[i] * pred[i];
    }
    const double scale = std::max(0.0, sum_yp / sum_pp);
    double rss = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double r = curve.points[i].y - scale * pred[i];
      rss += r * r;
    }
    result.grid.emplace_back(gamma, rss);
    const bool better =
        !found || rss < result.rss || (rss == result.rss && gamma < result.gamma_hat);
    if (better) {
      found = true;
      result.gamma_hat = gamma;
      result.scale_hat = scale;
      result.rss = rss;
      result.log_peak_density = max_ll;
    }
  }
  if (!found) throw data_error("fit_gaussian_model: every gamma was skipped");
  return result;
}

// ============================================================================
// Synthetic trials
// ============================================================================

std::vector<TrialRecord> synth_trials(const SynthDesign& design, std::uint64_t seed) {
  if (design.subjects < 1 || design.widths.empty() || design.images_per_width < 1 ||
      design.repetitions < 1) {
    throw parameter_error("synth_trials: degenerate design");
  }

  const double peak_log2 = std::log2(design.peak_width);
  const auto planted_mean = [&](double w) {
    const double d = std::log2(w) - peak_log2;
    return design.peak_response * std::exp(-d * d / (2.0 * design.log2_sd * design.log2_sd));
  };

  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(design.subjects) * design.widths.size() *
              design.images_per_width * design.repetitions);

  for (int s = 0; s < design.subjects; ++s) {
    Rng rng(child_seed(seed, static_cast<std::uint64_t>(s)));
    const bool second_group = s >= (design.subjects + 1) / 2;
    const double offset = design.subject_sd * rng.normal();

    TrialRecord base;
    {
      std::ostringstream id;
      id << "s" << (s + 1 < 10 ? "0" : "") << (s + 1);
      base.subject_id = id.str();
    }
    base.group = second_group ? "g2" : "g1";
    base.gender = s < 6 ? "female" : "male";

    for (std::size_t wi = 0; wi < design.widths.size(); ++wi) {
      const double w = design.widths[wi];
      const double mu = planted_mean(w) + offset;
      for (int img = 0; img < design.images_per_width; ++img) {
        for (int rep = 0; rep < design.repetitions; ++rep) {
          TrialRecord t = base;
          t.width_level = w;
          t.image_index = static_cast<long>(wi) * design.images_per_width + img +
                          (second_group ? 1000 : 0);
          t.repetition = rep;
          const double raw = mu + design.trial_sd * rng.normal();
          t.response = static_cast<int>(std::min(9.0, std::max(0.0, std::floor(raw + 0.5))));
          t.rt_ms = std::max(120.0, 800.0 + 150.0 * t.response + 200.0 * rng.normal());
          const double u = rng.next_double();
          if (u < design.outlier_fraction / 2.0) {
            t.rt_ms = 50.0;  // below the too-fast cut
          } else if (u < design.outlier_fraction) {
            t.rt_ms = 150000.0;  // beyond the break cut
          }
          out.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

// ============================================================================
// CSV interchange
// ============================================================================

namespace {
const char* kHeader = "subject_id,group,gender,width_level,image_index,repetition,response,rt_ms";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& s, std::size_t line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw data_error("trials CSV line " + std::to_string(line_no) + ": bad " +
                     std::string(what) + " '" + s + "'");
  }
}
}  // namespace

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw data_error("trials CSV: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw data_error("trials CSV: unexpected header '" + line + "'");

  std::vector<TrialRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) {
      throw data_error("trials CSV line " + std::to_string(line_no) + ": expected 8 fields");
    }
    TrialRecord t;
    t.subject_id = fields[0];
    t.group = fields[1];
    t.gender = fields[2];
    t.width_level = parse_number(fields[3], line_no, "width_level");
    t.image_index = static_cast<long>(parse_number(fields[4], line_no, "image_index"));
    t.repetition = static_cast<long>(parse_number(fields[5], line_no, "repetition"));
    t.response = static_cast<int>(parse_number(fields[6], line_no, "response"));
    t.rt_ms = parse_number(fields[7], line_no, "rt_ms");
    try {
      t.validate();
    } catch (const data_error& e) {
      throw data_error("trials CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrialRecord> read_trials_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open trials file: " + path);
  return read_trials_csv(in);
}

std::string write_trials_csv(const std::vector<TrialRecord>& trials) {
  std::ostringstream out;
  out << kHeader << '\n';
  char buf[64];
  for (const auto& t : trials) {
    out << t.subject_id << ',' << t.group << ',' << t.gender << ',';
    std::snprintf(buf, sizeof buf, "%.17g", t.width_level);
    out << buf << ',' << t.image_index << ',' << t.repetition << ',' << t.response << ',';
    std::snprintf(buf, sizeof buf, "%.17g", t.rt_ms);
    out << buf << '\n';
  }
  return out.str();
}

}  // namespace pareidolia::psycho
