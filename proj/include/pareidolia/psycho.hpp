#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pareidolia/types.hpp"

namespace pareidolia::psycho {

/// One face-counting response.  Responses saturate at 9 ("9 or more").
struct TrialRecord {
  std::string subject_id;
  std::string group;
  std::string gender;    // optional; empty when unreported
  double width_level = 0.0;
  long image_index = 0;
  long repetition = 0;
  int response = 0;      // in [0, 9]
  double rt_ms = 0.0;    // > 0

  void validate() const;
};

enum class DropReason { too_fast, took_break };
const char* to_string(DropReason reason) noexcept;

struct CleanResult {
  struct Dropped {
    TrialRecord trial;
    DropReason reason;
  };
  std::vector<TrialRecord> kept;
  std::vector<Dropped> dropped;
};

/// Drops rt < 100 ms (too_fast) and rt > 120000 ms (took_break); strict
/// inequalities, order preserved, nothing altered.
CleanResult clean_trials(const std::vector<TrialRecord>& trials);

enum class Level { subject, population };

/// Per-width response means.  Repetitions of one image average first, then
/// images, then (population level) subjects; ci_half_width is the 95%
/// interval 1.96 * std(subject means) / sqrt(n_subjects), 0 for n = 1.
/// Subject level requires a single subject's trials and attaches no interval.
Curve aggregate_curve(const std::vector<TrialRecord>& trials, Level level);

struct SubjectCurve {
  std::string subject_id;
  struct Point {
    double width = 0.0;
    double mean_response = 0.0;
    std::uint64_t n_trials = 0;
  };
  std::vector<Point> points;  // widths strictly increasing
};

std::vector<SubjectCurve> subject_curves(const std::vector<TrialRecord>& trials);

/// Per-width mean response time across subjects; ci_half_width carries the
/// +-1 standard deviation band of subject means (0 for a single subject).
Curve rt_curve(const std::vector<TrialRecord>& trials);

enum class Factor { group, gender };

struct GroupComparison {
  std::map<std::string, Curve> curves;  // factor value -> population curve
  struct DiffRow {
    double width = 0.0;
    double abs_diff = 0.0;
    double pooled_std = 0.0;
  };
  std::vector<DiffRow> differences;       // filled when exactly two values
  std::vector<std::string> flagged;       // factor values with < 2 subjects
};

/// Population curve per factor value plus a descriptive per-width difference
/// table (no hypothesis test).  Trials with an empty factor value are
/// excluded and the value flagged.
GroupComparison compare_groups(const std::vector<TrialRecord>& trials, Factor factor);

// ============================================================================
// Model fit
// ============================================================================

/// Width-vs-density model configuration used for fitting.
struct ModelConfig {
  int modes = 64;
  double amplitude = 200.0;
  double s0 = 10.0;
};

struct FitResult {
  double gamma_hat = 0.0;
  double scale_hat = 0.0;        // scale against the peak-normalized model curve
  double rss = 0.0;
  double log_peak_density = 0.0; // ln of the model peak backing the normalization
  std::vector<std::pair<double, double>> grid;  // evaluated (gamma, rss)
  std::vector<double> skipped;   // gammas whose predictions all vanished
};

/// Grid search over gamma.  Predictions are peak-normalized per gamma
/// (p = exp(ll - max ll), so the absolute scale is scale_hat *
/// exp(-log_peak_density)); the scale solve is the closed-form least squares
/// K = sum(y*p)/sum(p^2) clamped to >= 0.  Ties break toward smaller gamma.
FitResult fit_gaussian_model(const Curve& curve, const std::vector<double>& gamma_grid,
                             const ModelConfig& cfg);

// ============================================================================
// Synthetic trials (the experiment's design: 9 widths x 10 images x 3
// repetitions per subject, 14 subjects in two groups with distinct image
// sets)
// ============================================================================

struct SynthDesign {
  int subjects = 14;
  std::vector<double> widths = {0.25, 0.5, 1, 2, 4, 8, 16, 32, 64};
  int images_per_width = 10;
  int repetitions = 3;
  double peak_width = 16.0;     // argmax of the planted population curve
  double peak_response = 6.0;
  double log2_sd = 1.8;         // falloff of the planted curve in log2(width)
  double subject_sd = 0.5;
  double trial_sd = 1.5;
  double outlier_fraction = 0.015;  // injected too-fast/break responses
};

std::vector<TrialRecord> synth_trials(const SynthDesign& design, std::uint64_t seed);

// ============================================================================
// CSV interchange
// header: subject_id,group,gender,width_level,image_index,repetition,response,rt_ms
// ============================================================================

std::vector<TrialRecord> read_trials_csv(std::istream& in);
std::vector<TrialRecord> read_trials_file(const std::string& path);
std::string write_trials_csv(const std::vector<TrialRecord>& trials);

}  // namespace pareidolia::psycho
