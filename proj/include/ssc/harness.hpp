#ifndef SSC_HARNESS_HPP
#define SSC_HARNESS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssc/cluster.hpp"
#include "ssc/complete.hpp"
#include "ssc/uosgen.hpp"

namespace ssc {

inline constexpr std::array<const char*, 4> kMetricNames = {
    "clustering_error", "completion_error", "principal_angle_error", "grassmann_error"};

struct SweepConfig {
  int n = 50;
  int L = 3;
  int d = 3;
  int per_cluster = 150;
  SamplingPattern pattern = SamplingPattern::kPerColumnRandom;
  bool common_random_subset = false;
  CoeffMode coeff_mode = CoeffMode::kGaussian;
  std::vector<double> p_grid;  // empty: default grid for the pattern
  std::vector<Algorithm> algorithms{Algorithm::kEwzfOo};
  int trials = 20;
  std::uint64_t base_seed = 1;
  double alpha = kDefaultLassoAlpha;
  double clustering_tol = 1e-12;
  double zero_error_tol = 1e-3;  // completion and subspace metrics
  bool normalize_columns = false;
  bool evaluate_completion = true;
  SvtOptions svt;
  std::string out_dir = "out";
  bool svg = false;

  /// p_grid, or the pattern's default when empty.
  std::vector<double> grid() const;
};

/// "a:b:step" (inclusive of b up to rounding) or a comma-separated list.
std::vector<double> parse_p_grid(const std::string& text);
std::vector<double> default_p_grid(SamplingPattern pattern);

/// Applies one key=value setting; throws std::invalid_argument on bad input.
void set_config_value(SweepConfig& cfg, const std::string& key, const std::string& value);

/// Flat key=value file, one per line, '#' starts a comment.
void load_config_file(const std::string& path, SweepConfig& cfg);

void validate(const SweepConfig& cfg);

/// Worst-case solver certificate quantities seen during one trial.
struct SolveAudit {
  int solves = 0;
  int failures = 0;
  double worst_gap_ratio = 0.0;      // gap / max(1, ||c||_1) over successful solves
  double worst_sign_residual = 0.0;  // over successful solves
};

struct TrialRecord {
  double p = 0.0;
  Algorithm algorithm = Algorithm::kEwzfOo;
  int trial = 0;
  std::uint64_t seed = 0;
  std::array<double, 4> metrics;  // NaN when a stage failed
  std::string reason;             // empty on success
  SolveAudit audit;
};

/// Seeds used by trial `trial_index` at sampling ratio p.
std::uint64_t trial_seed(const SweepConfig& cfg, int trial_index);
std::uint64_t sampling_seed(std::uint64_t trial_seed, double p);
std::uint64_t clustering_seed(std::uint64_t trial_seed);

/// generate -> sample -> cluster -> complete -> evaluate.
TrialRecord run_trial(const SweepConfig& cfg, double p, Algorithm algorithm, int trial_index);

struct SweepRow {
  double p = 0.0;
  std::string algorithm;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  int trials = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<TrialRecord> records;
};

using ProgressFn = std::function<void(const TrialRecord&)>;

SweepResult sweep(const SweepConfig& cfg, const ProgressFn& progress = {});

/// Mean and sample standard deviation over the finite values of each
/// (p, algorithm, metric); rows sorted by p, then algorithm order, then metric.
std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& records);

/// Smallest grid p whose mean metric is at most tol.
std::optional<double> zero_error_threshold(const std::vector<SweepRow>& rows,
                                           const std::string& algorithm,
                                           const std::string& metric, double tol);

/// The configured tolerance for a metric name.
double metric_tolerance(const SweepConfig& cfg, const std::string& metric);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(const std::string& path);
void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records);

/// Line chart of one metric, one polyline per algorithm.
std::string render_svg(const std::vector<SweepRow>& rows, const std::string& metric);

/// sweep.csv, trials.csv and, if requested, one <metric>.svg per metric.
void emit(const SweepResult& result, const std::string& dir, bool svg);

}  // namespace ssc

#endif  // SSC_HARNESS_HPP
