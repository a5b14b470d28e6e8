#include "ssc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>
#include <stdexcept>

#include "ssc/io.hpp"
#include "ssc/metrics.hpp"
#include "ssc/rng.hpp"

namespace ssc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty()) {
    throw std::invalid_argument(key + ": not a number: '" + value + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw std::invalid_argument(key + ": not an integer: '" + value + "'");
  }
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + value + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(trim(part));
  return parts;
}

// Grid values are rounded to 1e-10 so that 0.3 + 3 * 0.02 prints as 0.36.
double snap(double p) { return std::round(p * 1e10) / 1e10; }

int algorithm_rank(const std::string& name) {
  for (Algorithm a : {Algorithm::kEwzf, Algorithm::kEwzfOo, Algorithm::kEwzfOoLasso,
                      Algorithm::kTsc}) {
    if (to_string(a) == name) return static_cast<int>(a);
  }
  return 100;
}

}  // namespace

std::vector<double> default_p_grid(SamplingPattern pattern) {
  return pattern == SamplingPattern::kSameLocation ? parse_p_grid("0.08:0.26:0.02")
                                                   : parse_p_grid("0.30:0.95:0.05");
}

std::vector<double> SweepConfig::grid() const {
  return p_grid.empty() ? default_p_grid(pattern) : p_grid;
}

std::vector<double> parse_p_grid(const std::string& text) {
  const std::string t = trim(text);
  std::vector<double> grid;
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw std::invalid_argument("p grid must be a:b:step");
    const double a = to_double("p-grid", parts[0]);
    const double b = to_double("p-grid", parts[1]);
    const double step = to_double("p-grid", parts[2]);
    if (!(step > 0.0)) throw std::invalid_argument("p grid step must be positive");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) grid.push_back(snap(a + static_cast<double>(i) * step));
  } else {
    for (const auto& part : split(t, ',')) {
      if (!part.empty()) grid.push_back(snap(to_double("p-grid", part)));
    }
  }
  if (grid.empty()) throw std::invalid_argument("p grid is empty");
  return grid;
}

void set_config_value(SweepConfig& cfg, const std::string& raw_key, const std::string& raw) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = trim(raw);
  if (key == "n") {
    cfg.n = to_int(key, value);
  } else if (key == "L" || key == "l") {
    cfg.L = to_int(key, value);
  } else if (key == "d") {
    cfg.d = to_int(key, value);
  } else if (key == "per_cluster") {
    cfg.per_cluster = to_int(key, value);
  } else if (key == "pattern") {
    if (value == "same") {
      cfg.pattern = SamplingPattern::kSameLocation;
    } else if (value == "random") {
      cfg.pattern = SamplingPattern::kPerColumnRandom;
    } else {
      throw std::invalid_argument("pattern must be 'same' or 'random'");
    }
  } else if (key == "common_random_subset") {
    cfg.common_random_subset = to_bool(key, value);
  } else if (key == "coeffs" || key == "coeff_mode") {
    if (value == "gaussian") {
      cfg.coeff_mode = CoeffMode::kGaussian;
    } else if (value == "sphere") {
      cfg.coeff_mode = CoeffMode::kSphere;
    } else {
      throw std::invalid_argument("coeffs must be 'gaussian' or 'sphere'");
    }
  } else if (key == "p_grid" || key == "p") {
    cfg.p_grid = parse_p_grid(value);
  } else if (key == "algo" || key == "algorithms") {
    cfg.algorithms.clear();
    for (const auto& name : split(value, ',')) cfg.algorithms.push_back(parse_algorithm(name));
  } else if (key == "trials") {
    cfg.trials = to_int(key, value);
  } else if (key == "seed") {
    const double v = to_double(key, value);
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument("seed must be a nonnegative integer");
    cfg.base_seed = static_cast<std::uint64_t>(v);
  } else if (key == "alpha") {
    cfg.alpha = to_double(key, value);
  } else if (key == "clustering_tol") {
    cfg.clustering_tol = to_double(key, value);
  } else if (key == "zero_error_tol") {
    cfg.zero_error_tol = to_double(key, value);
  } else if (key == "normalize_columns") {
    cfg.normalize_columns = to_bool(key, value);
  } else if (key == "complete") {
    cfg.evaluate_completion = to_bool(key, value);
  } else if (key == "svt_tau") {
    cfg.svt.tau = to_double(key, value);
  } else if (key == "svt_delta") {
    cfg.svt.delta = to_double(key, value);
  } else if (key == "svt_max_iter") {
    cfg.svt.max_iter = to_int(key, value);
  } else if (key == "svt_tol") {
    cfg.svt.conv_tol = to_double(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "svg") {
    cfg.svg = to_bool(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + raw_key + "'");
  }
}

void load_config_file(const std::string& path, SweepConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    try {
      set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void validate(const SweepConfig& cfg) {
  if (cfg.n < 1 || cfg.L < 1 || cfg.d < 1 || cfg.per_cluster < 1) {
    throw std::invalid_argument("n, L, d and per-cluster must be positive");
  }
  if (cfg.d > cfg.n) throw std::invalid_argument("d must not exceed n");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (cfg.algorithms.empty()) throw std::invalid_argument("no algorithm selected");
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const auto grid = cfg.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0 && grid[i] <= 1.0)) throw std::invalid_argument("p values must lie in (0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("p grid must be strictly increasing");
    }
    if (observed_count(grid[i], cfg.n) < 1) {
      throw std::invalid_argument("p too small: no coordinate would be observed");
    }
  }
}

std::uint64_t trial_seed(const SweepConfig& cfg, int trial_index) {
  return cfg.base_seed + static_cast<std::uint64_t>(trial_index);
}

std::uint64_t sampling_seed(std::uint64_t seed, double p) {
  const auto key = static_cast<std::uint64_t>(std::llround(p * 1e9));
  return CounterRng(seed).split(key).next_u64();
}

std::uint64_t clustering_seed(std::uint64_t seed) {
  return CounterRng(seed).split(0x636c7573ULL).next_u64();
}

TrialRecord run_trial(const SweepConfig& cfg, double p, Algorithm algorithm, int trial_index) {
  TrialRecord rec;
  rec.p = p;
  rec.algorithm = algorithm;
  rec.trial = trial_index;
  rec.seed = trial_seed(cfg, trial_index);
  rec.metrics.fill(kNaN);

  const std::vector<int> dims(static_cast<std::size_t>(cfg.L), cfg.d);
  const std::vector<int> n_per(static_cast<std::size_t>(cfg.L), cfg.per_cluster);
  UoSModel model;
  ObservedMatrix x;
  try {
    model = generate_model(cfg.n, dims, n_per, cfg.coeff_mode, rec.seed);
    SamplingSpec spec;
    spec.pattern = cfg.pattern;
    spec.p = p;
    spec.seed = sampling_seed(rec.seed, p);
    spec.common_random_subset = cfg.common_random_subset;
    x = sample(model, spec);
  } catch (const std::exception& e) {
    rec.reason = std::string("generate: ") + e.what();
    return rec;
  }

  ClusterOutcome outcome;
  try {
    ClusterOptions opts;
    opts.algorithm = algorithm;
    opts.clusters = cfg.L;
    opts.alpha = cfg.alpha;
    opts.seed = clustering_seed(rec.seed);
    outcome = cluster_observed(cfg.normalize_columns ? normalize_columns(x) : x, opts);
  } catch (const std::exception& e) {
    rec.reason = std::string("cluster: ") + e.what();
    return rec;
  }
  for (const auto& s : outcome.diagnostics.solves) {
    ++rec.audit.solves;
    if (s.status != SolveStatus::kOptimal) {
      ++rec.audit.failures;
      continue;
    }
    rec.audit.worst_gap_ratio =
        std::max(rec.audit.worst_gap_ratio, s.gap / std::max(1.0, s.primal_obj));
    rec.audit.worst_sign_residual = std::max(rec.audit.worst_sign_residual, s.sign_residual);
  }
  if (rec.audit.failures > 0) {
    rec.reason = std::to_string(rec.audit.failures) + " solver failures";
  }
  rec.metrics[0] = clustering_error(outcome.labels, model.labels);
  if (!cfg.evaluate_completion) return rec;

  try {
    const CompletionResult comp = complete_by_cluster(x, outcome.labels, cfg.svt);
    for (std::size_t c = 0; c < comp.diverged.size(); ++c) {
      if (comp.diverged[c]) {
        if (!rec.reason.empty()) rec.reason += "; ";
        rec.reason += "svt diverged on cluster " + std::to_string(comp.cluster_ids[c]);
      }
    }
    rec.metrics[1] = completion_error(comp.completed, model.data);

    std::vector<Matrix> estimated;
    for (int label = 0; label < cfg.L; ++label) {
      std::vector<Index> cols;
      for (std::size_t c = 0; c < outcome.labels.size(); ++c)
        if (outcome.labels[c] == label) cols.push_back(static_cast<Index>(c));
      Matrix block(cfg.n, static_cast<Index>(cols.size()));
      for (std::size_t t = 0; t < cols.size(); ++t) block.col(static_cast<Index>(t)) = comp.completed.col(cols[t]);
      if (block.size() == 0 || block.cwiseAbs().maxCoeff() == 0.0) {
        estimated.emplace_back(cfg.n, 0);
      } else {
        estimated.push_back(identify_subspace(block).basis);
      }
    }
    rec.metrics[2] =
        match_subspaces(estimated, model.bases, SubspaceMetric::kPrincipalAngle).mean_error;
    rec.metrics[3] = match_subspaces(estimated, model.bases, SubspaceMetric::kGrassmann).mean_error;
  } catch (const std::exception& e) {
    if (!rec.reason.empty()) rec.reason += "; ";
    rec.reason += std::string("complete: ") + e.what();
  }
  return rec;
}

std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& records) {
  struct Key {
    double p;
    int algo;
    int metric;
    bool operator<(const Key& o) const {
      return std::tie(p, algo, metric) < std::tie(o.p, o.algo, o.metric);
    }
  };
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : records) {
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      auto& vals = groups[Key{r.p, static_cast<int>(r.algorithm), static_cast<int>(m)}];
      if (std::isfinite(r.metrics[m])) vals.push_back(r.metrics[m]);
    }
  }
  std::vector<SweepRow> rows;
  for (const auto& [key, vals] : groups) {
    SweepRow row;
    row.p = key.p;
    row.algorithm = to_string(static_cast<Algorithm>(key.algo));
    row.metric = kMetricNames[static_cast<std::size_t>(key.metric)];
    row.trials = static_cast<int>(vals.size());
    if (vals.empty()) {
      row.mean = row.std = kNaN;
    } else {
      double sum = 0.0;
      for (double v : vals) sum += v;
      row.mean = sum / static_cast<double>(vals.size());
      double sq = 0.0;
      for (double v : vals) sq += (v - row.mean) * (v - row.mean);
      row.std = vals.size() > 1 ? std::sqrt(sq / static_cast<double>(vals.size() - 1)) : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

SweepResult sweep(const SweepConfig& cfg, const ProgressFn& progress) {
  validate(cfg);
  SweepResult result;
  for (double p : cfg.grid()) {
    for (Algorithm algo : cfg.algorithms) {
      for (int t = 0; t < cfg.trials; ++t) {
        result.records.push_back(run_trial(cfg, p, algo, t));
        if (progress) progress(result.records.back());
      }
    }
  }
  result.rows = aggregate(result.records);
  return result;
}

std::optional<double> zero_error_threshold(const std::vector<SweepRow>& rows,
                                           const std::string& algorithm,
                                           const std::string& metric, double tol) {
  std::optional<double> best;
  for (const auto& r : rows) {
    if (r.algorithm != algorithm || r.metric != metric) continue;
    if (std::isfinite(r.mean) && r.mean <= tol && (!best || r.p < *best)) best = r.p;
  }
  return best;
}

double metric_tolerance(const SweepConfig& cfg, const std::string& metric) {
  return metric == "clustering_error" ? cfg.clustering_tol : cfg.zero_error_tol;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "p,algorithm,metric,mean,std,trials\n";
  for (const auto& r : rows) {
    out << io::format_double(r.p) << ',' << r.algorithm << ',' << r.metric << ','
        << io::format_double(r.mean) << ',' << io::format_double(r.std) << ',' << r.trials
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "p,algorithm,metric,mean,std,trials") {
    throw std::runtime_error(path + ": unexpected header");
  }
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw std::runtime_error(path + ": expected 6 columns: " + line);
    SweepRow r;
    r.p = to_double("p", cells[0]);
    r.algorithm = cells[1];
    r.metric = cells[2];
    r.mean = to_double("mean", cells[3]);
    r.std = to_double("std", cells[4]);
    r.trials = to_int("trials", cells[5]);
    rows.push_back(r);
  }
  return rows;
}

void write_trials_csv(const std::string& path, const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "p,algorithm,trial,seed";
  for (const char* m : kMetricNames) out << ',' << m;
  out << ",solves,solver_failures,worst_gap_ratio,worst_sign_residual,reason\n";
  for (const auto& r : records) {
    out << io::format_double(r.p) << ',' << to_string(r.algorithm) << ',' << r.trial << ','
        << r.seed;
    for (double v : r.metrics) out << ',' << io::format_double(v);
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    out << ',' << r.audit.solves << ',' << r.audit.failures << ','
        << io::format_double(r.audit.worst_gap_ratio) << ','
        << io::format_double(r.audit.worst_sign_residual) << ',' << reason << '\n';
  }
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << v;
  return ss.str();
}

}  // namespace

std::string render_svg(const std::vector<SweepRow>& rows, const std::string& metric) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;
  const double plot_w = kW - kLeft - kRight;
  const double plot_h = kH - kTop - kBottom;

  std::map<int, std::vector<std::pair<double, double>>> series;
  std::map<int, std::string> names;
  double p_lo = 1.0, p_hi = 0.0, y_hi = 0.0;
  for (const auto& r : rows) {
    if (r.metric != metric || !std::isfinite(r.mean)) continue;
    const int rank = algorithm_rank(r.algorithm);
    series[rank].emplace_back(r.p, r.mean);
    names[rank] = r.algorithm;
    p_lo = std::min(p_lo, r.p);
    p_hi = std::max(p_hi, r.p);
    y_hi = std::max(y_hi, r.mean);
  }
  if (p_hi <= p_lo) {
    p_lo = std::min(p_lo, p_hi) - 0.05;
    p_hi = p_lo + 0.1;
  }
  if (y_hi <= 0.0) y_hi = 1.0;
  y_hi *= 1.05;
  auto sx = [&](double p) { return kLeft + (p - p_lo) / (p_hi - p_lo) * plot_w; };
  auto sy = [&](double v) { return kTop + plot_h - v / y_hi * plot_h; };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(metric) << "</text>\n";
  // Axes and ticks.
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double p = p_lo + (p_hi - p_lo) * t / 5.0;
    const double v = y_hi * t / 5.0;
    svg << "<line x1=\"" << sx(p) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << sx(p)
        << "\" y2=\"" << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << sx(p) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">" << fmt(p) << "</text>\n"
        << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(v) << "\" x2=\"" << kLeft
        << "\" y2=\"" << sy(v) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">"
        << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kH - 15
      << "\" text-anchor=\"middle\">sampling ratio p</text>\n"
      << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">mean " << xml_escape(metric) << "</text>\n";
  int idx = 0;
  for (auto& [rank, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = kColors[idx % 5];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [p, v] : pts) svg << sx(p) << ',' << sy(v) << ' ';
    svg << "\"/>\n";
    const double ly = kTop + 10 + 20 * idx;
    svg << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + plot_w + 40 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w + 45 << "\" y=\"" << ly + 4 << "\">"
        << xml_escape(names[rank]) << "</text>\n";
    ++idx;
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit(const SweepResult& result, const std::string& dir, bool svg) {
  std::filesystem::create_directories(dir);
  write_sweep_csv(dir + "/sweep.csv", result.rows);
  write_trials_csv(dir + "/trials.csv", result.records);
  if (!svg) return;
  for (const char* metric : kMetricNames) {
    const bool present = std::any_of(result.rows.begin(), result.rows.end(),
                                     [&](const SweepRow& r) { return r.metric == metric; });
    if (!present && !result.rows.empty()) continue;
    std::ofstream out(dir + "/" + metric + ".svg");
    if (!out) throw std::runtime_error("cannot write svg into " + dir);
    out << render_svg(result.rows, metric);
  }
}

}  // namespace ssc
