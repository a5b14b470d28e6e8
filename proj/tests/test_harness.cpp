#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ssc/harness.hpp"

using namespace ssc;

namespace {

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.n = 12;
  cfg.L = 2;
  cfg.d = 2;
  cfg.per_cluster = 10;
  cfg.trials = 2;
  cfg.p_grid = {0.5, 1.0};
  cfg.algorithms = {Algorithm::kEwzfOo, Algorithm::kTsc};
  cfg.normalize_columns = true;
  return cfg;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("p grid parsing and defaults") {
  const auto range = parse_p_grid("0.1:0.2:0.05");
  REQUIRE(range.size() == 3);
  CHECK(range[0] == doctest::Approx(0.1));
  CHECK(range[2] == doctest::Approx(0.2));
  CHECK(parse_p_grid("0.3, 0.5,0.9") == std::vector<double>{0.3, 0.5, 0.9});
  CHECK_THROWS(parse_p_grid("0.1:0.2"));
  CHECK_THROWS(parse_p_grid("abc"));

  const auto same = default_p_grid(SamplingPattern::kSameLocation);
  const auto rnd = default_p_grid(SamplingPattern::kPerColumnRandom);
  CHECK(same.front() == doctest::Approx(0.08));
  CHECK(same.back() == doctest::Approx(0.26));
  CHECK(rnd.front() == doctest::Approx(0.30));
  CHECK(rnd.back() == doctest::Approx(0.95));
  SweepConfig cfg;
  CHECK(cfg.grid() == rnd);
}

TEST_CASE("config values and validation") {
  SweepConfig cfg;
  set_config_value(cfg, "per-cluster", "40");
  set_config_value(cfg, "pattern", "same");
  set_config_value(cfg, "algorithms", "ewzf,tsc");
  set_config_value(cfg, "normalize_columns", "true");
  CHECK(cfg.per_cluster == 40);
  CHECK(cfg.pattern == SamplingPattern::kSameLocation);
  CHECK(cfg.algorithms == std::vector<Algorithm>{Algorithm::kEwzf, Algorithm::kTsc});
  CHECK(cfg.normalize_columns);
  CHECK_THROWS_AS(set_config_value(cfg, "bogus", "1"), std::invalid_argument);
  CHECK_THROWS_AS(set_config_value(cfg, "trials", "x"), std::invalid_argument);

  SweepConfig bad;
  bad.d = 60;
  CHECK_THROWS(validate(bad));
  bad = SweepConfig{};
  bad.trials = 0;
  CHECK_THROWS(validate(bad));
  CHECK_NOTHROW(validate(SweepConfig{}));
}

TEST_CASE("config file loading") {
  const auto path = std::filesystem::temp_directory_path() / "ssc_cfg_test.cfg";
  {
    std::ofstream out(path);
    out << "# comment\n n = 20\ntrials=3  # inline\n\np_grid = 0.4:0.6:0.1\n";
  }
  SweepConfig cfg;
  load_config_file(path.string(), cfg);
  CHECK(cfg.n == 20);
  CHECK(cfg.trials == 3);
  CHECK(cfg.p_grid.size() == 3);
  {
    std::ofstream out(path);
    out << "n = 20\nnot a setting\n";
  }
  CHECK_THROWS(load_config_file(path.string(), cfg));
  std::filesystem::remove(path);
  CHECK_THROWS(load_config_file(path.string(), cfg));
}

TEST_CASE("seeds are derived deterministically") {
  SweepConfig cfg;
  cfg.base_seed = 100;
  CHECK(trial_seed(cfg, 0) == 100);
  CHECK(trial_seed(cfg, 7) == 107);
  CHECK(sampling_seed(5, 0.5) == sampling_seed(5, 0.5));
  CHECK(sampling_seed(5, 0.5) != sampling_seed(5, 0.52));
  CHECK(clustering_seed(5) != clustering_seed(6));
}

TEST_CASE("full observation recovers everything") {
  SweepConfig cfg = small_config();
  const TrialRecord r = run_trial(cfg, 1.0, Algorithm::kEwzfOo, 0);
  CHECK(r.reason.empty());
  CHECK(r.metrics[0] == 0.0);
  CHECK(r.metrics[1] < 1e-12);
  CHECK(r.metrics[2] < 1e-6);
  CHECK(r.metrics[3] < 1e-6);
  CHECK(r.audit.solves == cfg.L * cfg.per_cluster);
  CHECK(r.audit.failures == 0);
}

TEST_CASE("single-point sweep equals run_trial and is deterministic") {
  SweepConfig cfg = small_config();
  cfg.trials = 1;
  cfg.p_grid = {0.6};
  cfg.algorithms = {Algorithm::kEwzfOo};
  const SweepResult s = sweep(cfg);
  const TrialRecord r = run_trial(cfg, 0.6, Algorithm::kEwzfOo, 0);
  REQUIRE(s.records.size() == 1);
  REQUIRE(s.rows.size() == 4);
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(s.rows[m].metric == kMetricNames[m]);
    CHECK(s.rows[m].mean == r.metrics[m]);
    CHECK(s.rows[m].trials == 1);
  }
  CHECK(sweep(cfg).records[0].metrics == r.metrics);
}

TEST_CASE("aggregate statistics") {
  std::vector<TrialRecord> recs(3);
  const double vals[3] = {1.0, 2.0, 6.0};
  for (int t = 0; t < 3; ++t) {
    recs[static_cast<std::size_t>(t)].p = 0.5;
    recs[static_cast<std::size_t>(t)].trial = t;
    recs[static_cast<std::size_t>(t)].metrics = {vals[t], 0.25, std::nan(""), 0.0};
  }
  const auto rows = aggregate(recs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].mean == doctest::Approx(3.0));
  CHECK(rows[0].std == doctest::Approx(std::sqrt(7.0)));
  CHECK(rows[1].std == 0.0);
  CHECK(rows[1].trials == 3);
  CHECK(rows[2].trials == 0);
  CHECK(aggregate({}).empty());
}

TEST_CASE("zero-error threshold") {
  std::vector<SweepRow> rows;
  for (double p : {0.3, 0.4, 0.5, 0.6}) rows.push_back({p, "tsc", "clustering_error", p < 0.45 ? 0.1 : 0.0, 0.0, 5});
  rows.push_back({0.35, "tsc", "grassmann_error", 0.0, 0.0, 5});
  CHECK(zero_error_threshold(rows, "tsc", "clustering_error", 1e-12) == doctest::Approx(0.5));
  CHECK(zero_error_threshold(rows, "tsc", "grassmann_error", 1e-3) == doctest::Approx(0.35));
  CHECK_FALSE(zero_error_threshold(rows, "ewzf", "clustering_error", 1e-12).has_value());
  SweepConfig cfg;
  CHECK(metric_tolerance(cfg, "clustering_error") == cfg.clustering_tol);
  CHECK(metric_tolerance(cfg, "grassmann_error") == cfg.zero_error_tol);
}

TEST_CASE("csv output round-trips and empty results give a header") {
  const auto dir = std::filesystem::temp_directory_path() / "ssc_harness_test";
  std::filesystem::create_directories(dir);
  write_sweep_csv((dir / "empty.csv").string(), {});
  CHECK(slurp(dir / "empty.csv") == "p,algorithm,metric,mean,std,trials\n");
  CHECK(read_sweep_csv((dir / "empty.csv").string()).empty());

  std::vector<SweepRow> rows{{0.3, "ewzf-oo", "clustering_error", 0.125, 0.01, 20},
                             {0.95, "tsc", "grassmann_error", 1.0 / 3.0, 0.0, 20}};
  write_sweep_csv((dir / "rows.csv").string(), rows);
  const auto back = read_sweep_csv((dir / "rows.csv").string());
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].p == rows[i].p);
    CHECK(back[i].algorithm == rows[i].algorithm);
    CHECK(back[i].metric == rows[i].metric);
    CHECK(back[i].mean == rows[i].mean);
    CHECK(back[i].std == rows[i].std);
    CHECK(back[i].trials == rows[i].trials);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("svg output is balanced and labelled") {
  std::vector<SweepRow> rows{{0.3, "ewzf-oo", "clustering_error", 0.2, 0.0, 2},
                             {0.5, "ewzf-oo", "clustering_error", 0.0, 0.0, 2},
                             {0.3, "tsc", "clustering_error", 0.3, 0.0, 2}};
  const std::string svg = render_svg(rows, "clustering_error");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("sampling ratio p") != std::string::npos);
  CHECK(svg.find("mean clustering_error") != std::string::npos);
  // Every opening tag is closed or self-closing.
  int depth = 0;
  for (std::size_t pos = svg.find('<'); pos != std::string::npos; pos = svg.find('<', pos + 1)) {
    const std::size_t end = svg.find('>', pos);
    REQUIRE(end != std::string::npos);
    if (svg[pos + 1] == '?' || svg[pos + 1] == '!') continue;
    if (svg[pos + 1] == '/') {
      --depth;
    } else if (svg[end - 1] != '/') {
      ++depth;
    }
    CHECK(depth >= 0);
  }
  CHECK(depth == 0);
}

TEST_CASE("identical configs emit byte-identical sweep csv") {
  SweepConfig cfg = small_config();
  cfg.trials = 1;
  const auto dir = std::filesystem::temp_directory_path() / "ssc_harness_emit";
  emit(sweep(cfg), (dir / "a").string(), true);
  emit(sweep(cfg), (dir / "b").string(), false);
  const std::string a = slurp(dir / "a" / "sweep.csv");
  CHECK(a == slurp(dir / "b" / "sweep.csv"));
  CHECK(a.rfind("p,algorithm,metric,mean,std,trials\n", 0) == 0);
  CHECK(std::filesystem::exists(dir / "a" / "trials.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "clustering_error.svg"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("clustering error does not get worse with more observations") {
  SweepConfig cfg;
  cfg.n = 20;
  cfg.L = 2;
  cfg.d = 2;
  cfg.per_cluster = 20;
  cfg.trials = 2;
  cfg.p_grid = {0.3, 0.95};
  cfg.evaluate_completion = false;
  cfg.normalize_columns = true;
  const auto rows = sweep(cfg).rows;
  double low = -1.0, high = -1.0;
  for (const auto& r : rows) {
    if (r.metric != "clustering_error") continue;
    (r.p < 0.5 ? low : high) = r.mean;
  }
  CHECK(high <= low);
}
