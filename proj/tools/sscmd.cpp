// Command-line front end: generate, cluster, certify, complete, eval, sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ssc/cluster.hpp"
#include "ssc/complete.hpp"
#include "ssc/geomcert.hpp"
#include "ssc/harness.hpp"
#include "ssc/io.hpp"
#include "ssc/metrics.hpp"
#include "ssc/uosgen.hpp"

namespace {

using ssc::SweepConfig;

// Raw flag values keyed by config name; applied after the config file so
// that flags override file settings.
struct Overrides {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> switch_options;
  std::map<std::string, bool> negated;

  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    options[key] = app->add_option(flag, values[key], help);
  }
  void add_switch(CLI::App* app, const std::string& flag, const std::string& key,
                  const std::string& help, bool negate = false) {
    switch_options[key] = app->add_flag(flag, switches[key], help);
    negated[key] = negate;
  }
  void apply(SweepConfig& cfg) const {
    for (const auto& [key, opt] : options)
      if (opt->count() > 0) ssc::set_config_value(cfg, key, values.at(key));
    for (const auto& [key, opt] : switch_options)
      if (opt->count() > 0)
        ssc::set_config_value(cfg, key, switches.at(key) != negated.at(key) ? "1" : "0");
  }
};

void add_model_flags(CLI::App* app, Overrides& ov) {
  ov.add(app, "--n", "n", "ambient dimension");
  ov.add(app, "--L", "L", "number of subspaces");
  ov.add(app, "--d", "d", "subspace dimension");
  ov.add(app, "--per-cluster", "per_cluster", "points per subspace");
  ov.add(app, "--pattern", "pattern", "same | random");
  ov.add(app, "--coeffs", "coeffs", "gaussian | sphere");
  ov.add(app, "--seed", "seed", "base seed");
  ov.add_switch(app, "--common-random-subset", "common_random_subset",
                "same-location: draw the observed rows at random");
}

// The instance a single-p command works on: trial 0 of the sweep config.
struct Instance {
  ssc::UoSModel model;
  ssc::ObservedMatrix x;
  double p = 1.0;
};

Instance make_instance(const SweepConfig& cfg) {
  Instance inst;
  inst.p = cfg.p_grid.empty() ? 1.0 : cfg.p_grid.front();
  const std::uint64_t seed = ssc::trial_seed(cfg, 0);
  inst.model = ssc::generate_model(cfg.n, std::vector<int>(static_cast<std::size_t>(cfg.L), cfg.d),
                                   std::vector<int>(static_cast<std::size_t>(cfg.L), cfg.per_cluster),
                                   cfg.coeff_mode, seed);
  ssc::SamplingSpec spec;
  spec.pattern = cfg.pattern;
  spec.p = inst.p;
  spec.seed = ssc::sampling_seed(seed, inst.p);
  spec.common_random_subset = cfg.common_random_subset;
  inst.x = ssc::sample(inst.model, spec);
  return inst;
}

void write_model(const std::string& dir, const ssc::UoSModel& model) {
  std::filesystem::create_directories(dir);
  ssc::io::write_matrix_csv(dir + "/truth.csv", model.data);
  ssc::io::write_labels_csv(dir + "/labels.csv", model.labels);
  for (int l = 0; l < model.subspace_count(); ++l) {
    ssc::io::write_matrix_csv(dir + "/basis_" + std::to_string(l) + ".csv",
                              model.bases[static_cast<std::size_t>(l)]);
  }
}

std::vector<ssc::Matrix> read_bases(const std::string& dir) {
  std::vector<ssc::Matrix> bases;
  for (int l = 0;; ++l) {
    const std::string path = dir + "/basis_" + std::to_string(l) + ".csv";
    if (!std::filesystem::exists(path)) break;
    bases.push_back(ssc::io::read_matrix_csv(path));
  }
  return bases;
}

std::vector<ssc::Matrix> estimate_bases(const ssc::Matrix& completed,
                                        const std::vector<int>& labels, int clusters) {
  std::vector<ssc::Matrix> out;
  for (int label = 0; label < clusters; ++label) {
    std::vector<ssc::Index> cols;
    for (std::size_t c = 0; c < labels.size(); ++c)
      if (labels[c] == label) cols.push_back(static_cast<ssc::Index>(c));
    ssc::Matrix block(completed.rows(), static_cast<ssc::Index>(cols.size()));
    for (std::size_t t = 0; t < cols.size(); ++t)
      block.col(static_cast<ssc::Index>(t)) = completed.col(cols[t]);
    if (block.size() == 0 || block.cwiseAbs().maxCoeff() == 0.0) {
      out.emplace_back(completed.rows(), 0);
    } else {
      out.push_back(ssc::identify_subspace(block).basis);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse subspace clustering with missing entries"};
  app.require_subcommand(1);

  // generate
  Overrides gen_ov;
  std::string gen_out = "instance";
  auto* gen = app.add_subcommand("generate", "draw a union-of-subspaces instance and sample it");
  add_model_flags(gen, gen_ov);
  gen_ov.add(gen, "--p", "p", "sampling ratio");
  gen->add_option("--out", gen_out, "output directory");

  // cluster
  std::string cl_in = "instance", cl_out, cl_algo = "ewzf-oo";
  int cl_clusters = 3, cl_tsc_q = 0;
  double cl_alpha = ssc::kDefaultLassoAlpha;
  std::uint64_t cl_seed = 0;
  bool cl_normalize = false;
  auto* cl = app.add_subcommand("cluster", "cluster the columns of data.csv/mask.csv");
  cl->add_option("--in", cl_in, "directory with data.csv and mask.csv");
  cl->add_option("--out", cl_out, "output directory (default: --in)");
  cl->add_option("--algo", cl_algo, "ewzf | ewzf-oo | ewzf-oo-lasso | tsc");
  cl->add_option("--L", cl_clusters, "number of clusters");
  cl->add_option("--alpha", cl_alpha, "LASSO tuning parameter");
  cl->add_option("--tsc-q", cl_tsc_q, "TSC neighbours (0: default rule)");
  cl->add_option("--seed", cl_seed, "k-means seed");
  cl->add_flag("--normalize-columns", cl_normalize, "scale observed columns to unit norm");

  // certify
  Overrides cert_ov;
  std::string cert_out = "certificates", cert_check = "oo";
  int cert_ell = -1;
  auto* cert = app.add_subcommand("certify", "evaluate the success conditions on a generated instance");
  add_model_flags(cert, cert_ov);
  cert_ov.add(cert, "--p", "p", "sampling ratio");
  cert->add_option("--check", cert_check, "oo | ewzf | same");
  cert->add_option("--ell", cert_ell, "subspace to check (-1: all)");
  cert->add_option("--out", cert_out, "output directory");

  // complete
  std::string co_in = "instance", co_labels, co_out;
  ssc::SvtOptions svt;
  auto* co = app.add_subcommand("complete", "per-cluster SVT completion");
  co->add_option("--in", co_in, "directory with data.csv and mask.csv");
  co->add_option("--labels", co_labels, "cluster labels (default: <in>/pred_labels.csv)");
  co->add_option("--out", co_out, "output directory (default: --in)");
  co->add_option("--svt-tau", svt.tau, "threshold (0: automatic)");
  co->add_option("--svt-delta", svt.delta, "step size (0: automatic)");
  co->add_option("--svt-max-iter", svt.max_iter, "iteration cap");
  co->add_option("--svt-tol", svt.conv_tol, "relative residual tolerance");

  // eval
  std::string ev_truth = "instance", ev_labels, ev_completed, ev_out;
  auto* ev = app.add_subcommand("eval", "score labels and completion against the ground truth");
  ev->add_option("--truth", ev_truth, "directory written by generate");
  ev->add_option("--labels", ev_labels, "predicted labels (default: <truth>/pred_labels.csv)");
  ev->add_option("--completed", ev_completed, "completed matrix (default: <truth>/completed.csv)");
  ev->add_option("--out", ev_out, "write metrics.csv here");

  // sweep
  Overrides sw_ov;
  std::string sw_config;
  bool sw_quiet = false;
  auto* sw = app.add_subcommand("sweep", "run trials over a grid of sampling ratios");
  sw->add_option("--config", sw_config, "key=value file; flags override it")->check(CLI::ExistingFile);
  add_model_flags(sw, sw_ov);
  sw_ov.add(sw, "--p", "p", "single sampling ratio or comma list");
  sw_ov.add(sw, "--p-grid", "p_grid", "a:b:step");
  sw_ov.add(sw, "--algo", "algo", "comma list of ewzf | ewzf-oo | ewzf-oo-lasso | tsc");
  sw_ov.add(sw, "--alpha", "alpha", "LASSO tuning parameter");
  sw_ov.add(sw, "--trials", "trials", "trials per (p, algorithm)");
  sw_ov.add(sw, "--out", "out", "output directory");
  sw_ov.add(sw, "--zero-error-tol", "zero_error_tol", "threshold for completion/subspace errors");
  sw_ov.add(sw, "--svt-max-iter", "svt_max_iter", "SVT iteration cap");
  sw_ov.add(sw, "--svt-tol", "svt_tol", "SVT relative residual tolerance");
  sw_ov.add_switch(sw, "--svg", "svg", "write one SVG chart per metric");
  sw_ov.add_switch(sw, "--normalize-columns", "normalize_columns", "unit-norm observed columns");
  sw_ov.add_switch(sw, "--no-complete", "complete", "skip completion and subspace metrics", true);
  sw->add_flag("--quiet", sw_quiet, "no per-trial progress");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SweepConfig cfg;
      gen_ov.apply(cfg);
      ssc::validate(cfg);
      const Instance inst = make_instance(cfg);
      ssc::io::write_observed(gen_out, inst.x);
      write_model(gen_out, inst.model);
      std::cout << "wrote " << inst.model.total_points() << " columns (p=" << inst.p << ") to "
                << gen_out << "\n";
    } else if (*cl) {
      const ssc::ObservedMatrix raw = ssc::io::read_observed(cl_in);
      ssc::ClusterOptions opts;
      opts.algorithm = ssc::parse_algorithm(cl_algo);
      opts.clusters = cl_clusters;
      opts.alpha = cl_alpha;
      opts.tsc_q = cl_tsc_q;
      opts.seed = cl_seed;
      const ssc::ClusterOutcome out =
          ssc::cluster_observed(cl_normalize ? ssc::normalize_columns(raw) : raw, opts);
      const std::string dir = cl_out.empty() ? cl_in : cl_out;
      std::filesystem::create_directories(dir);
      ssc::io::write_labels_csv(dir + "/pred_labels.csv", out.labels);
      ssc::io::write_matrix_csv(dir + "/coefficients.csv", out.affinity.c);
      ssc::io::write_matrix_csv(dir + "/affinity.csv", out.affinity.sym);
      int failures = 0;
      for (const auto& s : out.diagnostics.solves)
        if (s.status != ssc::SolveStatus::kOptimal) ++failures;
      for (const auto& w : out.diagnostics.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "clustered " << out.labels.size() << " columns; " << failures
                << " solver failures\n";
    } else if (*cert) {
      SweepConfig cfg;
      cert_ov.apply(cfg);
      ssc::validate(cfg);
      const Instance inst = make_instance(cfg);
      std::vector<ssc::CertificateReport> reports;
      int held = 0;
      for (int ell = 0; ell < inst.model.subspace_count(); ++ell) {
        if (cert_ell >= 0 && ell != cert_ell) continue;
        for (int i = 0; i < inst.model.n_per[static_cast<std::size_t>(ell)]; ++i) {
          if (cert_check == "oo") {
            reports.push_back(ssc::check_thm_oo(inst.model, inst.x, ell, i));
          } else if (cert_check == "ewzf") {
            reports.push_back(ssc::check_thm_ewzf(inst.model, inst.x, ell, i));
          } else if (cert_check == "same") {
            reports.push_back(ssc::check_thm_same_location(inst.model, inst.x, ell, i));
          } else {
            throw std::invalid_argument("--check must be oo, ewzf or same");
          }
          if (reports.back().holds) ++held;
        }
      }
      std::filesystem::create_directories(cert_out);
      ssc::write_certificate_csv(cert_out + "/certificate_report.csv", reports);
      std::cout << held << " of " << reports.size() << " points certified\n";
    } else if (*co) {
      const ssc::ObservedMatrix x = ssc::io::read_observed(co_in);
      const auto labels =
          ssc::io::read_labels_csv(co_labels.empty() ? co_in + "/pred_labels.csv" : co_labels);
      const ssc::CompletionResult res = ssc::complete_by_cluster(x, labels, svt);
      const std::string dir = co_out.empty() ? co_in : co_out;
      std::filesystem::create_directories(dir);
      ssc::io::write_matrix_csv(dir + "/completed.csv", res.completed);
      for (std::size_t c = 0; c < res.cluster_ids.size(); ++c) {
        std::cout << "cluster " << res.cluster_ids[c] << ": rank " << res.per_cluster_rank[c]
                  << ", " << res.iterations[c] << " iterations"
                  << (res.diverged[c] ? ", diverged" : res.converged[c] ? "" : ", not converged")
                  << "\n";
      }
    } else if (*ev) {
      const ssc::Matrix truth = ssc::io::read_matrix_csv(ev_truth + "/truth.csv");
      const auto true_labels = ssc::io::read_labels_csv(ev_truth + "/labels.csv");
      const auto labels =
          ssc::io::read_labels_csv(ev_labels.empty() ? ev_truth + "/pred_labels.csv" : ev_labels);
      std::vector<std::pair<std::string, double>> metrics;
      metrics.emplace_back("clustering_error", ssc::clustering_error(labels, true_labels));
      const std::string completed_path =
          ev_completed.empty() ? ev_truth + "/completed.csv" : ev_completed;
      if (std::filesystem::exists(completed_path)) {
        const ssc::Matrix completed = ssc::io::read_matrix_csv(completed_path);
        const auto bases = read_bases(ev_truth);
        const auto est = estimate_bases(completed, labels, static_cast<int>(bases.size()));
        metrics.emplace_back("completion_error", ssc::completion_error(completed, truth));
        metrics.emplace_back(
            "principal_angle_error",
            ssc::match_subspaces(est, bases, ssc::SubspaceMetric::kPrincipalAngle).mean_error);
        metrics.emplace_back(
            "grassmann_error",
            ssc::match_subspaces(est, bases, ssc::SubspaceMetric::kGrassmann).mean_error);
      }
      std::ofstream file;
      if (!ev_out.empty()) {
        std::filesystem::create_directories(ev_out);
        file.open(ev_out + "/metrics.csv");
        file << "metric,value\n";
      }
      for (const auto& [name, value] : metrics) {
        std::cout << name << " " << ssc::io::format_double(value) << "\n";
        if (file) file << name << ',' << ssc::io::format_double(value) << '\n';
      }
    } else if (*sw) {
      SweepConfig cfg;
      if (!sw_config.empty()) ssc::load_config_file(sw_config, cfg);
      sw_ov.apply(cfg);
      ssc::validate(cfg);
      ssc::ProgressFn progress;
      if (!sw_quiet) {
        progress = [](const ssc::TrialRecord& r) {
          std::fprintf(stderr, "p=%.3f %-13s trial %2d  clustering_error=%.4g%s%s\n", r.p,
                       ssc::to_string(r.algorithm).c_str(), r.trial, r.metrics[0],
                       r.reason.empty() ? "" : "  ", r.reason.c_str());
        };
      }
      const ssc::SweepResult result = ssc::sweep(cfg, progress);
      ssc::emit(result, cfg.out_dir, cfg.svg);
      for (const auto algo : cfg.algorithms) {
        for (const char* metric : ssc::kMetricNames) {
          const auto t = ssc::zero_error_threshold(result.rows, ssc::to_string(algo), metric,
                                                   ssc::metric_tolerance(cfg, metric));
          std::cout << ssc::to_string(algo) << " " << metric << " threshold: "
                    << (t ? ssc::io::format_double(*t) : std::string("none")) << "\n";
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
