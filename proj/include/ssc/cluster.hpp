#ifndef SSC_CLUSTER_HPP
#define SSC_CLUSTER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ssc/numkit.hpp"
#include "ssc/solvers.hpp"
#include "ssc/uosgen.hpp"

namespace ssc {

enum class Algorithm { kEwzf, kEwzfOo, kEwzfOoLasso, kTsc };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

/// Column i of `c` holds the representation coefficients of point i.
struct Affinity {
  Matrix c;    // N x N, zero diagonal
  Matrix sym;  // |C| + |C|^T
};

/// Per-column solver record, kept for certificate audits.
struct ColumnSolve {
  Index column = 0;
  SolveStatus status = SolveStatus::kOptimal;
  double gap = 0.0;
  double primal_obj = 0.0;
  double sign_residual = 0.0;
  double primal_residual = 0.0;
};

struct AffinityDiagnostics {
  std::vector<ColumnSolve> solves;
  std::vector<std::string> warnings;
  std::vector<Index> zero_columns;  // excluded from every dictionary
};

Affinity affinity_ewzf(const ObservedMatrix& x, AffinityDiagnostics* diag = nullptr);
Affinity affinity_ewzf_oo(const ObservedMatrix& x, AffinityDiagnostics* diag = nullptr);
/// Per-column min |c|_1 + (lambda / 2) |x_i - A c|^2 on Omega_i, with lambda
/// from lasso_lambda_rule. Larger alpha tracks basis pursuit more closely.
Affinity affinity_ewzf_oo_lasso(const ObservedMatrix& x, double alpha = kDefaultLassoAlpha,
                                AffinityDiagnostics* diag = nullptr);
Affinity affinity_tsc(const ObservedMatrix& x, int q, AffinityDiagnostics* diag = nullptr);

/// round(sqrt(N_l * ln N_l)).
int default_tsc_q(int points_per_cluster);

/// Builds |C| + |C|^T from a coefficient matrix.
Affinity make_affinity(Matrix c);

struct SpectralOptions {
  std::uint64_t seed = 0;
  int kmeans_restarts = 20;
  int kmeans_max_iter = 300;
};

/// Normalized-Laplacian embedding followed by k-means.
std::vector<int> spectral_cluster(const Affinity& aff, int clusters,
                                  const SpectralOptions& opts = {});

struct ClusterOptions {
  Algorithm algorithm = Algorithm::kEwzfOo;
  int clusters = 1;
  double alpha = kDefaultLassoAlpha;
  int tsc_q = 0;  // 0 means default_tsc_q(N / clusters)
  std::uint64_t seed = 0;
};

struct ClusterOutcome {
  Affinity affinity;
  std::vector<int> labels;
  AffinityDiagnostics diagnostics;
};

/// Affinity + spectral clustering; zero-norm columns get uniform random
/// labels drawn from `seed`.
ClusterOutcome cluster_observed(const ObservedMatrix& x, const ClusterOptions& opts);

}  // namespace ssc

#endif  // SSC_CLUSTER_HPP
