#ifndef SSC_COMPLETE_HPP
#define SSC_COMPLETE_HPP

#include <stdexcept>
#include <vector>

#include "ssc/numkit.hpp"
#include "ssc/uosgen.hpp"

namespace ssc {

/// Raised when the observed residual grows past 1e3 times its start value.
class DivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SvtOptions {
  double tau = 0.0;    // <= 0: 5 * sqrt(rows * cols)
  double delta = 0.0;  // <= 0: 1.2 / observed fraction
  int max_iter = 500;
  double conv_tol = 1e-4;
};

struct SvtResult {
  Matrix completed;
  int iterations = 0;
  bool converged = false;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Singular value thresholding restricted to the observed entries of `mask`.
SvtResult svt_complete(const Matrix& values, const Mask& mask, const SvtOptions& opts = {});

struct CompletionResult {
  Matrix completed;                   // n x N, original column order
  std::vector<int> cluster_ids;       // distinct labels, ascending
  std::vector<Index> per_cluster_rank;
  std::vector<int> iterations;
  std::vector<bool> converged;
  std::vector<bool> diverged;
};

/// Runs SVT on each label's columns separately and reassembles the result.
CompletionResult complete_by_cluster(const ObservedMatrix& x, const std::vector<int>& labels,
                                     const SvtOptions& opts = {});

struct SubspaceEstimate {
  Matrix basis;  // n x rank, orthonormal
  Index rank = 0;
};

/// Left singular vectors with singular value above d_tol * max singular value.
SubspaceEstimate identify_subspace(const Matrix& cluster, double d_tol = 1e-6);

}  // namespace ssc

#endif  // SSC_COMPLETE_HPP
