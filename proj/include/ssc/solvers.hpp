#ifndef SSC_SOLVERS_HPP
#define SSC_SOLVERS_HPP

#include <string>
#include <vector>

#include "ssc/numkit.hpp"
#include "ssc/uosgen.hpp"

namespace ssc {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNotConverged };

std::string to_string(SolveStatus status);

/// Primal/dual pair of min ||c||_1 s.t. A c = b and max <b, nu> s.t.
/// ||A^T nu||_inf <= 1.
struct SparseSolution {
  SolveStatus status = SolveStatus::kNotConverged;
  Vector c;
  Vector nu;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  std::vector<Index> support;
  int iterations = 0;
  double primal_residual = 0.0;   // ||A c - b||_2
  double dual_violation = 0.0;    // max(0, ||A^T nu||_inf - 1)
  bool polished = false;

  bool ok() const { return status == SolveStatus::kOptimal; }
};

struct BasisPursuitOptions {
  double gap_tol = 1e-8;     // relative to max(1, ||c||_1)
  double feas_tol = 1e-8;    // relative
  double support_tol = 1e-6; // relative to max |c_j|
  double sign_tol = 1e-6;    // |a_j^T nu - sign(c_j)| on the support
  int max_iter = 120;
  // Re-solve on the detected support so the dual meets the sign
  // conditions exactly when the support is unambiguous.
  bool polish = true;
};

/// Equality-constrained l1 minimization by a primal-dual interior-point
/// method on the split LP; the equality multiplier is returned as nu.
/// Rank-deficient A is handled by restricting to its range; nu then lies
/// in range(A).
SparseSolution basis_pursuit(const Matrix& a, const Vector& b,
                             const BasisPursuitOptions& opts = {});

/// Worst absolute deviation of A_S^T nu from sign(c_S) on the support.
double sign_condition_residual(const Matrix& a, const SparseSolution& sol);

struct DualDirection {
  SolveStatus status = SolveStatus::kNotConverged;
  Vector lambda;
  double objective = 0.0;
  bool unbounded() const { return status == SolveStatus::kUnbounded; }
  bool ok() const { return status == SolveStatus::kOptimal; }
};

/// argmax <a_tilde, lambda> s.t. ||A_tilde^T lambda||_inf <= 1, taken in the
/// span of A_tilde's columns. Unbounded when a_tilde leaves that span.
DualDirection dual_direction(const Vector& a_tilde, const Matrix& a_dict,
                             const BasisPursuitOptions& opts = {});

struct LassoOptions {
  double kkt_tol = 1e-8;  // relative to max(1, ||A^T b||_inf)
  int max_steps = 0;      // homotopy events; 0 means 20 * (rows + cols)
  int max_cd_sweeps = 5000;
};

struct LassoResult {
  SolveStatus status = SolveStatus::kNotConverged;
  Vector c;
  double kkt_residual = 0.0;
  int steps = 0;
  bool ok() const { return status == SolveStatus::kOptimal; }
};

/// Minimizer of 0.5 ||b - A c||^2 + lambda ||c||_1, followed down the
/// regularization path from ||A^T b||_inf by homotopy.
LassoResult lasso(const Matrix& a, const Vector& b, double lambda,
                  const LassoOptions& opts = {});

/// Largest subgradient-optimality violation of c for the LASSO objective.
double lasso_kkt_residual(const Matrix& a, const Vector& b, double lambda,
                          const Vector& c);

inline constexpr double kDefaultLassoAlpha = 7.34;

/// lambda = alpha / max_{i != j} |x_i^T x_j| over zero-filled columns.
double lasso_lambda_rule(const ObservedMatrix& x, double alpha = kDefaultLassoAlpha);

}  // namespace ssc

#endif  // SSC_SOLVERS_HPP
