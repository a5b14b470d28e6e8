#ifndef SSC_METRICS_HPP
#define SSC_METRICS_HPP

#include <vector>

#include "ssc/numkit.hpp"

namespace ssc {

/// Fraction of points mislabeled under the best bijection between labels.
double clustering_error(const std::vector<int>& pred, const std::vector<int>& truth);

/// ||completed - truth||_F / ||truth||_F.
double completion_error(const Matrix& completed, const Matrix& truth);

/// arcsin ||B - A A^T B||_2, clamped to [0, pi/2]. Both bases orthonormal.
double principal_angle_error(const Matrix& a, const Matrix& b);

/// Principal angles from the SVD of A^T B, ascending.
Vector principal_angles(const Matrix& a, const Matrix& b);

/// sqrt(|k - l| pi^2 / 4 + sum theta_i^2).
double grassmann_error(const Matrix& a, const Matrix& b);

enum class SubspaceMetric { kPrincipalAngle, kGrassmann };

struct SubspaceMatch {
  std::vector<int> assignment;  // estimate e is matched to truth assignment[e]
  double mean_error = 0.0;
};

/// Exhaustive search over bijections (at most 8 subspaces).
SubspaceMatch match_subspaces(const std::vector<Matrix>& estimated,
                              const std::vector<Matrix>& truth, SubspaceMetric metric);

/// Minimum-cost perfect matching on a square cost matrix.
std::vector<int> min_cost_assignment(const Matrix& cost);

}  // namespace ssc

#endif  // SSC_METRICS_HPP
