#include "ssc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace ssc {

namespace {

void require_orthonormal(const Matrix& m, const char* name) {
  if (m.cols() == 0) return;
  const double dev =
      (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-8)) {
    throw std::invalid_argument(std::string(name) + " does not have orthonormal columns");
  }
}

std::map<int, int> dense_ids(const std::vector<int>& labels) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  return ids;
}

}  // namespace

std::vector<int> min_cost_assignment(const Matrix& cost) {
  // Hungarian algorithm with potentials, O(n^3).
  const Index n = cost.rows();
  if (cost.cols() != n) throw std::invalid_argument("assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[sj];
        if (cur < minv[sj]) {
          minv[sj] = cur;
          way[sj] = j0;
        }
        if (minv[sj] < delta) {
          delta = minv[sj];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (used[sj]) {
          u[static_cast<std::size_t>(p[sj])] += delta;
          v[sj] -= delta;
        } else {
          minv[sj] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= n; ++j)
    row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
  return row_to_col;
}

double clustering_error(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (pred.empty()) return 0.0;
  const auto pid = dense_ids(pred);
  const auto tid = dense_ids(truth);
  const Index k = static_cast<Index>(std::max(pid.size(), tid.size()));
  Matrix agree = Matrix::Zero(k, k);
  for (std::size_t t = 0; t < pred.size(); ++t) agree(pid.at(pred[t]), tid.at(truth[t])) += 1.0;
  const std::vector<int> match = min_cost_assignment(-agree);
  double hits = 0.0;
  for (Index r = 0; r < k; ++r) hits += agree(r, match[static_cast<std::size_t>(r)]);
  return 1.0 - hits / static_cast<double>(pred.size());
}

double completion_error(const Matrix& completed, const Matrix& truth) {
  if (completed.rows() != truth.rows() || completed.cols() != truth.cols()) {
    throw std::invalid_argument("completion_error: shape mismatch");
  }
  const double denom = truth.norm();
  if (denom == 0.0) throw std::invalid_argument("completion_error: zero truth");
  return (completed - truth).norm() / denom;
}

double principal_angle_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("bases live in different spaces");
  require_orthonormal(a, "A");
  require_orthonormal(b, "B");
  if (b.cols() == 0) return 0.0;
  const Matrix resid = b - a * (a.transpose() * b);
  const double norm = svd(resid).s(0);
  return std::asin(std::clamp(norm, 0.0, 1.0));
}

Vector principal_angles(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("bases live in different spaces");
  require_orthonormal(a, "A");
  require_orthonormal(b, "B");
  const Index m = std::min(a.cols(), b.cols());
  if (m == 0) return Vector(0);
  const Vector cosines = svd(Matrix(a.transpose() * b)).s;
  Vector theta(m);
  // Descending cosines give ascending angles.
  for (Index t = 0; t < m; ++t) theta(t) = std::acos(std::clamp(cosines(t), -1.0, 1.0));
  return theta;
}

double grassmann_error(const Matrix& a, const Matrix& b) {
  const Vector theta = principal_angles(a, b);
  const double dim_gap = static_cast<double>(std::abs(a.cols() - b.cols()));
  return std::sqrt(dim_gap * std::numbers::pi * std::numbers::pi / 4.0 + theta.squaredNorm());
}

SubspaceMatch match_subspaces(const std::vector<Matrix>& estimated,
                              const std::vector<Matrix>& truth, SubspaceMetric metric) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("subspace counts differ");
  if (estimated.size() > 8) throw std::invalid_argument("match_subspaces supports at most 8");
  const std::size_t k = estimated.size();
  SubspaceMatch best;
  if (k == 0) return best;
  Matrix cost(static_cast<Index>(k), static_cast<Index>(k));
  for (std::size_t e = 0; e < k; ++e) {
    for (std::size_t t = 0; t < k; ++t) {
      cost(static_cast<Index>(e), static_cast<Index>(t)) =
          metric == SubspaceMetric::kPrincipalAngle ? principal_angle_error(estimated[e], truth[t])
                                                    : grassmann_error(estimated[e], truth[t]);
    }
  }
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t e = 0; e < k; ++e) total += cost(static_cast<Index>(e), perm[e]);
    if (total < best_total) {
      best_total = total;
      best.assignment = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.mean_error = best_total / static_cast<double>(k);
  return best;
}

}  // namespace ssc
