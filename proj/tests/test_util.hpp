#ifndef SSC_TESTS_TEST_UTIL_HPP
#define SSC_TESTS_TEST_UTIL_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/LU>

#include "ssc/numkit.hpp"
#include "ssc/rng.hpp"

namespace ssc::testing {

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  CounterRng rng(seed);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Vector gaussian_vector(Index n, std::uint64_t seed) {
  return gaussian(n, 1, seed).col(0);
}

inline Matrix orthonormal(Index rows, Index cols, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(gaussian(rows, cols, seed));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

inline Matrix unit_columns(Index rows, Index cols, std::uint64_t seed) {
  Matrix m = gaussian(rows, cols, seed);
  m.colwise().normalize();
  return m;
}

// Calls f with every subset of {0..n-1} of size k, in lexicographic order.
template <typename F>
void for_each_combination(int n, int k, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// Inradius of conv(+-g_j) from its facets: every hyperplane w^T x = 1
// through m affinely independent signed generators that leaves all
// generators inside is a facet; the inradius is the nearest one.
inline double facet_inradius(const Matrix& g) {
  const int m = static_cast<int>(g.rows());
  const int k = static_cast<int>(g.cols());
  Matrix pts(m, 2 * k);
  pts << g, -g;
  double best = std::numeric_limits<double>::infinity();
  for_each_combination(2 * k, m, [&](const std::vector<int>& idx) {
    Matrix rows(m, m);
    for (int t = 0; t < m; ++t) rows.row(t) = pts.col(idx[static_cast<std::size_t>(t)]).transpose();
    Eigen::FullPivLU<Matrix> lu(rows);
    if (lu.rank() < m) return;
    const Vector w = lu.solve(Vector::Ones(m));
    if ((g.transpose() * w).cwiseAbs().maxCoeff() <= 1.0 + 1e-10) best = std::min(best, 1.0 / w.norm());
  });
  return best;
}

}  // namespace ssc::testing

#endif  // SSC_TESTS_TEST_UTIL_HPP
