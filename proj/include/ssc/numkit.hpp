#ifndef SSC_NUMKIT_HPP
#define SSC_NUMKIT_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssc/rng.hpp"

namespace ssc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an iterative kernel exhausts its iteration budget.
class NotConvergedError : public std::runtime_error {
 public:
  NotConvergedError(const std::string& what, int iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

template <typename Scalar>
struct SvdResult {
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  MatrixType u;   // m x m
  VectorType s;   // min(m, n), nonincreasing
  MatrixType vt;  // n x n
  int sweeps = 0;

  /// u * diag(s) * vt with the rectangular diagonal implied by the shapes.
  MatrixType reconstruct() const {
    const Index k = s.size();
    return u.leftCols(k) * s.asDiagonal() * vt.topRows(k);
  }
};

namespace detail {

// Extends the orthonormal columns in `basis` (m x r) to an m x m orthogonal
// matrix. The first r columns are kept verbatim.
template <typename MatrixType>
MatrixType complete_orthonormal(const MatrixType& basis, Index m) {
  using Scalar = typename MatrixType::Scalar;
  MatrixType full(m, m);
  const Index r = basis.cols();
  full.leftCols(r) = basis;
  Index filled = r;
  // Gram-Schmidt against canonical vectors, twice for stability.
  for (Index e = 0; e < m && filled < m; ++e) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Unit(m, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index c = 0; c < filled; ++c) v -= full.col(c).dot(v) * full.col(c);
    }
    const Scalar norm = v.norm();
    if (norm > Scalar(1e-6)) full.col(filled++) = v / norm;
  }
  return full;
}

// One-sided Jacobi on a tall matrix (rows >= cols). Returns thin factors.
template <typename Scalar>
void jacobi_tall(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& work,
                 Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v,
                 int max_sweeps, int& sweeps_used) {
  const Index n = work.cols();
  v.setIdentity(n, n);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  // Columns below eps * ||A||_F are numerically zero; rotating them only
  // shuffles round-off and can cycle forever.
  const Scalar negligible = eps * eps * work.squaredNorm();
  for (sweeps_used = 1; sweeps_used <= max_sweeps; ++sweeps_used) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const Scalar alpha = work.col(p).squaredNorm();
        const Scalar beta = work.col(q).squaredNorm();
        const Scalar gamma = work.col(p).dot(work.col(q));
        if (gamma == Scalar(0) || alpha <= negligible || beta <= negligible ||
            std::abs(gamma) <= eps * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar t = std::copysign(Scalar(1), zeta) /
                         (std::abs(zeta) + std::sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Index r = 0; r < work.rows(); ++r) {
          const Scalar a = work(r, p);
          const Scalar b = work(r, q);
          work(r, p) = c * a - s * b;
          work(r, q) = s * a + c * b;
        }
        for (Index r = 0; r < n; ++r) {
          const Scalar a = v(r, p);
          const Scalar b = v(r, q);
          v(r, p) = c * a - s * b;
          v(r, q) = s * a + c * b;
        }
      }
    }
    if (!rotated) return;
  }
  throw NotConvergedError("one-sided Jacobi SVD did not converge", max_sweeps);
}

}  // namespace detail

/// Full SVD by one-sided (Hestenes) Jacobi. Bit-stable for identical input.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd(const Eigen::MatrixBase<Derived>& m,
                                        int max_sweeps = 80) {
  using Scalar = typename Derived::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!m.allFinite()) throw std::invalid_argument("svd: non-finite input");

  const bool transposed = m.rows() < m.cols();
  MatrixType work = transposed ? MatrixType(m.transpose()) : MatrixType(m);
  const Index rows = work.rows();
  const Index cols = work.cols();

  MatrixType v;
  SvdResult<Scalar> out;
  detail::jacobi_tall(work, v, max_sweeps, out.sweeps);

  std::vector<Index> order(static_cast<std::size_t>(cols));
  std::iota(order.begin(), order.end(), Index{0});
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> norms = work.colwise().norm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return norms(a) > norms(b); });

  const Scalar smax = cols > 0 ? norms(order.front()) : Scalar(0);
  const Scalar cutoff = smax * std::numeric_limits<Scalar>::epsilon() *
                        Scalar(std::max(rows, cols));
  out.s.resize(cols);
  MatrixType left(rows, cols);
  MatrixType right(cols, cols);
  Index nonzero = 0;
  for (Index k = 0; k < cols; ++k) {
    const Index c = order[static_cast<std::size_t>(k)];
    out.s(k) = norms(c);
    right.col(k) = v.col(c);
    if (norms(c) > cutoff && norms(c) > Scalar(0)) {
      left.col(k) = work.col(c) / norms(c);
      ++nonzero;
    }
  }
  MatrixType left_full =
      detail::complete_orthonormal(MatrixType(left.leftCols(nonzero)), rows);
  for (Index k = nonzero; k < cols; ++k) out.s(k) = Scalar(0);

  if (!transposed) {
    out.u = std::move(left_full);
    out.vt = right.transpose();
  } else {
    // m^T = L S R^T  =>  m = R S L^T
    out.u = std::move(right);
    out.vt = left_full.transpose();
  }
  return out;
}

/// Default rank tolerance used across the library: 1e-10 * max dimension.
inline double default_rank_tol(Index rows, Index cols) {
  return 1e-10 * static_cast<double>(std::max(rows, cols));
}

/// Moore-Penrose pseudo-inverse; singular values <= tol * max(s) are dropped.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pinv(
    const Eigen::MatrixBase<Derived>& m, double tol) {
  using Scalar = typename Derived::Scalar;
  if (tol < 0) throw std::invalid_argument("pinv: negative tolerance");
  const auto f = svd(m);
  const Index k = f.s.size();
  const Scalar smax = k > 0 ? f.s(0) : Scalar(0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv(k);
  for (Index i = 0; i < k; ++i) {
    inv(i) = (f.s(i) > Scalar(tol) * smax && f.s(i) > Scalar(0))
                 ? Scalar(1) / f.s(i)
                 : Scalar(0);
  }
  return f.vt.topRows(k).transpose() * inv.asDiagonal() *
         f.u.leftCols(k).transpose();
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> pinv(
    const Eigen::MatrixBase<Derived>& m) {
  return pinv(m, default_rank_tol(m.rows(), m.cols()));
}

/// Singular values and left singular vectors only. Wide inputs are first
/// reduced to the square factor R^T of a QR of m^T, which has the same
/// singular values and left singular vectors; vt is left empty.
template <typename Derived>
SvdResult<typename Derived::Scalar> svd_left(const Eigen::MatrixBase<Derived>& m) {
  using MatrixType =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.cols() <= m.rows()) {
    auto f = svd(m);
    f.vt.resize(0, 0);
    return f;
  }
  if (!m.allFinite()) throw std::invalid_argument("svd: non-finite input");
  Eigen::HouseholderQR<MatrixType> qr{MatrixType(m.transpose())};
  const MatrixType rt = MatrixType(
      qr.matrixQR().topRows(m.rows()).template triangularView<Eigen::Upper>())
                            .transpose();
  auto f = svd(rt);
  f.vt.resize(0, 0);
  return f;
}

/// Numerical rank from singular values relative to the largest one.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol) {
  const auto f = svd_left(m);
  if (f.s.size() == 0 || f.s(0) == 0) return 0;
  return (f.s.array() > rel_tol * f.s(0)).count();
}

/// Orthonormal basis of the column span (left singular vectors above tol).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
range_basis(const Eigen::MatrixBase<Derived>& m, double rel_tol) {
  const auto f = svd_left(m);
  Index r = 0;
  if (f.s.size() > 0 && f.s(0) > 0) r = (f.s.array() > rel_tol * f.s(0)).count();
  return f.u.leftCols(r);
}

template <typename Scalar>
struct SymEigResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;
};

/// Symmetric eigendecomposition; rejects inputs asymmetric beyond 1e-10.
template <typename Derived>
SymEigResult<typename Derived::Scalar> sym_eig(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) throw std::invalid_argument("sym_eig: not square");
  const Scalar scale = std::max(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixType> es(MatrixType(m),
                                               Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) {
    throw NotConvergedError("sym_eig: QR iteration failed", 0);
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Thin QR via Householder reflections; q has orthonormal columns.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
qr_thin(const Eigen::MatrixBase<Derived>& m) {
  using MatrixType =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<MatrixType> qr{MatrixType(m)};
  MatrixType q = qr.householderQ() * MatrixType::Identity(m.rows(), k);
  MatrixType r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  // Positive diagonal makes the factorization unique.
  for (Index i = 0; i < k; ++i) {
    if (r(i, i) < 0) {
      r.row(i) *= -1;
      q.col(i) *= -1;
    }
  }
  return {q, r};
}

struct KMeansOptions {
  int restarts = 20;
  int max_iter = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centroids;       // k x dim
  double inertia = 0.0;   // within-cluster sum of squares
  // Objective after every Lloyd iteration of the winning restart.
  std::vector<double> history;
};

/// k-means++ seeded Lloyd iterations, best of `restarts` by inertia.
/// An empty cluster is re-seeded at the point farthest from its centroid.
KMeansResult kmeans(const Matrix& points, int k, const KMeansOptions& opts);

}  // namespace ssc

#endif  // SSC_NUMKIT_HPP
