#include <algorithm>
#include <limits>

#include "doctest.h"
#include "ssc/numkit.hpp"
#include "test_util.hpp"

using namespace ssc;
using ssc::testing::gaussian;

TEST_CASE("svd of identity and diagonal matrices") {
  const auto id = svd(Matrix::Identity(3, 3));
  CHECK((id.s - Vector::Ones(3)).norm() < 1e-14);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1.0, 3.0, 2.0;
  const auto r = svd(d);
  CHECK(r.s(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.s(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.s(2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("svd reconstructs random matrices with orthogonal factors") {
  for (auto [rows, cols] : {std::pair<Index, Index>{5, 3}, {3, 5}, {40, 40}, {100, 500}}) {
    const Matrix m = gaussian(rows, cols, static_cast<std::uint64_t>(rows * 1000 + cols));
    const auto r = svd(m);
    CHECK((r.reconstruct() - m).norm() <= 1e-10 * m.norm());
    CHECK((r.u.transpose() * r.u - Matrix::Identity(rows, rows)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((r.vt * r.vt.transpose() - Matrix::Identity(cols, cols)).cwiseAbs().maxCoeff() < 1e-10);
    for (Index i = 1; i < r.s.size(); ++i) CHECK(r.s(i) <= r.s(i - 1));
    CHECK(r.s.minCoeff() >= 0.0);
  }
}

TEST_CASE("svd singular values agree with an independent eigen solver") {
  const Matrix m = gaussian(7, 4, 11);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  Vector oracle = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse();
  CHECK((svd(m).s - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("svd is bit-stable and rejects non-finite input") {
  const Matrix m = gaussian(6, 4, 3);
  const auto a = svd(m);
  const auto b = svd(m);
  CHECK(a.s == b.s);
  CHECK(a.u == b.u);
  Matrix bad = m;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(bad), std::invalid_argument);
  CHECK_THROWS_AS(svd(m, 0), NotConvergedError);
}

TEST_CASE("pinv known cases") {
  CHECK((pinv(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-14);
  const Matrix v = ssc::testing::orthonormal(4, 2, 5);
  CHECK((pinv(v) * v - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

  const Matrix full = gaussian(6, 3, 9);
  const Matrix normal_eq = (full.transpose() * full).inverse() * full.transpose();
  CHECK((pinv(full) - normal_eq).cwiseAbs().maxCoeff() < 1e-8);

  const Matrix rank1 = gaussian(3, 1, 1) * gaussian(1, 3, 2);
  CHECK((pinv(pinv(rank1)) - rank1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("pinv satisfies the Moore-Penrose identities") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Rank-deficient 8x6 of rank 3.
    const Matrix a = gaussian(8, 3, seed) * gaussian(3, 6, seed + 100);
    const Matrix p = pinv(a);
    CHECK((a * p * a - a).norm() <= 1e-7 * a.norm());
    CHECK((p * a * p - p).norm() <= 1e-7 * p.norm());
    CHECK(((a * p).transpose() - a * p).norm() < 1e-7);
    CHECK(((p * a).transpose() - p * a).norm() < 1e-7);
  }
}

TEST_CASE("sym_eig known spectra") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 2.0, 1.0;
  const auto r = sym_eig(d);
  CHECK(r.values(0) == doctest::Approx(1.0));
  CHECK(r.values(1) == doctest::Approx(2.0));

  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const auto s = sym_eig(swap);
  CHECK(s.values(0) == doctest::Approx(-1.0));
  CHECK(s.values(1) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig residual and orthogonality on random symmetric input") {
  const Matrix g = gaussian(6, 6, 21);
  const Matrix m = g + g.transpose();
  const auto r = sym_eig(m);
  for (Index i = 0; i < 6; ++i) {
    CHECK((m * r.vectors.col(i) - r.values(i) * r.vectors.col(i)).norm() <= 1e-8 * m.norm());
  }
  CHECK((r.vectors.transpose() * r.vectors - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  for (Index i = 1; i < 6; ++i) CHECK(r.values(i) >= r.values(i - 1));
  CHECK_THROWS_AS(sym_eig(g), std::invalid_argument);
}

TEST_CASE("rank and range basis") {
  const Matrix a = gaussian(7, 2, 4) * gaussian(2, 5, 6);
  CHECK(numerical_rank(a, 1e-10) == 2);
  const Matrix q = range_basis(a, 1e-10);
  CHECK(q.cols() == 2);
  CHECK((q * q.transpose() * a - a).norm() < 1e-10 * a.norm());
}

TEST_CASE("qr_thin factors with positive diagonal") {
  const Matrix m = gaussian(6, 3, 8);
  const auto [q, r] = qr_thin(m);
  CHECK((q * r - m).norm() < 1e-12 * m.norm());
  CHECK((q.transpose() * q - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.diagonal().minCoeff() > 0.0);
}

TEST_CASE("kmeans trivial cases") {
  Matrix pts(4, 2);
  pts << 0, 0, 0.1, 0, 10, 10, 10, 10.1;
  KMeansOptions opts;
  opts.seed = 3;
  const auto r = kmeans(pts, 2, opts);
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[2] == r.labels[3]);
  CHECK(r.labels[0] != r.labels[2]);

  const auto one = kmeans(pts, 1, opts);
  CHECK(std::all_of(one.labels.begin(), one.labels.end(), [](int l) { return l == 0; }));
  CHECK_THROWS(kmeans(pts, 5, opts));
}

namespace {

double inertia_of(const Matrix& pts, const std::vector<int>& labels, int k) {
  double total = 0.0;
  for (int c = 0; c < k; ++c) {
    Vector mean = Vector::Zero(pts.cols());
    int count = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) {
        mean += pts.row(static_cast<Index>(i)).transpose();
        ++count;
      }
    }
    if (count == 0) return std::numeric_limits<double>::infinity();
    mean /= count;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) total += (pts.row(static_cast<Index>(i)).transpose() - mean).squaredNorm();
  }
  return total;
}

}  // namespace

TEST_CASE("kmeans matches exhaustive assignment on three small blobs") {
  // Oracle: all 3^12 labelings, best within-cluster sum of squares.
  CounterRng rng(77);
  Matrix pts(12, 2);
  const double centers[3][2] = {{0, 0}, {4, 1}, {1, 5}};
  for (int i = 0; i < 12; ++i) {
    pts(i, 0) = centers[i % 3][0] + 0.2 * rng.normal();
    pts(i, 1) = centers[i % 3][1] + 0.2 * rng.normal();
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> labels(12, 0);
  for (int code = 0; code < 531441; ++code) {
    int c = code;
    for (int i = 0; i < 12; ++i) {
      labels[static_cast<std::size_t>(i)] = c % 3;
      c /= 3;
    }
    best = std::min(best, inertia_of(pts, labels, 3));
  }
  KMeansOptions opts;
  opts.seed = 5;
  const auto r = kmeans(pts, 3, opts);
  CHECK(r.inertia == doctest::Approx(best).epsilon(1e-10));
  CHECK(inertia_of(pts, r.labels, 3) == doctest::Approx(best).epsilon(1e-10));
}

TEST_CASE("kmeans objective never increases within the winning restart") {
  const Matrix pts = gaussian(200, 3, 31);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    KMeansOptions opts;
    opts.seed = seed;
    const auto r = kmeans(pts, 4, opts);
    for (std::size_t i = 1; i < r.history.size(); ++i)
      CHECK(r.history[i] <= r.history[i - 1] + 1e-12);
    const auto again = kmeans(pts, 4, opts);
    CHECK(again.labels == r.labels);
  }
}
