#include "ssc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ssc {

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kEwzf: return "ewzf";
    case Algorithm::kEwzfOo: return "ewzf-oo";
    case Algorithm::kEwzfOoLasso: return "ewzf-oo-lasso";
    case Algorithm::kTsc: return "tsc";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "ewzf") return Algorithm::kEwzf;
  if (name == "ewzf-oo") return Algorithm::kEwzfOo;
  if (name == "ewzf-oo-lasso") return Algorithm::kEwzfOoLasso;
  if (name == "tsc") return Algorithm::kTsc;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

Affinity make_affinity(Matrix c) {
  c.diagonal().setZero();
  Affinity aff;
  aff.sym = c.cwiseAbs() + c.cwiseAbs().transpose();
  aff.c = std::move(c);
  return aff;
}

int default_tsc_q(int points_per_cluster) {
  const double n = static_cast<double>(points_per_cluster);
  return static_cast<int>(std::round(std::sqrt(n * std::log(n))));
}

namespace {

std::vector<Index> zero_norm_columns(const ObservedMatrix& x) {
  std::vector<Index> zeros;
  for (Index c = 0; c < x.cols(); ++c)
    if (x.values.col(c).squaredNorm() == 0.0) zeros.push_back(c);
  return zeros;
}

// Column indices usable as dictionary atoms for point i.
std::vector<Index> dictionary_columns(Index n_cols, Index i,
                                      const std::vector<char>& excluded) {
  std::vector<Index> cols;
  cols.reserve(static_cast<std::size_t>(n_cols));
  for (Index j = 0; j < n_cols; ++j)
    if (j != i && !excluded[static_cast<std::size_t>(j)]) cols.push_back(j);
  return cols;
}

enum class RowPolicy { kUnion, kOwn };

// Shared driver: for each column, restrict rows per policy, solve with
// `solve_column`, scatter the coefficients into C.
template <typename SolveFn>
Affinity build_affinity(const ObservedMatrix& x, RowPolicy policy,
                        AffinityDiagnostics* diag, SolveFn&& solve_column) {
  const Index n_cols = x.cols();
  if (n_cols < 2) throw std::invalid_argument("affinity needs at least two points");
  const std::vector<Index> zeros = zero_norm_columns(x);
  std::vector<char> excluded(static_cast<std::size_t>(n_cols), 0);
  for (Index z : zeros) excluded[static_cast<std::size_t>(z)] = 1;
  if (diag) {
    diag->zero_columns = zeros;
    for (Index z : zeros) {
      diag->warnings.push_back("column " + std::to_string(z) +
                               " has zero norm and is excluded");
    }
  }

  // Rows never observed by any column only contribute 0 = 0 constraints.
  std::vector<int> union_rows;
  for (Index r = 0; r < x.rows(); ++r)
    if (x.mask.row(r).any()) union_rows.push_back(static_cast<int>(r));

  Matrix c = Matrix::Zero(n_cols, n_cols);
  for (Index i = 0; i < n_cols; ++i) {
    if (excluded[static_cast<std::size_t>(i)]) continue;
    const std::vector<int>& rows = policy == RowPolicy::kOwn ? x.omega(i) : union_rows;
    const std::vector<Index> cols = dictionary_columns(n_cols, i, excluded);
    Matrix dict(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    Vector target(static_cast<Index>(rows.size()));
    for (std::size_t a = 0; a < rows.size(); ++a) {
      target(static_cast<Index>(a)) = x.values(rows[a], i);
      for (std::size_t b = 0; b < cols.size(); ++b) {
        dict(static_cast<Index>(a), static_cast<Index>(b)) = x.values(rows[a], cols[b]);
      }
    }
    const Vector coeffs = solve_column(i, dict, target);
    for (std::size_t b = 0; b < cols.size(); ++b) c(cols[b], i) = coeffs(static_cast<Index>(b));
  }
  return make_affinity(std::move(c));
}

Affinity bp_affinity(const ObservedMatrix& x, RowPolicy policy, AffinityDiagnostics* diag) {
  return build_affinity(x, policy, diag, [&](Index i, const Matrix& dict, const Vector& target) {
    const SparseSolution sol = basis_pursuit(dict, target);
    if (diag) {
      ColumnSolve rec;
      rec.column = i;
      rec.status = sol.status;
      rec.gap = sol.gap;
      rec.primal_obj = sol.primal_obj;
      rec.sign_residual = sign_condition_residual(dict, sol);
      rec.primal_residual = sol.primal_residual;
      diag->solves.push_back(rec);
      if (!sol.ok()) {
        diag->warnings.push_back("column " + std::to_string(i) + ": basis pursuit " +
                                 to_string(sol.status) + ", column left zero");
      }
    }
    return sol.ok() ? sol.c : Vector(Vector::Zero(dict.cols()));
  });
}

}  // namespace

Affinity affinity_ewzf(const ObservedMatrix& x, AffinityDiagnostics* diag) {
  return bp_affinity(x, RowPolicy::kUnion, diag);
}

Affinity affinity_ewzf_oo(const ObservedMatrix& x, AffinityDiagnostics* diag) {
  return bp_affinity(x, RowPolicy::kOwn, diag);
}

Affinity affinity_ewzf_oo_lasso(const ObservedMatrix& x, double alpha,
                                AffinityDiagnostics* diag) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  // The rule's lambda weights the fit term, min |c|_1 + lambda/2 |x - Ac|^2;
  // dividing through gives the l1 weight 1 / lambda in the solver's form.
  const double l1_weight = 1.0 / lasso_lambda_rule(x, alpha);
  return build_affinity(x, RowPolicy::kOwn, diag,
                        [&](Index i, const Matrix& dict, const Vector& target) {
                          const LassoResult res = lasso(dict, target, l1_weight);
                          if (diag && !res.ok()) {
                            diag->warnings.push_back("column " + std::to_string(i) +
                                                     ": lasso " + to_string(res.status));
                          }
                          return res.c;
                        });
}

Affinity affinity_tsc(const ObservedMatrix& x, int q, AffinityDiagnostics* diag) {
  const Index n_cols = x.cols();
  if (q < 1 || q >= n_cols) throw std::invalid_argument("tsc: q must lie in [1, N)");
  const std::vector<Index> zeros = zero_norm_columns(x);
  std::vector<char> excluded(static_cast<std::size_t>(n_cols), 0);
  for (Index z : zeros) excluded[static_cast<std::size_t>(z)] = 1;
  if (diag) diag->zero_columns = zeros;

  Matrix unit = x.values;
  for (Index j = 0; j < n_cols; ++j) {
    const double norm = unit.col(j).norm();
    if (norm > 0.0) unit.col(j) /= norm;
  }
  const Matrix corr = (unit.transpose() * unit).cwiseAbs();
  Matrix c = Matrix::Zero(n_cols, n_cols);
  std::vector<Index> order;
  for (Index i = 0; i < n_cols; ++i) {
    if (excluded[static_cast<std::size_t>(i)]) continue;
    order = dictionary_columns(n_cols, i, excluded);
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(q), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(), [&](Index a, Index b) {
                        if (corr(a, i) != corr(b, i)) return corr(a, i) > corr(b, i);
                        return a < b;
                      });
    for (std::size_t t = 0; t < keep; ++t) c(order[t], i) = corr(order[t], i);
  }
  return make_affinity(std::move(c));
}

std::vector<int> spectral_cluster(const Affinity& aff, int clusters,
                                  const SpectralOptions& opts) {
  if (clusters < 1) throw std::invalid_argument("spectral_cluster: need >= 1 cluster");
  const Index n = aff.sym.rows();
  if (n < clusters) throw std::invalid_argument("spectral_cluster: fewer points than clusters");
  if (clusters == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);

  const Vector degree = aff.sym.rowwise().sum();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;
  Matrix lap = -(inv_sqrt.asDiagonal() * aff.sym * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  lap = 0.5 * (lap + lap.transpose()).eval();

  const auto eig = sym_eig(lap);
  Matrix embed = eig.vectors.leftCols(clusters);
  for (Index i = 0; i < n; ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 1e-12) {
      embed.row(i) /= norm;
    } else {
      embed.row(i).setZero();
    }
  }
  KMeansOptions km;
  km.seed = opts.seed;
  km.restarts = opts.kmeans_restarts;
  km.max_iter = opts.kmeans_max_iter;
  return kmeans(embed, clusters, km).labels;
}

ClusterOutcome cluster_observed(const ObservedMatrix& x, const ClusterOptions& opts) {
  ClusterOutcome out;
  switch (opts.algorithm) {
    case Algorithm::kEwzf:
      out.affinity = affinity_ewzf(x, &out.diagnostics);
      break;
    case Algorithm::kEwzfOo:
      out.affinity = affinity_ewzf_oo(x, &out.diagnostics);
      break;
    case Algorithm::kEwzfOoLasso:
      out.affinity = affinity_ewzf_oo_lasso(x, opts.alpha, &out.diagnostics);
      break;
    case Algorithm::kTsc: {
      const int q = opts.tsc_q > 0
                        ? opts.tsc_q
                        : default_tsc_q(static_cast<int>(x.cols()) / std::max(1, opts.clusters));
      out.affinity = affinity_tsc(x, q, &out.diagnostics);
      break;
    }
  }
  SpectralOptions so;
  so.seed = opts.seed;
  out.labels = spectral_cluster(out.affinity, opts.clusters, so);
  if (!out.diagnostics.zero_columns.empty()) {
    CounterRng rng = CounterRng(opts.seed).split(0x7a65726fULL);
    for (Index z : out.diagnostics.zero_columns) {
      out.labels[static_cast<std::size_t>(z)] =
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(opts.clusters)));
    }
  }
  return out;
}

}  // namespace ssc
