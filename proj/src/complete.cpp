#include "ssc/complete.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ssc {

namespace {

// Soft-thresholds the singular values of y by tau. Works on the smaller
// Gram matrix, which is exact up to rounding for the thin side.
Matrix shrink(const Matrix& y, double tau, Index* rank) {
  const bool wide = y.rows() <= y.cols();
  const Matrix gram = wide ? Matrix(y * y.transpose()) : Matrix(y.transpose() * y);
  const auto eig = sym_eig(Matrix(0.5 * (gram + gram.transpose())));
  const Index m = gram.rows();
  Vector scale = Vector::Zero(m);
  *rank = 0;
  for (Index t = 0; t < m; ++t) {
    const double s = std::sqrt(std::max(0.0, eig.values(t)));
    if (s > tau) {
      scale(t) = (s - tau) / s;
      ++*rank;
    }
  }
  if (*rank == 0) return Matrix::Zero(y.rows(), y.cols());
  // Only columns with a nonzero weight contribute.
  std::vector<Index> keep;
  for (Index t = 0; t < m; ++t)
    if (scale(t) > 0.0) keep.push_back(t);
  Matrix v(m, static_cast<Index>(keep.size()));
  Vector w(static_cast<Index>(keep.size()));
  for (std::size_t t = 0; t < keep.size(); ++t) {
    v.col(static_cast<Index>(t)) = eig.vectors.col(keep[t]);
    w(static_cast<Index>(t)) = scale(keep[t]);
  }
  if (wide) return v * w.asDiagonal() * (v.transpose() * y);
  return (y * v) * w.asDiagonal() * v.transpose();
}

Matrix masked(const Matrix& m, const Mask& mask) {
  return mask.select(m, Matrix::Zero(m.rows(), m.cols()));
}

}  // namespace

SvtResult svt_complete(const Matrix& values, const Mask& mask, const SvtOptions& opts) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw std::invalid_argument("svt_complete: mask shape mismatch");
  }
  const Index observed = mask.count();
  if (observed == 0) throw std::invalid_argument("svt_complete: nothing observed");
  SvtResult res;
  if (observed == mask.size()) {
    res.completed = values;
    res.converged = true;
    return res;
  }
  const Matrix target = masked(values, mask);
  const double target_norm = target.norm();
  if (target_norm == 0.0) {
    res.completed = Matrix::Zero(values.rows(), values.cols());
    res.converged = true;
    return res;
  }
  const double frac = static_cast<double>(observed) / static_cast<double>(mask.size());
  const double tau = opts.tau > 0.0 ? opts.tau
                                    : 5.0 * std::sqrt(static_cast<double>(values.size()));
  const double delta = opts.delta > 0.0 ? opts.delta : 1.2 / frac;

  // Kicking: start from the first multiple of delta * P(M) whose top
  // singular value exceeds tau.
  const double spec = std::sqrt(std::max(0.0, sym_eig(Matrix(target * target.transpose())).values.maxCoeff()));
  const double k0 = std::ceil(tau / (delta * spec));
  Matrix y = k0 * delta * target;

  Matrix x;
  Index rank = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    x = shrink(y, tau, &rank);
    const Matrix resid = target - masked(x, mask);
    const double rel = resid.norm() / target_norm;
    res.residual_history.push_back(rel);
    res.iterations = it;
    res.relative_residual = rel;
    if (!std::isfinite(rel) || rel > 1e3 * res.residual_history.front()) {
      throw DivergedError("svt_complete: residual diverged");
    }
    if (rel <= opts.conv_tol) {
      res.converged = true;
      break;
    }
    y += delta * resid;
  }
  res.completed = std::move(x);
  return res;
}

CompletionResult complete_by_cluster(const ObservedMatrix& x, const std::vector<int>& labels,
                                     const SvtOptions& opts) {
  if (static_cast<Index>(labels.size()) != x.cols()) {
    throw std::invalid_argument("complete_by_cluster: one label per column required");
  }
  std::map<int, std::vector<Index>> groups;
  for (std::size_t c = 0; c < labels.size(); ++c) groups[labels[c]].push_back(static_cast<Index>(c));

  CompletionResult out;
  out.completed = x.values;
  for (const auto& [label, cols] : groups) {
    const Index width = static_cast<Index>(cols.size());
    Matrix sub(x.rows(), width);
    Mask sub_mask(x.rows(), width);
    for (Index t = 0; t < width; ++t) {
      sub.col(t) = x.values.col(cols[static_cast<std::size_t>(t)]);
      sub_mask.col(t) = x.mask.col(cols[static_cast<std::size_t>(t)]);
    }
    out.cluster_ids.push_back(label);
    bool diverged = false;
    SvtResult res;
    try {
      res = svt_complete(sub, sub_mask, opts);
    } catch (const DivergedError&) {
      diverged = true;
    }
    out.diverged.push_back(diverged);
    out.converged.push_back(!diverged && res.converged);
    out.iterations.push_back(res.iterations);
    if (diverged) {
      out.per_cluster_rank.push_back(0);
      continue;
    }
    const bool nonzero = res.completed.size() > 0 && res.completed.cwiseAbs().maxCoeff() > 0.0;
    out.per_cluster_rank.push_back(nonzero ? identify_subspace(res.completed).rank : 0);
    for (Index t = 0; t < width; ++t)
      out.completed.col(cols[static_cast<std::size_t>(t)]) = res.completed.col(t);
  }
  return out;
}

SubspaceEstimate identify_subspace(const Matrix& cluster, double d_tol) {
  if (cluster.size() == 0 || cluster.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("identify_subspace: zero matrix");
  }
  const auto f = svd_left(cluster);
  // The leading direction is always kept, so d_tol = 1 yields one vector.
  Index rank = 1;
  while (rank < f.s.size() && f.s(rank) > d_tol * f.s(0)) ++rank;
  SubspaceEstimate est;
  est.rank = rank;
  est.basis = f.u.leftCols(rank);
  return est;
}

}  // namespace ssc
