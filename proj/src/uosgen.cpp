#include "ssc/uosgen.hpp"

#include <cmath>
#include <stdexcept>

namespace ssc {

int UoSModel::max_dim() const {
  int d = 0;
  for (int v : dims) d = std::max(d, v);
  return d;
}

Index UoSModel::column_of(int ell, int i) const {
  Index offset = 0;
  for (int k = 0; k < ell; ++k) offset += n_per[static_cast<std::size_t>(k)];
  return offset + i;
}

bool ObservedMatrix::same_location() const {
  for (Index c = 1; c < cols(); ++c) {
    if (omegas[static_cast<std::size_t>(c)] != omegas[0]) return false;
  }
  return true;
}

ObservedMatrix ObservedMatrix::from_mask(const Matrix& values, const Mask& mask) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw std::invalid_argument("mask shape does not match data");
  }
  ObservedMatrix out;
  out.values = values;
  out.mask = mask;
  out.omegas.resize(static_cast<std::size_t>(values.cols()));
  for (Index c = 0; c < values.cols(); ++c) {
    auto& om = out.omegas[static_cast<std::size_t>(c)];
    for (Index r = 0; r < values.rows(); ++r) {
      if (mask(r, c)) {
        om.push_back(static_cast<int>(r));
      } else {
        out.values(r, c) = 0.0;
      }
    }
    if (om.empty()) throw std::invalid_argument("column with no observed entries");
  }
  return out;
}

int observed_count(double p, int n) {
  // The small offset absorbs representation error in grid values such as
  // 0.35 * 50, which is 17.4999... in binary but 17.5 by intent.
  const double exact = p * static_cast<double>(n);
  return static_cast<int>(std::round(exact + 1e-9 * std::max(1.0, exact)));
}

namespace {

Vector unit_sphere_point(int d, CounterRng& rng) {
  Vector v(d);
  do {
    for (int k = 0; k < d; ++k) v(k) = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

}  // namespace

UoSModel generate_model(int n, const std::vector<int>& dims,
                        const std::vector<int>& n_per, CoeffMode mode,
                        std::uint64_t seed) {
  if (dims.size() != n_per.size() || dims.empty()) {
    throw std::invalid_argument("dims and per-cluster counts must match");
  }
  UoSModel model;
  model.n = n;
  model.dims = dims;
  model.n_per = n_per;
  int total = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (dims[l] < 1 || dims[l] > n) {
      throw std::invalid_argument("subspace dimension must lie in [1, n]");
    }
    if (n_per[l] < 1) throw std::invalid_argument("each subspace needs a point");
    total += n_per[l];
  }
  model.data.resize(n, total);
  CounterRng root(seed);
  Index col = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    CounterRng rng = root.split(l);
    const int d = dims[l];
    const int count = n_per[l];
    Matrix gauss(n, d);
    for (Index c = 0; c < d; ++c)
      for (Index r = 0; r < n; ++r) gauss(r, c) = rng.normal();

    Matrix basis;
    Matrix coeffs(d, count);
    Matrix block;
    if (mode == CoeffMode::kSphere) {
      basis = qr_thin(gauss).first;
      for (int j = 0; j < count; ++j) coeffs.col(j) = unit_sphere_point(d, rng);
      block = basis * coeffs;
    } else {
      Matrix right(d, count);
      for (Index c = 0; c < count; ++c)
        for (Index r = 0; r < d; ++r) right(r, c) = rng.normal();
      block = gauss * right;
      // Canonical orthonormal basis of the block's span; the raw product
      // stays the data matrix.
      const auto f = svd_left(block);
      basis = f.u.leftCols(d);
      coeffs = basis.transpose() * block;
    }
    model.bases.push_back(basis);
    model.coeffs.push_back(coeffs);
    model.data.middleCols(col, count) = block;
    for (int j = 0; j < count; ++j) model.labels.push_back(static_cast<int>(l));
    col += count;
  }
  return model;
}

ObservedMatrix sample(const Matrix& data, const SamplingSpec& spec) {
  const int n = static_cast<int>(data.rows());
  if (!(spec.p > 0.0 && spec.p <= 1.0)) {
    throw std::invalid_argument("sampling ratio must lie in (0, 1]");
  }
  const int m = observed_count(spec.p, n);
  if (m < 1) throw std::invalid_argument("round(p * n) must be at least 1");
  Mask mask = Mask::Constant(data.rows(), data.cols(), false);
  CounterRng rng(spec.seed);
  if (spec.pattern == SamplingPattern::kSameLocation) {
    std::vector<int> rows;
    if (spec.common_random_subset) {
      rows = rng.subset(n, m);
    } else {
      for (int r = 0; r < m; ++r) rows.push_back(r);
    }
    for (Index c = 0; c < data.cols(); ++c)
      for (int r : rows) mask(r, c) = true;
  } else {
    for (Index c = 0; c < data.cols(); ++c) {
      CounterRng col_rng = rng.split(static_cast<std::uint64_t>(c));
      for (int r : col_rng.subset(n, m)) mask(r, c) = true;
    }
  }
  return ObservedMatrix::from_mask(data, mask);
}

ObservedMatrix sample(const UoSModel& model, const SamplingSpec& spec) {
  return sample(model.data, spec);
}

ObservedMatrix apply_mask(const Matrix& data, const Mask& mask) {
  return ObservedMatrix::from_mask(data, mask);
}

ObservedMatrix normalize_columns(const ObservedMatrix& x) {
  ObservedMatrix out = x;
  for (Index c = 0; c < out.cols(); ++c) {
    const double norm = out.values.col(c).norm();
    if (norm > 0.0) out.values.col(c) /= norm;
  }
  return out;
}

Matrix restrict_rows_zero(const Matrix& m, const std::vector<int>& omega) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (int r : omega) out.row(r) = m.row(r);
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<int>& omega) {
  Matrix out(static_cast<Index>(omega.size()), m.cols());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    out.row(static_cast<Index>(k)) = m.row(omega[k]);
  }
  return out;
}

TruncatedBasisSvd truncated_basis_svd(const UoSModel& model,
                                      const std::vector<int>& omega, int ell) {
  if (omega.empty()) throw std::invalid_argument("empty observation set");
  const Matrix& basis = model.bases.at(static_cast<std::size_t>(ell));
  const Matrix v = restrict_rows_zero(basis, omega);
  const auto f = svd(v);
  TruncatedBasisSvd out;
  const Index n = v.rows();
  const Index d = v.cols();
  out.q = f.u;
  out.sigma = Matrix::Zero(n, d);
  out.singular_values = f.s;
  for (Index k = 0; k < f.s.size(); ++k) out.sigma(k, k) = f.s(k);
  out.r = f.vt.transpose();
  return out;
}

}  // namespace ssc
