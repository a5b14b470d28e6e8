#include "ssc/geomcert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "ssc/io.hpp"

namespace ssc {

double CertificateReport::max_lhs() const {
  double worst = 0.0;
  for (const auto& e : entries) {
    worst = std::max(worst, e.flagged ? std::numeric_limits<double>::infinity() : e.lhs);
  }
  return worst;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Calls fn(indices) for every size-m subset of [0, k) in lexicographic order.
template <typename Fn>
void for_each_subset(Index k, Index m, Fn&& fn) {
  if (m > k || m <= 0) return;
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  while (true) {
    fn(idx);
    Index pos = m - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == k - m + pos) --pos;
    if (pos < 0) return;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index t = pos + 1; t < m; ++t)
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
}

// Exact max-norm vertex of {lambda : |g_j^T lambda| <= 1}; G must span R^m.
double polar_vertex_max_norm(const Matrix& g) {
  const Index m = g.rows();
  const Index k = g.cols();
  const Index patterns = Index{1} << (m - 1);
  Matrix signs(m, patterns);
  for (Index p = 0; p < patterns; ++p) {
    signs(0, p) = 1.0;
    for (Index r = 1; r < m; ++r) signs(r, p) = ((p >> (r - 1)) & 1) ? -1.0 : 1.0;
  }
  const double scale = g.cwiseAbs().maxCoeff();
  double best = 0.0;
  Matrix sub(m, m);
  for_each_subset(k, m, [&](const std::vector<Index>& idx) {
    for (Index c = 0; c < m; ++c) sub.col(c) = g.col(idx[static_cast<std::size_t>(c)]);
    Eigen::FullPivLU<Matrix> lu(sub.transpose());
    lu.setThreshold(1e-10);
    if (lu.rank() < m) return;
    const Matrix lambdas = lu.solve(signs);
    const Matrix values = g.transpose() * lambdas;
    for (Index p = 0; p < patterns; ++p) {
      if (values.col(p).cwiseAbs().maxCoeff() <= 1.0 + 1e-9 * std::max(1.0, scale)) {
        best = std::max(best, lambdas.col(p).norm());
      }
    }
  });
  return best;
}

Index rank_of(const Matrix& g, double rel_tol) {
  if (g.size() == 0 || g.cwiseAbs().maxCoeff() == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(g);
  qr.setThreshold(rel_tol);
  return qr.rank();
}

}  // namespace

RadiusEstimate circumradius_polar(const Polytope& poly, const RadiusOptions& opts) {
  const Matrix& g = poly.generators;
  if (g.cols() < 1) throw std::invalid_argument("polytope needs at least one generator");
  if (!g.allFinite()) throw std::invalid_argument("polytope generators must be finite");
  const Index m = g.rows();
  RadiusEstimate est;
  est.span_dim = rank_of(g, opts.rank_tol);
  if (est.span_dim < m) {
    est.unbounded = true;
    est.span_deficient = true;
    est.lower = est.upper = kInf;
    return est;
  }
  if (m <= opts.exact_max_dim && g.cols() <= opts.exact_max_generators) {
    est.lower = est.upper = polar_vertex_max_norm(g);
    est.exact = true;
    return est;
  }

  // Sampling mode.
  CounterRng rng(opts.seed);
  struct Found {
    double norm;
    std::vector<Index> active;
  };
  std::vector<Found> found;
  BasisPursuitOptions bp;
  for (int t = 0; t < opts.sample_directions; ++t) {
    Vector u(m);
    for (Index r = 0; r < m; ++r) u(r) = rng.normal();
    const DualDirection dir = dual_direction(u, g, bp);
    if (dir.lambda.size() != m || dir.unbounded()) continue;
    const Vector vals = g.transpose() * dir.lambda;
    const double worst = vals.cwiseAbs().maxCoeff();
    const Vector lambda = dir.lambda / std::max(1.0, worst);
    Found f{lambda.norm(), {}};
    for (Index j = 0; j < g.cols(); ++j)
      if (std::abs(vals(j)) >= (1.0 - 1e-6) * worst) f.active.push_back(j);
    est.lower = std::max(est.lower, f.norm);
    found.push_back(std::move(f));
  }

  est.upper = kInf;
  if (m <= opts.exact_max_dim) {
    std::sort(found.begin(), found.end(),
              [](const Found& a, const Found& b) { return a.norm > b.norm; });
    std::vector<Index> subset;
    auto contains = [&](Index j) {
      return std::find(subset.begin(), subset.end(), j) != subset.end();
    };
    for (const auto& f : found) {
      std::size_t extra = 0;
      for (Index j : f.active) extra += contains(j) ? 0 : 1;
      if (subset.size() + extra > static_cast<std::size_t>(opts.exact_max_generators)) continue;
      for (Index j : f.active)
        if (!contains(j)) subset.push_back(j);
    }
    // Top up to a spanning set with the longest remaining generators.
    std::vector<Index> by_length(static_cast<std::size_t>(g.cols()));
    std::iota(by_length.begin(), by_length.end(), Index{0});
    const Vector lengths = g.colwise().norm();
    std::stable_sort(by_length.begin(), by_length.end(),
                     [&](Index a, Index b) { return lengths(a) > lengths(b); });
    auto subset_matrix = [&]() {
      Matrix s(m, static_cast<Index>(subset.size()));
      for (std::size_t c = 0; c < subset.size(); ++c) s.col(static_cast<Index>(c)) = g.col(subset[c]);
      return s;
    };
    for (Index j : by_length) {
      if (rank_of(subset_matrix(), opts.rank_tol) == m) break;
      if (contains(j)) continue;
      subset.push_back(j);
      if (rank_of(subset_matrix(), opts.rank_tol) < static_cast<Index>(subset.size()) &&
          subset.size() > static_cast<std::size_t>(m)) {
        subset.pop_back();
      }
    }
    const Matrix s = subset_matrix();
    if (static_cast<Index>(subset.size()) <= opts.exact_max_generators &&
        rank_of(s, opts.rank_tol) == m) {
      est.upper = std::max(est.lower, polar_vertex_max_norm(s));
    }
  }
  return est;
}

RadiusEstimate inradius(const Polytope& poly, const RadiusOptions& opts) {
  const RadiusEstimate polar = circumradius_polar(poly, opts);
  RadiusEstimate est = polar;
  if (polar.unbounded) {
    est.lower = est.upper = 0.0;
    est.exact = true;
    est.unbounded = false;
    est.span_deficient = true;
    return est;
  }
  est.lower = polar.upper == kInf ? 0.0 : 1.0 / polar.upper;
  est.upper = polar.lower > 0.0 ? 1.0 / polar.lower : kInf;
  return est;
}

RadiusEstimate inradius_in_span(const Polytope& poly, const RadiusOptions& opts) {
  const Matrix basis = range_basis(poly.generators, opts.rank_tol);
  if (basis.cols() == 0) {
    RadiusEstimate est;
    est.exact = true;
    est.span_deficient = true;
    return est;
  }
  RadiusEstimate est = inradius(Polytope{basis.transpose() * poly.generators}, opts);
  est.span_deficient = basis.cols() < poly.generators.rows();
  est.span_dim = basis.cols();
  return est;
}

namespace {

// U^(k) a_j^(k): the noiseless point.
Vector true_point(const UoSModel& model, int k, int j) {
  return model.bases[static_cast<std::size_t>(k)] *
         model.coeffs[static_cast<std::size_t>(k)].col(j);
}

Vector zero_outside(const Vector& v, const std::vector<int>& omega) {
  Vector out = Vector::Zero(v.size());
  for (int r : omega) out(r) = v(r);
  return out;
}

Vector keep_rows(const Vector& v, const std::vector<int>& omega) {
  Vector out(static_cast<Index>(omega.size()));
  for (std::size_t t = 0; t < omega.size(); ++t) out(static_cast<Index>(t)) = v(omega[t]);
  return out;
}

void check_indices(const UoSModel& model, const ObservedMatrix& x, int ell, int i) {
  if (ell < 0 || ell >= model.subspace_count()) throw std::out_of_range("subspace index");
  if (i < 0 || i >= model.n_per[static_cast<std::size_t>(ell)]) {
    throw std::out_of_range("point index");
  }
  if (x.cols() != model.total_points() || x.rows() != model.n) {
    throw std::invalid_argument("observations do not match the model");
  }
}

// Dual direction in span(dict), lhs values against the competitors, and
// the span-restricted inradius. `competitor(k, j)` yields the mapped vector.
template <typename CompetitorFn>
CertificateReport assemble_report(const UoSModel& model, int ell, int i, const Vector& target,
                                  const Matrix& dict, CompetitorFn&& competitor,
                                  const CertifyOptions& opts) {
  CertificateReport rep;
  rep.ell = ell;
  rep.i = i;
  const Matrix basis = range_basis(dict, opts.radius.rank_tol);
  const Matrix reduced = basis.transpose() * dict;
  const Vector reduced_target = basis.transpose() * target;

  if (basis.cols() == 0) {
    rep.lambda_status = SolveStatus::kUnbounded;
    rep.notes.push_back("in-subspace dictionary is zero");
  } else if ((target - basis * reduced_target).norm() > 1e-8 * std::max(1.0, target.norm())) {
    rep.lambda_status = SolveStatus::kUnbounded;
    rep.notes.push_back("point is not representable by its own subspace's observations");
  } else {
    const DualDirection dir = dual_direction(reduced_target, reduced);
    rep.lambda_status = dir.status;
    if (dir.ok()) {
      rep.lambda = basis * dir.lambda;
      const Vector vals = reduced.transpose() * dir.lambda;
      std::vector<Index> active;
      for (Index j = 0; j < vals.size(); ++j)
        if (std::abs(vals(j)) >= 1.0 - 1e-7) active.push_back(j);
      Matrix act(reduced.rows(), static_cast<Index>(active.size()));
      for (std::size_t c = 0; c < active.size(); ++c) act.col(static_cast<Index>(c)) = reduced.col(active[c]);
      rep.lambda_unique = rank_of(act, 1e-9) == reduced.rows();
      if (!rep.lambda_unique) rep.notes.push_back("dual optimum is not unique; returned optimizer used");
    }
  }
  if (basis.cols() > 0) {
    rep.inradius = inradius(Polytope{reduced}, opts.radius);
    rep.inradius.span_deficient = basis.cols() < dict.rows();
    rep.inradius.span_dim = basis.cols();
  } else {
    rep.inradius.exact = true;
    rep.inradius.span_deficient = true;
  }

  const double lambda_norm = rep.lambda.size() > 0 ? rep.lambda.norm() : 0.0;
  for (int k = 0; k < model.subspace_count(); ++k) {
    if (k == ell) continue;
    for (int j = 0; j < model.n_per[static_cast<std::size_t>(k)]; ++j) {
      CompetitorEntry e;
      e.k = k;
      e.j = j;
      if (lambda_norm > 0.0) {
        e.lhs = std::abs(rep.lambda.dot(competitor(k, j))) / lambda_norm;
      } else {
        e.flagged = true;
        e.lhs = kInf;
      }
      rep.entries.push_back(e);
    }
  }
  rep.margin = rep.inradius.lower - rep.max_lhs();
  rep.holds = rep.lambda_status == SolveStatus::kOptimal && lambda_norm > 0.0 && rep.margin > 0.0;
  return rep;
}

enum class Projection { kOverlap, kNone };

CertificateReport check_general(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                                Projection proj, const CertifyOptions& opts) {
  check_indices(model, x, ell, i);
  const Index col = model.column_of(ell, i);
  const std::vector<int>& omega_i = x.omega(col);
  const int d = model.dims[static_cast<std::size_t>(ell)];
  if (static_cast<int>(omega_i.size()) < d) {
    throw std::invalid_argument("certificate requires |Omega_i| >= d");
  }
  const TruncatedBasisSvd tb = truncated_basis_svd(model, omega_i, ell);
  const Matrix qt = tb.q.transpose();

  auto mapped = [&](int k, int j) -> Vector {
    const Index cj = model.column_of(k, j);
    Vector v = zero_outside(true_point(model, k, j), x.omega(cj));
    if (proj == Projection::kOverlap) v = zero_outside(v, omega_i);
    return qt * v;
  };

  const Vector target = tb.sigma * tb.r.transpose() *
                        model.coeffs[static_cast<std::size_t>(ell)].col(i);
  const int n_ell = model.n_per[static_cast<std::size_t>(ell)];
  Matrix dict(model.n, n_ell - 1);
  for (int j = 0, c = 0; j < n_ell; ++j) {
    if (j == i) continue;
    dict.col(c++) = mapped(ell, j);
  }
  return assemble_report(model, ell, i, target, dict, mapped, opts);
}

}  // namespace

CertificateReport check_thm_oo(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                               const CertifyOptions& opts) {
  return check_general(model, x, ell, i, Projection::kOverlap, opts);
}

CertificateReport check_thm_ewzf(const UoSModel& model, const ObservedMatrix& x, int ell,
                                 int i, const CertifyOptions& opts) {
  return check_general(model, x, ell, i, Projection::kNone, opts);
}

CertificateReport check_thm_same_location(const UoSModel& model, const ObservedMatrix& x,
                                          int ell, int i, const CertifyOptions& opts) {
  check_indices(model, x, ell, i);
  if (!x.same_location()) {
    throw std::invalid_argument("same-location condition needs a common observation set");
  }
  const std::vector<int>& omega = x.omega(0);
  const int d = model.dims[static_cast<std::size_t>(ell)];
  if (static_cast<int>(omega.size()) < d) {
    throw std::invalid_argument("certificate requires |Omega| >= d");
  }
  const Matrix v_ell = restrict_rows_zero(model.bases[static_cast<std::size_t>(ell)], omega);
  const Matrix v_ell_pinv = pinv(v_ell);

  const Matrix& coeffs = model.coeffs[static_cast<std::size_t>(ell)];
  const int n_ell = model.n_per[static_cast<std::size_t>(ell)];
  Matrix dict(coeffs.rows(), n_ell - 1);
  for (int j = 0, c = 0; j < n_ell; ++j) {
    if (j == i) continue;
    dict.col(c++) = coeffs.col(j);
  }
  auto mapped = [&](int k, int j) -> Vector {
    const Matrix v_k = restrict_rows_zero(model.bases[static_cast<std::size_t>(k)], omega);
    return v_ell_pinv * (v_k * model.coeffs[static_cast<std::size_t>(k)].col(j));
  };
  return assemble_report(model, ell, i, coeffs.col(i), dict, mapped, opts);
}

BetaDiagnostic same_location_beta_diagnostic(const UoSModel& model, const ObservedMatrix& x,
                                             int ell, int i, const CertifyOptions& opts) {
  const CertificateReport rep = check_thm_same_location(model, x, ell, i, opts);
  BetaDiagnostic out;
  if (rep.lambda.size() == 0) return out;
  const std::vector<int>& omega = x.omega(0);
  const Matrix v = restrict_rows_zero(model.bases[static_cast<std::size_t>(ell)], omega);
  const Vector lifted = pinv(Matrix(v.transpose())) * rep.lambda;
  const Matrix& coeffs = model.coeffs[static_cast<std::size_t>(ell)];
  Matrix dict(coeffs.rows(), coeffs.cols() - 1);
  for (Index j = 0, c = 0; j < coeffs.cols(); ++j)
    if (j != i) dict.col(c++) = coeffs.col(j);
  const RadiusEstimate r_coeff = inradius_in_span(Polytope{dict}, opts.radius);
  const RadiusEstimate r_ambient = inradius_in_span(Polytope{v * dict}, opts.radius);
  out.coefficient_side = (v.transpose() * lifted).norm() * r_coeff.lower;
  out.ambient_side = lifted.norm() * r_ambient.lower;
  out.ratio = out.ambient_side > 0 ? out.coefficient_side / out.ambient_side : kInf;
  return out;
}

namespace {

struct RestrictedSetup {
  Matrix q;  // |Omega_i| x d, thin left singular vectors
  std::vector<int> omega;
};

RestrictedSetup restricted_basis(const UoSModel& model, const ObservedMatrix& x, int ell,
                                 int i) {
  check_indices(model, x, ell, i);
  RestrictedSetup s;
  s.omega = x.omega(model.column_of(ell, i));
  const Matrix vr = select_rows(model.bases[static_cast<std::size_t>(ell)], s.omega);
  const auto f = svd(vr);
  const Index d = vr.cols();
  if (f.s.size() < d || f.s(d - 1) <= 1e-10 * std::max(1.0, f.s(0))) {
    throw AssumptionViolated("restricted basis Q_i is rank deficient");
  }
  s.q = f.u.leftCols(d);
  return s;
}

// V_{Omega_i, j}^(k): basis of k zero-filled on Omega_j, then kept on Omega_i.
Matrix cross_block(const UoSModel& model, const ObservedMatrix& x, int k, int j,
                   const std::vector<int>& omega_i) {
  const Matrix zf = restrict_rows_zero(model.bases[static_cast<std::size_t>(k)],
                                       x.omega(model.column_of(k, j)));
  return select_rows(zf, omega_i);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return svd(m).s(0);
}

// In-subspace observations restricted to Omega_i, excluding point i.
Matrix restricted_peers(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                        const std::vector<int>& omega_i) {
  const int n_ell = model.n_per[static_cast<std::size_t>(ell)];
  Matrix peers(static_cast<Index>(omega_i.size()), n_ell - 1);
  for (int j = 0, c = 0; j < n_ell; ++j) {
    if (j == i) continue;
    const Index cj = model.column_of(ell, j);
    peers.col(c++) = keep_rows(zero_outside(true_point(model, ell, j), x.omega(cj)), omega_i);
  }
  return peers;
}

}  // namespace

Case2Result check_case2_worst(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                              const CertifyOptions& opts) {
  const RestrictedSetup s = restricted_basis(model, x, ell, i);
  const int d = model.dims[static_cast<std::size_t>(ell)];
  if (static_cast<int>(s.omega.size()) != d) {
    throw std::invalid_argument("check_case2_worst requires |Omega_i| = d");
  }
  Case2Result out;
  for (int k = 0; k < model.subspace_count(); ++k) {
    if (k == ell) continue;
    for (int j = 0; j < model.n_per[static_cast<std::size_t>(k)]; ++j) {
      const double a_norm = model.coeffs[static_cast<std::size_t>(k)].col(j).norm();
      out.bound_lhs = std::max(
          out.bound_lhs,
          spectral_norm(s.q.transpose() * cross_block(model, x, k, j, s.omega)) * a_norm);
    }
  }
  const Matrix dict = s.q.transpose() * restricted_peers(model, x, ell, i, s.omega);
  out.inradius = inradius_in_span(Polytope{dict}, opts.radius);
  out.holds = out.bound_lhs < out.inradius.lower;
  return out;
}

Case3Result check_case3_worst(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                              double alpha, int grid_points, const CertifyOptions& opts) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (grid_points < 2) throw std::invalid_argument("alpha grid needs at least two points");
  const RestrictedSetup s = restricted_basis(model, x, ell, i);
  const Index rows = static_cast<Index>(s.omega.size());
  const Matrix complement = Matrix::Identity(rows, rows) - s.q * s.q.transpose();
  Case3Result out;
  out.alpha = alpha;
  for (int k = 0; k < model.subspace_count(); ++k) {
    if (k == ell) continue;
    for (int j = 0; j < model.n_per[static_cast<std::size_t>(k)]; ++j) {
      const double a_norm = model.coeffs[static_cast<std::size_t>(k)].col(j).norm();
      const Matrix block = cross_block(model, x, k, j, s.omega);
      out.coherence_term =
          std::max(out.coherence_term, spectral_norm(s.q.transpose() * block) * a_norm);
      out.residual_term =
          std::max(out.residual_term, spectral_norm(complement * block) * a_norm);
    }
  }
  out.inradius = inradius_in_span(Polytope{restricted_peers(model, x, ell, i, s.omega)},
                                  opts.radius);
  const double r = out.inradius.lower;
  auto holds_at = [&](double a) {
    return out.coherence_term < a * r && out.residual_term <= (1.0 - a) * r;
  };
  out.holds = holds_at(alpha);
  out.best_margin = -kInf;
  for (int g = 0; g < grid_points; ++g) {
    const double a = static_cast<double>(g) / static_cast<double>(grid_points - 1);
    const double margin = std::min(a * r - out.coherence_term, (1.0 - a) * r - out.residual_term);
    if (margin > out.best_margin) {
      out.best_margin = margin;
      out.best_alpha = a;
    }
    out.holds_for_some_alpha = out.holds_for_some_alpha || holds_at(a);
  }
  return out;
}

CoherenceValue expected_coherence(const UoSModel& model, const std::vector<int>& omega,
                                  int ell, int k) {
  const Matrix v_ell = restrict_rows_zero(model.bases.at(static_cast<std::size_t>(ell)), omega);
  const Matrix v_k = restrict_rows_zero(model.bases.at(static_cast<std::size_t>(k)), omega);
  CoherenceValue out;
  const auto f = svd(v_ell);
  const Index d_ell = v_ell.cols();
  out.rank_deficient = f.s(d_ell - 1) <= default_rank_tol(v_ell.rows(), v_ell.cols()) * f.s(0);
  const double d = static_cast<double>(model.max_dim());
  out.value = (pinv(v_ell) * v_k).norm() / d;
  return out;
}

void write_certificate_csv(const std::string& path,
                           const std::vector<CertificateReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "ell,i,k,j,lhs,inradius_lower,inradius_upper,exact,holds,margin\n";
  for (const auto& rep : reports) {
    for (const auto& e : rep.entries) {
      out << rep.ell << ',' << rep.i << ',' << e.k << ',' << e.j << ','
          << io::format_double(e.lhs) << ',' << io::format_double(rep.inradius.lower) << ','
          << io::format_double(rep.inradius.upper) << ',' << (rep.inradius.exact ? 1 : 0)
          << ',' << (rep.holds ? 1 : 0) << ',' << io::format_double(rep.margin) << '\n';
    }
  }
}

}  // namespace ssc
