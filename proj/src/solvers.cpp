#include "ssc/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ssc {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kNotConverged: return "not_converged";
  }
  return "unknown";
}

double sign_condition_residual(const Matrix& a, const SparseSolution& sol);

namespace {

// Largest step in (0, 1] keeping v + step * dv >= 0.
template <typename V>
typename V::Scalar step_to_boundary(const V& v, const V& dv) {
  typename V::Scalar step = 1;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  return step;
}

template <typename Scalar>
struct IpmStateT {
  using V = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  V xp, xm, y, zp, zm;
};
using IpmState = IpmStateT<double>;

template <typename Scalar>
struct IpmOutcome {
  IpmStateT<Scalar> s;
  int iterations = 0;
  bool converged = false;
};

// Mehrotra predictor-corrector on
//   min 1^T (xp + xm)  s.t.  A (xp - xm) = b,  xp, xm >= 0
// with A of full row rank.
template <typename Scalar>
IpmOutcome<Scalar> split_lp_ipm(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, Scalar tol,
                                int max_iter) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Index m = a.rows();
  const Index k = a.cols();
  const Scalar total = static_cast<Scalar>(2 * k);

  Matrix gram = Matrix::Zero(m, m);
  gram.template selfadjointView<Eigen::Lower>().rankUpdate(a);
  Eigen::LDLT<Matrix> gram_ldlt(gram.template selfadjointView<Eigen::Lower>());

  IpmStateT<Scalar> s;
  {
    const Vector u = gram_ldlt.solve(b) / 2.0;
    const Vector at_u = a.transpose() * u;
    s.xp = at_u;
    s.xm = -at_u;
    s.y = Vector::Zero(m);
    s.zp = Vector::Ones(k);
    s.zm = Vector::Ones(k);
    const Scalar min_x = std::min(s.xp.minCoeff(), s.xm.minCoeff());
    const Scalar shift = std::max<Scalar>(-1.5 * min_x, 0);
    s.xp.array() += shift;
    s.xm.array() += shift;
    const Scalar xz = s.xp.dot(s.zp) + s.xm.dot(s.zm);
    const Scalar sum_z = s.zp.sum() + s.zm.sum();
    const Scalar sum_x = s.xp.sum() + s.xm.sum();
    const Scalar dx = sum_z > 0 ? 0.5 * xz / sum_z : 1.0;
    const Scalar dz = sum_x > 0 ? 0.5 * xz / sum_x : 1.0;
    s.xp.array() += dx;
    s.xm.array() += dx;
    s.zp.array() += dz;
    s.zm.array() += dz;
    if (!(s.xp.minCoeff() > 0.0 && s.xm.minCoeff() > 0.0)) {
      s.xp.setOnes(k);
      s.xm.setOnes(k);
    }
  }

  const Scalar b_norm = b.norm();
  IpmOutcome<Scalar> out;
  out.s = s;
  Scalar best_merit = std::numeric_limits<Scalar>::infinity();
  int stalled = 0;
  Matrix scaled(m, k);
  Matrix normal(m, m);
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter;
    const Vector aty = a.transpose() * s.y;
    const Vector rp = b - a * (s.xp - s.xm);
    const Vector rdp = Vector::Ones(k) - aty - s.zp;
    const Vector rdm = Vector::Ones(k) + aty - s.zm;
    const Scalar primal = s.xp.sum() + s.xm.sum();
    const Scalar dual = b.dot(s.y);
    const Scalar mu = (s.xp.dot(s.zp) + s.xm.dot(s.zm)) / total;

    const Scalar merit = std::max<Scalar>({rp.norm() / (1.0 + b_norm),
                                   rdp.cwiseAbs().maxCoeff(), rdm.cwiseAbs().maxCoeff(),
                                   std::abs(primal - dual) / std::max<Scalar>(1, primal)});
    if (!(merit >= best_merit)) {
      best_merit = merit;
      out.s = s;
      stalled = 0;
    } else if (++stalled >= 5) {
      break;  // rounding noise dominates; keep the best iterate
    }
    if (merit <= tol) {
      out.converged = true;
      break;
    }

    const Vector dp = s.xp.cwiseQuotient(s.zp);
    const Vector dm = s.xm.cwiseQuotient(s.zm);
    const Vector weight = dp + dm;
    scaled = a * weight.cwiseSqrt().asDiagonal();
    normal.setZero();
    normal.template selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    Eigen::LLT<Matrix> llt(normal.template selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) {
      // Only regularize when the factorization breaks down: a shift sized to
      // the largest diagonal entry swamps the small-eigenvalue directions.
      normal.diagonal().array() += 1e-14 * std::max<Scalar>(1, normal.diagonal().maxCoeff());
      llt.compute(normal.template selfadjointView<Eigen::Lower>());
    }
    Eigen::LDLT<Matrix> ldlt;
    const bool use_llt = llt.info() == Eigen::Success;
    if (!use_llt) ldlt.compute(normal.template selfadjointView<Eigen::Lower>());

    auto direction = [&](const Vector& rcp, const Vector& rcm, Vector& dxp,
                         Vector& dxm, Vector& dy, Vector& dzp, Vector& dzm) {
      const Vector h = (rcp - s.xp.cwiseProduct(rdp)).cwiseQuotient(s.zp) -
                       (rcm - s.xm.cwiseProduct(rdm)).cwiseQuotient(s.zm);
      const Vector rhs = rp - a * h;
      dy = use_llt ? Vector(llt.solve(rhs)) : Vector(ldlt.solve(rhs));
      // Iterative refinement against the unregularized system.
      for (int pass = 0; pass < 2; ++pass) {
        const Vector defect = rhs - scaled * (scaled.transpose() * dy);
        dy += use_llt ? Vector(llt.solve(defect)) : Vector(ldlt.solve(defect));
      }
      const Vector atdy = a.transpose() * dy;
      dzp = rdp - atdy;
      dzm = rdm + atdy;
      dxp = (rcp - s.xp.cwiseProduct(dzp)).cwiseQuotient(s.zp);
      dxm = (rcm - s.xm.cwiseProduct(dzm)).cwiseQuotient(s.zm);
    };

    Vector dxp, dxm, dy, dzp, dzm;
    // Predictor (affine scaling).
    direction(-s.xp.cwiseProduct(s.zp), -s.xm.cwiseProduct(s.zm), dxp, dxm, dy,
              dzp, dzm);
    const Scalar ap = std::min(step_to_boundary(s.xp, dxp), step_to_boundary(s.xm, dxm));
    const Scalar ad = std::min(step_to_boundary(s.zp, dzp), step_to_boundary(s.zm, dzm));
    const Scalar mu_aff = ((s.xp + ap * dxp).dot(s.zp + ad * dzp) +
                           (s.xm + ap * dxm).dot(s.zm + ad * dzm)) /
                          total;
    const Scalar sigma = std::pow(mu_aff / mu, 3);

    // Corrector with second-order term.
    const Vector rcp = Vector::Constant(k, sigma * mu) -
                       s.xp.cwiseProduct(s.zp) - dxp.cwiseProduct(dzp);
    const Vector rcm = Vector::Constant(k, sigma * mu) -
                       s.xm.cwiseProduct(s.zm) - dxm.cwiseProduct(dzm);
    direction(rcp, rcm, dxp, dxm, dy, dzp, dzm);
    const Scalar eta = std::clamp<Scalar>(1 - 10 * mu, 0.9, 0.995);
    const Scalar sp = std::min<Scalar>(
        1, eta * std::min(step_to_boundary(s.xp, dxp), step_to_boundary(s.xm, dxm)));
    const Scalar sd = std::min<Scalar>(
        1, eta * std::min(step_to_boundary(s.zp, dzp), step_to_boundary(s.zm, dzm)));
    s.xp += sp * dxp;
    s.xm += sp * dxm;
    s.y += sd * dy;
    s.zp += sd * dzp;
    s.zm += sd * dzm;
    out.iterations = iter + 1;
    if (!std::isfinite(s.y.squaredNorm() + s.xp.squaredNorm() + s.xm.squaredNorm())) break;
  }
  return out;
}

void finalize(const Matrix& a, const Vector& b, const BasisPursuitOptions& opts,
              SparseSolution& sol) {
  sol.primal_obj = sol.c.lpNorm<1>();
  sol.dual_obj = b.dot(sol.nu);
  sol.gap = std::abs(sol.primal_obj - sol.dual_obj);
  sol.primal_residual = (a * sol.c - b).norm();
  const double atnu = sol.nu.size() > 0 && a.cols() > 0
                          ? (a.transpose() * sol.nu).cwiseAbs().maxCoeff()
                          : 0.0;
  sol.dual_violation = std::max(0.0, atnu - 1.0);
  sol.support.clear();
  const double cmax = sol.c.size() > 0 ? sol.c.cwiseAbs().maxCoeff() : 0.0;
  for (Index j = 0; j < sol.c.size(); ++j) {
    if (std::abs(sol.c(j)) > opts.support_tol * cmax && cmax > 0) {
      sol.support.push_back(j);
    }
  }
}

bool certified(const Matrix& a, const BasisPursuitOptions& opts, const Vector& b,
               const SparseSolution& sol) {
  return sol.gap <= opts.gap_tol * std::max(1.0, sol.primal_obj) &&
         sol.primal_residual <= opts.feas_tol * std::max(1.0, b.norm()) &&
         sol.dual_violation <= opts.feas_tol &&
         sign_condition_residual(a, sol) <= opts.sign_tol;
}

// Lawson-Hanson active-set solver for min ||A x - b|| subject to x >= 0.
Vector nnls(const Matrix& a, const Vector& b, int max_iter) {
  const Index n = a.cols();
  Vector x = Vector::Zero(n);
  std::vector<char> passive(static_cast<std::size_t>(n), 0);
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff() * b.norm());
  auto solve_passive = [&](Vector& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Matrix ap(a.rows(), static_cast<Index>(idx.size()));
    for (std::size_t t = 0; t < idx.size(); ++t) ap.col(static_cast<Index>(t)) = a.col(idx[t]);
    const Vector zp = ap.colPivHouseholderQr().solve(b);
    z.setZero(n);
    for (std::size_t t = 0; t < idx.size(); ++t) z(idx[t]) = zp(static_cast<Index>(t));
  };
  for (int outer = 0; outer < max_iter; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Index best = -1;
    double best_w = tol;
    for (Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = 1;
    Vector z;
    for (int inner = 0; inner < 3 * n + 3; ++inner) {
      solve_passive(z);
      double alpha = 1.0;
      bool clipped = false;
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          const double step = x(j) / (x(j) - z(j));
          if (step < alpha) alpha = step;
          clipped = true;
        }
      }
      if (!clipped) break;
      x += alpha * (z - x);
      for (Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-15) {
          passive[static_cast<std::size_t>(j)] = 0;
          x(j) = 0.0;
        }
      }
    }
    x = z;
  }
  return x;
}

// Least-squares re-solve on a candidate support plus a minimal dual
// correction that enforces A_S^T nu = sign(c_S). Entries whose sign flips
// in the re-solve are dropped and the solve repeated. Returns false if no
// certified pair comes out.
bool polish_on(const Matrix& a, const Vector& b, const BasisPursuitOptions& opts,
               std::vector<Index> supp, SparseSolution& sol) {
  const double b_scale = std::max(1.0, b.norm());
  Vector cs;
  Matrix as;
  for (int round = 0; round < 10; ++round) {
    const Index s = static_cast<Index>(supp.size());
    if (s == 0) return false;
    as.resize(a.rows(), s);
    for (Index j = 0; j < s; ++j) as.col(j) = a.col(supp[static_cast<std::size_t>(j)]);
    Eigen::ColPivHouseholderQR<Matrix> qr(as);
    qr.setThreshold(1e-10);
    if (qr.rank() < s) {
      // Keep the columns the pivoting picked first.
      std::vector<Index> kept;
      for (Index j = 0; j < qr.rank(); ++j)
        kept.push_back(supp[static_cast<std::size_t>(qr.colsPermutation().indices()(j))]);
      std::sort(kept.begin(), kept.end());
      supp = std::move(kept);
      continue;
    }
    cs = qr.solve(b);
    if ((as * cs - b).norm() > opts.feas_tol * b_scale) return false;
    std::vector<Index> kept;
    for (Index j = 0; j < s; ++j) {
      const Index col = supp[static_cast<std::size_t>(j)];
      if (cs(j) * sol.c(col) > 0.0 && std::abs(cs(j)) > 1e-13 * cs.cwiseAbs().maxCoeff()) {
        kept.push_back(col);
      }
    }
    if (kept.size() == supp.size()) break;
    supp = std::move(kept);
    cs.resize(0);
  }
  if (cs.size() != static_cast<Index>(supp.size())) return false;

  const Index s = static_cast<Index>(supp.size());
  Vector sign(s);
  for (Index j = 0; j < s; ++j) sign(j) = cs(j) > 0 ? 1.0 : -1.0;
  const Matrix gram = as.transpose() * as;
  const Vector defect = sign - as.transpose() * sol.nu;
  const Vector nu = sol.nu + as * gram.ldlt().solve(defect);

  SparseSolution candidate = sol;
  candidate.c.setZero();
  for (Index j = 0; j < s; ++j) candidate.c(supp[static_cast<std::size_t>(j)]) = cs(j);
  candidate.nu = nu;
  finalize(a, b, opts, candidate);
  if (!certified(a, opts, b, candidate)) return false;
  candidate.polished = true;
  sol = std::move(candidate);
  return true;
}

bool polish(const Matrix& a, const Vector& b, const BasisPursuitOptions& opts,
            const IpmState& st, SparseSolution& sol) {
  // Candidate 1: entries where the primal variable dominates its slack.
  std::vector<Index> basic;
  for (Index j = 0; j < sol.c.size(); ++j) {
    const bool pos = st.xp(j) >= st.xm(j);
    const double x = pos ? st.xp(j) : st.xm(j);
    const double z = pos ? st.zp(j) : st.zm(j);
    if (x > z && sol.c(j) != 0.0) basic.push_back(j);
  }
  if (polish_on(a, b, opts, basic, sol)) return true;
  // Candidate 2: crossover from the dual. Any c supported on the near-active
  // set with signs matching A^T nu is optimal, which is a nonnegative least
  // squares problem on the sign-flipped columns.
  const Vector atnu = a.transpose() * sol.nu;
  for (double slack : {1e-7, 1e-6, 1e-5, 1e-4}) {
    std::vector<Index> near;
    for (Index j = 0; j < atnu.size(); ++j)
      if (std::abs(atnu(j)) >= 1.0 - slack) near.push_back(j);
    if (near.empty()) continue;
    Matrix signed_cols(a.rows(), static_cast<Index>(near.size()));
    for (std::size_t t = 0; t < near.size(); ++t) {
      signed_cols.col(static_cast<Index>(t)) = (atnu(near[t]) > 0 ? 1.0 : -1.0) * a.col(near[t]);
    }
    const Vector w = nnls(signed_cols, b, 4 * static_cast<int>(near.size()) + 10);
    SparseSolution trial = sol;
    trial.c.setZero();
    std::vector<Index> supp;
    for (std::size_t t = 0; t < near.size(); ++t) {
      if (w(static_cast<Index>(t)) > 0.0) {
        trial.c(near[t]) = (atnu(near[t]) > 0 ? 1.0 : -1.0) * w(static_cast<Index>(t));
        supp.push_back(near[t]);
      }
    }
    if (polish_on(a, b, opts, supp, trial)) {
      sol = std::move(trial);
      return true;
    }
  }
  // Candidate 3: the thresholded support.
  if (sol.support != basic && polish_on(a, b, opts, sol.support, sol)) return true;
  // Candidate 4: the m columns the iterate ranks as most basic. Near the
  // end a basic variable can be squeezed toward zero together with its
  // slack; the ratio x/z still orders it ahead of the nonbasic ones.
  std::vector<std::pair<double, Index>> ratio;
  for (Index j = 0; j < sol.c.size(); ++j) {
    const bool pos = st.xp(j) >= st.xm(j);
    ratio.emplace_back(pos ? st.xp(j) / st.zp(j) : st.xm(j) / st.zm(j), j);
  }
  const std::size_t top = std::min<std::size_t>(ratio.size(), static_cast<std::size_t>(a.rows()));
  std::partial_sort(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(top), ratio.end(),
                    [](const auto& l, const auto& r) { return l.first > r.first; });
  std::vector<Index> ranked;
  for (std::size_t t = 0; t < top; ++t) ranked.push_back(ratio[t].second);
  std::sort(ranked.begin(), ranked.end());
  SparseSolution trial = sol;
  for (Index j : ranked) {
    if (trial.c(j) == 0.0) trial.c(j) = st.xp(j) >= st.xm(j) ? 1e-300 : -1e-300;
  }
  if (polish_on(a, b, opts, ranked, trial)) {
    sol = std::move(trial);
    return true;
  }
  return false;
}

}  // namespace

SparseSolution basis_pursuit(const Matrix& a, const Vector& b,
                             const BasisPursuitOptions& opts) {
  if (a.rows() != b.size()) throw std::invalid_argument("basis_pursuit: shape mismatch");
  SparseSolution sol;
  const Index m = a.rows();
  const Index k = a.cols();
  sol.c = Vector::Zero(k);
  sol.nu = Vector::Zero(m);
  if (b.norm() == 0.0) {
    sol.status = SolveStatus::kOptimal;
    finalize(a, b, opts, sol);
    return sol;
  }
  if (k == 0 || a.cwiseAbs().maxCoeff() == 0.0) {
    sol.status = SolveStatus::kInfeasible;
    finalize(a, b, opts, sol);
    return sol;
  }

  // Full row rank test on the Gram matrix; fall back to an SVD range
  // basis when it is (numerically) singular.
  Matrix gram = Matrix::Zero(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  Eigen::LDLT<Matrix> probe(gram.selfadjointView<Eigen::Lower>());
  const Vector pivots = probe.vectorD().cwiseAbs();
  const bool full_rank = m <= k && pivots.minCoeff() > 1e-13 * pivots.maxCoeff();

  Matrix reduced_a;
  Vector reduced_b;
  Matrix range;
  if (full_rank) {
    reduced_a = a;
    reduced_b = b;
  } else {
    range = range_basis(a, 1e-9);
    const Vector coords = range.transpose() * b;
    if ((b - range * coords).norm() > opts.feas_tol * std::max(1.0, b.norm())) {
      sol.status = SolveStatus::kInfeasible;
      finalize(a, b, opts, sol);
      return sol;
    }
    reduced_a = range.transpose() * a;
    reduced_b = coords;
  }

  // Run tighter than the acceptance tolerance so the sign conditions on
  // small support entries also come out accurate.
  const double inner_tol = std::min(opts.gap_tol, opts.feas_tol) * 1e-3;
  auto attempt = [&](const IpmState& st, int iterations) {
    sol.iterations = iterations;
    sol.polished = false;
    sol.c = st.xp - st.xm;
    sol.nu = full_rank ? st.y : Vector(range * st.y);
    finalize(a, b, opts, sol);
    if (opts.polish) polish(a, b, opts, st, sol);
    return certified(a, opts, b, sol);
  };
  const auto ipm = split_lp_ipm<double>(reduced_a, reduced_b, inner_tol, opts.max_iter);
  bool done = attempt(ipm.s, ipm.iterations);
  if (!done) {
    // The normal equations lose accuracy near degenerate optima; extended
    // precision buys the few extra digits the crossover needs.
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const auto wide = split_lp_ipm<long double>(LMatrix(reduced_a.cast<long double>()),
                                                LVector(reduced_b.cast<long double>()),
                                                inner_tol * 1e-3, opts.max_iter);
    IpmState st{wide.s.xp.cast<double>(), wide.s.xm.cast<double>(), wide.s.y.cast<double>(),
                wide.s.zp.cast<double>(), wide.s.zm.cast<double>()};
    done = attempt(st, ipm.iterations + wide.iterations);
  }
  sol.status = done ? SolveStatus::kOptimal : SolveStatus::kNotConverged;
  return sol;
}

double sign_condition_residual(const Matrix& a, const SparseSolution& sol) {
  double worst = 0.0;
  for (Index j : sol.support) {
    const double target = sol.c(j) > 0 ? 1.0 : -1.0;
    worst = std::max(worst, std::abs(a.col(j).dot(sol.nu) - target));
  }
  return worst;
}

DualDirection dual_direction(const Vector& a_tilde, const Matrix& a_dict,
                             const BasisPursuitOptions& opts) {
  if (a_dict.size() == 0 || a_dict.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("dual_direction: dictionary must be nonzero");
  }
  DualDirection out;
  const SparseSolution sol = basis_pursuit(a_dict, a_tilde, opts);
  if (sol.status == SolveStatus::kInfeasible) {
    out.status = SolveStatus::kUnbounded;
    out.lambda = Vector::Zero(a_tilde.size());
    out.objective = std::numeric_limits<double>::infinity();
    return out;
  }
  out.status = sol.status;
  out.lambda = sol.nu;
  out.objective = a_tilde.dot(sol.nu);
  return out;
}

double lasso_kkt_residual(const Matrix& a, const Vector& b, double lambda,
                          const Vector& c) {
  const Vector g = a.transpose() * (b - a * c);
  double worst = 0.0;
  for (Index j = 0; j < c.size(); ++j) {
    const double v = c(j) != 0.0 ? std::abs(g(j) - lambda * (c(j) > 0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

// Cyclic coordinate descent from a warm start; used to finish a homotopy
// run that lost accuracy.
void coordinate_descent(const Matrix& a, const Vector& b, double lambda,
                        Vector& c, double tol, int max_sweeps) {
  const Vector col_sq = a.colwise().squaredNorm();
  Vector residual = b - a * c;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double biggest = 0.0;
    for (Index j = 0; j < a.cols(); ++j) {
      if (col_sq(j) == 0.0) continue;
      const double rho = a.col(j).dot(residual) + col_sq(j) * c(j);
      const double shrunk =
          std::copysign(std::max(std::abs(rho) - lambda, 0.0), rho) / col_sq(j);
      const double delta = shrunk - c(j);
      if (delta != 0.0) {
        residual -= delta * a.col(j);
        c(j) = shrunk;
        biggest = std::max(biggest, std::abs(delta) * std::sqrt(col_sq(j)));
      }
    }
    if (sweep % 10 == 9 && lasso_kkt_residual(a, b, lambda, c) <= tol) return;
    if (biggest == 0.0) return;
  }
}

}  // namespace

LassoResult lasso(const Matrix& a, const Vector& b, double lambda,
                  const LassoOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso: lambda must be positive");
  if (a.rows() != b.size()) throw std::invalid_argument("lasso: shape mismatch");
  const Index k = a.cols();
  LassoResult out;
  out.c = Vector::Zero(k);
  Vector corr = a.transpose() * b;
  const double lambda_max = k > 0 ? corr.cwiseAbs().maxCoeff() : 0.0;
  const double tol = opts.kkt_tol * std::max(1.0, lambda_max);
  if (lambda >= lambda_max) {
    out.status = SolveStatus::kOptimal;
    out.kkt_residual = lasso_kkt_residual(a, b, lambda, out.c);
    return out;
  }

  std::vector<Index> active;
  std::vector<char> in_active(static_cast<std::size_t>(k), 0);
  Index first = 0;
  corr.cwiseAbs().maxCoeff(&first);
  active.push_back(first);
  in_active[static_cast<std::size_t>(first)] = 1;

  double lam = lambda_max;
  const int max_steps =
      opts.max_steps > 0 ? opts.max_steps : static_cast<int>(20 * (a.rows() + k));
  const double tiny = 1e-14 * std::max(1.0, lambda_max);
  bool reached = false;
  for (int step = 0; step < max_steps && !reached; ++step) {
    out.steps = step + 1;
    const Index s = static_cast<Index>(active.size());
    Matrix as(a.rows(), s);
    Vector sign(s);
    for (Index j = 0; j < s; ++j) {
      const Index col = active[static_cast<std::size_t>(j)];
      as.col(j) = a.col(col);
      sign(j) = corr(col) >= 0 ? 1.0 : -1.0;
    }
    const Matrix gram = as.transpose() * as;
    Eigen::LDLT<Matrix> ldlt(gram);
    const Vector dir = ldlt.solve(sign);
    const Vector v = a.transpose() * (as * dir);

    double gamma = lam - lambda;
    Index event = -1;
    bool drop = false;
    for (Index j = 0; j < k; ++j) {
      if (in_active[static_cast<std::size_t>(j)]) continue;
      if (v(j) < 1.0) {
        const double g = (lam - corr(j)) / (1.0 - v(j));
        if (g > tiny && g < gamma) {
          gamma = g;
          event = j;
          drop = false;
        }
      }
      if (v(j) > -1.0) {
        const double g = (lam + corr(j)) / (1.0 + v(j));
        if (g > tiny && g < gamma) {
          gamma = g;
          event = j;
          drop = false;
        }
      }
    }
    for (Index j = 0; j < s; ++j) {
      const Index col = active[static_cast<std::size_t>(j)];
      if (dir(j) == 0.0) continue;
      const double g = -out.c(col) / dir(j);
      if (g > tiny && g < gamma) {
        gamma = g;
        event = j;
        drop = true;
      }
    }

    for (Index j = 0; j < s; ++j) out.c(active[static_cast<std::size_t>(j)]) += gamma * dir(j);
    lam -= gamma;
    corr = a.transpose() * (b - a * out.c);
    if (event < 0) {
      reached = true;
    } else if (drop) {
      const Index col = active[static_cast<std::size_t>(event)];
      out.c(col) = 0.0;
      in_active[static_cast<std::size_t>(col)] = 0;
      active.erase(active.begin() + event);
    } else {
      in_active[static_cast<std::size_t>(event)] = 1;
      active.push_back(event);
    }
    if (active.empty()) {
      Index arg = 0;
      corr.cwiseAbs().maxCoeff(&arg);
      active.push_back(arg);
      in_active[static_cast<std::size_t>(arg)] = 1;
    }
  }

  out.kkt_residual = lasso_kkt_residual(a, b, lambda, out.c);
  if (out.kkt_residual > tol) {
    coordinate_descent(a, b, lambda, out.c, tol, opts.max_cd_sweeps);
    out.kkt_residual = lasso_kkt_residual(a, b, lambda, out.c);
  }
  out.status = out.kkt_residual <= tol ? SolveStatus::kOptimal
                                       : SolveStatus::kNotConverged;
  return out;
}

double lasso_lambda_rule(const ObservedMatrix& x, double alpha) {
  if (x.cols() < 2) throw std::invalid_argument("lambda rule needs two columns");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  const Matrix gram = x.values.transpose() * x.values;
  double worst = 0.0;
  for (Index j = 0; j < gram.cols(); ++j)
    for (Index i = 0; i < gram.rows(); ++i)
      if (i != j) worst = std::max(worst, std::abs(gram(i, j)));
  if (worst == 0.0) {
    throw std::domain_error("lambda rule: all cross inner products vanish");
  }
  return alpha / worst;
}

}  // namespace ssc
