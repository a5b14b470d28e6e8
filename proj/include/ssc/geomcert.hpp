#ifndef SSC_GEOMCERT_HPP
#define SSC_GEOMCERT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssc/numkit.hpp"
#include "ssc/solvers.hpp"
#include "ssc/uosgen.hpp"

namespace ssc {

/// conv(+-g_1, ..., +-g_k) for the columns g_j of `generators`.
struct Polytope {
  Matrix generators;  // m x k
};

struct RadiusEstimate {
  double lower = 0.0;
  double upper = 0.0;
  bool exact = false;
  bool unbounded = false;       // polar set is unbounded
  bool span_deficient = false;  // generators do not span the ambient space
  Index span_dim = 0;
};

struct RadiusOptions {
  Index exact_max_dim = 6;
  Index exact_max_generators = 14;
  int sample_directions = 2000;
  std::uint64_t seed = 0;
  double rank_tol = 1e-9;
};

/// max ||lambda||_2 over {lambda : ||G^T lambda||_inf <= 1}.
///
/// Small instances enumerate every vertex of the polar polyhedron (all
/// m-subsets of constraints with all sign patterns) and are exact. Larger
/// ones take the best vertex over LPs in random directions as the lower
/// bound; the upper bound comes from exact enumeration over a spanning
/// subset of at most `exact_max_generators` constraints (dropping
/// constraints can only enlarge the polar), or +inf if even that is too big.
RadiusEstimate circumradius_polar(const Polytope& poly, const RadiusOptions& opts = {});

/// r(P) = 1 / R(P polar), bounds inverted. Generators that fail to span the
/// ambient space give exact 0 with `span_deficient` set.
RadiusEstimate inradius(const Polytope& poly, const RadiusOptions& opts = {});

/// Inradius measured inside span(G) after an orthonormal change of basis.
RadiusEstimate inradius_in_span(const Polytope& poly, const RadiusOptions& opts = {});

/// Thrown when a checker's structural assumption (e.g. invertible Q_i) fails.
class AssumptionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompetitorEntry {
  int k = 0;          // competing subspace
  int j = 0;          // point index within subspace k
  double lhs = 0.0;
  bool flagged = false;  // lhs could not be evaluated
};

struct CertificateReport {
  int ell = 0;
  int i = 0;
  std::vector<CompetitorEntry> entries;
  RadiusEstimate inradius;
  Vector lambda;               // dual direction the lhs values were built from
  SolveStatus lambda_status = SolveStatus::kNotConverged;
  bool lambda_unique = true;   // active constraints pin lambda down
  bool holds = false;
  double margin = 0.0;         // inradius.lower - max lhs
  std::vector<std::string> notes;

  double max_lhs() const;
};

struct CertifyOptions {
  RadiusOptions radius;
};

/// Condition for the observed-overlap variant: dictionary atoms are the
/// other points of subspace ell zero-filled and projected onto Omega_i.
CertificateReport check_thm_oo(const UoSModel& model, const ObservedMatrix& x, int ell,
                               int i, const CertifyOptions& opts = {});

/// Condition for the plain zero-filled variant (no Omega_i projection).
CertificateReport check_thm_ewzf(const UoSModel& model, const ObservedMatrix& x, int ell,
                                 int i, const CertifyOptions& opts = {});

/// Same-location condition, expressed in the d-dimensional coefficient
/// space with the pseudo-inverse of the restricted basis.
CertificateReport check_thm_same_location(const UoSModel& model, const ObservedMatrix& x,
                                          int ell, int i, const CertifyOptions& opts = {});

/// Compares ||V^T lt|| r(P(A)) against ||lt|| r(P(V A)) for the lifted
/// dual direction lt = pinv(V^T) lambda_bar. Diagnostic only: equality of
/// the two sides is expected but unproven, so only the ratio is reported.
struct BetaDiagnostic {
  double coefficient_side = 0.0;
  double ambient_side = 0.0;
  double ratio = 0.0;
};
BetaDiagnostic same_location_beta_diagnostic(const UoSModel& model, const ObservedMatrix& x,
                                             int ell, int i, const CertifyOptions& opts = {});

struct Case2Result {
  double bound_lhs = 0.0;  // max spectral norm of Q_i^T V_{Omega_i,j} (times ||a_j||)
  RadiusEstimate inradius;
  bool holds = false;
};

/// Worst-case test for a point observed on exactly d coordinates.
Case2Result check_case2_worst(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                              const CertifyOptions& opts = {});

struct Case3Result {
  double coherence_term = 0.0;  // max ||Q^T V||_2 ||a_j||
  double residual_term = 0.0;   // max ||(I - Q Q^T) V||_2 ||a_j||
  RadiusEstimate inradius;
  double alpha = 0.0;
  bool holds = false;           // at the supplied alpha
  double best_alpha = 0.0;      // max-margin alpha on the grid
  double best_margin = 0.0;
  bool holds_for_some_alpha = false;
};

/// Split worst-case test for |Omega_i| >= d with projector Q Q^T and its
/// complement; `grid_points` uniform alphas in [0, 1] are scanned.
Case3Result check_case3_worst(const UoSModel& model, const ObservedMatrix& x, int ell, int i,
                              double alpha, int grid_points = 101,
                              const CertifyOptions& opts = {});

struct CoherenceValue {
  double value = 0.0;
  bool rank_deficient = false;
};

/// ||pinv(V_Omega^ell) V_Omega^k||_F / d for a common observation set.
CoherenceValue expected_coherence(const UoSModel& model, const std::vector<int>& omega,
                                  int ell, int k);

/// certificate_report.csv: ell,i,k,j,lhs,inradius_lower,inradius_upper,exact,holds,margin
void write_certificate_csv(const std::string& path,
                           const std::vector<CertificateReport>& reports);

}  // namespace ssc

#endif  // SSC_GEOMCERT_HPP
