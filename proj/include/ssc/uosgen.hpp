#ifndef SSC_UOSGEN_HPP
#define SSC_UOSGEN_HPP

#include <cstdint>
#include <vector>

#include "ssc/numkit.hpp"

namespace ssc {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class CoeffMode { kSphere, kGaussian };
enum class SamplingPattern { kSameLocation, kPerColumnRandom };

/// Ground truth of a union-of-subspaces data set. Columns are stored in
/// cluster blocks: all points of subspace 0, then subspace 1, and so on.
struct UoSModel {
  int n = 0;
  std::vector<int> dims;
  std::vector<int> n_per;
  std::vector<Matrix> bases;   // n x d_l, orthonormal columns
  std::vector<Matrix> coeffs;  // d_l x N_l
  std::vector<int> labels;     // true label per column
  Matrix data;                 // n x N, the noiseless data matrix

  int subspace_count() const { return static_cast<int>(bases.size()); }
  int total_points() const { return static_cast<int>(labels.size()); }
  int max_dim() const;
  /// Global column index of point `i` of subspace `ell`.
  Index column_of(int ell, int i) const;
};

/// Zero-filled observations. `mask` is authoritative.
struct ObservedMatrix {
  Matrix values;  // n x N, zero where unobserved
  Mask mask;      // n x N
  std::vector<std::vector<int>> omegas;  // observed row indices per column

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
  const std::vector<int>& omega(Index col) const {
    return omegas[static_cast<std::size_t>(col)];
  }
  bool same_location() const;
  /// Builds the index sets from a mask and zeroes unobserved values.
  static ObservedMatrix from_mask(const Matrix& values, const Mask& mask);
};

struct SamplingSpec {
  SamplingPattern pattern = SamplingPattern::kPerColumnRandom;
  double p = 1.0;
  std::uint64_t seed = 0;
  // Same-location only: draw one common random subset instead of the
  // leading coordinates.
  bool common_random_subset = false;
};

/// round(p * n) with halves rounded away from zero.
int observed_count(double p, int n);

UoSModel generate_model(int n, const std::vector<int>& dims,
                        const std::vector<int>& n_per, CoeffMode mode,
                        std::uint64_t seed);

ObservedMatrix sample(const UoSModel& model, const SamplingSpec& spec);
ObservedMatrix sample(const Matrix& data, const SamplingSpec& spec);

/// Applies an existing mask to a data matrix.
ObservedMatrix apply_mask(const Matrix& data, const Mask& mask);

/// Scales every column with nonzero norm to unit length (values only).
ObservedMatrix normalize_columns(const ObservedMatrix& x);

struct TruncatedBasisSvd {
  Matrix q;      // n x n orthogonal
  Matrix sigma;  // n x d
  Matrix r;      // d x d orthogonal
  Vector singular_values;
};

/// SVD of I_omega * U_ell (the basis with unobserved rows zeroed).
TruncatedBasisSvd truncated_basis_svd(const UoSModel& model,
                                      const std::vector<int>& omega, int ell);

/// I_omega * m: rows outside `omega` set to zero.
Matrix restrict_rows_zero(const Matrix& m, const std::vector<int>& omega);

/// Rows of `m` listed in `omega`, in order.
Matrix select_rows(const Matrix& m, const std::vector<int>& omega);

}  // namespace ssc

#endif  // SSC_UOSGEN_HPP
