#pragma once

// Subset selection and restricted-isometry bounds built on sparse maximum
// eigenvalue upper bounds.

#include <vector>

#include "sparsecert/linalg.hpp"
#include "sparsecert/optimality.hpp"

namespace sparsecert {

struct SubsetProblem {
  /// p x n design matrix.
  Matrix X;
  /// Response of length p.
  Vector y;

  /// Throws InvalidArgument on shape mismatch, empty input or all-zero X.
  void validate() const;
  int samples() const { return static_cast<int>(X.rows()); }
  int variables() const { return static_cast<int>(X.cols()); }
};

/// ||y||^2 - y^T X_I (X_I^T X_I)^+ X_I^T y, i.e. the least-squares residual
/// on the columns in I. An empty pattern returns ||y||^2.
double ls_error(const SubsetProblem& problem, const IndexSet& pattern);

enum class SubsetDirection { Forward, Backward };

/// Forward: repeatedly add the column that lowers the residual most.
/// Backward: start from all columns and drop the one whose removal raises
/// the residual least. Ties go to the lowest index.
IndexSet greedy_subset(const SubsetProblem& problem, int k, SubsetDirection direction);

struct SubsetOptions {
  int grid_size = 50;
  /// The PSD shift is max(0, -lambda_min(M)) + shift_pad * ||M||_F.
  double shift_pad = 1e-8;
  /// Optimal when the sparse eigenvalue bound on M is <= optimal_tol * scale,
  /// scale = max(shift, ||M||_F).
  double optimal_tol = 1e-9;
  int jobs = 1;
  CertifyOptions certify;
};

struct SubsetCertificate {
  IndexSet pattern;
  /// y^T X_I (X_I^T X_I)^+ X_I^T y.
  double s0 = 0.0;
  /// Optimal or Inconclusive; never EmptyInterval.
  CertStatus status = CertStatus::Inconclusive;
  /// ||y||^2 - s0, the residual of the pattern.
  double upper = 0.0;
  /// Lower bound on the best residual at this cardinality; -infinity when
  /// X^T X is singular.
  double lower = 0.0;
  /// Upper bound on max_{|v| = k} lambda_max(M_vv) for
  /// M = X^T y y^T X - s0 X^T X.
  double bound = 0.0;
  double shift = 0.0;
};

SubsetCertificate subset_certify(const SubsetProblem& problem, const IndexSet& pattern,
                                 const SubsetOptions& options = {});

struct RipOptions {
  int grid_size = 50;
  int jobs = 1;
  CertifyOptions certify;
};

struct RipLevel {
  /// Requested cardinality; bounds are computed at min(cardinality, m).
  int cardinality = 0;
  double upper_max_eig = 0.0;
  double lower_min_eig = 0.0;
  double delta_upper = 0.0;
};

struct RipReport {
  int S = 0;
  double upper_max_eig = 0.0;
  double lower_min_eig = 0.0;
  /// max(upper_max_eig - 1, 1 - lower_min_eig, 0), made nondecreasing in the
  /// cardinality by a running maximum.
  double delta_upper = 0.0;
  /// Upper bounds certify delta_S + delta_2S + delta_3S < 1.
  bool ct_holds = false;
  /// Entries for S, 2S and 3S.
  std::vector<RipLevel> levels;
};

/// Sparse extremal eigenvalue bounds of F^T F for F of size p x m.
RipReport rip_bounds(const Matrix& f, int S, const RipOptions& options = {});

}  // namespace sparsecert
