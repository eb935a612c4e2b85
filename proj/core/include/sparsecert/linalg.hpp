#pragma once

// Dense symmetric kernels shared by the path, certification and application
// code: PSD square roots, leading eigenpairs and trace-plus evaluation.

#include <Eigen/Dense>

#include <vector>

#include "sparsecert/errors.hpp"

namespace sparsecert {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Variable indices, 0-based, strictly increasing.
using IndexSet = std::vector<int>;

/// Sorts, deduplicates and range-checks a user supplied index list.
IndexSet normalize_pattern(IndexSet pattern, int n);

/// Complement of a normalized pattern within {0, ..., n-1}.
IndexSet complement(const IndexSet& pattern, int n);

/// Dense real symmetric matrix. Construction symmetrizes the input as
/// (M + M^T) / 2, so entries(i, j) == entries(j, i) holds bit for bit.
class SymMatrix {
 public:
  explicit SymMatrix(const Matrix& m);

  static SymMatrix identity(int n);

  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  const Matrix& dense() const noexcept { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  Vector diagonal() const { return m_.diagonal(); }

  /// Principal submatrix on the given (normalized) pattern.
  Matrix principal(const IndexSet& pattern) const;

 private:
  Matrix m_;
};

/// A square root of a PSD matrix: Sigma = A^T A with A of size r x n.
class FactorMatrix {
 public:
  explicit FactorMatrix(Matrix a);

  int rows() const noexcept { return static_cast<int>(a_.rows()); }
  int cols() const noexcept { return static_cast<int>(a_.cols()); }
  const Matrix& dense() const noexcept { return a_; }
  auto column(int i) const { return a_.col(i); }
  /// a_i^T a_i, which equals Sigma_ii.
  double column_sq_norm(int i) const { return sq_norms_(i); }
  const Vector& column_sq_norms() const noexcept { return sq_norms_; }

  SymMatrix gram() const;

 private:
  Matrix a_;
  Vector sq_norms_;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

struct SqrtOptions {
  /// Eigenvalues below -psd_slack * ||Sigma||_F are rejected.
  double psd_slack = 1e-10;
  /// Required reconstruction accuracy, relative to 1 + ||Sigma||_F.
  double sqrt_tol = 1e-9;
};

struct EigOptions {
  /// Residual tolerance relative to 1 + |lambda|.
  double eig_tol = 1e-10;
  /// Matrices up to this size use a full symmetric decomposition.
  int dense_cutoff = 64;
  /// Iterative solves give up after this many matrix-vector products per
  /// unit of dimension.
  int max_iter_factor = 10;
};

/// Eigen-decomposition square root A = Lambda_+^{1/2} V^T with numerically
/// zero directions dropped, so the result has r <= n rows.
FactorMatrix square_root(const SymMatrix& sigma, const SqrtOptions& options = {});

/// Algebraically largest eigenvalue and a unit eigenvector. The entry of
/// largest magnitude of the returned vector is nonnegative.
EigenPair leading_eigenpair(const SymMatrix& s, const EigOptions& options = {});

/// Same as above for a matrix the caller guarantees to be symmetric, with
/// an optional warm start for the iterative branch.
EigenPair leading_eigenpair(const Eigen::Ref<const Matrix>& s, const Vector* warm_start,
                            const EigOptions& options = {});

/// All eigenvalues, ascending.
Vector eigenvalues(const SymMatrix& s);

double lambda_max(const SymMatrix& s);
double lambda_min(const SymMatrix& s);

/// Sum of the positive eigenvalues.
double trace_plus(const SymMatrix& s);

/// Applies the sign convention: the largest-magnitude entry becomes >= 0.
void canonicalize_sign(Vector& v);

/// Leading eigenpair of sum_{i in I} a_i a_i^T. `x` lives in the r-dimensional
/// factor space; `loadings` is the matching unit vector of length n supported
/// on the pattern, i.e. the zero-padded leading eigenvector of Sigma_{I,I}.
struct PatternEigen {
  double value = 0.0;
  Vector x;
  Vector loadings;
};

PatternEigen pattern_eigvec(const FactorMatrix& a, const IndexSet& pattern,
                            const EigOptions& options = {});

/// Covariance matrix together with one of its square roots.
class CovarianceModel {
 public:
  /// Gram input: computes the factor with square_root.
  static CovarianceModel from_covariance(const SymMatrix& sigma,
                                         const SqrtOptions& options = {});
  /// Data input: the q x n matrix is used directly as the factor.
  static CovarianceModel from_factor(FactorMatrix factor);

  int dim() const noexcept { return sigma_.dim(); }
  const SymMatrix& sigma() const noexcept { return sigma_; }
  const FactorMatrix& factor() const noexcept { return factor_; }

 private:
  CovarianceModel(SymMatrix sigma, FactorMatrix factor)
      : sigma_(std::move(sigma)), factor_(std::move(factor)) {}

  SymMatrix sigma_;
  FactorMatrix factor_;
};

}  // namespace sparsecert
