#pragma once

// Global optimality certificates for sparsity patterns.
//
// Given a pattern I with leading factor-space eigenvector x, every penalty
// rho in the open interval (max_{i not in I} (a_i^T x)^2, min_{i in I} (a_i^T x)^2)
// admits closed-form dual matrices Y_1..Y_n:
//
//   i in I:      Y_i = B_i x x^T B_i / (x^T B_i x),            B_i = a_i a_i^T - rho I
//   i not in I:  Y_i = c_i d_i d_i^T,
//                c_i = max{0, rho (a_i^T a_i - rho) / (rho - (a_i^T x)^2)},
//                d_i = (I - x x^T) a_i / ||(I - x x^T) a_i||.
//
// lambda_max(sum_i Y_i) bounds phi(rho) from above, and the duality gap
// lambda_max(sum_i Y_i) - sum_{i in I} ((a_i^T x)^2 - rho) is convex in rho.
// A zero gap at some rho* proves I globally optimal for the penalized problem
// at rho*, and therefore for the cardinality-constrained problem at k = |I|.

#include <span>
#include <string_view>
#include <vector>

#include "sparsecert/greedy_path.hpp"
#include "sparsecert/linalg.hpp"

namespace sparsecert {

enum class CertStatus { Optimal, Inconclusive, EmptyInterval };

std::string_view to_string(CertStatus status);

struct ConsistencyInterval {
  IndexSet pattern;
  /// Leading eigenvector of sum_{i in I} a_i a_i^T (factor space).
  Vector x;
  /// lambda_max(Sigma_{I,I}).
  double variance = 0.0;
  /// (a_i^T x)^2 for every variable.
  Vector scores;
  /// max over the complement; 0 when the pattern is the full set.
  double rho_min = 0.0;
  /// min over the pattern.
  double rho_max = 0.0;

  bool has_interior() const noexcept { return rho_max > rho_min; }
};

ConsistencyInterval consistency_interval(const FactorMatrix& a, const IndexSet& pattern,
                                         const EigOptions& eig = {});

/// Y_i = bx bx^T / xbx with bx = B_i x and xbx = x^T B_i x > 0.
struct InsideTerm {
  int index = 0;
  Vector bx;
  double xbx = 0.0;
};

/// Y_i = scale * direction direction^T; direction is unit and orthogonal to x.
struct OutsideTerm {
  int index = 0;
  double scale = 0.0;
  Vector direction;
};

struct DualWitness {
  double rho = 0.0;
  IndexSet pattern;
  Vector x;
  std::vector<InsideTerm> inside;
  std::vector<OutsideTerm> outside;

  /// sum_i Y_i as a dense r x r matrix.
  Matrix assemble() const;
};

/// Throws InconsistentRho unless rho lies strictly inside the consistency
/// interval of (pattern, x).
DualWitness build_dual(const FactorMatrix& a, const IndexSet& pattern, const Vector& x,
                       double rho);

/// Largest relative violation of Y_i >= B_i over all i:
/// max_i max(0, -lambda_min(Y_i - B_i)) / (1 + ||B_i||_F).
/// Each check is restricted to span{a_i, x}, where Y_i - B_i differs from rho I.
double witness_violation(const FactorMatrix& a, const DualWitness& witness);

/// lambda_max(sum_i Y_i), an upper bound on phi(rho). Throws
/// InfeasibleWitness when witness_violation exceeds 1e-8.
double phi_upper_bound(const FactorMatrix& a, const DualWitness& witness,
                       const EigOptions& eig = {});

/// lambda_max(sum_i Y_i) - sum_{i in I} ((a_i^T x)^2 - rho).
double gap(const FactorMatrix& a, const IndexSet& pattern, const Vector& x, double rho,
           const EigOptions& eig = {});

struct CertifyOptions {
  /// Optimal iff gap <= cert_tol * sum_{i in I} ((a_i^T x)^2 - rho*).
  double cert_tol = 1e-6;
  /// Relative gap (gap / variance) at which a point is reported as optimal
  /// on tradeoff curves.
  double report_tol = 1e-4;
  /// Bisection stops once the bracket is below eps_rel * (rho_max - rho_min).
  double eps_rel = 1e-8;
  /// Distance kept from the interval ends, relative to its width.
  double margin_rel = 1e-9;
  int max_iterations = 200;
  EigOptions eig;
};

struct Certificate {
  IndexSet pattern;
  Vector x;
  double variance = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  /// The remaining fields are NaN when status == EmptyInterval.
  double rho_star = 0.0;
  double gap = 0.0;
  /// sum_{i in I} ((a_i^T x)^2 - rho*), the primal objective.
  double primal = 0.0;
  /// gap / variance.
  double relative_gap = 0.0;
  /// lambda_max(sum_i Y_i) at rho*, valid even when not Optimal.
  double phi_upper = 0.0;
  CertStatus status = CertStatus::Inconclusive;
  bool within_report_tol = false;
  int iterations = 0;
};

/// Minimizes the convex gap over the consistency interval by bisection on
/// the sign of its right derivative.
Certificate minimize_gap(const FactorMatrix& a, const IndexSet& pattern,
                         const CertifyOptions& options = {});

/// d gap / d rho at rho (right derivative), exposed for testing.
double gap_derivative(const FactorMatrix& a, const IndexSet& pattern, const Vector& x,
                      double rho, const EigOptions& eig = {});

struct RhoBound {
  double rho = 0.0;
  double phi_upper = 0.0;
};

/// min over the set of phi_upper + rho * k, an upper bound on the largest
/// variance reachable with k nonzero loadings. Throws EmptySet.
double card_bound(std::span<const RhoBound> bounds, int k);

/// Bounds on phi(rho) that need no pattern: phi(rho) <= (lambda_max - rho)_+
/// and phi(rho) <= sum_i (Sigma_ii - rho)_+.
double trivial_phi_bound(double sigma_lambda_max, const Vector& diagonal, double rho);

struct BoundOptions {
  /// Number of penalty values sampled from path breakpoints.
  int grid_size = 50;
  /// Worker threads for per-k certification.
  int jobs = 1;
  CertifyOptions certify;
};

struct DualBounds {
  /// One certificate per path point, in path order.
  std::vector<Certificate> certificates;
  /// Grid values plus one entry per certificate with a nonempty interval.
  std::vector<RhoBound> bounds;
  /// The penalty values sampled for the grid.
  std::vector<double> grid;
};

/// Certifies every pattern of the path and collects dual bounds on phi over a
/// penalty grid made of the path breakpoints (x_k^T a_i)^2, midpoints of the
/// consistency intervals, 0 and 1e-6 * max_i Sigma_ii.
DualBounds collect_dual_bounds(const CovarianceModel& model, const Path& path,
                               const BoundOptions& options = {});

struct CurvePoint {
  int k = 0;
  double variance = 0.0;
  double upper_bound = 0.0;
  /// upper_bound - variance.
  double gap = 0.0;
  bool certified = false;
};

std::vector<CurvePoint> tradeoff_curve(const Path& path, const DualBounds& bounds);

/// |F((1-t) x x^T + t Y) - prediction| with F(X) = Tr(X^{1/2} B X^{1/2})_+.
/// For x^T B x > 0 the prediction is
///   x^T B x + (t / x^T B x) Tr(B x x^T B (Y - x x^T)),
/// and for x^T B x < 0 it is
///   t Tr(Y^{1/2} (B - B x x^T B / x^T B x) Y^{1/2})_+.
/// Throws DegeneratePivot when |x^T B x| < 1e-10.
double expansion_residual(const SymMatrix& b, const Vector& x, const SymMatrix& y, double t);

/// F(X) = Tr(X^{1/2} B X^{1/2})_+ for PSD X.
double trace_plus_congruence(const SymMatrix& b, const SymMatrix& x);

}  // namespace sparsecert
