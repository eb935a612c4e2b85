#pragma once

// Candidate sparsity patterns for every target cardinality: diagonal sorting,
// eigenvector thresholding, full greedy search and the cubic-cost
// approximate greedy search.

#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "sparsecert/linalg.hpp"

namespace sparsecert {

enum class PathMethod { Sort, Threshold, GreedyFull, GreedyApprox };

std::string_view to_string(PathMethod method);
/// Accepts "sort", "threshold", "greedy-full" and "greedy-approx".
PathMethod parse_path_method(std::string_view name);

struct PathPoint {
  int k = 0;
  /// Ascending variable indices, |indices| == k.
  IndexSet indices;
  /// Variable that entered the pattern at this step.
  int added = -1;
  /// Unit vector of length n supported on `indices`.
  Vector loadings;
  /// lambda_max(Sigma_{I,I}).
  double variance = 0.0;
  /// (x_{k-1}^T a_added)^2, the guaranteed variance increase of the step.
  /// Only set by the approximate greedy method (NaN otherwise and at k = 1).
  double score = std::numeric_limits<double>::quiet_NaN();
};

struct Path {
  PathMethod method = PathMethod::GreedyApprox;
  std::vector<PathPoint> points;
};

struct PathOptions {
  /// Largest cardinality to compute; 0 means n.
  int k_max = 0;
  /// When set, variables with Sigma_ii < rho are pruned and k_max is capped
  /// by the number of surviving variables.
  std::optional<double> rho;
  /// Number of top-scoring candidates evaluated exactly per approximate step.
  int lookahead = 1;
  EigOptions eig;
};

struct Preprocessed {
  /// permutation[j] is the original index placed at position j.
  std::vector<int> permutation;
  /// Square root of the permuted covariance.
  FactorMatrix factor;
};

/// Variables ordered by decreasing variance; ties keep the lower index first.
std::vector<int> diagonal_order(const SymMatrix& sigma);

Preprocessed preprocess(const SymMatrix& sigma, const SqrtOptions& options = {});

/// {i : Sigma_ii >= rho}. Pruned variables can never belong to an optimal
/// pattern of the penalized problem.
IndexSet prune_variables(const SymMatrix& sigma, double rho);

Path path_sort(const CovarianceModel& model, const PathOptions& options = {});
Path path_threshold(const CovarianceModel& model, const PathOptions& options = {});
Path path_greedy_full(const CovarianceModel& model, const PathOptions& options = {});
Path path_greedy_approx(const CovarianceModel& model, const PathOptions& options = {});

Path compute_path(const CovarianceModel& model, PathMethod method,
                  const PathOptions& options = {});

}  // namespace sparsecert
