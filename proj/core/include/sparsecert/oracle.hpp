#pragma once

// Exhaustive references for small instances. Every search enumerates patterns
// by increasing cardinality and lexicographically within a cardinality, and
// keeps the first strict improvement, so ties resolve to the smallest and then
// lexicographically first pattern.

#include <cstddef>

#include "sparsecert/applications.hpp"
#include "sparsecert/linalg.hpp"

namespace sparsecert {

struct OracleBudget {
  /// Largest number of subsets a single call may visit.
  std::size_t max_enumerations = 2'000'000;
};

struct OracleResult {
  double value = 0.0;
  IndexSet pattern;
};

/// max lambda_max(Sigma_II) over 1 <= |I| <= k.
OracleResult exact_sparse_eigmax(const SymMatrix& sigma, int k, const OracleBudget& budget = {});

/// max lambda_max(Sigma_II) - rho |I| over all subsets, the empty one included.
OracleResult exact_phi(const SymMatrix& sigma, double rho, const OracleBudget& budget = {});

/// min ls_error over |I| <= k; value holds the residual.
OracleResult exact_subset(const SubsetProblem& problem, int k, const OracleBudget& budget = {});

/// Restricted isometry constant: max over 1 <= |I| <= S of
/// max(lambda_max(F_I^T F_I) - 1, 1 - lambda_min(F_I^T F_I)).
double exact_delta(const Matrix& f, int S, const OracleBudget& budget = {});

/// Number of subsets with cardinality in [lo, hi] out of n, saturating.
double subset_count(int n, int lo, int hi);

}  // namespace sparsecert
