#pragma once

// Seeded test-problem generators. All randomness comes from std::mt19937_64,
// so a (generator, seed) pair always produces the same instance.

#include <cstdint>

#include "sparsecert/applications.hpp"
#include "sparsecert/linalg.hpp"

namespace sparsecert::synthetic {

/// Entries uniform on [0, 1].
Matrix uniform_matrix(int rows, int cols, std::uint64_t seed);

/// Entries standard normal, multiplied by scale.
Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed, double scale = 1.0);

struct SpikedCovariance {
  SymMatrix sigma;
  /// Unnormalized spike direction.
  Vector spike;
  /// Support of the spike (0-based).
  IndexSet support;
  /// Number of leading entries of the spike equal to 1; the variance versus
  /// cardinality curve has its kink there. Equals the support size for
  /// spiked_gaussian.
  int flat_size = 0;
};

/// Sigma = U^T U + strength * v v^T with U uniform on [0, 1] (n x n). With
/// b = n / 3, v_i = 1 for i < b, v_i = 1 / (i - b + 1) for b <= i < 2b and 0
/// beyond (0-based i). v_b is also 1, so flat_size = b + 1.
SpikedCovariance spiked_uniform(int n, double strength, std::uint64_t seed);

/// Sigma = M^T M / n + strength * v v^T with M Gaussian (n x n) and v a unit
/// vector with Gaussian entries on a random support of the given size.
SpikedCovariance spiked_gaussian(int n, int support_size, double strength, std::uint64_t seed);

struct PlantedRegression {
  SubsetProblem problem;
  Vector weights;
  IndexSet support;
};

/// y = X w + noise * e with X (p x n) and e standard normal. w has k nonzero
/// entries on a random support, each of magnitude in [1, 2] with random sign.
/// For a fixed seed, X, w and e do not depend on noise.
PlantedRegression planted_regression(int p, int n, int k, double noise, std::uint64_t seed);

}  // namespace sparsecert::synthetic
