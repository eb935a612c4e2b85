#include "sparsecert/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace sparsecert::synthetic {

namespace {

IndexSet random_support(int n, int k, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  IndexSet out(all.begin(), all.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

Matrix fill(int rows, int cols, std::mt19937_64& rng, auto&& dist) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

Matrix uniform_matrix(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return fill(rows, cols, rng, std::uniform_real_distribution<double>(0.0, 1.0));
}

Matrix gaussian_matrix(int rows, int cols, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  return scale * fill(rows, cols, rng, std::normal_distribution<double>(0.0, 1.0));
}

SpikedCovariance spiked_uniform(int n, double strength, std::uint64_t seed) {
  if (n < 3) throw InvalidArgument("spiked_uniform: n must be >= 3");
  const Matrix u = uniform_matrix(n, n, seed);
  const int b = n / 3;
  Vector v = Vector::Zero(n);
  IndexSet support;
  for (int i = 0; i < 2 * b; ++i) {
    v(i) = i < b ? 1.0 : 1.0 / static_cast<double>(i - b + 1);
    support.push_back(i);
  }
  Matrix s = u.transpose() * u + strength * v * v.transpose();
  return {SymMatrix(s), v, support, b + 1};
}

SpikedCovariance spiked_gaussian(int n, int support_size, double strength, std::uint64_t seed) {
  if (support_size < 1 || support_size > n) {
    throw InvalidArgument("spiked_gaussian: support size must lie in [1, n]");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix m = fill(n, n, rng, normal);
  const IndexSet support = random_support(n, support_size, rng);
  Vector v = Vector::Zero(n);
  for (int i : support) v(i) = normal(rng);
  v /= v.norm();
  Matrix s = m.transpose() * m / n + strength * v * v.transpose();
  return {SymMatrix(s), v, support, support_size};
}

PlantedRegression planted_regression(int p, int n, int k, double noise, std::uint64_t seed) {
  if (k < 1 || k > n) throw InvalidArgument("planted_regression: k must lie in [1, n]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(1.0, 2.0);
  const Matrix x = fill(p, n, rng, normal);
  const IndexSet support = random_support(n, k, rng);
  Vector w = Vector::Zero(n);
  for (int i : support) w(i) = (rng() & 1U ? 1.0 : -1.0) * magnitude(rng);
  const Vector e = fill(p, 1, rng, normal);
  PlantedRegression out{{x, x * w + noise * e}, w, support};
  return out;
}

}  // namespace sparsecert::synthetic
