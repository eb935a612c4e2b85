#include "sparsecert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparsecert {

namespace {

void charge(double requested, const OracleBudget& budget) {
  if (requested > static_cast<double>(budget.max_enumerations)) {
    throw BudgetExceeded(requested, budget.max_enumerations);
  }
}

// Visits every subset of {0..n-1} with lo <= |I| <= hi, by cardinality and
// then in lexicographic order.
template <typename Visit>
void for_each_subset(int n, int lo, int hi, Visit&& visit) {
  IndexSet idx;
  for (int size = lo; size <= hi; ++size) {
    idx.resize(static_cast<std::size_t>(size));
    for (int j = 0; j < size; ++j) idx[static_cast<std::size_t>(j)] = j;
    while (true) {
      visit(static_cast<const IndexSet&>(idx));
      int j = size - 1;
      while (j >= 0 && idx[static_cast<std::size_t>(j)] == n - size + j) --j;
      if (j < 0) break;
      ++idx[static_cast<std::size_t>(j)];
      for (int t = j + 1; t < size; ++t) {
        idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
      }
    }
  }
}

Vector sub_eigenvalues(const Matrix& s, const IndexSet& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      sub(i, j) = s(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NoConvergence("oracle: eigen solve failed");
  return solver.eigenvalues();
}

bool beats(double cand, double best) { return cand > best + 1e-12 * (1.0 + std::abs(best)); }

}  // namespace

double subset_count(int n, int lo, int hi) {
  double total = 0.0;
  for (int size = std::max(lo, 0); size <= std::min(hi, n); ++size) {
    total += std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(size + 1.0) -
                                 std::lgamma(n - size + 1.0)));
  }
  return total;
}

OracleResult exact_sparse_eigmax(const SymMatrix& sigma, int k, const OracleBudget& budget) {
  const int n = sigma.dim();
  if (k < 1) throw InvalidArgument("exact_sparse_eigmax: k must be >= 1");
  k = std::min(k, n);
  charge(subset_count(n, 1, k), budget);
  OracleResult best{-std::numeric_limits<double>::infinity(), {}};
  for_each_subset(n, 1, k, [&](const IndexSet& idx) {
    const Vector ev = sub_eigenvalues(sigma.dense(), idx);
    const double v = ev(ev.size() - 1);
    if (best.pattern.empty() || beats(v, best.value)) best = {v, idx};
  });
  return best;
}

OracleResult exact_phi(const SymMatrix& sigma, double rho, const OracleBudget& budget) {
  const int n = sigma.dim();
  charge(subset_count(n, 0, n), budget);
  OracleResult best{0.0, {}};
  for_each_subset(n, 1, n, [&](const IndexSet& idx) {
    const Vector ev = sub_eigenvalues(sigma.dense(), idx);
    const double v = ev(ev.size() - 1) - rho * static_cast<double>(idx.size());
    if (beats(v, best.value)) best = {v, idx};
  });
  return best;
}

OracleResult exact_subset(const SubsetProblem& problem, int k, const OracleBudget& budget) {
  problem.validate();
  const int n = problem.variables();
  if (k < 0) throw InvalidArgument("exact_subset: k must be >= 0");
  k = std::min(k, n);
  charge(subset_count(n, 0, k), budget);
  OracleResult best{problem.y.squaredNorm(), {}};
  for_each_subset(n, 1, k, [&](const IndexSet& idx) {
    const double e = ls_error(problem, idx);
    if (beats(-e, -best.value)) best = {e, idx};
  });
  return best;
}

double exact_delta(const Matrix& f, int S, const OracleBudget& budget) {
  const int m = static_cast<int>(f.cols());
  if (S < 1) throw InvalidArgument("exact_delta: S must be >= 1");
  S = std::min(S, m);
  charge(subset_count(m, 1, S), budget);
  const Matrix gram = f.transpose() * f;
  double delta = 0.0;
  for_each_subset(m, 1, S, [&](const IndexSet& idx) {
    const Vector ev = sub_eigenvalues(gram, idx);
    delta = std::max({delta, ev(ev.size() - 1) - 1.0, 1.0 - ev(0)});
  });
  return delta;
}

}  // namespace sparsecert
