#include "sparsecert/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsecert/greedy_path.hpp"

namespace sparsecert {

namespace {

// Residuals from the normal-equation blocks of a fixed problem; used by the
// greedy searches, which evaluate many nested patterns.
class GramResidual {
 public:
  explicit GramResidual(const SubsetProblem& p)
      : gram_(p.X.transpose() * p.X), xty_(p.X.transpose() * p.y), yy_(p.y.squaredNorm()) {}

  double operator()(const IndexSet& idx) const {
    if (idx.empty()) return yy_;
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix g(k, k);
    Vector b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      b(i) = xty_(idx[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k; ++j) {
        g(i, j) = gram_(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      }
    }
    const Vector w = g.completeOrthogonalDecomposition().solve(b);
    return std::max(0.0, yy_ - b.dot(w));
  }

 private:
  Matrix gram_;
  Vector xty_;
  double yy_;
};

IndexSet with(IndexSet s, int i) {
  s.insert(std::upper_bound(s.begin(), s.end(), i), i);
  return s;
}

IndexSet without(IndexSet s, int i) {
  s.erase(std::find(s.begin(), s.end(), i));
  return s;
}

bool improves(double cand, double best) {
  return cand < best - 1e-12 * (1.0 + std::abs(best));
}

// Upper bounds on the cardinality-k sparse maximum eigenvalue of model's
// covariance for k = 1..k_max, from a greedy path and its dual bounds.
std::vector<double> sparse_max_bounds(const CovarianceModel& model, int k_max, int grid_size,
                                      int jobs, const CertifyOptions& certify,
                                      const IndexSet* extra_pattern) {
  PathOptions popts;
  popts.k_max = k_max;
  popts.eig = certify.eig;
  const Path path = path_greedy_approx(model, popts);
  BoundOptions bopts;
  bopts.grid_size = grid_size;
  bopts.jobs = jobs;
  bopts.certify = certify;
  DualBounds dual = collect_dual_bounds(model, path, bopts);
  if (extra_pattern != nullptr) {
    const Certificate c = minimize_gap(model.factor(), *extra_pattern, certify);
    if (c.status != CertStatus::EmptyInterval) dual.bounds.push_back({c.rho_star, c.phi_upper});
  }
  std::vector<double> out(static_cast<std::size_t>(k_max));
  for (int k = 1; k <= k_max; ++k) out[static_cast<std::size_t>(k - 1)] = card_bound(dual.bounds, k);
  return out;
}

}  // namespace

void SubsetProblem::validate() const {
  if (X.rows() < 1 || X.cols() < 1) throw InvalidArgument("subset problem: X must be non-empty");
  if (y.size() != X.rows()) {
    throw InvalidArgument("subset problem: y has " + std::to_string(y.size()) +
                          " entries, X has " + std::to_string(X.rows()) + " rows");
  }
  if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("subset problem: non-finite data");
  if (X.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("subset problem: X is all zero");
}

double ls_error(const SubsetProblem& problem, const IndexSet& pattern) {
  problem.validate();
  if (pattern.empty()) return problem.y.squaredNorm();
  const IndexSet idx = normalize_pattern(pattern, problem.variables());
  Matrix sub(problem.X.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    sub.col(static_cast<Eigen::Index>(j)) = problem.X.col(idx[j]);
  }
  const Vector w = sub.completeOrthogonalDecomposition().solve(problem.y);
  return (problem.y - sub * w).squaredNorm();
}

IndexSet greedy_subset(const SubsetProblem& problem, int k, SubsetDirection direction) {
  problem.validate();
  const int n = problem.variables();
  if (k < 1 || k > n) throw InvalidArgument("greedy_subset: k must lie in [1, n]");
  const GramResidual residual(problem);

  if (direction == SubsetDirection::Forward) {
    IndexSet current;
    while (static_cast<int>(current.size()) < k) {
      int pick = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (std::binary_search(current.begin(), current.end(), i)) continue;
        const double e = residual(with(current, i));
        if (pick < 0 || improves(e, best)) {
          best = e;
          pick = i;
        }
      }
      current = with(current, pick);
    }
    return current;
  }

  IndexSet current(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(i)] = i;
  while (static_cast<int>(current.size()) > k) {
    int drop = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i : current) {
      const double e = residual(without(current, i));
      if (drop < 0 || improves(e, best)) {
        best = e;
        drop = i;
      }
    }
    current = without(current, drop);
  }
  return current;
}

SubsetCertificate subset_certify(const SubsetProblem& problem, const IndexSet& pattern,
                                 const SubsetOptions& options) {
  problem.validate();
  if (pattern.empty()) throw EmptyPattern();
  const IndexSet idx = normalize_pattern(pattern, problem.variables());
  const int n = problem.variables();
  const int k = static_cast<int>(idx.size());

  SubsetCertificate out;
  out.pattern = idx;
  const double yy = problem.y.squaredNorm();
  out.upper = ls_error(problem, idx);
  out.s0 = yy - out.upper;

  const Matrix gram = problem.X.transpose() * problem.X;
  const Vector xty = problem.X.transpose() * problem.y;
  const SymMatrix m(xty * xty.transpose() - out.s0 * gram);
  const double fro = m.dense().norm();
  out.shift = std::max(0.0, -lambda_min(m)) + options.shift_pad * fro;
  const double scale = std::max(out.shift, fro);

  if (scale == 0.0) {
    // M vanishes: every pattern ties, so I is trivially optimal.
    out.bound = 0.0;
  } else {
    Matrix shifted = m.dense();
    shifted.diagonal().array() += out.shift;
    const CovarianceModel model = CovarianceModel::from_covariance(SymMatrix(shifted));
    const std::vector<double> bounds =
        sparse_max_bounds(model, n, options.grid_size, options.jobs, options.certify, &idx);
    out.bound = bounds[static_cast<std::size_t>(k - 1)] - out.shift;
  }
  out.status = out.bound <= options.optimal_tol * scale ? CertStatus::Optimal
                                                        : CertStatus::Inconclusive;

  const Vector g_eigs = eigenvalues(SymMatrix(gram));
  const double g_min = g_eigs(0);
  const double g_max = g_eigs(g_eigs.size() - 1);
  if (g_min <= 1e-12 * std::max(g_max, 1e-300)) {
    out.lower = -std::numeric_limits<double>::infinity();
  } else {
    out.lower = out.upper - std::max(out.bound, 0.0) / g_min;
  }
  return out;
}

RipReport rip_bounds(const Matrix& f, int S, const RipOptions& options) {
  if (f.rows() < 1 || f.cols() < 1) throw InvalidArgument("rip_bounds: F must be non-empty");
  const int m = static_cast<int>(f.cols());
  if (S < 1 || S > m) throw InvalidArgument("rip_bounds: S must lie in [1, m]");
  // Bounds for every cardinality come from one path and one penalty grid,
  // so the constants for different S are mutually consistent and the
  // running maximum makes delta_upper nondecreasing in S.
  const int k_max = m;

  const CovarianceModel upper_model = CovarianceModel::from_factor(FactorMatrix(f));
  const std::vector<double> upper = sparse_max_bounds(
      upper_model, k_max, options.grid_size, options.jobs, options.certify, nullptr);

  const double alpha = lambda_max(upper_model.sigma()) * (1.0 + 1e-9);
  Matrix flipped = -upper_model.sigma().dense();
  flipped.diagonal().array() += alpha;
  const CovarianceModel lower_model = CovarianceModel::from_covariance(SymMatrix(flipped));
  const std::vector<double> flipped_bounds = sparse_max_bounds(
      lower_model, k_max, options.grid_size, options.jobs, options.certify, nullptr);

  std::vector<RipLevel> per_k(static_cast<std::size_t>(k_max));
  double running = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    RipLevel& level = per_k[static_cast<std::size_t>(k - 1)];
    level.cardinality = k;
    level.upper_max_eig = upper[static_cast<std::size_t>(k - 1)];
    level.lower_min_eig = alpha - flipped_bounds[static_cast<std::size_t>(k - 1)];
    running = std::max({running, level.upper_max_eig - 1.0, 1.0 - level.lower_min_eig});
    level.delta_upper = running;
  }

  RipReport report;
  report.S = S;
  double delta_sum = 0.0;
  for (int mult = 1; mult <= 3; ++mult) {
    RipLevel level = per_k[static_cast<std::size_t>(std::min(mult * S, m) - 1)];
    level.cardinality = mult * S;
    delta_sum += level.delta_upper;
    report.levels.push_back(level);
  }
  report.upper_max_eig = report.levels[0].upper_max_eig;
  report.lower_min_eig = report.levels[0].lower_min_eig;
  report.delta_upper = report.levels[0].delta_upper;
  report.ct_holds = delta_sum < 1.0;
  return report;
}

}  // namespace sparsecert
