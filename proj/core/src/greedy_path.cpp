#include "sparsecert/greedy_path.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <string>

namespace sparsecert {

namespace {

// A growing pattern with its leading eigenpair. Keeps both Sigma_{I,I} (in
// insertion order) and A_I A_I^T so each eigenproblem is solved in the
// smaller of the two spaces.
class PatternState {
 public:
  PatternState(const CovarianceModel& model, const EigOptions& eig)
      : sigma_(model.sigma().dense()),
        a_(model.factor()),
        eig_(eig),
        buf_(model.dim(), model.dim()),
        outer_(Matrix::Zero(model.factor().rows(), model.factor().rows())),
        member_(static_cast<std::size_t>(model.dim()), false),
        position_(static_cast<std::size_t>(model.dim()), -1) {}

  int size() const noexcept { return static_cast<int>(order_.size()); }
  bool contains(int i) const { return member_[static_cast<std::size_t>(i)]; }
  double value() const noexcept { return value_; }
  const Vector& x() const noexcept { return x_; }

  /// lambda_max of the current pattern extended by i.
  double extended_value(int i) {
    const int k = size() + 1;
    if (k <= a_.rows()) {
      write_row(k - 1, i);
      Vector warm = Vector::Zero(k);
      if (k > 1) warm.head(k - 1) = z_;
      return solve(buf_.topLeftCorner(k, k), k > 1 ? &warm : nullptr).value;
    }
    Matrix g = outer_;
    g.noalias() += a_.column(i) * a_.column(i).transpose();
    return solve(g, x_.size() ? &x_ : nullptr).value;
  }

  void add(int i) {
    const int k = size() + 1;
    order_.push_back(i);
    member_[static_cast<std::size_t>(i)] = true;
    position_[static_cast<std::size_t>(i)] = k - 1;
    outer_.noalias() += a_.column(i) * a_.column(i).transpose();

    if (k <= a_.rows()) {
      write_row(k - 1, i);
      Vector warm = Vector::Zero(k);
      if (k > 1) warm.head(k - 1) = z_;
      const EigenPair top = solve(buf_.topLeftCorner(k, k), k > 1 ? &warm : nullptr);
      value_ = top.value;
      z_ = top.vector;
      x_ = Vector::Zero(a_.rows());
      for (int j = 0; j < k; ++j) x_.noalias() += z_(j) * a_.column(order_[j]);
    } else {
      const EigenPair top = solve(outer_, x_.size() ? &x_ : nullptr);
      value_ = top.value;
      x_ = top.vector;
      z_.resize(k);
      for (int j = 0; j < k; ++j) z_(j) = a_.column(order_[j]).dot(x_);
    }
    const double xn = x_.norm();
    if (xn > 0.0) {
      x_ /= xn;
    } else {
      x_ = Vector::Unit(a_.rows(), 0);
    }
    const double zn = z_.norm();
    if (zn > 0.0) {
      z_ /= zn;
    } else {
      z_ = Vector::Unit(k, 0);
    }

    // Sign convention on the loadings, in original variable order.
    int arg = -1;
    double best = -1.0;
    for (int i : indices()) {
      const double v = std::abs(z_(position_[static_cast<std::size_t>(i)]));
      if (arg < 0 || v > best * (1.0 + 1e-12)) {
        best = v;
        arg = position_[static_cast<std::size_t>(i)];
      }
    }
    if (z_(arg) < 0.0) {
      z_ = -z_;
      x_ = -x_;
    }
  }

  IndexSet indices() const {
    IndexSet idx = order_;
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  Vector loadings() const {
    Vector out = Vector::Zero(a_.cols());
    for (std::size_t j = 0; j < order_.size(); ++j) {
      out(order_[j]) = z_(static_cast<Eigen::Index>(j));
    }
    return out;
  }

  PathPoint snapshot(int added) const {
    PathPoint p;
    p.k = size();
    p.indices = indices();
    p.added = added;
    p.loadings = loadings();
    p.variance = value_;
    return p;
  }

 private:
  void write_row(int pos, int i) {
    for (int j = 0; j < pos; ++j) {
      const double v = sigma_(i, order_[static_cast<std::size_t>(j)]);
      buf_(pos, j) = v;
      buf_(j, pos) = v;
    }
    buf_(pos, pos) = sigma_(i, i);
  }

  EigenPair solve(const Eigen::Ref<const Matrix>& s, const Vector* warm) const {
    try {
      return leading_eigenpair(s, warm, eig_);
    } catch (const NoConvergence&) {
      EigOptions dense = eig_;
      dense.dense_cutoff = INT_MAX;
      return leading_eigenpair(s, nullptr, dense);
    }
  }

  const Matrix& sigma_;
  const FactorMatrix& a_;
  EigOptions eig_;
  Matrix buf_;
  Matrix outer_;
  std::vector<bool> member_;
  std::vector<int> position_;
  std::vector<int> order_;
  Vector z_;
  Vector x_;
  double value_ = 0.0;
};

struct Setup {
  IndexSet allowed;
  int k_max = 0;
};

Setup setup(const CovarianceModel& model, const PathOptions& options) {
  const int n = model.dim();
  Setup s;
  if (options.rho) {
    s.allowed = prune_variables(model.sigma(), *options.rho);
  } else {
    s.allowed.resize(static_cast<std::size_t>(n));
    std::iota(s.allowed.begin(), s.allowed.end(), 0);
  }
  s.k_max = options.k_max > 0 ? std::min(options.k_max, n) : n;
  s.k_max = std::min<int>(s.k_max, static_cast<int>(s.allowed.size()));
  return s;
}

bool beats(double candidate, double best) {
  return candidate > best + 1e-12 * (1.0 + std::abs(best));
}

// Builds a nested path by adding variables in a fixed ranking.
Path ranked_path(const CovarianceModel& model, const std::vector<int>& ranking, int k_max,
                 PathMethod method, const EigOptions& eig) {
  Path path;
  path.method = method;
  PatternState state(model, eig);
  for (int k = 0; k < k_max; ++k) {
    state.add(ranking[static_cast<std::size_t>(k)]);
    path.points.push_back(state.snapshot(ranking[static_cast<std::size_t>(k)]));
  }
  return path;
}

int first_allowed(const CovarianceModel& model, const IndexSet& allowed) {
  std::vector<bool> ok(static_cast<std::size_t>(model.dim()), false);
  for (int i : allowed) ok[static_cast<std::size_t>(i)] = true;
  for (int i : diagonal_order(model.sigma())) {
    if (ok[static_cast<std::size_t>(i)]) return i;
  }
  return -1;
}

}  // namespace

std::string_view to_string(PathMethod method) {
  switch (method) {
    case PathMethod::Sort:
      return "sort";
    case PathMethod::Threshold:
      return "threshold";
    case PathMethod::GreedyFull:
      return "greedy-full";
    case PathMethod::GreedyApprox:
      return "greedy-approx";
  }
  return "unknown";
}

PathMethod parse_path_method(std::string_view name) {
  if (name == "sort") return PathMethod::Sort;
  if (name == "threshold") return PathMethod::Threshold;
  if (name == "greedy-full") return PathMethod::GreedyFull;
  if (name == "greedy-approx") return PathMethod::GreedyApprox;
  throw InvalidArgument("unknown path method '" + std::string(name) + "'");
}

std::vector<int> diagonal_order(const SymMatrix& sigma) {
  std::vector<int> order(static_cast<std::size_t>(sigma.dim()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return sigma(i, i) > sigma(j, j); });
  return order;
}

Preprocessed preprocess(const SymMatrix& sigma, const SqrtOptions& options) {
  std::vector<int> perm = diagonal_order(sigma);
  Matrix permuted(sigma.dim(), sigma.dim());
  for (int i = 0; i < sigma.dim(); ++i) {
    for (int j = 0; j < sigma.dim(); ++j) permuted(i, j) = sigma(perm[i], perm[j]);
  }
  FactorMatrix factor = square_root(SymMatrix(permuted), options);
  return Preprocessed{std::move(perm), std::move(factor)};
}

IndexSet prune_variables(const SymMatrix& sigma, double rho) {
  if (rho < 0.0) throw InvalidArgument("prune_variables: rho must be >= 0");
  IndexSet keep;
  for (int i = 0; i < sigma.dim(); ++i) {
    if (sigma(i, i) >= rho) keep.push_back(i);
  }
  return keep;
}

Path path_sort(const CovarianceModel& model, const PathOptions& options) {
  const Setup s = setup(model, options);
  std::vector<int> ranking;
  std::vector<bool> ok(static_cast<std::size_t>(model.dim()), false);
  for (int i : s.allowed) ok[static_cast<std::size_t>(i)] = true;
  for (int i : diagonal_order(model.sigma())) {
    if (ok[static_cast<std::size_t>(i)]) ranking.push_back(i);
  }
  return ranked_path(model, ranking, s.k_max, PathMethod::Sort, options.eig);
}

Path path_threshold(const CovarianceModel& model, const PathOptions& options) {
  const Setup s = setup(model, options);
  const EigenPair top = leading_eigenpair(model.sigma(), options.eig);
  std::vector<int> ranking = s.allowed;
  std::stable_sort(ranking.begin(), ranking.end(), [&](int i, int j) {
    return std::abs(top.vector(i)) > std::abs(top.vector(j));
  });
  return ranked_path(model, ranking, s.k_max, PathMethod::Threshold, options.eig);
}

Path path_greedy_full(const CovarianceModel& model, const PathOptions& options) {
  const Setup s = setup(model, options);
  Path path;
  path.method = PathMethod::GreedyFull;
  if (s.k_max == 0) return path;

  PatternState state(model, options.eig);
  const int start = first_allowed(model, s.allowed);
  state.add(start);
  path.points.push_back(state.snapshot(start));

  while (state.size() < s.k_max) {
    int arg = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i : s.allowed) {
      if (state.contains(i)) continue;
      const double v = state.extended_value(i);
      if (arg < 0 || beats(v, best)) {
        best = v;
        arg = i;
      }
    }
    state.add(arg);
    path.points.push_back(state.snapshot(arg));
  }
  return path;
}

Path path_greedy_approx(const CovarianceModel& model, const PathOptions& options) {
  if (options.lookahead < 1) throw InvalidArgument("lookahead must be >= 1");
  const Setup s = setup(model, options);
  Path path;
  path.method = PathMethod::GreedyApprox;
  if (s.k_max == 0) return path;

  const Matrix& a = model.factor().dense();
  PatternState state(model, options.eig);
  const int start = first_allowed(model, s.allowed);
  state.add(start);
  path.points.push_back(state.snapshot(start));

  std::vector<std::pair<double, int>> ranked;
  while (state.size() < s.k_max) {
    const Vector proj = a.transpose() * state.x();
    ranked.clear();
    for (int i : s.allowed) {
      if (!state.contains(i)) ranked.emplace_back(proj(i) * proj(i), i);
    }
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(options.lookahead), ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), ranked.end(),
                      [](const auto& l, const auto& r) {
                        return l.first > r.first || (l.first == r.first && l.second < r.second);
                      });

    int arg = ranked.front().second;
    double score = ranked.front().first;
    if (top > 1) {
      double best = -std::numeric_limits<double>::infinity();
      arg = -1;
      for (std::size_t c = 0; c < top; ++c) {
        const double v = state.extended_value(ranked[c].second);
        if (arg < 0 || beats(v, best) ||
            (!beats(best, v) && ranked[c].second < arg)) {
          best = v;
          arg = ranked[c].second;
          score = ranked[c].first;
        }
      }
    }
    state.add(arg);
    PathPoint p = state.snapshot(arg);
    p.score = score;
    path.points.push_back(std::move(p));
  }
  return path;
}

Path compute_path(const CovarianceModel& model, PathMethod method, const PathOptions& options) {
  switch (method) {
    case PathMethod::Sort:
      return path_sort(model, options);
    case PathMethod::Threshold:
      return path_threshold(model, options);
    case PathMethod::GreedyFull:
      return path_greedy_full(model, options);
    case PathMethod::GreedyApprox:
      return path_greedy_approx(model, options);
  }
  throw InvalidArgument("unknown path method");
}

}  // namespace sparsecert
