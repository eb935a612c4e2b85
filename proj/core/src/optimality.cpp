#include "sparsecert/optimality.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace sparsecert {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EigenPair top_pair(const Matrix& s, const Vector* warm, const EigOptions& eig) {
  try {
    return leading_eigenpair(s, warm, eig);
  } catch (const NoConvergence&) {
    EigOptions dense = eig;
    dense.dense_cutoff = INT_MAX;
    return leading_eigenpair(s, nullptr, dense);
  }
}

double outside_scale(double rho, double sq_norm, double score) {
  if (sq_norm <= rho) return 0.0;
  return std::max(0.0, rho * (sq_norm - rho) / (rho - score));
}

// Quantities of a (pattern, x) pair that do not depend on rho.
class GapModel {
 public:
  GapModel(const FactorMatrix& a, const IndexSet& pattern, const Vector& x)
      : a_(a), x_(x), inside_(static_cast<std::size_t>(a.cols()), false) {
    for (int i : pattern) inside_[static_cast<std::size_t>(i)] = true;
    proj_ = a.dense().transpose() * x;
    scores_ = proj_.cwiseAbs2();
    resid_ = (a.column_sq_norms() - scores_).cwiseMax(0.0).cwiseSqrt();
    rho_min_ = 0.0;
    rho_max_ = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.cols(); ++i) {
      if (inside(i)) {
        rho_max_ = std::min(rho_max_, scores_(i));
      } else {
        rho_min_ = std::max(rho_min_, scores_(i));
      }
    }
    for (int i : pattern) score_sum_ += scores_(i);
    count_ = static_cast<int>(pattern.size());
  }

  bool inside(int i) const { return inside_[static_cast<std::size_t>(i)]; }
  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }
  const Vector& scores() const { return scores_; }

  void check(double rho) const {
    if (!(rho > rho_min_ && rho < rho_max_)) throw InconsistentRho(rho, rho_min_, rho_max_);
  }

  double primal(double rho) const { return score_sum_ - rho * count_; }

  Vector inside_vector(int i, double rho) const {
    return proj_(i) * a_.column(i) - rho * x_;
  }

  Vector outside_direction(int i) const {
    return (a_.column(i) - proj_(i) * x_) / resid_(i);
  }

  // sum_i Y_i assembled from its rank-one terms.
  Matrix sum_y(double rho) const {
    const int n = a_.cols();
    Matrix w(a_.rows(), n);
    int m = 0;
    for (int i = 0; i < n; ++i) {
      if (inside(i)) {
        w.col(m++) = inside_vector(i, rho) / std::sqrt(scores_(i) - rho);
      } else {
        const double c = outside_scale(rho, a_.column_sq_norm(i), scores_(i));
        if (c > 0.0 && resid_(i) > 0.0) w.col(m++) = std::sqrt(c) * outside_direction(i);
      }
    }
    Matrix sy = Matrix::Zero(a_.rows(), a_.rows());
    if (m > 0) {
      sy.selfadjointView<Eigen::Lower>().rankUpdate(w.leftCols(m));
      sy = sy.selfadjointView<Eigen::Lower>();
    }
    return sy;
  }

  // Right derivative in rho of u^T (sum_i Y_i(rho)) u + |I|.
  double derivative(double rho, const Vector& u) const {
    const Vector au = a_.dense().transpose() * u;
    const double xu = x_.dot(u);
    double d = count_;
    for (int i = 0; i < a_.cols(); ++i) {
      if (inside(i)) {
        const double den = scores_(i) - rho;
        const double num = proj_(i) * au(i) - rho * xu;
        d += (-2.0 * xu * num * den + num * num) / (den * den);
      } else {
        const double q = a_.column_sq_norm(i);
        const double s = scores_(i);
        if (q <= rho || resid_(i) <= 0.0) continue;
        const double h = rho * (q - rho) / (rho - s);
        if (h <= 0.0) continue;
        const double dh = ((q - 2.0 * rho) * (rho - s) - rho * (q - rho)) / ((rho - s) * (rho - s));
        const double du = (au(i) - proj_(i) * xu) / resid_(i);
        d += dh * du * du;
      }
    }
    return d;
  }

 private:
  const FactorMatrix& a_;
  const Vector& x_;
  std::vector<bool> inside_;
  Vector proj_;
  Vector scores_;
  Vector resid_;
  double rho_min_ = 0.0;
  double rho_max_ = 0.0;
  double score_sum_ = 0.0;
  int count_ = 0;
};

double sym2_min_eig(double a, double b, double c) {
  // eigenvalues of [[a, b], [b, c]]
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  return mean - rad;
}

// lambda_min(scale v v^T - a a^T + rho I) via the span of {x, a}.
double term_min_eig(const Eigen::Ref<const Vector>& col, const Vector& x, const Vector& v,
                    double scale, double rho) {
  const Eigen::Index r = x.size();
  const double ax = col.dot(x);
  Vector e2 = col - ax * x;
  const double e2n = e2.norm();
  const bool two = e2n > 1e-12 * (col.norm() + 1e-300) && r > 1;
  if (two) e2 /= e2n;

  const double v1 = v.dot(x);
  const double v2 = two ? v.dot(e2) : 0.0;
  Vector rest = v - v1 * x;
  if (two) rest -= v2 * e2;
  if (rest.norm() > 1e-10 * (v.norm() + 1e-300)) {
    // v escapes span{x, a}: fall back to a dense check.
    Matrix m = scale * v * v.transpose() - col * col.transpose();
    m.diagonal().array() += rho;
    return lambda_min(SymMatrix(m));
  }

  double lo;
  if (two) {
    const double a2 = e2n;
    lo = sym2_min_eig(scale * v1 * v1 - ax * ax, scale * v1 * v2 - ax * a2,
                      scale * v2 * v2 - a2 * a2) + rho;
  } else {
    lo = scale * v1 * v1 - ax * ax + rho;
  }
  const int span_dim = two ? 2 : 1;
  if (r > span_dim) lo = std::min(lo, rho);
  return lo;
}

Matrix psd_sqrt(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(x.dense());
  if (solver.info() != Eigen::Success) throw NoConvergence("psd_sqrt: decomposition failed");
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view to_string(CertStatus status) {
  switch (status) {
    case CertStatus::Optimal:
      return "Optimal";
    case CertStatus::Inconclusive:
      return "Inconclusive";
    case CertStatus::EmptyInterval:
      return "EmptyInterval";
  }
  return "unknown";
}

ConsistencyInterval consistency_interval(const FactorMatrix& a, const IndexSet& pattern,
                                         const EigOptions& eig) {
  if (pattern.empty()) throw EmptyPattern();
  ConsistencyInterval ci;
  ci.pattern = normalize_pattern(pattern, a.cols());
  const PatternEigen pe = pattern_eigvec(a, ci.pattern, eig);
  ci.x = pe.x;
  ci.variance = pe.value;
  const GapModel model(a, ci.pattern, ci.x);
  ci.scores = model.scores();
  ci.rho_min = model.rho_min();
  ci.rho_max = model.rho_max();
  return ci;
}

Matrix DualWitness::assemble() const {
  const Eigen::Index r = x.size();
  Matrix sy = Matrix::Zero(r, r);
  for (const auto& t : inside) sy.noalias() += t.bx * t.bx.transpose() / t.xbx;
  for (const auto& t : outside) {
    if (t.scale > 0.0) sy.noalias() += t.scale * t.direction * t.direction.transpose();
  }
  return sy;
}

DualWitness build_dual(const FactorMatrix& a, const IndexSet& pattern, const Vector& x,
                       double rho) {
  if (pattern.empty()) throw EmptyPattern();
  DualWitness w;
  w.pattern = normalize_pattern(pattern, a.cols());
  w.x = x / x.norm();
  w.rho = rho;
  const GapModel model(a, w.pattern, w.x);
  model.check(rho);
  for (int i = 0; i < a.cols(); ++i) {
    if (model.inside(i)) {
      w.inside.push_back(InsideTerm{i, model.inside_vector(i, rho), model.scores()(i) - rho});
    } else {
      OutsideTerm t{i, outside_scale(rho, a.column_sq_norm(i), model.scores()(i)),
                    Vector::Zero(x.size())};
      if (t.scale > 0.0) {
        const Vector v = a.column(i) - a.column(i).dot(w.x) * w.x;
        const double vn = v.norm();
        if (vn > 0.0) {
          t.direction = v / vn;
        } else {
          t.scale = 0.0;
        }
      }
      w.outside.push_back(std::move(t));
    }
  }
  return w;
}

double witness_violation(const FactorMatrix& a, const DualWitness& witness) {
  const double rho = witness.rho;
  const double r = a.rows();
  double worst = 0.0;
  auto record = [&](int i, double lo) {
    const double q = a.column_sq_norm(i);
    const double bnorm = std::sqrt((q - rho) * (q - rho) + (r - 1.0) * rho * rho);
    worst = std::max(worst, std::max(0.0, -lo) / (1.0 + bnorm));
  };
  for (const auto& t : witness.inside) {
    record(t.index, term_min_eig(a.column(t.index), witness.x, t.bx, 1.0 / t.xbx, rho));
  }
  for (const auto& t : witness.outside) {
    const Vector v = t.scale > 0.0 ? t.direction : Vector(Vector::Zero(witness.x.size()));
    record(t.index, term_min_eig(a.column(t.index), witness.x, v, t.scale, rho));
  }
  return worst;
}

double phi_upper_bound(const FactorMatrix& a, const DualWitness& witness, const EigOptions& eig) {
  const double violation = witness_violation(a, witness);
  if (violation > 1e-8) {
    throw InfeasibleWitness("dual witness violates Y_i >= B_i by " + std::to_string(violation));
  }
  return top_pair(witness.assemble(), nullptr, eig).value;
}

double gap(const FactorMatrix& a, const IndexSet& pattern, const Vector& x, double rho,
           const EigOptions& eig) {
  if (pattern.empty()) throw EmptyPattern();
  const IndexSet idx = normalize_pattern(pattern, a.cols());
  const Vector unit = x / x.norm();
  const GapModel model(a, idx, unit);
  model.check(rho);
  return top_pair(model.sum_y(rho), nullptr, eig).value - model.primal(rho);
}

double gap_derivative(const FactorMatrix& a, const IndexSet& pattern, const Vector& x,
                      double rho, const EigOptions& eig) {
  if (pattern.empty()) throw EmptyPattern();
  const IndexSet idx = normalize_pattern(pattern, a.cols());
  const Vector unit = x / x.norm();
  const GapModel model(a, idx, unit);
  model.check(rho);
  const EigenPair top = top_pair(model.sum_y(rho), nullptr, eig);
  return model.derivative(rho, top.vector);
}

Certificate minimize_gap(const FactorMatrix& a, const IndexSet& pattern,
                         const CertifyOptions& options) {
  const ConsistencyInterval ci = consistency_interval(a, pattern, options.eig);
  Certificate cert;
  cert.pattern = ci.pattern;
  cert.x = ci.x;
  cert.variance = ci.variance;
  cert.rho_min = ci.rho_min;
  cert.rho_max = ci.rho_max;

  const double width = ci.rho_max - ci.rho_min;
  const double margin = std::max(options.margin_rel * width,
                                 16.0 * std::numeric_limits<double>::epsilon() * ci.rho_max);
  if (!(ci.rho_max > 0.0) || !(width > 1e-12 * ci.rho_max) || !(width > 2.0 * margin)) {
    cert.status = CertStatus::EmptyInterval;
    cert.rho_star = cert.gap = cert.primal = cert.relative_gap = cert.phi_upper = kNaN;
    return cert;
  }

  const GapModel model(a, ci.pattern, ci.x);
  double lo = ci.rho_min + margin;
  double hi = ci.rho_max - margin;
  const double eps = options.eps_rel * width;

  Vector warm;
  struct Eval {
    double rho;
    double gap;
    double lambda;
    double slope;
  };
  auto evaluate = [&](double rho) {
    const EigenPair top = top_pair(model.sum_y(rho), warm.size() ? &warm : nullptr, options.eig);
    warm = top.vector;
    return Eval{rho, top.value - model.primal(rho), top.value, model.derivative(rho, top.vector)};
  };

  Eval best = evaluate(0.5 * (lo + hi));
  Eval cur = best;
  int iterations = 1;
  const double slope_scale = 1e-12 * (1.0 + static_cast<double>(ci.pattern.size()));
  while (hi - lo > eps && iterations < options.max_iterations) {
    if (std::abs(cur.slope) <= slope_scale) break;
    if (cur.slope > 0.0) {
      hi = cur.rho;
    } else {
      lo = cur.rho;
    }
    cur = evaluate(0.5 * (lo + hi));
    ++iterations;
    if (cur.gap < best.gap - 1e-15 * std::abs(best.lambda)) best = cur;
  }

  cert.rho_star = best.rho;
  cert.gap = best.gap;
  cert.primal = model.primal(best.rho);
  cert.phi_upper = best.lambda;
  cert.relative_gap = best.gap / ci.variance;
  cert.iterations = iterations;
  cert.status = best.gap <= options.cert_tol * cert.primal ? CertStatus::Optimal
                                                           : CertStatus::Inconclusive;
  cert.within_report_tol = cert.relative_gap <= options.report_tol;
  return cert;
}

double card_bound(std::span<const RhoBound> bounds, int k) {
  if (bounds.empty()) throw EmptySet();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b : bounds) {
    if (b.rho < 0.0) throw InvalidArgument("card_bound: rho must be >= 0");
    best = std::min(best, b.phi_upper + b.rho * k);
  }
  return best;
}

double trivial_phi_bound(double sigma_lambda_max, const Vector& diagonal, double rho) {
  const double spectral = std::max(0.0, sigma_lambda_max - rho);
  const double diag = (diagonal.array() - rho).cwiseMax(0.0).sum();
  return std::min(spectral, diag);
}

DualBounds collect_dual_bounds(const CovarianceModel& model, const Path& path,
                               const BoundOptions& options) {
  const FactorMatrix& a = model.factor();
  const Vector diagonal = model.sigma().diagonal();
  const double top = lambda_max(model.sigma());

  DualBounds out;
  const int count = static_cast<int>(path.points.size());
  out.certificates.resize(static_cast<std::size_t>(count));
  parallel_for(count, options.jobs, [&](int k) {
    out.certificates[static_cast<std::size_t>(k)] =
        minimize_gap(a, path.points[static_cast<std::size_t>(k)].indices, options.certify);
  });

  std::vector<double> candidates;
  for (const auto& p : path.points) {
    if (std::isfinite(p.score) && p.score > 0.0) candidates.push_back(p.score);
  }
  for (const auto& c : out.certificates) {
    if (c.status != CertStatus::EmptyInterval) candidates.push_back(0.5 * (c.rho_min + c.rho_max));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  out.grid = {0.0, 1e-6 * diagonal.maxCoeff()};
  const int room = std::max(0, options.grid_size - 2);
  if (static_cast<int>(candidates.size()) <= room) {
    out.grid.insert(out.grid.end(), candidates.begin(), candidates.end());
  } else if (room > 0) {
    const double step = static_cast<double>(candidates.size() - 1) / std::max(1, room - 1);
    for (int j = 0; j < room; ++j) {
      out.grid.push_back(candidates[static_cast<std::size_t>(std::lround(j * step))]);
    }
  }
  std::sort(out.grid.begin(), out.grid.end());
  out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

  std::vector<RhoBound> grid_bounds(out.grid.size());
  parallel_for(static_cast<int>(out.grid.size()), options.jobs, [&](int g) {
    const double rho = out.grid[static_cast<std::size_t>(g)];
    double best = trivial_phi_bound(top, diagonal, rho);
    for (const auto& c : out.certificates) {
      if (c.status == CertStatus::EmptyInterval) continue;
      const double width = c.rho_max - c.rho_min;
      if (!(rho > c.rho_min + 1e-9 * width && rho < c.rho_max - 1e-9 * width)) continue;
      const DualWitness w = build_dual(a, c.pattern, c.x, rho);
      best = std::min(best, top_pair(w.assemble(), nullptr, options.certify.eig).value);
    }
    grid_bounds[static_cast<std::size_t>(g)] = RhoBound{rho, best};
  });
  out.bounds = std::move(grid_bounds);
  for (const auto& c : out.certificates) {
    if (c.status != CertStatus::EmptyInterval) out.bounds.push_back(RhoBound{c.rho_star, c.phi_upper});
  }
  return out;
}

std::vector<CurvePoint> tradeoff_curve(const Path& path, const DualBounds& bounds) {
  std::vector<CurvePoint> curve;
  curve.reserve(path.points.size());
  for (std::size_t j = 0; j < path.points.size(); ++j) {
    const auto& p = path.points[j];
    CurvePoint c;
    c.k = p.k;
    c.variance = p.variance;
    // The variance is attained, so lifting a bound that rounding pushed below
    // it keeps the bound valid.
    c.upper_bound = std::max(card_bound(bounds.bounds, p.k), p.variance);
    c.gap = c.upper_bound - c.variance;
    c.certified = j < bounds.certificates.size() &&
                  bounds.certificates[j].status == CertStatus::Optimal;
    curve.push_back(c);
  }
  return curve;
}

double trace_plus_congruence(const SymMatrix& b, const SymMatrix& x) {
  const Matrix root = psd_sqrt(x);
  return trace_plus(SymMatrix(root * b.dense() * root));
}

double expansion_residual(const SymMatrix& b, const Vector& x, const SymMatrix& y, double t) {
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument("expansion_residual: t must lie in (0, 1)");
  const Vector u = x / x.norm();
  const Vector bx = b.dense() * u;
  const double pivot = u.dot(bx);
  if (std::abs(pivot) < 1e-10) throw DegeneratePivot(pivot);

  const Matrix mixed = (1.0 - t) * u * u.transpose() + t * y.dense();
  const double f = trace_plus_congruence(b, SymMatrix(mixed));

  double predicted;
  if (pivot > 0.0) {
    predicted = pivot + t / pivot * (bx.dot(y.dense() * bx) - pivot * pivot);
  } else {
    const Matrix projected = b.dense() - bx * bx.transpose() / pivot;
    predicted = t * trace_plus_congruence(SymMatrix(projected), y);
  }
  return std::abs(f - predicted);
}

}  // namespace sparsecert
