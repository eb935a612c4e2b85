#include "sparsecert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace sparsecert {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Fixed pseudo-random vector with every entry nonzero; mixed into iterative
// starting vectors so that no eigendirection is missed.
Vector dither(int n) {
  Vector v(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (int i = 0; i < n; ++i) {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    v(i) = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  return v / v.norm();
}

EigenPair dense_leading(const Eigen::Ref<const Matrix>& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("symmetric eigendecomposition failed");
  }
  const Vector& values = solver.eigenvalues();
  const double top = values(n - 1);
  const double scale = std::max(std::abs(values(0)), std::abs(top));
  const double tie = 64.0 * kEps * std::max(scale, 1e-300) * n;

  EigenPair out;
  out.value = top;
  out.vector = solver.eigenvectors().col(n - 1);

  // A degenerate top eigenspace has no preferred basis. Pick the projection
  // of the all-ones vector when it is usable so results are reproducible.
  int first = n - 1;
  while (first > 0 && top - values(first - 1) <= tie) --first;
  if (first < n - 1) {
    const auto basis = solver.eigenvectors().middleCols(first, n - first);
    Vector proj = basis * (basis.transpose() * Vector::Ones(n));
    if (proj.norm() > 1e-8 * std::sqrt(static_cast<double>(n))) {
      out.vector = proj / proj.norm();
    }
  }
  canonicalize_sign(out.vector);
  return out;
}

EigenPair lanczos_leading(const Eigen::Ref<const Matrix>& s, const Vector* warm,
                          const EigOptions& options) {
  const int n = static_cast<int>(s.rows());
  const int krylov = std::min(n, 32);
  const long max_matvec = static_cast<long>(options.max_iter_factor) * n;

  Vector start = dither(n);
  if (warm != nullptr && warm->size() == n && warm->norm() > 0.0) {
    start = *warm / warm->norm() + 1e-3 * start;
  }

  Matrix basis(n, krylov + 1);
  Vector alpha(krylov);
  Vector beta(krylov);
  Vector w(n);
  long matvec = 0;

  while (true) {
    basis.col(0) = start / start.norm();
    int dim = krylov;
    for (int j = 0; j < krylov; ++j) {
      w.noalias() = s * basis.col(j);
      ++matvec;
      alpha(j) = basis.col(j).dot(w);
      // Full reorthogonalization, applied twice.
      for (int pass = 0; pass < 2; ++pass) {
        w.noalias() -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      }
      beta(j) = w.norm();
      if (j + 1 == krylov) break;
      if (beta(j) <= 1e-13 * (std::abs(alpha(j)) + 1e-300)) {
        dim = j + 1;
        break;
      }
      basis.col(j + 1) = w / beta(j);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> tri;
    Vector diag = alpha.head(dim);
    Vector sub = dim > 1 ? Vector(beta.head(dim - 1)) : Vector(0);
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = tri.eigenvalues()(dim - 1);
    Vector y = basis.leftCols(dim) * tri.eigenvectors().col(dim - 1);
    y /= y.norm();

    w.noalias() = s * y;
    ++matvec;
    const double residual = (w - theta * y).norm();
    if (residual <= options.eig_tol * (1.0 + std::abs(theta))) {
      const double value = y.dot(w);
      canonicalize_sign(y);
      return EigenPair{value, y};
    }
    if (matvec >= max_matvec) {
      throw NoConvergence("leading eigenpair: residual " + std::to_string(residual) +
                          " after " + std::to_string(matvec) + " products");
    }
    start = y;
  }
}

}  // namespace

IndexSet normalize_pattern(IndexSet pattern, int n) {
  std::sort(pattern.begin(), pattern.end());
  pattern.erase(std::unique(pattern.begin(), pattern.end()), pattern.end());
  if (!pattern.empty() && (pattern.front() < 0 || pattern.back() >= n)) {
    throw InvalidArgument("pattern index out of range [0, " + std::to_string(n) + ")");
  }
  return pattern;
}

IndexSet complement(const IndexSet& pattern, int n) {
  IndexSet out;
  out.reserve(static_cast<std::size_t>(n) - pattern.size());
  std::size_t p = 0;
  for (int i = 0; i < n; ++i) {
    if (p < pattern.size() && pattern[p] == i) {
      ++p;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

SymMatrix::SymMatrix(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw NotSquare(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  }
  if (m.rows() < 1) throw InvalidArgument("symmetric matrix must have n >= 1");
  if (!m.allFinite()) throw InvalidArgument("matrix has non-finite entries");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Matrix::Identity(n, n)); }

Matrix SymMatrix::principal(const IndexSet& pattern) const {
  const auto k = static_cast<Eigen::Index>(pattern.size());
  Matrix sub(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = m_(pattern[i], pattern[j]);
  }
  return sub;
}

FactorMatrix::FactorMatrix(Matrix a) : a_(std::move(a)) {
  if (a_.rows() < 1 || a_.cols() < 1) throw InvalidArgument("factor must be non-empty");
  if (!a_.allFinite()) throw InvalidArgument("factor has non-finite entries");
  sq_norms_ = a_.colwise().squaredNorm().transpose();
}

SymMatrix FactorMatrix::gram() const {
  Matrix g = a_.transpose() * a_;
  return SymMatrix(g);
}

FactorMatrix square_root(const SymMatrix& sigma, const SqrtOptions& options) {
  const int n = sigma.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma.dense());
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("square_root: eigendecomposition failed");
  }
  const double fro = sigma.dense().norm();
  const double slack = options.psd_slack * fro;
  const Vector& values = solver.eigenvalues();
  if (values(0) < -slack) throw NotPositiveSemidefinite(values(0), slack);

  const double top = std::max(values(n - 1), 0.0);
  const double keep = std::max(top * n * kEps, 1e-300);
  int first = n;
  while (first > 0 && values(first - 1) > keep) --first;
  const int r = std::max(n - first, 1);
  first = n - r;

  Matrix a(r, n);
  for (int row = 0; row < r; ++row) {
    const int col = first + row;
    const double root = std::sqrt(std::max(values(col), 0.0));
    // Largest eigenvalue first.
    a.row(r - 1 - row) = root * solver.eigenvectors().col(col).transpose();
  }

  const double err = (a.transpose() * a - sigma.dense()).norm();
  if (err > options.sqrt_tol * (1.0 + fro)) {
    throw Error("square_root: reconstruction error " + std::to_string(err) +
                " exceeds tolerance");
  }
  return FactorMatrix(std::move(a));
}

void canonicalize_sign(Vector& v) {
  if (v.size() == 0) return;
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // First index wins among entries of equal magnitude.
    if (std::abs(v(i)) > best * (1.0 + 1e-12)) {
      best = std::abs(v(i));
      arg = i;
    }
  }
  if (v(arg) < 0.0) v = -v;
}

EigenPair leading_eigenpair(const Eigen::Ref<const Matrix>& s, const Vector* warm_start,
                            const EigOptions& options) {
  if (s.rows() != s.cols() || s.rows() < 1) {
    throw InvalidArgument("leading_eigenpair: matrix must be square and non-empty");
  }
  if (s.rows() <= options.dense_cutoff) return dense_leading(s);
  return lanczos_leading(s, warm_start, options);
}

EigenPair leading_eigenpair(const SymMatrix& s, const EigOptions& options) {
  return leading_eigenpair(s.dense(), nullptr, options);
}

Vector eigenvalues(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NoConvergence("eigenvalue computation failed");
  return solver.eigenvalues();
}

double lambda_max(const SymMatrix& s) {
  const Vector v = eigenvalues(s);
  return v(v.size() - 1);
}

double lambda_min(const SymMatrix& s) { return eigenvalues(s)(0); }

double trace_plus(const SymMatrix& s) { return eigenvalues(s).cwiseMax(0.0).sum(); }

PatternEigen pattern_eigvec(const FactorMatrix& a, const IndexSet& pattern,
                            const EigOptions& options) {
  if (pattern.empty()) throw EmptyPattern();
  const IndexSet idx = normalize_pattern(pattern, a.cols());
  const int k = static_cast<int>(idx.size());
  const int r = a.rows();

  Matrix sub(r, k);
  for (int j = 0; j < k; ++j) sub.col(j) = a.column(idx[j]);

  PatternEigen out;
  out.loadings = Vector::Zero(a.cols());
  Vector z(k);
  if (k <= r) {
    const Matrix gram = sub.transpose() * sub;
    const EigenPair top = leading_eigenpair(gram, nullptr, options);
    out.value = top.value;
    z = top.vector;
    out.x = sub * z;
  } else {
    const Matrix outer = sub * sub.transpose();
    const EigenPair top = leading_eigenpair(outer, nullptr, options);
    out.value = top.value;
    z = sub.transpose() * top.vector;
    if (z.norm() > 0.0) {
      z /= z.norm();
    } else {
      z = Vector::Unit(k, 0);
    }
    canonicalize_sign(z);
    out.x = sub * z;
  }
  const double xn = out.x.norm();
  if (xn > 0.0) {
    out.x /= xn;
  } else {
    out.x = Vector::Unit(r, 0);
  }
  for (int j = 0; j < k; ++j) out.loadings(idx[j]) = z(j);
  return out;
}

CovarianceModel CovarianceModel::from_covariance(const SymMatrix& sigma,
                                                 const SqrtOptions& options) {
  return CovarianceModel(sigma, square_root(sigma, options));
}

CovarianceModel CovarianceModel::from_factor(FactorMatrix factor) {
  SymMatrix sigma = factor.gram();
  return CovarianceModel(std::move(sigma), std::move(factor));
}

}  // namespace sparsecert
