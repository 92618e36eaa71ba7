#include "sirpns/sparse.hpp"

#ifdef SIRPNS_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>

namespace sirpns {

SparseMatrix csr_from_triplets(std::span<const Triplet> triplets, int rows, int cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols) {
      throw std::invalid_argument("triplet (" + std::to_string(t.row()) + ", " +
                                  std::to_string(t.col()) + ") outside shape");
    }
  }
  SparseMatrix a(rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b) {
  const double bnorm = b.norm();
  const double rnorm = (b - a * x).norm();
  return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

struct DirectSolver::Factorization {
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  ColMajor matrix;
#ifdef SIRPNS_HAVE_UMFPACK
  Eigen::UmfPackLU<ColMajor> lu;
#else
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
#endif
};

void DirectSolver::factorize(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("direct solve needs a square matrix");
  ready_ = false;
  auto f = std::make_shared<Factorization>();
  f->matrix = a;
  f->matrix.makeCompressed();
  f->lu.compute(f->matrix);
  if (f->lu.info() != Eigen::Success) throw SingularMatrixError("sparse LU failed: matrix is singular");
  lu_ = std::move(f);
  ready_ = true;
}

Vector DirectSolver::solve(const Vector& b) const {
  if (!ready_) throw std::logic_error("DirectSolver used before factorize()");
  const auto& a = lu_->matrix;
  if (b.size() != a.rows()) throw std::invalid_argument("rhs size mismatch");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());

  Vector x = lu_->lu.solve(b);
  Vector r = b - a * x;
  for (int pass = 0; pass < 2 && r.norm() > 1e-14 * bnorm; ++pass) {
    x += lu_->lu.solve(r);
    r = b - a * x;
  }
  const double rel = r.norm() / bnorm;
  if (!std::isfinite(rel) || rel > 1e-10) {
    throw SingularMatrixError("direct solve residual " + std::to_string(rel) +
                              " exceeds 1e-10; matrix is numerically singular");
  }
  return x;
}

Vector solve_direct(const SparseMatrix& a, const Vector& b) {
  DirectSolver solver(a);
  return solver.solve(b);
}

Ilu0::Ilu0(const SparseMatrix& a) : lu_(a), diag_(a.rows(), -1) {
  if (a.rows() != a.cols()) throw std::invalid_argument("ILU(0) needs a square matrix");
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();

  for (int i = 0; i < n; ++i) {
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      if (inner[p] == i) diag_[i] = p;
    }
    if (diag_[i] < 0) throw SingularMatrixError("ILU(0): missing diagonal in row " + std::to_string(i));
  }

  // IKJ variant, updates restricted to the existing pattern.
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int p = outer[i]; p < outer[i + 1]; ++p) pos[inner[p]] = p;
    for (int p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) {
      const int k = inner[p];
      val[p] /= val[diag_[k]];
      for (int q = diag_[k] + 1; q < outer[k + 1]; ++q) {
        const int j = inner[q];
        if (pos[j] >= 0) val[pos[j]] -= val[p] * val[q];
      }
    }
    for (int p = outer[i]; p < outer[i + 1]; ++p) pos[inner[p]] = -1;
    if (val[diag_[i]] == 0.0) throw SingularMatrixError("ILU(0): zero pivot in row " + std::to_string(i));
  }
}

Vector Ilu0::apply(const Vector& r) const {
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();
  Vector y = r;
  for (int i = 0; i < n; ++i) {
    double s = y[i];
    for (int p = outer[i]; p < diag_[i]; ++p) s -= val[p] * y[inner[p]];
    y[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int p = diag_[i] + 1; p < outer[i + 1]; ++p) s -= val[p] * y[inner[p]];
    y[i] = s / val[diag_[i]];
  }
  return y;
}

std::pair<Vector, SolverReport> solve_gmres(const SparseMatrix& a, const Vector& b,
                                            const GmresOptions& options) {
  if (a.rows() != a.cols()) throw std::invalid_argument("GMRES needs a square matrix");
  if (b.size() != a.rows()) throw std::invalid_argument("rhs size mismatch");
  const int n = static_cast<int>(a.rows());
  SolverReport report;
  Vector x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    report.converged = true;
    return {x, report};
  }

  std::optional<Ilu0> ilu;
  if (options.preconditioner == Preconditioner::Ilu0) {
    try {
      ilu.emplace(a);
    } catch (const SingularMatrixError&) {
      report.residual = 1.0;
      return {x, report};
    }
  }
  const auto precondition = [&](const Vector& v) { return ilu ? ilu->apply(v) : v; };

  const int m = std::max(1, std::min(options.restart, n));
  std::vector<Vector> basis;
  Eigen::MatrixXd h(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  Vector r = b;
  while (report.iterations < options.max_iters) {
    const double beta = r.norm();
    if (beta <= options.tol * bnorm) break;
    basis.assign(1, r / beta);
    h.setZero();
    g.setZero();
    g[0] = beta;

    int k = 0;
    bool breakdown = false;
    while (k < m && report.iterations < options.max_iters) {
      Vector w = a * precondition(basis[k]);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = w.dot(basis[i]);
        w -= h(i, k) * basis[i];
      }
      h(k + 1, k) = w.norm();
      ++report.iterations;

      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
        h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
        h(i, k) = t;
      }
      const double denom = std::hypot(h(k, k), h(k + 1, k));
      breakdown = h(k + 1, k) <= 1e-14 * denom || denom == 0.0;
      cs[k] = denom > 0.0 ? h(k, k) / denom : 1.0;
      sn[k] = denom > 0.0 ? h(k + 1, k) / denom : 0.0;
      const double hkk1 = h(k + 1, k);
      h(k, k) = cs[k] * h(k, k) + sn[k] * hkk1;
      h(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      ++k;
      if (std::abs(g[k]) <= options.tol * bnorm || breakdown) break;
      basis.push_back(w / hkk1);
    }

    if (h(k - 1, k - 1) == 0.0) break;  // singular Hessenberg: no progress possible
    const Eigen::VectorXd y =
        h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Vector update = Vector::Zero(n);
    for (int i = 0; i < k; ++i) update += y[i] * basis[i];
    x += precondition(update);
    r = b - a * x;
    if (breakdown && r.norm() > options.tol * bnorm) break;
  }

  report.residual = (b - a * x).norm() / bnorm;
  report.converged = std::isfinite(report.residual) && report.residual <= options.tol;
  return {x, report};
}

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out.precision(17);
  for (int i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace sirpns
