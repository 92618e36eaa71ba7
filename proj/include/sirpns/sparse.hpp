#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sirpns {

using Vector = Eigen::VectorXd;
/// Compressed sparse row storage: sorted, unique column indices per row once compressed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverReport {
  int iterations = 0;
  double residual = 0.0;  // final relative 2-norm ||b - Ax|| / ||b||
  bool converged = false;
};

/// Sums duplicates. Throws std::invalid_argument for indices outside the shape.
SparseMatrix csr_from_triplets(std::span<const Triplet> triplets, int rows, int cols);

/// ||b - A x||_2 / ||b||_2, or ||A x||_2 when b vanishes.
double relative_residual(const SparseMatrix& a, const Vector& x, const Vector& b);

/// Sparse LU that can be reused for many right-hand sides. UMFPACK when available,
/// otherwise Eigen's SparseLU with COLAMD ordering. Copies share the factorization.
class DirectSolver {
 public:
  DirectSolver() = default;
  explicit DirectSolver(const SparseMatrix& a) { factorize(a); }

  void factorize(const SparseMatrix& a);
  /// Solves with up to two steps of iterative refinement; throws if ||Ax-b|| > 1e-10 ||b||.
  Vector solve(const Vector& b) const;
  bool ready() const { return ready_; }

 private:
  struct Factorization;
  std::shared_ptr<const Factorization> lu_;
  bool ready_ = false;
};

Vector solve_direct(const SparseMatrix& a, const Vector& b);

/// Incomplete LU restricted to the sparsity pattern of A.
class Ilu0 {
 public:
  explicit Ilu0(const SparseMatrix& a);
  /// Applies (LU)^{-1}.
  Vector apply(const Vector& r) const;

 private:
  SparseMatrix lu_;  // unit-lower L below the diagonal, U on and above
  std::vector<int> diag_;
};

enum class Preconditioner { None, Ilu0 };

struct GmresOptions {
  double tol = 1e-10;
  int restart = 50;
  int max_iters = 2000;
  Preconditioner preconditioner = Preconditioner::Ilu0;
};

/// Right-preconditioned restarted GMRES. Never throws on stagnation: the report
/// carries converged=false and the caller decides.
std::pair<Vector, SolverReport> solve_gmres(const SparseMatrix& a, const Vector& b,
                                            const GmresOptions& options = {});

/// MatrixMarket coordinate/real/general export.
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);

}  // namespace sirpns
