#pragma once

#include "sirpns/mesh.hpp"
#include "sirpns/quadrature.hpp"
#include "sirpns/sparse.hpp"

#include <Eigen/Core>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace sirpns {

enum class DofKind { P1Scalar, MiniVelocity, P1Pressure };

/// Degree-of-freedom numbering over a mesh.
///
/// P1 layouts number one dof per vertex. The MINI velocity layout is
/// component-major: component c occupies [c*(V+T), (c+1)*(V+T)), vertex dofs
/// first, then one bubble per triangle.
class DofLayout {
 public:
  DofLayout(DofKind kind, const TriMesh& mesh);

  DofKind kind() const { return kind_; }
  int size() const { return size_; }
  int components() const { return kind_ == DofKind::MiniVelocity ? 2 : 1; }
  int vertex_dof(int vertex, int component = 0) const {
    return component * block_ + vertex;
  }
  int bubble_dof(int triangle, int component) const {
    return component * block_ + num_vertices_ + triangle;
  }
  /// Dofs of one scalar component (V for P1, V+T for MINI).
  int block_size() const { return block_; }

 private:
  DofKind kind_;
  int num_vertices_;
  int block_;
  int size_;
};

class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int element = -1)
      : std::runtime_error(what), element_(element) {}
  int element() const { return element_; }

 private:
  int element_;
};

/// Affine geometry of one triangle: barycentric gradients are constant.
template <typename Scalar>
struct ElementGeometry {
  Eigen::Matrix<Scalar, 2, 3> corners;
  Eigen::Matrix<Scalar, 2, 3> grad_lambda;  // column i = grad of lambda_i
  Scalar area;

  Eigen::Matrix<Scalar, 2, 1> map(const Eigen::Matrix<Scalar, 3, 1>& bary) const {
    return corners * bary;
  }
};

template <typename Scalar = double>
ElementGeometry<Scalar> element_geometry(const TriMesh& mesh, int t) {
  ElementGeometry<Scalar> g;
  const auto& tri = mesh.triangle(t);
  for (int i = 0; i < 3; ++i) g.corners.col(i) = mesh.vertex(tri[i]).template cast<Scalar>();
  const Scalar twice_area = (g.corners(0, 1) - g.corners(0, 0)) * (g.corners(1, 2) - g.corners(1, 0)) -
                            (g.corners(1, 1) - g.corners(1, 0)) * (g.corners(0, 2) - g.corners(0, 0));
  g.area = twice_area / Scalar(2);
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    g.grad_lambda(0, i) = (g.corners(1, j) - g.corners(1, k)) / twice_area;
    g.grad_lambda(1, i) = (g.corners(0, k) - g.corners(0, j)) / twice_area;
  }
  return g;
}

/// Cubic bubble 27*l0*l1*l2, unit value at the barycenter.
template <typename Scalar>
Scalar bubble_value(const Eigen::Matrix<Scalar, 3, 1>& l) {
  return Scalar(27) * l[0] * l[1] * l[2];
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> bubble_gradient(const Eigen::Matrix<Scalar, 3, 1>& l,
                                            const Eigen::Matrix<Scalar, 2, 3>& grad_lambda) {
  return Scalar(27) * (l[1] * l[2] * grad_lambda.col(0) + l[0] * l[2] * grad_lambda.col(1) +
                       l[0] * l[1] * grad_lambda.col(2));
}

/// Where a coefficient is sampled during assembly.
struct QuadPoint {
  int triangle;
  Eigen::Vector3d bary;
  Point x;
};

/// Scalar coefficient evaluated at quadrature points ("interpolate then compose").
using PointField = std::function<double(const QuadPoint&)>;
using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

PointField constant_field(double value);
/// P1 interpolant of nodal values, optionally composed with map.
PointField p1_field(const TriMesh& mesh, const Vector& nodal,
                    std::function<double(double)> map = {});

double eval_p1(const TriMesh& mesh, const Vector& nodal, int triangle, const Eigen::Vector3d& bary);
Point grad_p1(const TriMesh& mesh, const Vector& nodal, int triangle);
Point eval_mini(const TriMesh& mesh, const Vector& velocity, int triangle,
                const Eigen::Vector3d& bary);
/// Row c holds the gradient of velocity component c.
Eigen::Matrix2d grad_mini(const TriMesh& mesh, const Vector& velocity, int triangle,
                          const Eigen::Vector3d& bary);

// ---- scalar P1 operators --------------------------------------------------

SparseMatrix assemble_mass_p1(const TriMesh& mesh);
/// Constant coefficient, degree-2 rule. Throws std::invalid_argument when coeff < 0.
SparseMatrix assemble_stiffness_p1(const TriMesh& mesh, double coeff = 1.0);
/// Variable coefficient sampled with the degree-4 rule.
SparseMatrix assemble_stiffness_p1(const TriMesh& mesh, const PointField& coeff);
/// W_ij = int w phi_i phi_j with the degree-4 rule. Throws NumericError on non-finite weights.
SparseMatrix assemble_reaction_weighted_mass(const TriMesh& mesh, const PointField& weight);
SparseMatrix assemble_reaction_weighted_mass(const TriMesh& mesh, const Vector& nodal_weight);
/// b_i = int f phi_i.
Vector assemble_load_p1(const TriMesh& mesh, const PointField& f);
/// b_i = int (U . grad c) phi_i.
Vector assemble_scalar_convection(const TriMesh& mesh, const Vector& velocity, const Vector& c);

// ---- MINI velocity / P1 pressure operators --------------------------------

/// Block-diagonal vector mass for the MINI space.
SparseMatrix assemble_mini_mass(const TriMesh& mesh);
/// Vector Laplacian int nu grad U : grad Z.
SparseMatrix assemble_mini_stiffness(const TriMesh& mesh, const PointField& nu);
/// N_ij = int (xi_j . grad) U_lag . xi_i : the unknown advects, the lagged field is advected.
SparseMatrix assemble_mini_convection(const TriMesh& mesh, const Vector& advected_lag);
/// (1/dt) M + K(nu) + N(U_lag). Throws std::invalid_argument when dt <= 0.
SparseMatrix assemble_mini_momentum_block(const TriMesh& mesh, const PointField& nu,
                                          const Vector& advected_lag, double dt);
/// B_qu = int q div(xi_u); shape (V, 2(V+T)).
SparseMatrix assemble_divergence_block(const TriMesh& mesh);
/// b_i = int f . xi_i.
Vector assemble_mini_load(const TriMesh& mesh, const VectorFunction& f);

// ---- constraints and interpolation -----------------------------------------

/// Replaces constrained rows by identity rows with rhs = value. With symmetric=true the
/// constrained columns are also eliminated and lifted into the rhs.
void apply_dirichlet(SparseMatrix& a, Vector& rhs, std::span<const int> dofs,
                     std::span<const double> values, bool symmetric = false);

Vector interpolate(const TriMesh& mesh, const DofLayout& layout, const ScalarFunction& expr);
Vector interpolate(const TriMesh& mesh, const DofLayout& layout, const VectorFunction& expr);

// ---- integrals and norms ----------------------------------------------------

/// w_i = int phi_i (row sums of the P1 mass matrix); int f_h = w . f.
Vector p1_integration_weights(const TriMesh& mesh);
double l2_error_p1(const TriMesh& mesh, const Vector& nodal, const ScalarFunction& exact);
double h1_error_p1(const TriMesh& mesh, const Vector& nodal,
                   const std::function<Point(const Point&)>& exact_grad);
double l2_error_mini(const TriMesh& mesh, const Vector& velocity, const VectorFunction& exact);
double h1_error_mini(const TriMesh& mesh, const Vector& velocity,
                     const std::function<Eigen::Matrix2d(const Point&)>& exact_grad);

}  // namespace sirpns
