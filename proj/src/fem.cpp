#include "sirpns/fem.hpp"

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace sirpns {

DofLayout::DofLayout(DofKind kind, const TriMesh& mesh)
    : kind_(kind), num_vertices_(mesh.num_vertices()) {
  block_ = kind == DofKind::MiniVelocity ? mesh.num_vertices() + mesh.num_triangles()
                                         : mesh.num_vertices();
  size_ = block_ * components();
}

PointField constant_field(double value) {
  return [value](const QuadPoint&) { return value; };
}

PointField p1_field(const TriMesh& mesh, const Vector& nodal, std::function<double(double)> map) {
  if (nodal.size() != mesh.num_vertices()) throw std::invalid_argument("P1 field size mismatch");
  return [&mesh, nodal, map = std::move(map)](const QuadPoint& q) {
    const double s = eval_p1(mesh, nodal, q.triangle, q.bary);
    return map ? map(s) : s;
  };
}

double eval_p1(const TriMesh& mesh, const Vector& nodal, int triangle, const Eigen::Vector3d& bary) {
  const auto& tri = mesh.triangle(triangle);
  return bary[0] * nodal[tri[0]] + bary[1] * nodal[tri[1]] + bary[2] * nodal[tri[2]];
}

Point grad_p1(const TriMesh& mesh, const Vector& nodal, int triangle) {
  const auto g = element_geometry(mesh, triangle);
  const auto& tri = mesh.triangle(triangle);
  return g.grad_lambda * Eigen::Vector3d(nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]);
}

namespace {

void check_velocity_size(const TriMesh& mesh, const Vector& velocity) {
  if (velocity.size() != 2 * (mesh.num_vertices() + mesh.num_triangles())) {
    throw std::invalid_argument("velocity vector does not match the MINI layout");
  }
}

// Local MINI coefficients of one component: three vertex values and the bubble.
Eigen::Vector4d mini_local(const TriMesh& mesh, const Vector& velocity, int triangle, int comp) {
  const int block = mesh.num_vertices() + mesh.num_triangles();
  const auto& tri = mesh.triangle(triangle);
  const int off = comp * block;
  return {velocity[off + tri[0]], velocity[off + tri[1]], velocity[off + tri[2]],
          velocity[off + mesh.num_vertices() + triangle]};
}

struct MiniBasis {
  Eigen::Vector4d value;
  Eigen::Matrix<double, 2, 4> grad;
};

MiniBasis mini_basis(const ElementGeometry<double>& g, const Eigen::Vector3d& l) {
  MiniBasis b;
  b.value << l[0], l[1], l[2], bubble_value(l);
  b.grad.leftCols<3>() = g.grad_lambda;
  b.grad.col(3) = bubble_gradient(l, g.grad_lambda);
  return b;
}

std::array<int, 3> p1_dofs(const TriMesh& mesh, int t) { return mesh.triangle(t); }

std::array<int, 8> mini_dofs(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  const int block = mesh.num_vertices() + mesh.num_triangles();
  std::array<int, 8> d{};
  for (int c = 0; c < 2; ++c) {
    for (int a = 0; a < 3; ++a) d[4 * c + a] = c * block + tri[a];
    d[4 * c + 3] = c * block + mesh.num_vertices() + t;
  }
  return d;
}

template <int N>
void scatter(std::vector<Triplet>& triplets, const std::array<int, N>& rows,
             const std::array<int, N>& cols, const Eigen::Matrix<double, N, N>& local) {
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (local(i, j) != 0.0) triplets.emplace_back(rows[i], cols[j], local(i, j));
    }
  }
}

// Generic P1 bilinear form: local(i,j) += weight * kernel(i, j).
template <typename Kernel>
SparseMatrix assemble_p1_form(const TriMesh& mesh, const QuadratureRule& rule, Kernel&& kernel) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * static_cast<size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const QuadPoint qp{t, rule.points[q], g.map(rule.points[q])};
      kernel(local, g, qp, 2.0 * g.area * rule.weights[q]);
    }
    const auto dofs = p1_dofs(mesh, t);
    scatter<3>(triplets, dofs, dofs, local);
  }
  return csr_from_triplets(triplets, mesh.num_vertices(), mesh.num_vertices());
}

std::string where(const Point& x) {
  std::ostringstream os;
  os << "(" << x.x() << ", " << x.y() << ")";
  return os.str();
}

}  // namespace

Point eval_mini(const TriMesh& mesh, const Vector& velocity, int triangle,
                const Eigen::Vector3d& bary) {
  const Eigen::Vector4d phi(bary[0], bary[1], bary[2], bubble_value(bary));
  return {phi.dot(mini_local(mesh, velocity, triangle, 0)),
          phi.dot(mini_local(mesh, velocity, triangle, 1))};
}

Eigen::Matrix2d grad_mini(const TriMesh& mesh, const Vector& velocity, int triangle,
                          const Eigen::Vector3d& bary) {
  const auto g = element_geometry(mesh, triangle);
  const auto basis = mini_basis(g, bary);
  Eigen::Matrix2d out;
  for (int c = 0; c < 2; ++c) {
    out.row(c) = (basis.grad * mini_local(mesh, velocity, triangle, c)).transpose();
  }
  return out;
}

SparseMatrix assemble_mass_p1(const TriMesh& mesh) {
  return assemble_p1_form(mesh, triangle_rule_degree2(),
                          [](Eigen::Matrix3d& local, const auto&, const QuadPoint& qp, double w) {
                            local.noalias() += w * qp.bary * qp.bary.transpose();
                          });
}

SparseMatrix assemble_stiffness_p1(const TriMesh& mesh, double coeff) {
  if (!(coeff >= 0.0)) throw std::invalid_argument("diffusion coefficient must be nonnegative");
  return assemble_p1_form(
      mesh, triangle_rule_degree2(),
      [coeff](Eigen::Matrix3d& local, const ElementGeometry<double>& g, const QuadPoint&, double w) {
        local.noalias() += (w * coeff) * g.grad_lambda.transpose() * g.grad_lambda;
      });
}

SparseMatrix assemble_stiffness_p1(const TriMesh& mesh, const PointField& coeff) {
  return assemble_p1_form(
      mesh, triangle_rule_degree4(),
      [&coeff](Eigen::Matrix3d& local, const ElementGeometry<double>& g, const QuadPoint& qp,
               double w) {
        const double k = coeff(qp);
        if (!(k >= 0.0)) {
          throw std::invalid_argument("diffusion coefficient " + std::to_string(k) +
                                      " is negative or not finite in triangle " +
                                      std::to_string(qp.triangle));
        }
        local.noalias() += (w * k) * g.grad_lambda.transpose() * g.grad_lambda;
      });
}

SparseMatrix assemble_reaction_weighted_mass(const TriMesh& mesh, const PointField& weight) {
  return assemble_p1_form(
      mesh, triangle_rule_degree4(),
      [&weight](Eigen::Matrix3d& local, const auto&, const QuadPoint& qp, double w) {
        const double k = weight(qp);
        if (!std::isfinite(k)) {
          throw NumericError("non-finite reaction weight in triangle " +
                                 std::to_string(qp.triangle) + " at " + where(qp.x),
                             qp.triangle);
        }
        local.noalias() += (w * k) * qp.bary * qp.bary.transpose();
      });
}

SparseMatrix assemble_reaction_weighted_mass(const TriMesh& mesh, const Vector& nodal_weight) {
  return assemble_reaction_weighted_mass(mesh, p1_field(mesh, nodal_weight));
}

Vector assemble_load_p1(const TriMesh& mesh, const PointField& f) {
  const auto& rule = triangle_rule_degree4();
  Vector b = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    const auto& tri = mesh.triangle(t);
    for (int q = 0; q < rule.size(); ++q) {
      const QuadPoint qp{t, rule.points[q], g.map(rule.points[q])};
      const double v = 2.0 * g.area * rule.weights[q] * f(qp);
      for (int a = 0; a < 3; ++a) b[tri[a]] += v * qp.bary[a];
    }
  }
  return b;
}

Vector assemble_scalar_convection(const TriMesh& mesh, const Vector& velocity, const Vector& c) {
  check_velocity_size(mesh, velocity);
  if (c.size() != mesh.num_vertices()) throw std::invalid_argument("scalar field does not match P1 layout");
  const auto& rule = triangle_rule_degree4();
  Vector b = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    const auto& tri = mesh.triangle(t);
    const Point gradc = g.grad_lambda * Eigen::Vector3d(c[tri[0]], c[tri[1]], c[tri[2]]);
    if (gradc.isZero(0.0)) continue;
    const Eigen::Vector4d u0 = mini_local(mesh, velocity, t, 0);
    const Eigen::Vector4d u1 = mini_local(mesh, velocity, t, 1);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d& l = rule.points[q];
      const Eigen::Vector4d phi(l[0], l[1], l[2], bubble_value(l));
      const double adv = phi.dot(u0) * gradc.x() + phi.dot(u1) * gradc.y();
      const double v = 2.0 * g.area * rule.weights[q] * adv;
      for (int a = 0; a < 3; ++a) b[tri[a]] += v * l[a];
    }
  }
  return b;
}

namespace {

// Local 8x8 MINI block; rows are test (component, basis), columns trial.
template <typename Kernel>
SparseMatrix assemble_mini_form(const TriMesh& mesh, Kernel&& kernel) {
  const auto& rule = triangle_rule_mini();
  const int n = 2 * (mesh.num_vertices() + mesh.num_triangles());
  std::vector<Triplet> triplets;
  triplets.reserve(64 * static_cast<size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    Eigen::Matrix<double, 8, 8> local = Eigen::Matrix<double, 8, 8>::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const QuadPoint qp{t, rule.points[q], g.map(rule.points[q])};
      kernel(local, g, qp, mini_basis(g, rule.points[q]), 2.0 * g.area * rule.weights[q]);
    }
    const auto dofs = mini_dofs(mesh, t);
    scatter<8>(triplets, dofs, dofs, local);
  }
  return csr_from_triplets(triplets, n, n);
}

void add_mass(Eigen::Matrix<double, 8, 8>& local, const MiniBasis& b, double w) {
  const Eigen::Matrix4d m = w * b.value * b.value.transpose();
  local.topLeftCorner<4, 4>() += m;
  local.bottomRightCorner<4, 4>() += m;
}

void add_stiffness(Eigen::Matrix<double, 8, 8>& local, const MiniBasis& b, double w) {
  const Eigen::Matrix4d k = w * b.grad.transpose() * b.grad;
  local.topLeftCorner<4, 4>() += k;
  local.bottomRightCorner<4, 4>() += k;
}

double checked_viscosity(const PointField& nu, const QuadPoint& qp) {
  const double v = nu(qp);
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("viscosity " + std::to_string(v) + " invalid in triangle " +
                                std::to_string(qp.triangle));
  }
  return v;
}

}  // namespace

SparseMatrix assemble_mini_mass(const TriMesh& mesh) {
  return assemble_mini_form(mesh, [](auto& local, const auto&, const QuadPoint&,
                                     const MiniBasis& b, double w) { add_mass(local, b, w); });
}

SparseMatrix assemble_mini_stiffness(const TriMesh& mesh, const PointField& nu) {
  return assemble_mini_form(mesh, [&nu](auto& local, const auto&, const QuadPoint& qp,
                                        const MiniBasis& b, double w) {
    add_stiffness(local, b, w * checked_viscosity(nu, qp));
  });
}

SparseMatrix assemble_mini_convection(const TriMesh& mesh, const Vector& advected_lag) {
  check_velocity_size(mesh, advected_lag);
  return assemble_mini_form(mesh, [&](auto& local, const auto&, const QuadPoint& qp,
                                      const MiniBasis& b, double w) {
    const Eigen::Matrix2d grad = grad_mini(mesh, advected_lag, qp.triangle, qp.bary);
    const Eigen::Matrix4d phiphi = w * b.value * b.value.transpose();
    for (int d = 0; d < 2; ++d) {
      for (int c = 0; c < 2; ++c) local.template block<4, 4>(4 * d, 4 * c) += grad(d, c) * phiphi;
    }
  });
}

SparseMatrix assemble_mini_momentum_block(const TriMesh& mesh, const PointField& nu,
                                          const Vector& advected_lag, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  check_velocity_size(mesh, advected_lag);
  const double inv_dt = 1.0 / dt;
  const bool convect = !advected_lag.isZero(0.0);
  return assemble_mini_form(mesh, [&](auto& local, const auto&, const QuadPoint& qp,
                                      const MiniBasis& b, double w) {
    add_mass(local, b, w * inv_dt);
    add_stiffness(local, b, w * checked_viscosity(nu, qp));
    if (convect) {
      Eigen::Matrix2d grad;
      for (int c = 0; c < 2; ++c) {
        grad.row(c) = (b.grad * mini_local(mesh, advected_lag, qp.triangle, c)).transpose();
      }
      const Eigen::Matrix4d phiphi = w * b.value * b.value.transpose();
      for (int d = 0; d < 2; ++d) {
        for (int c = 0; c < 2; ++c) local.template block<4, 4>(4 * d, 4 * c) += grad(d, c) * phiphi;
      }
    }
  });
}

SparseMatrix assemble_divergence_block(const TriMesh& mesh) {
  const auto& rule = triangle_rule_degree4();
  const int nv = mesh.num_vertices();
  std::vector<Triplet> triplets;
  triplets.reserve(24 * static_cast<size_t>(mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    Eigen::Matrix<double, 3, 8> local = Eigen::Matrix<double, 3, 8>::Zero();
    for (int q = 0; q < rule.size(); ++q) {
      const auto b = mini_basis(g, rule.points[q]);
      const double w = 2.0 * g.area * rule.weights[q];
      for (int c = 0; c < 2; ++c) {
        local.block<3, 4>(0, 4 * c) += w * rule.points[q] * b.grad.row(c);
      }
    }
    const auto rows = p1_dofs(mesh, t);
    const auto cols = mini_dofs(mesh, t);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 8; ++j) {
        if (local(i, j) != 0.0) triplets.emplace_back(rows[i], cols[j], local(i, j));
      }
    }
  }
  return csr_from_triplets(triplets, nv, 2 * (nv + mesh.num_triangles()));
}

Vector assemble_mini_load(const TriMesh& mesh, const VectorFunction& f) {
  const auto& rule = triangle_rule_mini();
  Vector b = Vector::Zero(2 * (mesh.num_vertices() + mesh.num_triangles()));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    const auto dofs = mini_dofs(mesh, t);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d& l = rule.points[q];
      const Point fx = f(g.map(l));
      const Eigen::Vector4d phi(l[0], l[1], l[2], bubble_value(l));
      const double w = 2.0 * g.area * rule.weights[q];
      for (int a = 0; a < 4; ++a) {
        b[dofs[a]] += w * fx.x() * phi[a];
        b[dofs[4 + a]] += w * fx.y() * phi[a];
      }
    }
  }
  return b;
}

void apply_dirichlet(SparseMatrix& a, Vector& rhs, std::span<const int> dofs,
                     std::span<const double> values, bool symmetric) {
  if (dofs.size() != values.size()) throw std::invalid_argument("dof/value count mismatch");
  if (a.rows() != a.cols() || rhs.size() != a.rows()) throw std::invalid_argument("system shape mismatch");
  const int n = static_cast<int>(a.rows());
  std::vector<char> constrained(n, 0);
  Vector value = Vector::Zero(n);
  for (size_t k = 0; k < dofs.size(); ++k) {
    const int d = dofs[k];
    if (d < 0 || d >= n) throw std::invalid_argument("constrained dof out of range");
    if (constrained[d] && value[d] != values[k]) {
      throw std::invalid_argument("dof " + std::to_string(d) + " constrained to conflicting values");
    }
    constrained[d] = 1;
    value[d] = values[k];
  }
  if (dofs.empty()) return;
  a.makeCompressed();

  std::vector<int> missing_diagonal;
  for (int i = 0; i < n; ++i) {
    bool has_diag = false;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (constrained[i]) {
        it.valueRef() = (j == i) ? 1.0 : 0.0;
        has_diag |= (j == i);
      } else if (symmetric && constrained[j]) {
        rhs[i] -= it.value() * value[j];
        it.valueRef() = 0.0;
      }
    }
    if (constrained[i]) {
      rhs[i] = value[i];
      if (!has_diag) missing_diagonal.push_back(i);
    }
  }
  for (int i : missing_diagonal) a.coeffRef(i, i) = 1.0;
  a.makeCompressed();
}

Vector interpolate(const TriMesh& mesh, const DofLayout& layout, const ScalarFunction& expr) {
  if (layout.kind() == DofKind::MiniVelocity) {
    throw std::invalid_argument("scalar expression cannot fill a vector layout");
  }
  Vector out(layout.size());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double val = expr(mesh.vertex(v));
    if (!std::isfinite(val)) throw NumericError("non-finite value at " + where(mesh.vertex(v)));
    out[layout.vertex_dof(v)] = val;
  }
  return out;
}

Vector interpolate(const TriMesh& mesh, const DofLayout& layout, const VectorFunction& expr) {
  if (layout.kind() != DofKind::MiniVelocity) {
    throw std::invalid_argument("vector expression needs the MINI velocity layout");
  }
  Vector out = Vector::Zero(layout.size());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point val = expr(mesh.vertex(v));
    if (!val.allFinite()) throw NumericError("non-finite value at " + where(mesh.vertex(v)));
    out[layout.vertex_dof(v, 0)] = val.x();
    out[layout.vertex_dof(v, 1)] = val.y();
  }
  return out;
}

Vector p1_integration_weights(const TriMesh& mesh) {
  Vector w = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double third = mesh.signed_area(t) / 3.0;
    for (int v : mesh.triangle(t)) w[v] += third;
  }
  return w;
}

double l2_error_p1(const TriMesh& mesh, const Vector& nodal, const ScalarFunction& exact) {
  const auto& rule = triangle_rule_mini();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    for (int q = 0; q < rule.size(); ++q) {
      const double e = eval_p1(mesh, nodal, t, rule.points[q]) - exact(g.map(rule.points[q]));
      sum += 2.0 * g.area * rule.weights[q] * e * e;
    }
  }
  return std::sqrt(sum);
}

double h1_error_p1(const TriMesh& mesh, const Vector& nodal,
                   const std::function<Point(const Point&)>& exact_grad) {
  const auto& rule = triangle_rule_mini();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    const Point gh = grad_p1(mesh, nodal, t);
    for (int q = 0; q < rule.size(); ++q) {
      sum += 2.0 * g.area * rule.weights[q] * (gh - exact_grad(g.map(rule.points[q]))).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double l2_error_mini(const TriMesh& mesh, const Vector& velocity, const VectorFunction& exact) {
  check_velocity_size(mesh, velocity);
  const auto& rule = triangle_rule_mini();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    for (int q = 0; q < rule.size(); ++q) {
      const Point e = eval_mini(mesh, velocity, t, rule.points[q]) - exact(g.map(rule.points[q]));
      sum += 2.0 * g.area * rule.weights[q] * e.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double h1_error_mini(const TriMesh& mesh, const Vector& velocity,
                     const std::function<Eigen::Matrix2d(const Point&)>& exact_grad) {
  check_velocity_size(mesh, velocity);
  const auto& rule = triangle_rule_mini();
  double sum = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = element_geometry(mesh, t);
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Matrix2d e =
          grad_mini(mesh, velocity, t, rule.points[q]) - exact_grad(g.map(rule.points[q]));
      sum += 2.0 * g.area * rule.weights[q] * e.squaredNorm();
    }
  }
  return std::sqrt(sum);
}

}  // namespace sirpns
