#pragma once

#include "sirpns/fem.hpp"
#include "sirpns/mesh.hpp"
#include "sirpns/model.hpp"
#include "sirpns/sparse.hpp"

#include <memory>
#include <vector>

namespace sirpns {

/// Mesh, dof layouts and every operator that does not depend on the solution.
/// Built once per mesh and shared (read-only) by steppers, monitors and studies.
struct Discretization {
  explicit Discretization(TriMesh m);

  TriMesh mesh;
  DofLayout scalar;    // C, S, I, R
  DofLayout velocity;  // MINI
  DofLayout pressure;

  SparseMatrix mass;              // P1 mass
  SparseMatrix stiffness;         // P1 Laplacian, unit coefficient
  Vector weights;                 // int phi_i
  SparseMatrix mini_mass;         // vector MINI mass
  SparseMatrix mini_stiffness;    // vector MINI Laplacian, unit coefficient
  SparseMatrix mini_block_mass;   // mass of one MINI component
  SparseMatrix divergence;        // B: pressure rows x velocity columns

  std::vector<int> boundary_vertices;
  std::vector<int> velocity_boundary_dofs;
  double area = 0.0;
};

std::shared_ptr<const Discretization> make_discretization(TriMesh mesh);

/// Coefficient vectors of all unknowns at one time level.
struct State {
  double t = 0.0;
  Vector U;  // MINI layout
  Vector p;
  Vector C, S, I, R;

  bool all_finite() const;
};

State zero_state(const Discretization& disc, double t = 0.0);

/// Interpolates the initial data. C is set to zero on boundary vertices so the
/// state satisfies the homogeneous Dirichlet condition from the first step.
State initial_state(const InitialData& data, const Discretization& disc);

/// Reflection (x, y) -> (x1 + y0 - y, y1 + x0 - x) about the anti-diagonal of the
/// bounding box, as a vertex permutation. Throws if the mesh is not symmetric.
std::vector<int> antidiagonal_vertex_map(const TriMesh& mesh);

}  // namespace sirpns
