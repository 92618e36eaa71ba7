#include "sirpns/discretization.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace sirpns {

Discretization::Discretization(TriMesh m)
    : mesh(std::move(m)),
      scalar(DofKind::P1Scalar, mesh),
      velocity(DofKind::MiniVelocity, mesh),
      pressure(DofKind::P1Pressure, mesh) {
  mass = assemble_mass_p1(mesh);
  stiffness = assemble_stiffness_p1(mesh, 1.0);
  weights = p1_integration_weights(mesh);
  mini_mass = assemble_mini_mass(mesh);
  mini_stiffness = assemble_mini_stiffness(mesh, constant_field(1.0));
  const int block = velocity.block_size();
  mini_block_mass = mini_mass.topLeftCorner(block, block);
  divergence = assemble_divergence_block(mesh);

  for (int v : boundary_vertex_set(mesh)) {
    boundary_vertices.push_back(v);
    velocity_boundary_dofs.push_back(velocity.vertex_dof(v, 0));
    velocity_boundary_dofs.push_back(velocity.vertex_dof(v, 1));
  }
  area = mesh.total_area();
}

std::shared_ptr<const Discretization> make_discretization(TriMesh mesh) {
  return std::make_shared<const Discretization>(std::move(mesh));
}

bool State::all_finite() const {
  return U.allFinite() && p.allFinite() && C.allFinite() && S.allFinite() && I.allFinite() &&
         R.allFinite();
}

State zero_state(const Discretization& disc, double t) {
  State s;
  s.t = t;
  s.U = Vector::Zero(disc.velocity.size());
  s.p = Vector::Zero(disc.pressure.size());
  s.C = Vector::Zero(disc.scalar.size());
  s.S = s.C;
  s.I = s.C;
  s.R = s.C;
  return s;
}

State initial_state(const InitialData& data, const Discretization& disc) {
  State s = zero_state(disc);
  if (data.U0) s.U = interpolate(disc.mesh, disc.velocity, data.U0);
  if (data.C0) s.C = interpolate(disc.mesh, disc.scalar, data.C0);
  if (data.S0) s.S = interpolate(disc.mesh, disc.scalar, data.S0);
  if (data.I0) s.I = interpolate(disc.mesh, disc.scalar, data.I0);
  if (data.R0) s.R = interpolate(disc.mesh, disc.scalar, data.R0);
  for (int v : disc.boundary_vertices) s.C[v] = 0.0;
  for (int d : disc.velocity_boundary_dofs) s.U[d] = 0.0;
  return s;
}

std::vector<int> antidiagonal_vertex_map(const TriMesh& mesh) {
  const auto [lo, hi] = mesh.bounds();
  const double scale = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const auto key = [&](const Point& p) {
    return std::make_pair(std::llround((p.x() - lo.x()) / scale * 1e9),
                          std::llround((p.y() - lo.y()) / scale * 1e9));
  };
  std::map<std::pair<long long, long long>, int> index;
  for (int v = 0; v < mesh.num_vertices(); ++v) index[key(mesh.vertex(v))] = v;

  std::vector<int> map(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& p = mesh.vertex(v);
    const Point image(hi.x() + lo.y() - p.y(), hi.y() + lo.x() - p.x());
    const auto it = index.find(key(image));
    if (it == index.end()) throw std::invalid_argument("mesh is not symmetric about its anti-diagonal");
    map[v] = it->second;
  }
  return map;
}

}  // namespace sirpns
