#include "sirpns/monitor.hpp"

#include <cmath>

namespace sirpns {

double integrate(const Discretization& disc, const Vector& nodal) {
  return disc.weights.dot(nodal);
}

double l2_norm_p1(const Discretization& disc, const Vector& nodal) {
  return std::sqrt(std::max(0.0, nodal.dot(disc.mass * nodal)));
}

double l2_norm_velocity(const Discretization& disc, const Vector& velocity) {
  return std::sqrt(std::max(0.0, velocity.dot(disc.mini_mass * velocity)));
}

double h1_seminorm_velocity(const Discretization& disc, const Vector& velocity) {
  return std::sqrt(std::max(0.0, velocity.dot(disc.mini_stiffness * velocity)));
}

Point center_of_mass(const Discretization& disc, const Vector& nodal) {
  // int x phi_i phi_j is exact with the P1 mass applied to the nodal coordinates.
  Vector xs(disc.mesh.num_vertices()), ys(disc.mesh.num_vertices());
  for (int v = 0; v < disc.mesh.num_vertices(); ++v) {
    xs[v] = disc.mesh.vertex(v).x();
    ys[v] = disc.mesh.vertex(v).y();
  }
  const Vector mc = disc.mass * nodal;
  const double total = disc.weights.dot(nodal);
  return Point(xs.dot(mc), ys.dot(mc)) / total;
}

MonitorRecord monitor_row(const State& s, const Discretization& disc, int picard_iters) {
  MonitorRecord r;
  r.t = s.t;
  r.min_S = s.S.minCoeff();
  r.max_S = s.S.maxCoeff();
  r.min_I = s.I.minCoeff();
  r.max_I = s.I.maxCoeff();
  r.min_R = s.R.minCoeff();
  r.max_R = s.R.maxCoeff();
  r.min_C = s.C.minCoeff();
  r.max_C = s.C.maxCoeff();
  r.int_S = integrate(disc, s.S);
  r.int_I = integrate(disc, s.I);
  r.int_R = integrate(disc, s.R);
  r.int_C = integrate(disc, s.C);
  r.int_N = integrate(disc, s.S + s.I + s.R);
  r.l2_U = l2_norm_velocity(disc, s.U);
  r.h1_U = h1_seminorm_velocity(disc, s.U);
  r.div_res = (disc.divergence * s.U).lpNorm<Eigen::Infinity>();
  r.max_U = s.U.lpNorm<Eigen::Infinity>();
  r.picard_iters = picard_iters;
  return r;
}

}  // namespace sirpns
