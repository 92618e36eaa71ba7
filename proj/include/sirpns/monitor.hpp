#pragma once

#include "sirpns/discretization.hpp"

namespace sirpns {

/// Diagnostics of one state: extrema, integrals, velocity norms and the discrete
/// continuity residual.
struct MonitorRecord {
  double t = 0.0;
  double min_S = 0.0, max_S = 0.0;
  double min_I = 0.0, max_I = 0.0;
  double min_R = 0.0, max_R = 0.0;
  double min_C = 0.0, max_C = 0.0;
  double int_S = 0.0, int_I = 0.0, int_R = 0.0, int_C = 0.0, int_N = 0.0;
  double l2_U = 0.0;
  double h1_U = 0.0;      // ||grad U||_L2
  double div_res = 0.0;   // ||B U||_inf
  double max_U = 0.0;     // max |coefficient| of U
  int picard_iters = 0;
};

MonitorRecord monitor_row(const State& state, const Discretization& disc, int picard_iters = 0);

/// Integral of a P1 field with the same weights used by assembly.
double integrate(const Discretization& disc, const Vector& nodal);
double l2_norm_p1(const Discretization& disc, const Vector& nodal);
double l2_norm_velocity(const Discretization& disc, const Vector& velocity);
double h1_seminorm_velocity(const Discretization& disc, const Vector& velocity);

/// Centroid (int x C, int y C) / int C of a nonnegative-mass P1 field.
Point center_of_mass(const Discretization& disc, const Vector& nodal);

}  // namespace sirpns
