#pragma once

#include "sirpns/discretization.hpp"
#include "sirpns/model.hpp"
#include "sirpns/monitor.hpp"

#include <algorithm>
#include <iosfwd>
#include <string>
#include <vector>

namespace sirpns {

struct OdeState {
  double t = 0.0;
  double S = 0.0, I = 0.0, R = 0.0;
};

/// Right-hand side of the spatially homogeneous SIR system with constant beta(0).
OdeState sir_ode_rhs(const ModelParams& params, const OdeState& y);

/// Classical RK4 from y0 to T with step dt_ode. Every record_every-th state is kept,
/// plus the initial one. Throws std::invalid_argument unless beta is constant and dt_ode > 0.
std::vector<OdeState> sir_ode_oracle(const ModelParams& params, const OdeState& y0, double T,
                                     double dt_ode, int record_every = 1);

/// Spatial means of S, I, R from monitor rows.
std::vector<OdeState> mean_trajectory(const std::vector<MonitorRecord>& monitors, double area);

struct Deviation {
  double S = 0.0, I = 0.0, R = 0.0;
  double max() const { return std::max(S, std::max(I, R)); }
};

/// Max over times of |pde - ode| / max(ode, 1e-12), per compartment. The two
/// trajectories must share their time grid.
Deviation compare_pde_to_ode(const std::vector<OdeState>& pde, const std::vector<OdeState>& ode);

/// Runs the PDE from uniform S0 = 0.9, I0 = 0.1, R0 = C0 = 0 with U = 0, alpha = 0 and
/// constant beta on an n x n mesh, and compares its spatial means with RK4 at dt_ode
/// sampled on the PDE time grid. dt must be a multiple of dt_ode.
Deviation ode_equivalence(const ModelParams& params, int n, double dt, double T, double dt_ode = 1e-3);

/// Errors in one or more norms over a refinement sequence.
struct ConvergenceTable {
  std::vector<std::string> norms;
  std::vector<double> h;
  std::vector<std::vector<double>> errors;  // errors[level][norm]

  void add_level(double h_level, std::vector<double> level_errors);
  /// log2(e(h)/e(h/2)) between levels level-1 and level; NaN for the first level.
  double rate(int level, int norm) const;
  double min_rate(int norm) const;
  int norm_index(const std::string& name) const;

  void print(std::ostream& out) const;
  void write_csv(std::ostream& out) const;
};

/// u_t + U . grad u - D lap u + lambda u = f on the unit square, u = 0 on the boundary.
struct ScalarMmsProblem {
  double D = 0.1;
  double lambda = 0.4;
  Point U = Point::Zero();
  bool steady = false;
  bool zero = false;  // exact solution identically zero
  double T = 0.2;
  /// dt = dt_scale * h^2 on each mesh.
  double dt_scale = 1.0;
};

/// Uses u = exp(-t) sin(pi x) sin(pi y) (or its t = 0 profile when steady). Columns: L2, H1.
ConvergenceTable mms_scalar_study(const ScalarMmsProblem& problem, const std::vector<int>& meshes);

/// u = (sin^2(pi x) sin(2 pi y), -sin^2(pi y) sin(2 pi x)) / 2, the initial vortex written
/// about the origin, with p = cos(pi x) cos(pi y). Divergence free, zero trace, zero-mean p.
struct VortexFlow {
  double amp = 1.0;

  Point u(const Point& x) const;
  /// Row c is grad u_c.
  Eigen::Matrix2d grad(const Point& x) const;
  Point laplacian(const Point& x) const;
  double p(const Point& x) const;
  Point grad_p(const Point& x) const;
  /// -div(nu grad u) + grad p = -nu lap u - (grad u) grad nu + grad p.
  Point forcing(const Point& x, double nu, const Point& grad_nu) const;
};

struct StokesMmsProblem {
  ScalarFunction nu = [](const Point&) { return 1.0; };
  VectorFunction grad_nu = [](const Point&) { return Point(0.0, 0.0); };
  bool zero = false;  // exact solution and forcing identically zero
};

/// Steady Stokes -div(nu grad u) + grad p = f, div u = 0, u = 0 on the boundary, with
/// the vortex velocity and p = cos(pi x) cos(pi y). Columns: u_L2, u_H1, p_L2.
ConvergenceTable mms_stokes_study(const StokesMmsProblem& problem, const std::vector<int>& meshes);

struct BalanceDefect {
  double max_relative = 0.0;
  int worst_step = -1;
};

/// |N^{n+1} - N^n - dt (Lambda |Omega| - eta N^{n+1})| / N^n over consecutive monitor rows.
BalanceDefect population_balance(const std::vector<MonitorRecord>& monitors,
                                 const ModelParams& params, double dt, double area);

}  // namespace sirpns
