#include "sirpns/verify.hpp"

#include "sirpns/timestepper.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace sirpns {

using std::numbers::pi;

OdeState sir_ode_rhs(const ModelParams& p, const OdeState& y) {
  const double b = p.beta(0.0);
  const double n = safe_population(y.S, y.I, y.R, p.n_floor);
  const double incidence = b * y.S * y.I / n;
  OdeState d;
  d.S = p.Lambda - incidence - p.eta * y.S;
  d.I = incidence - (p.gamma + p.eta) * y.I;
  d.R = p.gamma * y.I - p.eta * y.R;
  return d;
}

std::vector<OdeState> sir_ode_oracle(const ModelParams& params, const OdeState& y0, double T,
                                     double dt_ode, int record_every) {
  if (params.beta.kind != CoefficientFn::Kind::Constant) {
    throw std::invalid_argument("ODE oracle needs a constant transmission rate");
  }
  if (!(dt_ode > 0.0)) throw std::invalid_argument("dt_ode must be positive");
  if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");

  const auto axpy = [](const OdeState& y, double h, const OdeState& k) {
    return OdeState{y.t + h, y.S + h * k.S, y.I + h * k.I, y.R + h * k.R};
  };
  const int steps = step_count(y0.t, T, dt_ode);
  std::vector<OdeState> out{y0};
  OdeState y = y0;
  for (int n = 1; n <= steps; ++n) {
    const double h = dt_ode;
    const OdeState k1 = sir_ode_rhs(params, y);
    const OdeState k2 = sir_ode_rhs(params, axpy(y, 0.5 * h, k1));
    const OdeState k3 = sir_ode_rhs(params, axpy(y, 0.5 * h, k2));
    const OdeState k4 = sir_ode_rhs(params, axpy(y, h, k3));
    y.S += h / 6.0 * (k1.S + 2.0 * k2.S + 2.0 * k3.S + k4.S);
    y.I += h / 6.0 * (k1.I + 2.0 * k2.I + 2.0 * k3.I + k4.I);
    y.R += h / 6.0 * (k1.R + 2.0 * k2.R + 2.0 * k3.R + k4.R);
    y.t = y0.t + n * h;
    if (n % record_every == 0) out.push_back(y);
  }
  return out;
}

std::vector<OdeState> mean_trajectory(const std::vector<MonitorRecord>& monitors, double area) {
  std::vector<OdeState> out;
  out.reserve(monitors.size());
  for (const auto& m : monitors) out.push_back({m.t, m.int_S / area, m.int_I / area, m.int_R / area});
  return out;
}

Deviation compare_pde_to_ode(const std::vector<OdeState>& pde, const std::vector<OdeState>& ode) {
  if (pde.size() != ode.size()) {
    throw std::invalid_argument("time grids differ: " + std::to_string(pde.size()) + " vs " +
                                std::to_string(ode.size()) + " samples");
  }
  Deviation d;
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(b, 1e-12); };
  for (std::size_t k = 0; k < pde.size(); ++k) {
    if (std::abs(pde[k].t - ode[k].t) > 1e-9 * std::max(1.0, std::abs(ode[k].t))) {
      throw std::invalid_argument("time grids differ at sample " + std::to_string(k));
    }
    d.S = std::max(d.S, rel(pde[k].S, ode[k].S));
    d.I = std::max(d.I, rel(pde[k].I, ode[k].I));
    d.R = std::max(d.R, rel(pde[k].R, ode[k].R));
  }
  return d;
}

Deviation ode_equivalence(const ModelParams& params, int n, double dt, double T, double dt_ode) {
  const double ratio = dt / dt_ode;
  const int stride = static_cast<int>(std::lround(ratio));
  if (stride < 1 || std::abs(ratio - stride) > 1e-9 * ratio) {
    throw std::invalid_argument("dt must be a multiple of dt_ode");
  }
  ModelParams p = params;
  p.alpha = 0.0;
  p.beta = CoefficientFn::constant(p.beta(0.0));
  const auto disc = make_discretization(build_unit_square_mesh(n, n));
  SchemeOptions options;
  options.fluid = false;
  const TimeStepper stepper(disc, p, StepControls{dt, PicardMode::ToConvergence, 1e-8, 50}, options);
  const OdeState y0{0.0, 0.9, 0.1, 0.0};
  const State initial = initial_state(uniform_initial_data(y0.S, y0.I, y0.R, 0.0), *disc);
  const auto result = run(stepper, initial, T);
  return compare_pde_to_ode(mean_trajectory(result.monitors, disc->area),
                            sir_ode_oracle(p, y0, result.monitors.back().t, dt_ode, stride));
}

void ConvergenceTable::add_level(double h_level, std::vector<double> level_errors) {
  if (level_errors.size() != norms.size()) throw std::invalid_argument("one error per norm expected");
  if (!h.empty() && !(h_level < h.back())) throw std::invalid_argument("h must decrease");
  h.push_back(h_level);
  errors.push_back(std::move(level_errors));
}

double ConvergenceTable::rate(int level, int norm) const {
  if (level < 1 || level >= static_cast<int>(h.size())) return std::numeric_limits<double>::quiet_NaN();
  return std::log(errors[level - 1][norm] / errors[level][norm]) / std::log(h[level - 1] / h[level]);
}

double ConvergenceTable::min_rate(int norm) const {
  double r = std::numeric_limits<double>::infinity();
  for (int l = 1; l < static_cast<int>(h.size()); ++l) r = std::min(r, rate(l, norm));
  return r;
}

int ConvergenceTable::norm_index(const std::string& name) const {
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (norms[k] == name) return static_cast<int>(k);
  }
  throw std::out_of_range("no column " + name);
}

void ConvergenceTable::print(std::ostream& out) const {
  const auto flags = out.flags();
  out << std::setw(12) << "h";
  for (const auto& n : norms) out << std::setw(14) << n << std::setw(8) << "rate";
  out << '\n';
  for (std::size_t l = 0; l < h.size(); ++l) {
    out << std::setw(12) << std::setprecision(5) << std::defaultfloat << h[l];
    for (std::size_t k = 0; k < norms.size(); ++k) {
      out << std::setw(14) << std::setprecision(5) << std::scientific << errors[l][k];
      if (l == 0) {
        out << std::setw(8) << "-";
      } else {
        out << std::setw(8) << std::setprecision(3) << std::fixed << rate(static_cast<int>(l), k);
      }
    }
    out << '\n';
  }
  out.flags(flags);
}

void ConvergenceTable::write_csv(std::ostream& out) const {
  out << "h";
  for (const auto& n : norms) out << ',' << n << ',' << n << "_rate";
  out << '\n';
  const auto prec = out.precision(17);
  for (std::size_t l = 0; l < h.size(); ++l) {
    out << h[l];
    for (std::size_t k = 0; k < norms.size(); ++k) {
      out << ',' << errors[l][k] << ',';
      if (l > 0) out << rate(static_cast<int>(l), k);
    }
    out << '\n';
  }
  out.precision(prec);
}

ConvergenceTable mms_scalar_study(const ScalarMmsProblem& pb, const std::vector<int>& meshes) {
  const double amp = pb.zero ? 0.0 : 1.0;
  const auto exact = [&](const Point& x, double t) {
    return amp * std::exp(-t) * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  const auto exact_grad = [&](const Point& x, double t) {
    return Point(amp * std::exp(-t) * pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                 amp * std::exp(-t) * pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  // -lap u = 2 pi^2 u; d/dt contributes -u unless steady.
  const double reaction = 2.0 * pi * pi * pb.D + pb.lambda - (pb.steady ? 0.0 : 1.0);
  const auto forcing = [&](const Point& x, double t) {
    return reaction * exact(x, t) + pb.U.dot(exact_grad(x, t));
  };

  ConvergenceTable table;
  table.norms = {"L2", "H1"};
  for (int n : meshes) {
    const auto disc = make_discretization(build_unit_square_mesh(n, n));
    const auto& mesh = disc->mesh;
    const double h = 1.0 / n;
    const Vector velocity = interpolate(mesh, disc->velocity, [&](const Point&) { return pb.U; });
    const bool advect = !pb.U.isZero(0.0);
    const std::vector<double> zeros(disc->boundary_vertices.size(), 0.0);

    const double dt = pb.dt_scale * h * h;
    const int steps = pb.steady ? 1 : step_count(0.0, pb.T, dt);
    const double inv_dt = pb.steady ? 0.0 : 1.0 / dt;
    SparseMatrix a = inv_dt * disc->mass + pb.D * disc->stiffness + pb.lambda * disc->mass;
    Vector scratch = Vector::Zero(disc->scalar.size());
    apply_dirichlet(a, scratch, disc->boundary_vertices, zeros);
    const DirectSolver solver(a);

    Vector u = interpolate(mesh, disc->scalar, [&](const Point& x) { return exact(x, 0.0); });
    double t = 0.0;
    for (int s = 1; s <= steps; ++s) {
      const double t_next = pb.steady ? 0.0 : s * dt;
      const Vector base =
          inv_dt * (disc->mass * u) +
          assemble_load_p1(mesh, [&](const QuadPoint& q) { return forcing(q.x, t_next); });
      // Advection lagged inside a fixed-point loop, as in the coupled scheme.
      Vector iterate = u;
      for (int k = 0; k < 200; ++k) {
        Vector rhs = base;
        if (advect) rhs -= assemble_scalar_convection(mesh, velocity, iterate);
        for (int v : disc->boundary_vertices) rhs[v] = 0.0;
        Vector next = solver.solve(rhs);
        const double change = (next - iterate).lpNorm<Eigen::Infinity>();
        const double scale = std::max(next.lpNorm<Eigen::Infinity>(), 1e-300);
        iterate = std::move(next);
        if (!advect || change <= 1e-13 * scale) break;
      }
      u = std::move(iterate);
      t = t_next;
    }
    table.add_level(h, {l2_error_p1(mesh, u, [&](const Point& x) { return exact(x, t); }),
                        h1_error_p1(mesh, u, [&](const Point& x) { return exact_grad(x, t); })});
  }
  return table;
}

Point VortexFlow::u(const Point& x) const {
  const double a = x.x(), b = x.y();
  return amp * Point(0.5 * std::pow(std::sin(pi * a), 2) * std::sin(2 * pi * b),
                     -0.5 * std::pow(std::sin(pi * b), 2) * std::sin(2 * pi * a));
}

Eigen::Matrix2d VortexFlow::grad(const Point& x) const {
  const double a = x.x(), b = x.y();
  Eigen::Matrix2d g;
  g(0, 0) = 0.5 * pi * std::sin(2 * pi * a) * std::sin(2 * pi * b);
  g(0, 1) = pi * std::pow(std::sin(pi * a), 2) * std::cos(2 * pi * b);
  g(1, 0) = -pi * std::pow(std::sin(pi * b), 2) * std::cos(2 * pi * a);
  g(1, 1) = -0.5 * pi * std::sin(2 * pi * a) * std::sin(2 * pi * b);
  return amp * g;
}

Point VortexFlow::laplacian(const Point& x) const {
  const double a = x.x(), b = x.y();
  return amp * pi * pi *
         Point(std::sin(2 * pi * b) * (2 * std::cos(2 * pi * a) - 1),
               -std::sin(2 * pi * a) * (2 * std::cos(2 * pi * b) - 1));
}

double VortexFlow::p(const Point& x) const { return amp * std::cos(pi * x.x()) * std::cos(pi * x.y()); }

Point VortexFlow::grad_p(const Point& x) const {
  return amp * Point(-pi * std::sin(pi * x.x()) * std::cos(pi * x.y()),
                     -pi * std::cos(pi * x.x()) * std::sin(pi * x.y()));
}

Point VortexFlow::forcing(const Point& x, double nu, const Point& grad_nu) const {
  return -nu * laplacian(x) - grad(x) * grad_nu + grad_p(x);
}

ConvergenceTable mms_stokes_study(const StokesMmsProblem& pb, const std::vector<int>& meshes) {
  const VortexFlow ex{pb.zero ? 0.0 : 1.0};
  const VectorFunction forcing = [&](const Point& x) { return ex.forcing(x, pb.nu(x), pb.grad_nu(x)); };
  ConvergenceTable table;
  table.norms = {"u_L2", "u_H1", "p_L2"};
  for (int n : meshes) {
    const auto disc = make_discretization(build_unit_square_mesh(n, n));
    const auto& mesh = disc->mesh;
    const SparseMatrix a =
        assemble_mini_stiffness(mesh, [&](const QuadPoint& q) { return pb.nu(q.x); });
    const auto sol = solve_saddle_point(*disc, a, assemble_mini_load(mesh, forcing));
    table.add_level(
        1.0 / n, {l2_error_mini(mesh, sol.velocity, [&](const Point& x) { return ex.u(x); }),
                  h1_error_mini(mesh, sol.velocity, [&](const Point& x) { return ex.grad(x); }),
                  l2_error_p1(mesh, sol.pressure, [&](const Point& x) { return ex.p(x); })});
  }
  return table;
}

BalanceDefect population_balance(const std::vector<MonitorRecord>& m, const ModelParams& p,
                                 double dt, double area) {
  BalanceDefect out;
  for (std::size_t k = 1; k < m.size(); ++k) {
    const double n0 = m[k - 1].int_N, n1 = m[k].int_N;
    const double defect = std::abs(n1 - n0 - dt * (p.Lambda * area - p.eta * n1));
    const double rel = defect / std::max(std::abs(n0), 1e-300);
    if (rel > out.max_relative || out.worst_step < 0) {
      out.max_relative = std::max(out.max_relative, rel);
      out.worst_step = static_cast<int>(k);
    }
  }
  return out;
}

}  // namespace sirpns
